"""Exception hierarchy shared by every module."""


class LadderLabError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(LadderLabError, ValueError):
    """Argument outside the mathematical domain of a function."""


class QuadratureError(LadderLabError):
    """Adaptive quadrature exhausted its subdivision budget."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class BracketError(LadderLabError):
    """A bracketing root-finder was called without a sign change."""


class ConvergenceError(LadderLabError):
    """An iteration hit its budget; ``last`` carries the final iterate."""

    def __init__(self, message, last=None, history=None):
        super().__init__(message)
        self.last = last
        self.history = list(history) if history is not None else []


class IsolationError(LadderLabError):
    """Zero/extremum isolation failed on one or more intervals."""

    def __init__(self, message, intervals=()):
        super().__init__(message)
        self.intervals = list(intervals)


class AdmissibilityError(LadderLabError):
    """Cell violates the width hypothesis and no override was given."""


class DeformationError(LadderLabError):
    """Deformation broke sign-fixedness or the single-extremum structure."""

    def __init__(self, message, scan_point=None):
        super().__init__(message)
        self.scan_point = scan_point


class TableError(LadderLabError):
    """Persisted table missing, corrupt, or queried out of range."""


class MeanValueError(LadderLabError):
    """No mean-value point found; carries the scanned range of the weight."""

    def __init__(self, message, scan_min=None, scan_max=None):
        super().__init__(message)
        self.scan_min = scan_min
        self.scan_max = scan_max
