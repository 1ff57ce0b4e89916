"""Numerical execution of the weighted mean-value theorem on ladder cells.

For a cell ``[g1, g2]`` of a generator G with extremum ``t0`` and the
normalized integrand ``H(x) = G(x) / G(t0)``, the chain is

    numerator(alpha) = int_{hat g1}^{hat g2} |H(phi1 t)|^alpha |H'(phi1 t)| w(t) dt
    omega(alpha)     = numerator / (ln g1 * 2 / (alpha + 1))
    alpha*           = 2 omega(alpha*) ln g1 - 1
    I                = int |H|^alpha* |H'| dt,   w(t_H) = 1 / I

with ``w = |zeta(1/2 + it)|^2`` unless a different weight is injected.
All integrals are taken of H rather than G: the results are homogeneous in
G(t0) and the normalization keeps large exponents away from underflow.
"""

from dataclasses import dataclass, field, asdict
import math

import numpy as np

from .cells import ExtremalCell
from .errors import AdmissibilityError, ConvergenceError, DomainError, MeanValueError, QuadratureError
from .ladder import phi1, phi1_inverse
from .numerics import adaptive_integrate, find_root_bracketed, fixed_point
from .zeta_core import zeta_mod_sq

QUAD_TOL = 1e-10
# small-peak cells amplify rounding in G and phi_1 past QUAD_TOL
QUAD_TOL_FLOOR = 1e-8
ROUND_TRIP_TOL = 1e-7
T_H_SCAN = 2048
DEFAULT_DELTA_FRACTIONS = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)


def _integrate(f, a, b, hints=(), tol=QUAD_TOL, abs_floor=1e-14):
    res = adaptive_integrate(f, a, b, tol=tol, singular_hints=hints, abs_floor=abs_floor)
    if not res.converged and tol < QUAD_TOL_FLOOR:
        res = adaptive_integrate(f, a, b, tol=QUAD_TOL_FLOOR, singular_hints=hints, abs_floor=abs_floor)
    if not res.converged:
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge", result=res)
    return res.value


@dataclass(frozen=True)
class HatCell:
    cell: ExtremalCell
    gamma_lo_hat: float
    gamma_hi_hat: float
    t0_hat: float

    @property
    def width(self):
        return self.gamma_hi_hat - self.gamma_lo_hat

    @property
    def half_width(self):
        return 0.5 * self.width

    def to_dict(self):
        return {
            "gamma_lo_hat": self.gamma_lo_hat,
            "gamma_hi_hat": self.gamma_hi_hat,
            "t0_hat": self.t0_hat,
        }


def hat_cell(table, cell):
    """Preimages of the cell endpoints and extremum under phi_1."""
    pts = np.array([cell.gamma_lo, cell.t0, cell.gamma_hi])
    if pts[0] < table.x_lo or pts[2] > table.x_hi:
        raise DomainError(
            f"cell [{cell.gamma_lo}, {cell.gamma_hi}] outside ladder image [{table.x_lo}, {table.x_hi}]"
        )
    hat = phi1_inverse(table, pts)
    back = phi1(table, hat)
    err = np.abs(back - pts).max()
    if err > ROUND_TRIP_TOL:
        raise ConvergenceError(f"hat-cell round trip error {err:.3g}", last=hat)
    if not hat[0] < hat[1] < hat[2]:
        raise ConvergenceError("hat-cell points out of order", last=hat)
    return HatCell(cell, float(hat[0]), float(hat[2]), float(hat[1]))


class CellProfile:
    """Memoized t-space samples of one hat-cell: x = phi_1(t), H(x), H'(x), w(t).

    The fixed-point loop integrates the same cell many times with slowly
    changing exponents; the quadrature revisits most nodes, so each node is
    evaluated once.
    """

    def __init__(self, table, G, cell, weight=zeta_mod_sq, hat=None):
        self.table = table
        self.G = G
        self.cell = cell
        self.weight = weight
        self.hat = hat if hat is not None else hat_cell(table, cell)
        self.g0 = float(cell.g_at_t0)
        if self.g0 == 0.0:
            raise DomainError("G(t0) = 0: cell has no extremum value")
        self._memo = {}

    def sample(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        missing = np.array([v for v in dict.fromkeys(flat.tolist()) if v not in self._memo])
        if missing.size:
            x = phi1(self.table, missing)
            h = np.abs(np.asarray(self.G.value(x), dtype=float) / self.g0)
            dh = np.abs(np.asarray(self.G.derivative(x), dtype=float) / self.g0)
            w = np.broadcast_to(np.asarray(self.weight(missing), dtype=float), missing.shape)
            for row in zip(missing.tolist(), h, dh, w):
                self._memo[row[0]] = row[1:]
        out = np.array([self._memo[v] for v in flat.tolist()]).reshape(t.shape + (3,))
        return out[..., 0], out[..., 1], out[..., 2]

    def integrand(self, alpha, weighted=True):
        def f(t):
            h, dh, w = self.sample(t)
            v = h**alpha * dh
            return v * w if weighted else v

        return f

    def integral(self, alpha, weighted=True, a=None, b=None):
        hat = self.hat
        a = hat.gamma_lo_hat if a is None else a
        b = hat.gamma_hi_hat if b is None else b
        return _integrate(self.integrand(alpha, weighted), a, b, hints=(hat.t0_hat,))


def _profile(table, G, cell, weight, profile):
    if profile is not None:
        return profile
    return CellProfile(table, G, cell, weight)


def _check_admissible(cell, allow_inadmissible):
    if not cell.admissible and not allow_inadmissible:
        raise AdmissibilityError(
            f"cell [{cell.gamma_lo}, {cell.gamma_hi}] has width {cell.width:.6g} "
            f"above gamma'/ln gamma' = {cell.width_bound:.6g}; pass the override to use it"
        )


# ---------------------------------------------------------------------------
# exact identity


def exact_moment_identity(G, cell, alpha, tol=QUAD_TOL):
    """int |G|^alpha |G'| over the cell against 2/(alpha+1) |G(t0)|^{alpha+1}."""
    alpha = float(alpha)
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    g0 = abs(float(cell.g_at_t0))
    scale = g0 ** (alpha + 1.0)

    def f(x):
        return np.abs(G.value(x) / g0) ** alpha * np.abs(G.derivative(x) / g0)

    lhs = scale * _integrate(f, cell.gamma_lo, cell.gamma_hi, hints=(cell.t0,), tol=tol)
    rhs = 2.0 / (alpha + 1.0) * scale
    return lhs, rhs, abs(lhs - rhs) / rhs


# ---------------------------------------------------------------------------
# omega and the exponent


@dataclass
class OmegaEstimate:
    omega: float
    alpha_used: float
    numerator: float
    denominator: float
    cell: ExtremalCell

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if k != "cell"}


def omega_estimate(table, G, cell, alpha, weight=zeta_mod_sq, allow_inadmissible=False, profile=None):
    """omega(alpha) from the t-space numerator and the closed-form denominator."""
    _check_admissible(cell, allow_inadmissible)
    alpha = float(alpha)
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    prof = _profile(table, G, cell, weight, profile)
    scale = abs(prof.g0) ** (alpha + 1.0)
    numerator = prof.integral(alpha) * scale
    denominator = math.log(cell.gamma_lo) * 2.0 / (alpha + 1.0) * scale
    return OmegaEstimate(numerator / denominator, alpha, numerator, denominator, cell)


def numerator_x_space(table, G, cell, alpha):
    """The omega numerator after substituting x = phi_1(t).

    Since phi_1'(t) = w(t) / (ln phi_1 + 1 + c - ln 2 pi), the weight cancels
    and the integral runs over the cell itself.
    """
    g0 = abs(float(cell.g_at_t0))
    shift = table.config.shift

    def f(x):
        return np.abs(G.value(x) / g0) ** alpha * np.abs(G.derivative(x) / g0) * (np.log(x) + shift)

    return g0 ** (alpha + 1.0) * _integrate(f, cell.gamma_lo, cell.gamma_hi, hints=(cell.t0,))


@dataclass
class ExponentSolution:
    alpha_star: float
    omega_star: float
    iterations: int
    residual: float
    history: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def solve_exponent(
    table,
    G,
    cell,
    weight=zeta_mod_sq,
    damping=0.5,
    tol=1e-6,
    max_iter=50,
    allow_inadmissible=False,
    profile=None,
):
    """Damped fixed point of alpha = 2 omega(alpha) ln gamma' - 1 from the omega = 1 seed."""
    _check_admissible(cell, allow_inadmissible)
    prof = _profile(table, G, cell, weight, profile)
    log_g = math.log(cell.gamma_lo)
    alpha0 = 2.0 * log_g - 1.0
    if not alpha0 > 0:
        raise DomainError("gamma' too small for a positive exponent")

    def omega(alpha):
        return omega_estimate(table, G, cell, alpha, allow_inadmissible=True, profile=prof).omega

    def g(alpha):
        return 2.0 * omega(alpha) * log_g - 1.0

    res = fixed_point(g, alpha0, damping=damping, tol=tol, max_iter=max_iter)
    om = omega(res.x)
    residual = abs(res.x - (2.0 * om * log_g - 1.0))
    return ExponentSolution(res.x, om, res.iterations, residual, res.history)


# ---------------------------------------------------------------------------
# the transcendental integrals


def weighted_unit_integral(table, G, cell, exponent, weight=zeta_mod_sq, normalize=True, profile=None):
    """int |H|^alpha* |H'_phi1| w dt over the hat-cell; 1 by construction.

    With ``normalize=False`` the integrand uses G itself and the value scales
    by |G(t0)|^{alpha*+1}.
    """
    prof = _profile(table, G, cell, weight, profile)
    alpha = exponent.alpha_star
    v = prof.integral(alpha)
    return v if normalize else v * abs(prof.g0) ** (alpha + 1.0)


def transcendental_integral(table, G, cell, exponent, weight=zeta_mod_sq, profile=None):
    """I = int |H|^alpha* |H'_phi1| dt over the hat-cell, without the weight."""
    prof = _profile(table, G, cell, weight, profile)
    return prof.integral(exponent.alpha_star, weighted=False)


@dataclass
class MeanValuePoint:
    t_H: float
    residual: float
    roots: list
    scan_min: float
    scan_max: float

    def to_dict(self):
        return asdict(self)


def locate_t_H(table, G, cell, exponent, I=None, weight=zeta_mod_sq, scan_points=T_H_SCAN, profile=None):
    """Point of the hat-cell where w(t_H) = 1/I, nearest to hat t0.

    All sign-change roots of ``w - 1/I`` on the scan are refined and
    reported.  Scan points where ``w`` equals ``1/I`` to rounding count as
    roots themselves, which covers constant weights.
    """
    prof = _profile(table, G, cell, weight, profile)
    if I is None:
        I = transcendental_integral(table, G, cell, exponent, profile=prof)
    if not I > 0:
        raise DomainError("transcendental integral must be positive")
    target = 1.0 / I
    hat = prof.hat
    t = np.linspace(hat.gamma_lo_hat, hat.gamma_hi_hat, scan_points + 2)[1:-1]
    w = np.broadcast_to(np.asarray(weight(t), dtype=float), t.shape)
    d = w - target
    exact = np.abs(d) <= 1e-12 * target
    roots = [float(v) for v in t[exact]]

    def f(s):
        return float(np.asarray(weight(s), dtype=float)) - target

    for i in np.flatnonzero((d[:-1] * d[1:] < 0) & ~exact[:-1] & ~exact[1:]):
        roots.append(float(find_root_bracketed(f, t[i], t[i + 1], tol=1e-13 * t[i])))
    if not roots:
        raise MeanValueError(
            f"no mean-value point: 1/I = {target:.6g} outside scanned weight range "
            f"[{w.min():.6g}, {w.max():.6g}]",
            scan_min=float(w.min()),
            scan_max=float(w.max()),
        )
    roots.sort()
    t_H = min(roots, key=lambda r: abs(r - hat.t0_hat))
    residual = abs(float(np.asarray(weight(t_H), dtype=float)) * I - 1.0)
    return MeanValuePoint(t_H, residual, roots, float(w.min()), float(w.max()))


# ---------------------------------------------------------------------------
# concentration


@dataclass
class Concentration:
    alpha: float
    pairs: list
    total_mass: float
    peak_value: float

    def to_dict(self):
        return asdict(self)


def dirac_concentration(table, G, cell, alpha, deltas, weight=zeta_mod_sq, profile=None):
    """Fraction of the weighted mass |H|^alpha |H'| w dt within ``t0_hat +- delta``.

    ``alpha`` is a number or an ExponentSolution.  Masses are accumulated over
    nested annuli, so the fractions are nondecreasing in delta by
    construction.  ``peak_value`` is |H(phi_1(t0_hat))|^alpha.
    """
    if isinstance(alpha, ExponentSolution):
        alpha = alpha.alpha_star
    alpha = float(alpha)
    prof = _profile(table, G, cell, weight, profile)
    hat = prof.hat
    deltas = [float(d) for d in deltas]
    if any(not 0 < d <= hat.half_width * (1 + 1e-12) for d in deltas):
        raise DomainError("deltas must lie in (0, half-width of the hat-cell]")
    f = prof.integrand(alpha)
    a, b, c = hat.gamma_lo_hat, hat.gamma_hi_hat, hat.t0_hat
    total = prof.integral(alpha)
    order = np.argsort(deltas, kind="stable")
    mass = 0.0
    prev_lo = prev_hi = c
    fractions = {}
    for k in order:
        d = deltas[k]
        lo, hi = max(a, c - d), min(b, c + d)
        # annuli are judged against the total mass, not their own size
        if lo < prev_lo:
            mass += _integrate(f, lo, prev_lo, abs_floor=QUAD_TOL * total)
        if hi > prev_hi:
            mass += _integrate(f, prev_hi, hi, abs_floor=QUAD_TOL * total)
        prev_lo, prev_hi = min(lo, prev_lo), max(hi, prev_hi)
        fractions[k] = mass / total
    pairs = [(deltas[k], fractions[k]) for k in range(len(deltas))]
    peak = float(prof.sample(np.array([c]))[0][0] ** alpha)
    return Concentration(alpha, pairs, total, peak)


# ---------------------------------------------------------------------------
# full pipeline


@dataclass
class VerificationReport:
    generator: dict
    cell: ExtremalCell
    hat_cell: HatCell
    exponent: ExponentSolution
    I: float
    unit_check: float
    t_H: float
    t_H_residual: float
    t_H_roots: list
    scan_min: float
    scan_max: float
    concentration: list
    peak_value: float
    tolerance: float
    exponent_tolerance: float = 1e-5

    @property
    def gates(self):
        h = self.hat_cell
        return {
            "exponent_residual": self.exponent.residual <= self.exponent_tolerance,
            "unit_integral": abs(self.unit_check - 1.0) <= self.tolerance,
            "t_H_inside": h.gamma_lo_hat < self.t_H < h.gamma_hi_hat,
            "t_H_residual": self.t_H_residual <= self.tolerance,
            "mean_value_sandwich": self.scan_min <= 1.0 / self.I <= self.scan_max,
        }

    @property
    def passed(self):
        return all(self.gates.values())

    def to_dict(self):
        return {
            "generator": self.generator,
            "cell": self.cell.to_dict(),
            "hat_cell": self.hat_cell.to_dict(),
            "exponent": self.exponent.to_dict(),
            "omega": self.exponent.omega_star,
            "I": self.I,
            "unit_check": self.unit_check,
            "t_H": {
                "value": self.t_H,
                "residual": self.t_H_residual,
                "roots": self.t_H_roots,
                "scan_min": self.scan_min,
                "scan_max": self.scan_max,
            },
            "concentration": {
                "pairs": [list(p) for p in self.concentration],
                "peak_value": self.peak_value,
            },
            "gates": self.gates,
            "passed": self.passed,
        }


def verify_cell(
    table,
    G,
    cell,
    tolerance=1e-4,
    delta_fractions=DEFAULT_DELTA_FRACTIONS,
    weight=zeta_mod_sq,
    allow_inadmissible=False,
    profile=None,
):
    """hat_cell -> solve_exponent -> unit integral -> t_H -> concentration."""
    _check_admissible(cell, allow_inadmissible)
    prof = _profile(table, G, cell, weight, profile)
    exp = solve_exponent(table, G, cell, allow_inadmissible=True, profile=prof)
    unit = weighted_unit_integral(table, G, cell, exp, profile=prof)
    I = transcendental_integral(table, G, cell, exp, profile=prof)
    mv = locate_t_H(table, G, cell, exp, I=I, weight=weight, profile=prof)
    deltas = [f * prof.hat.half_width for f in delta_fractions]
    conc = dirac_concentration(table, G, cell, exp, deltas, profile=prof)
    return VerificationReport(
        G.to_dict(),
        cell,
        prof.hat,
        exp,
        I,
        unit,
        mv.t_H,
        mv.residual,
        mv.roots,
        mv.scan_min,
        mv.scan_max,
        conc.pairs,
        conc.peak_value,
        tolerance,
    )


def functional_F(table, spec, **kwargs):
    """F[H_T] = I for the deformed generator, with its full verification."""
    from .generators import make_deformed_generator

    D = make_deformed_generator(spec)
    report = verify_cell(table, D, D.cell_, **kwargs)
    return report.I, report
