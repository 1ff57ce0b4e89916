"""Extremal cells: one zero-to-zero interval of a generator."""

from dataclasses import dataclass, asdict
import math


@dataclass(frozen=True)
class ExtremalCell:
    """``[gamma_lo, gamma_hi]`` between consecutive zeros with interior extremum ``t0``."""

    gamma_lo: float
    gamma_hi: float
    t0: float
    sign: int
    g_at_t0: float
    index: int = -1

    @property
    def width(self):
        return self.gamma_hi - self.gamma_lo

    @property
    def width_bound(self):
        """gamma' / ln gamma', the largest admissible width."""
        if self.gamma_lo <= math.e:
            return 0.0
        return self.gamma_lo / math.log(self.gamma_lo)

    @property
    def admissible(self):
        return 0.0 < self.width <= self.width_bound

    def to_dict(self):
        d = asdict(self)
        d["width"] = self.width
        d["admissible"] = self.admissible
        return d
