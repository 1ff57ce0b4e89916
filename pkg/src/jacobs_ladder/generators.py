"""Generators G: C^1 functions whose zero-to-zero cells feed the theorem lab."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
import math
import threading

import numpy as np

from . import special_funcs as sf
from .cells import ExtremalCell
from .errors import DeformationError, DomainError
from .numerics import find_root_bracketed
from .zeta_core import build_zero_table, hardy_z, hardy_z_prime

SCAN_POINTS = 512


def _out(arr, scalar):
    return float(arr) if scalar else arr


class Generator(ABC):
    """``value``/``derivative`` accept scalars or arrays; ``cells`` lists the
    extremal cells lying inside a range."""

    label = "G"

    @abstractmethod
    def value(self, x): ...

    @abstractmethod
    def derivative(self, x): ...

    @abstractmethod
    def cells(self, lo, hi): ...

    def cell_near(self, target):
        """First cell with ``gamma_lo >= target``."""
        span = 16.0
        while span < 1e6:
            found = [c for c in self.cells(target, target + span) if c.gamma_lo >= target]
            if found:
                return found[0]
            span *= 4
        raise DomainError(f"{self.label}: no cell found above {target}")

    def to_dict(self):
        return {"label": self.label}


class _Jacobi(Generator):
    kind = None

    def __init__(self, k_sq):
        self.modulus = sf.EllipticModulus(float(k_sq))
        if self.modulus.k_sq == 0.0:
            raise DomainError("k_sq must lie in (0, 1)")
        self.k_sq = self.modulus.k_sq
        self.K = self.modulus.K
        self.label = f"{self.kind}(k2={self.k_sq:g})"

    def to_dict(self):
        return {"label": self.label, "family": self.kind, "k_sq": self.k_sq}

    def _index_range(self, lo, hi, first_zero):
        # cell l spans [(2l + first_zero) K, (2l + first_zero + 2) K]
        slack = 1e-12
        a = math.ceil((lo / self.K - first_zero) / 2 - slack)
        b = math.floor((hi / self.K - first_zero - 2) / 2 + slack)
        return range(max(a, 0), b + 1)


class SnGenerator(_Jacobi):
    kind = "sn"

    def value(self, x):
        return sf.jacobi_sncndn(x, self.k_sq)[0]

    def derivative(self, x):
        _, cn, dn = sf.jacobi_sncndn(x, self.k_sq)
        return cn * dn

    def cells(self, lo, hi):
        return sf.jacobi_cells_sn(self.k_sq, self._index_range(lo, hi, 0))

    def cell(self, index):
        return sf.jacobi_cells_sn(self.k_sq, [index])[0]


class CnGenerator(_Jacobi):
    kind = "cn"

    def value(self, x):
        return sf.jacobi_sncndn(x, self.k_sq)[1]

    def derivative(self, x):
        sn, _, dn = sf.jacobi_sncndn(x, self.k_sq)
        return -sn * dn

    def cells(self, lo, hi):
        return sf.jacobi_cells_cn(self.k_sq, self._index_range(lo, hi, 1))

    def cell(self, index):
        return sf.jacobi_cells_cn(self.k_sq, [index])[0]


def make_sn_generator(k_sq):
    return SnGenerator(k_sq)


def make_cn_generator(k_sq):
    return CnGenerator(k_sq)


class BesselGenerator(Generator):
    """G(x) = J_nu(x) / x^nu with G'(x) = -J_{nu+1}(x) / x^nu."""

    def __init__(self, nu):
        self.nu = sf.BesselOrder(float(nu)).nu
        self.label = f"bessel(nu={self.nu:g})"

    def to_dict(self):
        return {"label": self.label, "family": "bessel", "nu": self.nu}

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return _out(sf.bessel_j(self.nu, x) / x**self.nu, x.ndim == 0)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return _out(-sf.bessel_j(self.nu + 1.0, x) / x**self.nu, x.ndim == 0)

    def cells(self, lo, hi):
        return sf.bessel_ratio_cells(self.nu, max(lo, 1e-9), hi)

    def cell(self, index):
        return sf.bessel_cell(self.nu, index)


def make_bessel_generator(nu):
    return BesselGenerator(nu)


class HardyZGenerator(Generator):
    """G = Z on [10, 1e5]; cells from the zero/extremum table.

    Cell indices count zeros from t = 10, so index n is the cell starting at
    the (n+1)-th critical-line zero.  Zero pairs enclosing other than exactly
    one extremum are skipped and recorded in ``skipped``.
    """

    label = "hardy_z"
    T_LO = 10.0
    T_HI = 1e5

    def __init__(self):
        self._table = None
        self._hi = 0.0
        self._lock = threading.Lock()

    def to_dict(self):
        return {"label": self.label, "family": "z"}

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.T_LO) or np.any(x > self.T_HI):
            raise DomainError(f"Hardy Z generator supports [{self.T_LO}, {self.T_HI}]")
        return x

    def value(self, x):
        return hardy_z(self._check(x))

    def derivative(self, x):
        return hardy_z_prime(self._check(x))

    def zero_table(self, hi):
        hi = min(float(hi), self.T_HI)
        with self._lock:
            if self._table is None or self._hi < hi:
                # extend in chunks so repeated small requests stay cheap
                target = min(max(hi + 5.0, 2 * self._hi), self.T_HI)
                self._table = build_zero_table(self.T_LO, target)
                self._hi = target
            return self._table

    @property
    def skipped(self):
        return list(self._table.problems) if self._table is not None else []

    def cells(self, lo, hi):
        lo, hi = max(float(lo), self.T_LO), min(float(hi), self.T_HI)
        if not hi > lo:
            return []
        table = self.zero_table(hi)
        zeros = np.asarray(table.zeros)
        ext = np.asarray(table.extrema)
        out = []
        for n in range(zeros.size - 1):
            a, b = zeros[n], zeros[n + 1]
            if a < lo or b > hi:
                continue
            inside = ext[(ext > a) & (ext < b)]
            if inside.size != 1:
                continue
            t0 = float(inside[0])
            g0 = float(hardy_z(t0))
            out.append(ExtremalCell(float(a), float(b), t0, 1 if g0 > 0 else -1, g0, n))
        return out


    def cell(self, index):
        """Cell starting at zero number ``index`` (zero-based, counted from t = 10)."""
        if index < 0:
            raise DomainError("cell indices are nonnegative")
        hi = 50.0
        while True:
            table = self.zero_table(hi)
            if len(table.zeros) > index + 1:
                break
            if hi >= self.T_HI:
                raise DomainError(f"cell {index} lies beyond t = {self.T_HI}")
            hi = min(2 * hi, self.T_HI)
        a, b = table.zeros[index], table.zeros[index + 1]
        found = [c for c in self.cells(a, b) if c.index == index]
        if not found:
            raise DomainError(f"zero pair {index} does not enclose exactly one extremum")
        return found[0]


def make_hardy_z_generator():
    return HardyZGenerator()


class ScaledGenerator(Generator):
    """lambda * G."""

    def __init__(self, base, lam):
        lam = float(lam)
        if lam == 0.0 or not math.isfinite(lam):
            raise DomainError("scale factor must be finite and nonzero")
        self.base = base
        self.lam = lam
        self.label = f"{lam:g}*{base.label}"

    def to_dict(self):
        return {"label": self.label, "scale": self.lam, "base": self.base.to_dict()}

    def value(self, x):
        return self.lam * self.base.value(x)

    def derivative(self, x):
        return self.lam * self.base.derivative(x)

    def scale_cell(self, cell):
        s = 1 if self.lam > 0 else -1
        return replace(cell, sign=cell.sign * s, g_at_t0=self.lam * cell.g_at_t0)

    def cells(self, lo, hi):
        return [self.scale_cell(c) for c in self.base.cells(lo, hi)]

    def cell(self, index):
        return self.scale_cell(self.base.cell(index))


# ---------------------------------------------------------------------------
# deformations


def bump(u):
    """beta(u) = (1 - u^2)^2 on |u| < 1, zero outside; C^1."""
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 2, 0.0)


def bump_prime(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) < 1.0, -4.0 * u * (1.0 - u * u), 0.0)


@dataclass(frozen=True)
class DeformationSpec:
    """Multiplicative bumps ``1 + sum a_i beta((x - c_i) / w_i)`` on one cell.

    Widths default to the largest symmetric support inside the cell.
    """

    base: Generator
    cell: ExtremalCell
    bump_amplitudes: tuple
    bump_centers: tuple
    bump_widths: tuple = None

    def __post_init__(self):
        amps = tuple(float(a) for a in self.bump_amplitudes)
        centers = tuple(float(c) for c in self.bump_centers)
        object.__setattr__(self, "bump_amplitudes", amps)
        object.__setattr__(self, "bump_centers", centers)
        if len(amps) != len(centers):
            raise DomainError("one amplitude per bump center")
        lo, hi = self.cell.gamma_lo, self.cell.gamma_hi
        for c in centers:
            if not lo < c < hi or c == self.cell.t0:
                raise DomainError(f"bump center {c} not inside the cell away from t0")
        if self.bump_widths is None:
            widths = tuple(min(c - lo, hi - c) for c in centers)
        else:
            widths = tuple(float(w) for w in self.bump_widths)
            if len(widths) != len(centers):
                raise DomainError("one width per bump center")
            for c, w in zip(centers, widths):
                if not 0 < w <= min(c - lo, hi - c) * (1 + 1e-12):
                    raise DomainError(f"bump at {c} with width {w} leaves the cell")
        object.__setattr__(self, "bump_widths", widths)

    @property
    def is_identity(self):
        return all(a == 0.0 for a in self.bump_amplitudes)

    def to_dict(self):
        return {
            "base": self.base.to_dict(),
            "cell": self.cell.to_dict(),
            "bump_amplitudes": list(self.bump_amplitudes),
            "bump_centers": list(self.bump_centers),
            "bump_widths": list(self.bump_widths),
        }


class DeformedGenerator(Generator):
    """G_T = G * (1 + sum a_i beta((x - c_i) / w_i)), revalidated on its cell."""

    def __init__(self, spec):
        self.spec = spec
        self.base = spec.base
        self.label = f"deformed({spec.base.label})"
        self._amps = np.array(spec.bump_amplitudes)
        self._centers = np.array(spec.bump_centers)
        self._widths = np.array(spec.bump_widths)
        self.cell_ = self._revalidate()

    def to_dict(self):
        return {"label": self.label, "deformation": self.spec.to_dict()}

    def _factor(self, x):
        if self._amps.size == 0:
            return 1.0, 0.0
        u = (np.asarray(x, dtype=float)[..., None] - self._centers) / self._widths
        m = 1.0 + (self._amps * bump(u)).sum(axis=-1)
        dm = (self._amps * bump_prime(u) / self._widths).sum(axis=-1)
        return m, dm

    def value(self, x):
        m, _ = self._factor(x)
        return self.base.value(x) * m

    def derivative(self, x):
        m, dm = self._factor(x)
        return self.base.derivative(x) * m + self.base.value(x) * dm

    def _revalidate(self):
        cell = self.spec.cell
        if self.spec.is_identity:
            return cell
        scan = np.linspace(cell.gamma_lo, cell.gamma_hi, SCAN_POINTS + 2)[1:-1]
        v = cell.sign * self.value(scan)
        bad = np.flatnonzero(v <= 0)
        if bad.size:
            raise DeformationError("deformation destroys sign-fixedness", scan_point=float(scan[bad[0]]))
        d = cell.sign * self.derivative(scan)
        s = np.sign(d)
        changes = np.flatnonzero(s[:-1] * s[1:] < 0)
        if changes.size != 1 or np.any(s == 0):
            where = float(scan[changes[1]]) if changes.size > 1 else float(scan[0])
            raise DeformationError(
                f"deformation leaves {changes.size} derivative sign changes, expected one",
                scan_point=where,
            )
        i = changes[0]
        t0 = float(find_root_bracketed(self.derivative, scan[i], scan[i + 1], tol=1e-13))
        g0 = float(self.value(t0))
        return replace(cell, t0=t0, g_at_t0=g0)

    def cells(self, lo, hi):
        c = self.cell_
        return [c] if lo <= c.gamma_lo and c.gamma_hi <= hi else []


def make_deformed_generator(spec):
    return DeformedGenerator(spec)


# ---------------------------------------------------------------------------
# validation


@dataclass
class CellValidation:
    cell: ExtremalCell
    checks: dict = field(default_factory=dict)

    def add(self, name, passed, measured):
        self.checks[name] = {"passed": bool(passed), "measured": float(measured)}

    @property
    def ok(self):
        """Structural checks; width admissibility is reported separately."""
        return all(v["passed"] for k, v in self.checks.items() if k != "width")

    @property
    def admissible(self):
        return self.checks["width"]["passed"]

    def to_dict(self):
        return {"cell": self.cell.to_dict(), "checks": self.checks, "ok": self.ok, "admissible": self.admissible}


def validate_cell(G, cell, scan_points=SCAN_POINTS):
    """Check every cell invariant; failures are data, not exceptions."""
    rep = CellValidation(cell)
    a, b, t0 = cell.gamma_lo, cell.gamma_hi, cell.t0
    rep.add("ordering", a < t0 < b, min(t0 - a, b - t0))
    scan = np.linspace(a, b, scan_points + 2)[1:-1]
    try:
        vals = np.asarray(G.value(scan), dtype=float)
        ders = np.asarray(G.derivative(scan), dtype=float)
        g_t0 = float(G.value(t0))
        d_t0 = float(G.derivative(t0))
        g_ends = np.abs(np.asarray(G.value(np.array([a, b])), dtype=float))
    except (DomainError, ValueError) as exc:
        rep.add("domain", False, float("nan"))
        rep.checks["domain"]["error"] = str(exc)
        rep.add("width", cell.admissible, cell.width - cell.width_bound)
        return rep
    scale = max(np.abs(vals).max(), abs(g_t0))
    d_scale = np.abs(ders).max()
    rep.add("endpoint_zeros", g_ends.max() <= 1e-8 * scale, g_ends.max() / scale)
    rep.add("stationary_t0", abs(d_t0) <= 1e-7 * d_scale, abs(d_t0) / d_scale)
    sv = cell.sign * vals
    rep.add("sign_fixed", np.all(sv > 0), sv.min() / scale)
    s = np.sign(cell.sign * ders)
    n_changes = int(np.sum(s[:-1] * s[1:] < 0))
    rep.add("single_extremum", n_changes == 1, n_changes)
    rep.add("g_at_t0", abs(g_t0 - cell.g_at_t0) <= 1e-10 * scale, abs(g_t0 - cell.g_at_t0) / scale)
    rep.add("width", cell.admissible, cell.width - cell.width_bound)
    return rep
