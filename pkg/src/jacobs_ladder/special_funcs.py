"""Jacobi elliptic functions with K(k), and Bessel J_nu with zero machinery."""

from dataclasses import dataclass
import math

import numpy as np

from . import _kernels
from .cells import ExtremalCell
from .errors import DomainError, IsolationError
from .numerics import find_root_bracketed


def _check_modulus(k_sq):
    k_sq = float(k_sq)
    if not (0.0 <= k_sq < 1.0):
        raise DomainError(f"squared modulus must lie in [0, 1), got {k_sq}")
    return k_sq


def complete_elliptic_K(k_sq):
    """K(k) = pi / (2 AGM(1, sqrt(1 - k^2)))."""
    k_sq = _check_modulus(k_sq)
    a, b = 1.0, math.sqrt(1.0 - k_sq)
    for _ in range(64):
        if abs(a - b) <= 4e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


@dataclass(frozen=True)
class EllipticModulus:
    k_sq: float

    def __post_init__(self):
        _check_modulus(self.k_sq)

    @property
    def K(self):
        return complete_elliptic_K(self.k_sq)


def jacobi_sncndn(x, k_sq):
    """(sn, cn, dn) at ``x`` for squared modulus ``k_sq``; arrays in, arrays out."""
    k_sq = _check_modulus(k_sq)
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("non-finite argument")
    sn, cn, dn = _kernels.sncndn(np.atleast_1d(arr).ravel(), k_sq)
    if arr.ndim == 0:
        return float(sn[0]), float(cn[0]), float(dn[0])
    return sn.reshape(arr.shape), cn.reshape(arr.shape), dn.reshape(arr.shape)


def _lattice_cells(k_sq, index_range, first_zero, pick):
    K = complete_elliptic_K(k_sq)
    cells = []
    for l in index_range:
        if l < 0:
            raise DomainError("cell indices are nonnegative")
        lo = (2 * l + first_zero) * K
        t0 = (2 * l + first_zero + 1) * K
        hi = (2 * l + first_zero + 2) * K
        g0 = pick(jacobi_sncndn(t0, k_sq))
        cells.append(ExtremalCell(lo, hi, t0, 1 if g0 > 0 else -1, g0, l))
    return cells


def jacobi_cells_sn(k_sq, index_range):
    """sn cells ``[2lK, (2l+2)K]`` with extremum ``(2l+1)K``."""
    return _lattice_cells(k_sq, index_range, 0, lambda s: s[0])


def jacobi_cells_cn(k_sq, index_range):
    """cn cells ``[(2l+1)K, (2l+3)K]`` with extremum ``(2l+2)K``."""
    return _lattice_cells(k_sq, index_range, 1, lambda s: s[1])


# ---------------------------------------------------------------------------
# Bessel


def _check_order(nu):
    nu = float(nu)
    if not nu > -1.0:
        raise DomainError(f"Bessel order must exceed -1, got {nu}")
    return nu


@dataclass(frozen=True)
class BesselOrder:
    nu: float

    def __post_init__(self):
        _check_order(self.nu)


def bessel_j(nu, x):
    """J_nu(x) for real ``nu > -1`` and ``x > 0``."""
    nu = _check_order(nu)
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("bessel_j needs finite x > 0")
    out = _kernels.bessel_j(nu, np.atleast_1d(arr).ravel())
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def mcmahon_zero(nu, s):
    """McMahon's asymptotic estimate of the ``s``-th positive zero of J_nu."""
    mu = 4.0 * nu * nu
    b8 = 8.0 * (s + 0.5 * nu - 0.25) * math.pi
    return (
        b8 / 8.0
        - (mu - 1.0) / b8
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8**3)
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * b8**5)
    )


def _refine_zero(nu, seed, tol):
    f = lambda x: bessel_j(nu, x)
    for w in (0.25, 0.5):
        a, b = max(seed - w, 1e-6), seed + w
        if f(a) * f(b) < 0:
            return find_root_bracketed(f, a, b, tol=tol)
    # seed too poor (small index, order near -1): scan a window around it
    grid = np.linspace(max(seed - 0.5 * math.pi, 1e-6), seed + 0.5 * math.pi, 64)
    vals = bessel_j(nu, grid)
    idx = np.flatnonzero(vals[:-1] * vals[1:] < 0)
    if idx.size == 0:
        raise IsolationError(f"no zero of J_{nu} near {seed}", [(grid[0], grid[-1])])
    roots = [find_root_bracketed(f, grid[i], grid[i + 1], tol=tol) for i in idx]
    return min(roots, key=lambda r: abs(r - seed))


def bessel_zeros(nu, indices, tol=1e-12):
    """Zeros ``j_{nu,s}`` for the 1-based indices ``s``."""
    nu = _check_order(nu)
    return [_refine_zero(nu, mcmahon_zero(nu, s), tol) for s in indices]


def _index_near(nu, x):
    return max(1, int(math.floor(x / math.pi - 0.5 * nu + 0.25)))


def bessel_ratio_cells(nu, lo, hi, tol=1e-12):
    """Cells of ``G(x) = J_nu(x) / x^nu`` lying inside ``[lo, hi]``.

    Endpoints are consecutive zeros of J_nu; the interior extremum is the zero
    of J_{nu+1} between them, since ``d/dx [J_nu / x^nu] = -J_{nu+1} / x^nu``.
    Cell ``index`` is zero-based: index ``l`` spans ``[j_{nu,l+1}, j_{nu,l+2}]``.
    """
    nu = _check_order(nu)
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        return []
    s = max(1, _index_near(nu, lo) - 2)
    while bessel_zeros(nu, [s])[0] < lo and s > 0:
        s += 1
    while s > 1 and bessel_zeros(nu, [s - 1])[0] >= lo:
        s -= 1
    cells = []
    bad = []
    z_lo = bessel_zeros(nu, [s], tol)[0]
    while True:
        z_hi = bessel_zeros(nu, [s + 1], tol)[0]
        if z_hi > hi:
            break
        t0 = bessel_zeros(nu + 1.0, [s], tol)[0]
        if not z_lo < t0 < z_hi:
            bad.append((z_lo, z_hi))
        else:
            g0 = bessel_j(nu, t0) / t0**nu
            scan = np.linspace(z_lo, z_hi, 66)[1:-1]
            inside = np.sign(bessel_j(nu, scan))
            if np.any(inside != np.sign(g0)):
                bad.append((z_lo, z_hi))
            else:
                cells.append(ExtremalCell(z_lo, z_hi, t0, 1 if g0 > 0 else -1, g0, s - 1))
        z_lo = z_hi
        s += 1
    if bad:
        raise IsolationError(f"extremum isolation failed on {len(bad)} Bessel cells", bad)
    return cells


def bessel_cell(nu, index, tol=1e-12):
    """The single Bessel-ratio cell with zero-based ``index``."""
    nu = _check_order(nu)
    a, b = bessel_zeros(nu, [index + 1, index + 2], tol)
    return bessel_ratio_cells(nu, a - 1e-9, b + 1e-9, tol)[0]
