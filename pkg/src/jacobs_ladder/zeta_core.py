"""Riemann-Siegel theta, Hardy's Z, |zeta(1/2+it)|^2 and the cumulative
Hardy-Littlewood integral, plus zero/extremum isolation for Z.
"""

from dataclasses import dataclass, field
import math
from pathlib import Path
import struct
import zlib

import numpy as np

from . import _kernels
from .errors import DomainError, IsolationError, QuadratureError, TableError
from .numerics import GK_NODES, adaptive_integrate, find_root_bracketed
from .numerics import _panel_rule

RS_SWITCH = _kernels.RS_SWITCH
#: step of the Richardson central difference used for Z'
Z_PRIME_STEP = 1e-4


def _vector(t):
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("non-finite ordinate")
    return np.atleast_1d(arr).ravel(), arr.ndim == 0, arr.shape


def _shape(out, scalar, shape):
    return float(out[0]) if scalar else out.reshape(shape)


def riemann_siegel_theta(t):
    """theta(t) = -(t/2) ln pi + Im ln Gamma(1/4 + it/2)."""
    v, scalar, shape = _vector(t)
    return _shape(_kernels.theta(v), scalar, shape)


def zeta_em(t):
    """zeta(1/2 + it) by Euler-Maclaurin summation (complex)."""
    v, scalar, shape = _vector(t)
    out = _kernels.em_zeta(v)
    return complex(out[0]) if scalar else out.reshape(shape)


def hardy_z(t):
    """Hardy's Z(t) = exp(i theta(t)) zeta(1/2 + it), real for real t."""
    v, scalar, shape = _vector(t)
    a = np.abs(v)
    out = np.empty_like(a)
    low = a < RS_SWITCH
    if low.any():
        tl = a[low]
        out[low] = (np.exp(1j * _kernels.theta(tl)) * _kernels.em_zeta(tl)).real
    if (~low).any():
        out[~low] = _kernels.rs_z(a[~low])
    return _shape(out, scalar, shape)


def zeta_mod_sq(t):
    """|zeta(1/2 + it)|^2."""
    v, scalar, shape = _vector(t)
    a = np.abs(v)
    out = np.empty_like(a)
    low = a < RS_SWITCH
    if low.any():
        out[low] = np.abs(_kernels.em_zeta(a[low])) ** 2
    if (~low).any():
        out[~low] = _kernels.rs_z(a[~low]) ** 2
    return _shape(out, scalar, shape)


def riemann_siegel_theta_prime(t):
    """theta'(t) = (1/2) Re psi(1/4 + it/2) - (1/2) ln pi."""
    v, scalar, shape = _vector(t)
    return _shape(_kernels.theta_prime(v), scalar, shape)


def hardy_z_prime(t):
    """Z'(t), differentiated term by term.

    Below the Riemann-Siegel switch Z' = Re(i e^{i theta}(theta' zeta + zeta_s));
    above it the main sum and the correction polynomials are differentiated
    directly.
    """
    v, scalar, shape = _vector(t)
    a = np.abs(v)
    out = np.empty_like(a)
    low = a < RS_SWITCH
    if low.any():
        tl = a[low]
        rot = 1j * np.exp(1j * _kernels.theta(tl))
        out[low] = (rot * (_kernels.theta_prime(tl) * _kernels.em_zeta(tl) + _kernels.em_zeta_ds(tl))).real
    if (~low).any():
        out[~low] = _kernels.rs_z_prime(a[~low])
    out = np.where(v < 0, -out, out)
    return _shape(out, scalar, shape)


def hardy_z_prime_fd(t, h=Z_PRIME_STEP):
    """Z'(t) by Richardson-extrapolated central differences (cross-check)."""
    v, scalar, shape = _vector(t)
    pts = np.concatenate([v + h, v - h, v + 0.5 * h, v - 0.5 * h])
    z = hardy_z(pts).reshape(4, -1)
    d_full = (z[0] - z[1]) / (2.0 * h)
    d_half = (z[2] - z[3]) / h
    return _shape((4.0 * d_half - d_full) / 3.0, scalar, shape)


@dataclass(frozen=True)
class CriticalLineSample:
    t: float
    theta: float
    z: float
    zeta_mod_sq: float


def sample(t):
    t = float(t)
    return CriticalLineSample(t, riemann_siegel_theta(t), hardy_z(t), zeta_mod_sq(t))


# ---------------------------------------------------------------------------
# Hardy-Littlewood integral with unit checkpoints

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_HL_MAGIC = b"JLHLCKP\x00"
_HL_VERSION = 1
_HL_HEADER = struct.Struct("<8sIIddQ")


class HLIntegral:
    """Cumulative integral of |zeta(1/2+it)|^2 from 0, checkpointed at every
    multiple of ``step``.

    Each unit panel is integrated independently, so extending the grid never
    changes existing checkpoints (exact restart).  Between checkpoints a fixed
    24-point Gauss-Legendre rule completes the integral.
    """

    def __init__(self, step=1.0, panel_tol=1e-10):
        self.step = float(step)
        self.panel_tol = float(panel_tol)
        self.panels = np.zeros(0)
        self.values = np.zeros(1)

    @property
    def t_max(self):
        return self.panels.size * self.step

    def extend(self, t_max):
        n_target = int(math.ceil(float(t_max) / self.step - 1e-12))
        n_have = self.panels.size
        if n_target <= n_have:
            return self
        lo = np.arange(n_have, n_target) * self.step
        hi = lo + self.step
        vals, errs = _panel_rule(zeta_mod_sq, lo, hi)
        # panels are O(1); tolerance is relative with a unit-scale floor
        bad = np.flatnonzero(errs > self.panel_tol * np.maximum(np.abs(vals), 1.0))
        for i in bad:
            res = adaptive_integrate(zeta_mod_sq, lo[i], hi[i], tol=self.panel_tol, abs_floor=self.panel_tol)
            if not res.converged:
                raise QuadratureError(f"panel [{lo[i]}, {hi[i]}] did not converge", res)
            vals[i] = res.value
        self.panels = np.concatenate([self.panels, vals])
        self.values = _kernels.cumsum_compensated(self.panels)
        return self

    def _partial(self, a, b):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        return half * (zeta_mod_sq(x.ravel()).reshape(x.shape) @ _GL_WEIGHTS)

    def __call__(self, T):
        v, scalar, shape = _vector(T)
        if np.any(v < 0):
            raise DomainError("hl_integral needs T >= 0")
        if v.size and v.max() > self.t_max:
            self.extend(v.max())
        k = np.minimum(np.floor(v / self.step).astype(np.int64), self.panels.size)
        base = self.values[k]
        start = k * self.step
        out = base + self._partial(start, v)
        out[v == start] = base[v == start]
        return _shape(out, scalar, shape)

    def locate(self, target):
        """Index ``k`` with values[k] <= target < values[k+1]."""
        return int(np.searchsorted(self.values, target, side="right") - 1)

    def save(self, path):
        payload = self.panels.astype("<f8").tobytes()
        header = _HL_HEADER.pack(_HL_MAGIC, _HL_VERSION, zlib.crc32(payload), self.step, self.panel_tol, self.panels.size)
        Path(path).write_bytes(header + payload)

    @classmethod
    def load(cls, path):
        raw = Path(path).read_bytes()
        if len(raw) < _HL_HEADER.size:
            raise TableError(f"{path}: truncated header")
        magic, version, crc, step, tol, count = _HL_HEADER.unpack_from(raw)
        if magic != _HL_MAGIC or version != _HL_VERSION:
            raise TableError(f"{path}: bad magic or version")
        payload = raw[_HL_HEADER.size :]
        if len(payload) != 8 * count or zlib.crc32(payload) != crc:
            raise TableError(f"{path}: payload corrupt")
        obj = cls(step, tol)
        obj.panels = np.frombuffer(payload, dtype="<f8").astype(float)
        obj.values = _kernels.cumsum_compensated(obj.panels)
        return obj


_DEFAULT_HL = HLIntegral()


def hl_integral(T):
    """int_0^T |zeta(1/2+it)|^2 dt using the shared checkpoint grid."""
    return _DEFAULT_HL(T)


def default_hl():
    return _DEFAULT_HL


# ---------------------------------------------------------------------------
# zeros and extrema of Z


def scan_step(t):
    """Isolation grid step tracking the mean zero spacing."""
    t = np.maximum(np.asarray(t, dtype=float), 2.0 * math.pi * math.e)
    return np.minimum(0.2, math.pi / np.log(t / (2.0 * math.pi)))


def _grid(lo, hi):
    pts = [lo]
    while pts[-1] < hi:
        pts.append(min(hi, pts[-1] + float(scan_step(pts[-1]))))
    return np.array(pts)


def _sign_change_roots(f, grid, vals, tol):
    roots = [float(x) for x, v in zip(grid, vals) if v == 0.0]
    for i in np.flatnonzero(vals[:-1] * vals[1:] < 0):
        roots.append(find_root_bracketed(f, grid[i], grid[i + 1], tol=tol))
    return sorted(set(roots))


#: Z' is scanned on a grid this many times finer than the zero grid
EXTREMUM_REFINE = 4


def _isolate(lo, hi, tol):
    grid = _grid(lo, hi)
    fine = np.concatenate(
        [np.linspace(a, b, EXTREMUM_REFINE, endpoint=False) for a, b in zip(grid[:-1], grid[1:])] + [grid[-1:]]
    )
    extrema = _sign_change_roots(hardy_z_prime, fine, hardy_z_prime(fine), tol)
    zeros = _sign_change_roots(hardy_z, grid, hardy_z(grid), tol)
    # Z is monotone between consecutive extrema: any sign change there brackets
    # exactly one zero, which recovers close pairs the zero grid stepped over
    knots = np.array([lo, *extrema, hi])
    zk = hardy_z(knots)
    have = np.array(zeros)
    for i in np.flatnonzero(zk[:-1] * zk[1:] < 0):
        a, b = knots[i], knots[i + 1]
        if have.size and np.any((have >= a) & (have <= b)):
            continue
        zeros.append(find_root_bracketed(hardy_z, a, b, tol=tol))
    return sorted(zeros), extrema


def find_z_zeros(lo, hi, tol=1e-10):
    """All sign-changing zeros of Z in ``[lo, hi]``, refined by Brent."""
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        return []
    return _isolate(lo, hi, tol)[0]


def find_z_extrema(lo, hi, tol=1e-10):
    """All sign changes of Z' in ``[lo, hi]``, refined by Brent."""
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        return []
    return _isolate(lo, hi, tol)[1]


@dataclass
class ZZeroTable:
    zeros: list
    extrema: list
    source: str = "computed"
    problems: list = field(default_factory=list)

    def pairs(self):
        """(gamma', t0, gamma'') for every zero pair enclosing exactly one extremum."""
        ext = np.asarray(self.extrema)
        out = []
        for a, b in zip(self.zeros[:-1], self.zeros[1:]):
            inside = ext[(ext > a) & (ext < b)]
            if inside.size == 1:
                out.append((a, float(inside[0]), b))
        return out


def _pairing_problems(zeros, extrema):
    ext = np.asarray(extrema)
    problems = []
    for a, b in zip(zeros[:-1], zeros[1:]):
        n = int(((ext > a) & (ext < b)).sum())
        if n != 1:
            problems.append((a, b, f"{n} extrema between consecutive zeros"))
    return problems


def build_zero_table(lo, hi):
    """Zeros and extrema of Z on ``[lo, hi]`` with separation problems listed."""
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        return ZZeroTable([], [], "computed", [])
    zeros, extrema = _isolate(lo, hi, 1e-10)
    return ZZeroTable(zeros, extrema, "computed", _pairing_problems(zeros, extrema))


def ingest_zeros(path, tol=1e-4):
    """Read ascending zero ordinates (one per line) and cross-check |Z| <= tol."""
    values = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError as exc:
            raise DomainError(f"{path}:{lineno}: not a number: {line!r}") from exc
    zeros = np.array(values)
    if zeros.size > 1 and np.any(np.diff(zeros) <= 0):
        raise DomainError(f"{path}: ordinates are not strictly increasing")
    if zeros.size:
        z = np.abs(hardy_z(zeros))
        bad = zeros[z > tol]
        if bad.size:
            raise IsolationError(f"{bad.size} ingested ordinates fail |Z| <= {tol}", [(x, x) for x in bad])
    zl = zeros.tolist()
    extrema = find_z_extrema(zl[0], zl[-1]) if len(zl) > 1 else []
    return ZZeroTable(zl, extrema, "ingested", _pairing_problems(zl, extrema))
