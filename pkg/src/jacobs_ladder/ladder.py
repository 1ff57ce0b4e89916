"""Jacob's ladder phi_1(T): the root V of

    V ln V + (c - ln 2 pi) V + c0 = int_0^T |zeta(1/2+it)|^2 dt

together with its inverse, its derivative, an independent RK4 construction,
and binary persistence.
"""

from dataclasses import dataclass, field, asdict
import math
from pathlib import Path
import struct
import zlib

import numpy as np

from . import _kernels
from .errors import BracketError, ConvergenceError, DomainError, TableError
from .zeta_core import HLIntegral, default_hl, zeta_mod_sq

LN_2PI = math.log(2.0 * math.pi)
EULER_GAMMA = float(np.euler_gamma)


@dataclass(frozen=True)
class LadderConfig:
    euler_c: float = EULER_GAMMA
    tka_c0: float = 0.0
    t_min: float = 30.0
    tol_residual: float = 1e-6
    points_per_decade: int = 64

    def __post_init__(self):
        if not 0.577215 < self.euler_c < 0.577216:
            raise DomainError(f"euler_c={self.euler_c} is not Euler's constant")
        if not math.isfinite(self.tka_c0):
            raise DomainError("tka_c0 must be finite")
        if not self.t_min >= 30.0:
            raise DomainError("t_min must be at least 30")
        if not self.tol_residual > 0:
            raise DomainError("tol_residual must be positive")
        if int(self.points_per_decade) < 1:
            raise DomainError("points_per_decade must be positive")

    @property
    def shift(self):
        """1 + c - ln 2 pi, so that F'(V) = ln V + shift."""
        return 1.0 + self.euler_c - LN_2PI

    @property
    def v_floor(self):
        """2 pi e^{-c}: F(v_floor) = c0 and F is increasing beyond."""
        return math.exp(LN_2PI - self.euler_c)

    def F(self, v):
        v = np.asarray(v, dtype=float)
        return v * np.log(v) + (self.euler_c - LN_2PI) * v + self.tka_c0

    def dF(self, v):
        return np.log(np.asarray(v, dtype=float)) + self.shift


def solve_v(h, config, guess=None, upper=None, max_iter=100):
    """Vectorized root of F(V) = h on (v_floor, upper)."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    lo = config.v_floor
    if np.any(h <= config.tka_c0):
        raise BracketError("Hardy-Littlewood value below c0: no ladder root above v_floor")
    if upper is not None:
        upper = np.broadcast_to(np.asarray(upper, dtype=float), h.shape)
        if np.any(config.F(upper) < h):
            raise BracketError("F(T) < hl(T): c0 inconsistent with the table range")
    v = np.array(guess, dtype=float) if guess is not None else np.array(upper, dtype=float)
    v = np.broadcast_to(v, h.shape).copy()
    for _ in range(max_iter):
        step = (config.F(v) - h) / config.dF(v)
        v_new = v - step
        low = v_new <= lo
        v_new[low] = 0.5 * (v[low] + lo)
        # steps stall at a few ulps; 1e-14 is past quadratic convergence
        done = np.abs(v_new - v) <= 1e-14 * np.abs(v_new)
        v = v_new
        if done.all():
            return v
    raise ConvergenceError("ladder Newton iteration did not converge", last=v)


@dataclass
class LadderTable:
    """Geometric grid of (T, phi_1(T), hl(T)) plus the hl checkpoint grid."""

    T: np.ndarray
    phi1: np.ndarray
    hl: np.ndarray
    config: LadderConfig
    hl_integral: HLIntegral = field(default_factory=default_hl, repr=False)

    @property
    def t_lo(self):
        return float(self.T[0])

    @property
    def t_hi(self):
        return float(self.T[-1])

    @property
    def x_lo(self):
        return float(self.phi1[0])

    @property
    def x_hi(self):
        return float(self.phi1[-1])

    def residuals(self):
        return self.hl - self.config.F(self.phi1)

    def save(self, path):
        save_table(self, path)


def _geometric_grid(t_min, t_max, ppd):
    n = int(math.floor(ppd * math.log10(t_max / t_min) + 1e-9))
    grid = t_min * 10.0 ** (np.arange(n + 1) / ppd)
    if grid[-1] < t_max * (1 - 1e-12):
        grid = np.append(grid, t_max)
    grid[-1] = max(grid[-1], t_max) if n == 0 else grid[-1]
    return grid


def build_ladder_table(t_max, config=None, hl=None):
    """Solve the ladder equation on a geometric grid from ``t_min`` to ``t_max``."""
    config = config or LadderConfig()
    t_max = float(t_max)
    if not t_max >= config.t_min:
        raise DomainError(f"t_max={t_max} below t_min={config.t_min}")
    hl = hl if hl is not None else default_hl()
    hl.extend(t_max)
    T = _geometric_grid(config.t_min, t_max, int(config.points_per_decade))
    h = hl(T)
    if np.any(np.diff(h) <= 0):
        raise TableError("Hardy-Littlewood integral not increasing on the grid")
    v = solve_v(h, config, upper=T)
    table = LadderTable(T, v, h, config, hl)
    _check_invariants(table)
    return table


def _check_invariants(table):
    if np.any(np.diff(table.phi1) <= 0):
        raise TableError("phi1 not strictly increasing")
    if np.any(table.phi1 <= 0) or np.any(table.phi1 >= table.T):
        raise TableError("0 < phi1(T) < T violated")
    rel = np.abs(table.residuals()) / table.hl
    if np.any(rel > table.config.tol_residual):
        raise TableError(f"defining-equation residual {rel.max():.3g} above tolerance")


def _query(arr, lo, hi, what):
    v = np.asarray(arr, dtype=float)
    flat = np.atleast_1d(v).ravel()
    if not np.all(np.isfinite(flat)):
        raise DomainError(f"non-finite {what} query")
    slack = 1e-12 * max(abs(lo), abs(hi))
    if np.any(flat < lo - slack) or np.any(flat > hi + slack):
        raise TableError(f"{what} query outside table range [{lo}, {hi}]")
    return flat, v.ndim == 0, v.shape


def phi1(table, t):
    """phi_1(t): interpolated start refined by Newton on the defining equation."""
    flat, scalar, shape = _query(t, table.t_lo, table.t_hi, "phi1")
    guess = np.interp(flat, table.T, table.phi1)
    out = solve_v(table.hl_integral(flat), table.config, guess=guess)
    return float(out[0]) if scalar else out.reshape(shape)


def phi1_inverse(table, x, tol=1e-13, max_iter=200):
    """T with phi_1(T) = x, by safeguarded Newton on hl(T) = F(x)."""
    flat, scalar, shape = _query(x, table.x_lo, table.x_hi, "phi1_inverse")
    hl = table.hl_integral
    target = table.config.F(flat)
    lo = np.empty_like(flat)
    hi = np.empty_like(flat)
    for i, h in enumerate(target):
        k = hl.locate(h)
        lo[i] = k * hl.step
        hi[i] = (k + 1) * hl.step
    lo = np.maximum(lo, table.t_lo - 1.0)
    t = np.clip(np.interp(flat, table.phi1, table.T), lo, hi)
    for _ in range(max_iter):
        g = hl(t) - target
        lo = np.where(g < 0, t, lo)
        hi = np.where(g > 0, t, hi)
        d = zeta_mod_sq(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_new = t - g / d
        bad = ~np.isfinite(t_new) | (t_new <= lo) | (t_new >= hi)
        t_new[bad] = 0.5 * (lo[bad] + hi[bad])
        done = (np.abs(t_new - t) <= tol * t) | (g == 0)
        t = np.where(g == 0, t, t_new)
        if done.all():
            return float(t[0]) if scalar else t.reshape(shape)
    raise ConvergenceError("phi1_inverse did not converge", last=t)


def phi1_prime(table, t):
    """d phi_1 / dt = |zeta(1/2+it)|^2 / (ln phi_1(t) + 1 + c - ln 2 pi)."""
    v = phi1(table, t)
    return zeta_mod_sq(t) / (np.log(v) + table.config.shift)


def march_ladder(table, knots, max_step=0.02):
    """Second construction: RK4 integration of phi_1' from the first knot.

    Only the starting value comes from the root solve; each later value is
    obtained by marching the implicit-derivative ODE through every knot.
    """
    knots = np.asarray(knots, dtype=float)
    out = np.empty_like(knots)
    out[0] = phi1(table, knots[0])
    shift = table.config.shift
    for i in range(knots.size - 1):
        a, b = knots[i], knots[i + 1]
        n = max(1, int(math.ceil((b - a) / max_step)))
        h = (b - a) / n
        w = zeta_mod_sq(a + 0.5 * h * np.arange(2 * n + 1))
        out[i + 1] = _kernels.march_rk4(w, h, out[i], shift)[-1]
    return out


# ---------------------------------------------------------------------------
# asymptotic checks

#: relative residuals below this are rounding noise
RESIDUAL_NOISE = 1e-13


@dataclass
class AsymptoticsReport:
    T: list
    residual: list
    residual_rel: list
    envelope: list
    ratio: list
    decade_max_rel: dict
    flags: list

    @property
    def ok(self):
        return not self.flags

    def to_dict(self):
        return asdict(self)


def check_ladder_asymptotics(table):
    """Residual series of the ladder expansion and the prime-counting ratio.

    ``residual`` is hl - F(phi_1); ``envelope`` is ln T / T, the order of the
    expansion's error term.  ``ratio`` is (T - phi_1) / ((1 - c) T / ln T).
    """
    T = np.asarray(table.T)
    if T[-1] < 10 * T[0] * (1 - 1e-12):
        raise DomainError("table must span at least one decade")
    res = table.residuals()
    rel = np.abs(res) / table.hl
    env = np.log(T) / T
    ratio = (T - table.phi1) / ((1.0 - table.config.euler_c) * T / np.log(T))
    decade = np.floor(np.log10(T) + 1e-12).astype(int)
    dmax = {int(d): float(rel[decade == d].max()) for d in np.unique(decade)}
    flags = []
    keys = sorted(dmax)
    for prev, cur in zip(keys[:-1], keys[1:]):
        if dmax[cur] > dmax[prev] + RESIDUAL_NOISE:
            flags.append(f"residual grows from decade 1e{prev} to 1e{cur}")
    if np.any(np.abs(res) > env * table.hl):
        flags.append("residual exceeds ln T / T envelope")
    if np.any(ratio <= 0):
        flags.append("non-positive prime-counting ratio")
    return AsymptoticsReport(
        T.tolist(), res.tolist(), rel.tolist(), env.tolist(), ratio.tolist(), dmax, flags
    )


# ---------------------------------------------------------------------------
# persistence

MAGIC = b"JLADDER\x00"
VERSION = 1
_HEADER = struct.Struct("<8sII6dQ")


def _sidecar(path):
    return Path(str(path) + ".hl")


def save_table(table, path):
    """Binary table: header (magic, version, crc32, config floats, count) then
    little-endian (T, phi1, hl) triples.  The hl checkpoints go to ``path.hl``."""
    c = table.config
    payload = np.column_stack([table.T, table.phi1, table.hl]).astype("<f8").tobytes()
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        zlib.crc32(payload),
        c.euler_c,
        c.tka_c0,
        c.t_min,
        c.tol_residual,
        float(c.points_per_decade),
        float(table.T[-1]),
        table.T.size,
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header + payload)
    table.hl_integral.save(_sidecar(path))


def read_header(path):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise TableError(f"{path}: truncated header")
    magic, version, crc, euler_c, c0, t_min, tol, ppd, t_max, count = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise TableError(f"{path}: bad magic")
    if version != VERSION:
        raise TableError(f"{path}: unsupported version {version}")
    payload = raw[_HEADER.size :]
    if len(payload) != 24 * count or zlib.crc32(payload) != crc:
        raise TableError(f"{path}: payload corrupt")
    config = LadderConfig(euler_c, c0, t_min, tol, int(ppd))
    return config, t_max, payload


def load_table(path):
    config, _, payload = read_header(path)
    arr = np.frombuffer(payload, dtype="<f8").reshape(-1, 3).astype(float)
    hl = HLIntegral.load(_sidecar(path))
    table = LadderTable(arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy(), config, hl)
    if table.T[-1] > hl.t_max + 1e-9:
        raise TableError(f"{path}: checkpoint grid shorter than table")
    return table


def export_csv(table, path):
    with open(path, "w") as fh:
        fh.write("T,phi1,hl\n")
        for row in zip(table.T, table.phi1, table.hl):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
