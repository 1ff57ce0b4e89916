"""Hot numeric kernels.

Every kernel exists twice: a loop form compiled by numba (``*_nb``) and a
vectorized numpy form (``*_np``).  The public names at the bottom of the module
bind to one or the other according to :data:`jacobs_ladder._accel.USE_NUMBA`.
Both forms must agree to rounding; ``tests/test_kernels.py`` enforces it and
``benchmarks/bench_kernels.py`` times them.
"""

import cmath
import math

import numpy as np

from ._accel import USE_NUMBA, njit
from ._rs_coeffs import RS_COEFFS

TWO_PI = 2.0 * math.pi
LN_PI = math.log(math.pi)
HALF_LN_TWO_PI = 0.5 * math.log(TWO_PI)

#: below this height Z comes from Euler-Maclaurin, above from Riemann-Siegel
RS_SWITCH = 200.0
#: below this height theta comes from the exact log-Gamma route
THETA_SWITCH = 10.0

# B_2 .. B_24
BERNOULLI = np.array(
    [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
        43867.0 / 798.0,
        -174611.0 / 330.0,
        854513.0 / 138.0,
        -236364091.0 / 2730.0,
    ]
)
# B_2k / (2k)!
EM_COEFFS = np.array([BERNOULLI[k - 1] / math.factorial(2 * k) for k in range(1, 13)])
# B_2k / (2k (2k - 1)) for Stirling's series
STIRLING_COEFFS = np.array([BERNOULLI[k - 1] / (2 * k * (2 * k - 1)) for k in range(1, 9)])

_width = max(len(c) for c in RS_COEFFS)
RS_TABLE = np.zeros((len(RS_COEFFS), _width))
for _k, _c in enumerate(RS_COEFFS):
    RS_TABLE[_k, : len(_c)] = _c
del _width, _k, _c

# asymptotic theta tail: 1/(48 t) + 7/(5760 t^3) + ...
THETA_TAIL = np.array([1.0 / 48.0, 7.0 / 5760.0, 31.0 / 80640.0, 127.0 / 430080.0, 511.0 / 1216512.0])


# ---------------------------------------------------------------------------
# theta


@njit
def _im_loggamma_nb(x, y):
    z = complex(x, y)
    shift = 0j
    for j in range(8):
        shift += cmath.log(z + j)
    w = z + 8.0
    res = (w - 0.5) * cmath.log(w) - w + HALF_LN_TWO_PI
    wp = w
    w2 = w * w
    for k in range(STIRLING_COEFFS.size):
        res += STIRLING_COEFFS[k] / wp
        wp *= w2
    return (res - shift).imag


@njit
def _theta_scalar_nb(t):
    if t < THETA_SWITCH:
        return -0.5 * t * LN_PI + _im_loggamma_nb(0.25, 0.5 * t)
    inv = 1.0 / t
    inv2 = inv * inv
    tail = 0.0
    for k in range(THETA_TAIL.size - 1, -1, -1):
        tail = tail * inv2 + THETA_TAIL[k]
    return 0.5 * t * math.log(t / TWO_PI) - 0.5 * t - math.pi / 8.0 + tail * inv


@njit
def theta_nb(t):
    out = np.empty(t.size)
    for i in range(t.size):
        ti = t[i]
        out[i] = _theta_scalar_nb(ti) if ti >= 0 else -_theta_scalar_nb(-ti)
    return out


def theta_np(t):
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    out = np.empty_like(a)
    big = a >= THETA_SWITCH
    if big.any():
        tb = a[big]
        inv2 = 1.0 / (tb * tb)
        tail = np.zeros_like(tb)
        for c in THETA_TAIL[::-1]:
            tail = tail * inv2 + c
        out[big] = 0.5 * tb * np.log(tb / TWO_PI) - 0.5 * tb - math.pi / 8.0 + tail / tb
    small = ~big
    if small.any():
        ts = a[small]
        z = 0.25 + 0.5j * ts
        shift = np.zeros_like(z)
        for j in range(8):
            shift += np.log(z + j)
        w = z + 8.0
        res = (w - 0.5) * np.log(w) - w + HALF_LN_TWO_PI
        wp = w.copy()
        for c in STIRLING_COEFFS:
            res += c / wp
            wp *= w * w
        out[small] = -0.5 * ts * LN_PI + (res - shift).imag
    return np.where(t < 0, -out, out)


# ---------------------------------------------------------------------------
# Riemann-Siegel Z (main sum + corrections C0..C4)


@njit
def rs_z_nb(t):
    out = np.empty(t.size)
    nk = RS_TABLE.shape[0]
    nc = RS_TABLE.shape[1]
    for i in range(t.size):
        ti = abs(t[i])
        a = math.sqrt(ti / TWO_PI)
        n_main = int(a)
        u = a - n_main - 0.5
        th = _theta_scalar_nb(ti)
        s = 0.0
        for n in range(1, n_main + 1):
            s += math.cos(th - ti * math.log(n)) / math.sqrt(n)
        corr = 0.0
        ak = 1.0
        for k in range(nk):
            c = 0.0
            for j in range(nc - 1, -1, -1):
                c = c * u + RS_TABLE[k, j]
            corr += c * ak
            ak /= a
        sign = 1.0 if (n_main - 1) % 2 == 0 else -1.0
        out[i] = 2.0 * s + sign * corr / math.sqrt(a)
    return out


def rs_z_np(t, chunk=4096):
    t = np.abs(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    for lo in range(0, t.size, chunk):
        tc = t[lo : lo + chunk]
        a = np.sqrt(tc / TWO_PI)
        n_main = a.astype(np.int64)
        u = a - n_main - 0.5
        th = theta_np(tc)
        nmax = int(n_main.max()) if tc.size else 0
        n = np.arange(1, nmax + 1, dtype=float)
        phase = th[:, None] - tc[:, None] * np.log(n)[None, :]
        terms = np.cos(phase) / np.sqrt(n)[None, :]
        terms[n[None, :] > n_main[:, None]] = 0.0
        s = terms.sum(axis=1)
        corr = np.zeros_like(tc)
        ak = np.ones_like(tc)
        for row in RS_TABLE:
            c = np.zeros_like(tc)
            for coef in row[::-1]:
                c = c * u + coef
            corr += c * ak
            ak = ak / a
        sign = np.where((n_main - 1) % 2 == 0, 1.0, -1.0)
        out[lo : lo + chunk] = 2.0 * s + sign * corr / np.sqrt(a)
    return out


# ---------------------------------------------------------------------------
# Euler-Maclaurin zeta(1/2 + i t)


@njit
def em_zeta_nb(t):
    out = np.empty(t.size, dtype=np.complex128)
    for i in range(t.size):
        ti = t[i]
        s = complex(0.5, ti)
        n_terms = int(max(10.0, 0.5 * abs(ti) + 10.0))
        acc = 0j
        for n in range(1, n_terms):
            ln = math.log(n)
            acc += cmath.exp(-s * ln)
        big_n = float(n_terms)
        ln_n = math.log(big_n)
        n_pow = cmath.exp(-s * ln_n)
        acc += big_n * n_pow / (s - 1.0) + 0.5 * n_pow
        poch = s
        pw = n_pow / big_n
        for k in range(EM_COEFFS.size):
            acc += EM_COEFFS[k] * poch * pw
            poch *= (s + 2 * k + 1) * (s + 2 * k + 2)
            pw /= big_n * big_n
        out[i] = acc
    return out


def em_zeta_np(t):
    t = np.asarray(t, dtype=float)
    s = 0.5 + 1j * t
    n_terms = np.maximum(10, (0.5 * np.abs(t) + 10.0).astype(np.int64))
    nmax = int(n_terms.max()) if t.size else 0
    n = np.arange(1, nmax, dtype=float)
    terms = np.exp(-s[:, None] * np.log(n)[None, :])
    terms[n[None, :] >= n_terms[:, None]] = 0.0
    acc = terms.sum(axis=1)
    big_n = n_terms.astype(float)
    n_pow = np.exp(-s * np.log(big_n))
    acc = acc + big_n * n_pow / (s - 1.0) + 0.5 * n_pow
    poch = s.copy()
    pw = n_pow / big_n
    for k, c in enumerate(EM_COEFFS):
        acc = acc + c * poch * pw
        poch = poch * (s + 2 * k + 1) * (s + 2 * k + 2)
        pw = pw / (big_n * big_n)
    return acc


# ---------------------------------------------------------------------------
# derivatives: theta'(t), Z'(t) from Riemann-Siegel, d zeta / ds from
# Euler-Maclaurin.  Differencing Z amplifies the ~1e-12 phase rounding of the
# main sum by 1/h, so Z' is differentiated term by term instead.

# psi(w) ~ ln w - 1/(2w) - sum B_2k / (2k w^2k)
DIGAMMA_COEFFS = np.array([BERNOULLI[k - 1] / (2 * k) for k in range(1, 9)])
# d/du of each RS correction polynomial
RS_DTABLE = np.zeros_like(RS_TABLE)
RS_DTABLE[:, :-1] = RS_TABLE[:, 1:] * np.arange(1, RS_TABLE.shape[1])


@njit
def _re_digamma_nb(x, y):
    z = complex(x, y)
    shift = 0j
    for j in range(8):
        shift += 1.0 / (z + j)
    w = z + 8.0
    res = cmath.log(w) - 0.5 / w
    w2 = w * w
    wp = w2
    for k in range(DIGAMMA_COEFFS.size):
        res -= DIGAMMA_COEFFS[k] / wp
        wp *= w2
    return (res - shift).real


@njit
def _theta_prime_scalar_nb(t):
    if t < THETA_SWITCH:
        return 0.5 * _re_digamma_nb(0.25, 0.5 * t) - 0.5 * LN_PI
    inv2 = 1.0 / (t * t)
    tail = 0.0
    for k in range(THETA_TAIL.size - 1, -1, -1):
        tail = tail * inv2 + (2 * k + 1) * THETA_TAIL[k]
    return 0.5 * math.log(t / TWO_PI) - tail * inv2


@njit
def theta_prime_nb(t):
    out = np.empty(t.size)
    for i in range(t.size):
        out[i] = _theta_prime_scalar_nb(abs(t[i]))
    return out


def theta_prime_np(t):
    a = np.abs(np.asarray(t, dtype=float))
    out = np.empty_like(a)
    big = a >= THETA_SWITCH
    if big.any():
        tb = a[big]
        inv2 = 1.0 / (tb * tb)
        tail = np.zeros_like(tb)
        for k in range(THETA_TAIL.size - 1, -1, -1):
            tail = tail * inv2 + (2 * k + 1) * THETA_TAIL[k]
        out[big] = 0.5 * np.log(tb / TWO_PI) - tail * inv2
    small = ~big
    if small.any():
        z = 0.25 + 0.5j * a[small]
        shift = np.zeros_like(z)
        for j in range(8):
            shift += 1.0 / (z + j)
        w = z + 8.0
        res = np.log(w) - 0.5 / w
        wp = w * w
        for c in DIGAMMA_COEFFS:
            res -= c / wp
            wp = wp * w * w
        out[small] = 0.5 * (res - shift).real - 0.5 * LN_PI
    return out


@njit
def rs_z_prime_nb(t):
    out = np.empty(t.size)
    nk = RS_TABLE.shape[0]
    nc = RS_TABLE.shape[1]
    for i in range(t.size):
        ti = abs(t[i])
        a = math.sqrt(ti / TWO_PI)
        n_main = int(a)
        u = a - n_main - 0.5
        th = _theta_scalar_nb(ti)
        dth = _theta_prime_scalar_nb(ti)
        s = 0.0
        for n in range(1, n_main + 1):
            ln = math.log(n)
            s += math.sin(th - ti * ln) * (dth - ln) / math.sqrt(n)
        dcorr = 0.0
        ak = 1.0 / math.sqrt(a)
        for k in range(nk):
            c = 0.0
            dc = 0.0
            for j in range(nc - 1, -1, -1):
                c = c * u + RS_TABLE[k, j]
                dc = dc * u + RS_DTABLE[k, j]
            dcorr += (dc - (k + 0.5) * c / a) * ak
            ak /= a
        sign = 1.0 if (n_main - 1) % 2 == 0 else -1.0
        d = -2.0 * s + sign * dcorr / (2.0 * TWO_PI * a)
        out[i] = d if t[i] >= 0 else -d
    return out


def rs_z_prime_np(t, chunk=4096):
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    for lo in range(0, t.size, chunk):
        tc = np.abs(t[lo : lo + chunk])
        a = np.sqrt(tc / TWO_PI)
        n_main = a.astype(np.int64)
        u = a - n_main - 0.5
        th = theta_np(tc)
        dth = theta_prime_np(tc)
        nmax = int(n_main.max()) if tc.size else 0
        n = np.arange(1, nmax + 1, dtype=float)
        ln = np.log(n)
        terms = np.sin(th[:, None] - tc[:, None] * ln[None, :]) * (dth[:, None] - ln[None, :]) / np.sqrt(n)[None, :]
        terms[n[None, :] > n_main[:, None]] = 0.0
        s = terms.sum(axis=1)
        dcorr = np.zeros_like(tc)
        ak = 1.0 / np.sqrt(a)
        for k in range(RS_TABLE.shape[0]):
            c = np.zeros_like(tc)
            dc = np.zeros_like(tc)
            for j in range(RS_TABLE.shape[1] - 1, -1, -1):
                c = c * u + RS_TABLE[k, j]
                dc = dc * u + RS_DTABLE[k, j]
            dcorr += (dc - (k + 0.5) * c / a) * ak
            ak = ak / a
        sign = np.where((n_main - 1) % 2 == 0, 1.0, -1.0)
        out[lo : lo + chunk] = -2.0 * s + sign * dcorr / (2.0 * TWO_PI * a)
    return np.where(t < 0, -out, out)


@njit
def em_zeta_ds_nb(t):
    out = np.empty(t.size, dtype=np.complex128)
    for i in range(t.size):
        ti = t[i]
        s = complex(0.5, ti)
        n_terms = int(max(10.0, 0.5 * abs(ti) + 10.0))
        acc = 0j
        for n in range(2, n_terms):
            ln = math.log(n)
            acc -= ln * cmath.exp(-s * ln)
        big_n = float(n_terms)
        ln_n = math.log(big_n)
        n_pow = cmath.exp(-s * ln_n)
        t1 = big_n * n_pow / (s - 1.0)
        acc += -ln_n * t1 - t1 / (s - 1.0) - 0.5 * ln_n * n_pow
        poch = s
        dpoch = 1.0 + 0j
        pw = n_pow / big_n
        for k in range(EM_COEFFS.size):
            acc += EM_COEFFS[k] * (dpoch - ln_n * poch) * pw
            f1 = s + 2 * k + 1
            f2 = s + 2 * k + 2
            dpoch = dpoch * f1 * f2 + poch * (f1 + f2)
            poch *= f1 * f2
            pw /= big_n * big_n
        out[i] = acc
    return out


def em_zeta_ds_np(t):
    t = np.asarray(t, dtype=float)
    s = 0.5 + 1j * t
    n_terms = np.maximum(10, (0.5 * np.abs(t) + 10.0).astype(np.int64))
    nmax = int(n_terms.max()) if t.size else 0
    n = np.arange(1, nmax, dtype=float)
    ln = np.log(n)
    terms = -ln[None, :] * np.exp(-s[:, None] * ln[None, :])
    terms[n[None, :] >= n_terms[:, None]] = 0.0
    acc = terms.sum(axis=1)
    big_n = n_terms.astype(float)
    ln_n = np.log(big_n)
    n_pow = np.exp(-s * ln_n)
    t1 = big_n * n_pow / (s - 1.0)
    acc = acc - ln_n * t1 - t1 / (s - 1.0) - 0.5 * ln_n * n_pow
    poch = s.copy()
    dpoch = np.ones_like(s)
    pw = n_pow / big_n
    for k, c in enumerate(EM_COEFFS):
        acc = acc + c * (dpoch - ln_n * poch) * pw
        f1 = s + 2 * k + 1
        f2 = s + 2 * k + 2
        dpoch = dpoch * f1 * f2 + poch * (f1 + f2)
        poch = poch * f1 * f2
        pw = pw / (big_n * big_n)
    return acc


# ---------------------------------------------------------------------------
# compensated running sum


@njit
def cumsum_compensated_nb(x):
    out = np.empty(x.size + 1)
    s = 0.0
    c = 0.0
    out[0] = 0.0
    for i in range(x.size):
        v = x[i]
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i + 1] = s + c
    return out


def cumsum_compensated_np(x):
    x = np.asarray(x, dtype=float)
    out = np.empty(x.size + 1)
    out[0] = 0.0
    s = 0.0
    c = 0.0
    for i, v in enumerate(x.tolist()):
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i + 1] = s + c
    return out


# ---------------------------------------------------------------------------
# RK4 march of V' = w(t) / (ln V + shift), w sampled on a half-step grid


@njit
def march_rk4_nb(w_half, h, v0, shift):
    n = (w_half.size - 1) // 2
    out = np.empty(n + 1)
    v = v0
    out[0] = v
    for i in range(n):
        f0 = w_half[2 * i]
        fm = w_half[2 * i + 1]
        f1 = w_half[2 * i + 2]
        k1 = f0 / (math.log(v) + shift)
        k2 = fm / (math.log(v + 0.5 * h * k1) + shift)
        k3 = fm / (math.log(v + 0.5 * h * k2) + shift)
        k4 = f1 / (math.log(v + h * k3) + shift)
        v += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        out[i + 1] = v
    return out


def march_rk4_np(w_half, h, v0, shift):
    w = np.asarray(w_half, dtype=float).tolist()
    n = (len(w) - 1) // 2
    out = np.empty(n + 1)
    v = v0
    out[0] = v
    log = math.log
    for i in range(n):
        f0, fm, f1 = w[2 * i], w[2 * i + 1], w[2 * i + 2]
        k1 = f0 / (log(v) + shift)
        k2 = fm / (log(v + 0.5 * h * k1) + shift)
        k3 = fm / (log(v + 0.5 * h * k2) + shift)
        k4 = f1 / (log(v + h * k3) + shift)
        v += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        out[i + 1] = v
    return out


# ---------------------------------------------------------------------------
# Jacobi sn, cn, dn by the descending AGM chain (x real, 0 <= m < 1)

AGM_TOL = 1e-14
_AGM_MAX = 40


@njit
def sncndn_nb(x, m):
    a = np.empty(_AGM_MAX + 1)
    c = np.empty(_AGM_MAX + 1)
    a[0] = 1.0
    b = math.sqrt(1.0 - m)
    c[0] = math.sqrt(m)
    depth = 0
    while abs(c[depth]) >= AGM_TOL and depth < _AGM_MAX:
        an = a[depth]
        a[depth + 1] = 0.5 * (an + b)
        c[depth + 1] = 0.5 * (an - b)
        b = math.sqrt(an * b)
        depth += 1
    quarter = math.pi / (2.0 * a[depth])
    period = 4.0 * quarter
    sn = np.empty(x.size)
    cn = np.empty(x.size)
    dn = np.empty(x.size)
    for i in range(x.size):
        xr = x[i] - period * math.floor(x[i] / period + 0.5)
        phi = (2.0**depth) * a[depth] * xr
        for n in range(depth, 0, -1):
            phi = 0.5 * (phi + math.asin(c[n] * math.sin(phi) / a[n]))
        sn[i] = math.sin(phi)
        cn[i] = math.cos(phi)
        # dn > 0 for m < 1; the Landen quotient cn / cos(phi_1 - phi_0) loses digits
        dn[i] = math.sqrt(1.0 - m * sn[i] * sn[i])
    return sn, cn, dn


def sncndn_np(x, m):
    x = np.asarray(x, dtype=float)
    a = [1.0]
    c = [math.sqrt(m)]
    b = math.sqrt(1.0 - m)
    while abs(c[-1]) >= AGM_TOL and len(a) <= _AGM_MAX:
        an = a[-1]
        a.append(0.5 * (an + b))
        c.append(0.5 * (an - b))
        b = math.sqrt(an * b)
    depth = len(a) - 1
    period = 2.0 * math.pi / a[depth]
    xr = x - period * np.floor(x / period + 0.5)
    phi = (2.0**depth) * a[depth] * xr
    for n in range(depth, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[n] * np.sin(phi) / a[n]))
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = np.sqrt(1.0 - m * sn * sn)
    return sn, cn, dn


# ---------------------------------------------------------------------------
# Bessel J_nu(x), nu > -1, x > 0

BESSEL_SERIES_MAX_X = 2.0


def bessel_switch(nu):
    """Argument above which the Hankel expansion replaces backward recurrence."""
    return max(25.0, 2.0 * abs(nu), 0.5 * nu * nu)


@njit
def _bessel_series_nb(nu, x):
    q = -0.25 * x * x
    term = (0.5 * x) ** nu / math.gamma(nu + 1.0)
    s = term
    for k in range(1, 60):
        term *= q / (k * (k + nu))
        s += term
        if abs(term) < 1e-17 * abs(s):
            break
    return s


@njit
def _bessel_miller_nb(nu, x):
    m_top = int(x + 30.0 + 10.0 * math.sqrt(x))
    m_top += m_top % 2
    lam = np.empty(m_top // 2 + 1)
    lam[0] = 1.0
    g = 1.0
    for k in range(1, m_top // 2 + 1):
        if k > 1:
            g *= (nu + k - 1.0) / k
        lam[k] = (nu + 2.0 * k) * g
    j_next = 0.0
    j_cur = 1e-30
    total = lam[m_top // 2] * j_cur
    for k in range(m_top, 0, -1):
        j_prev = 2.0 * (nu + k) / x * j_cur - j_next
        j_next = j_cur
        j_cur = j_prev
        if (k - 1) % 2 == 0:
            total += lam[(k - 1) // 2] * j_cur
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            total *= 1e-250
    return j_cur * (0.5 * x) ** nu / (math.gamma(nu + 1.0) * total)


@njit
def _bessel_hankel_nb(nu, x):
    mu = 4.0 * nu * nu
    p = 1.0
    q = 0.0
    term = 1.0
    last = 1e300
    for k in range(1, 80):
        term *= (mu - (2.0 * k - 1.0) ** 2) / (k * 8.0 * x)
        mag = abs(term)
        if mag > last:
            break
        signed = term if (k // 2) % 2 == 0 else -term
        if k % 2 == 1:
            q += signed
        else:
            p += signed
        if mag < 1e-17:
            break
        last = mag
    chi = x - (0.5 * nu + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


@njit
def bessel_j_nb(nu, x):
    out = np.empty(x.size)
    switch = max(25.0, 2.0 * abs(nu), 0.5 * nu * nu)
    for i in range(x.size):
        xi = x[i]
        if xi <= BESSEL_SERIES_MAX_X:
            out[i] = _bessel_series_nb(nu, xi)
        elif xi < switch:
            out[i] = _bessel_miller_nb(nu, xi)
        else:
            out[i] = _bessel_hankel_nb(nu, xi)
    return out


def _bessel_series_np(nu, x):
    q = -0.25 * x * x
    term = (0.5 * x) ** nu / math.gamma(nu + 1.0)
    s = term.copy()
    for k in range(1, 60):
        term = term * q / (k * (k + nu))
        s += term
        if np.all(np.abs(term) < 1e-17 * np.abs(s)):
            break
    return s


def _bessel_miller_np(nu, x):
    m_top = int(x.max() + 30.0 + 10.0 * math.sqrt(x.max()))
    m_top += m_top % 2
    lam = np.empty(m_top // 2 + 1)
    lam[0] = 1.0
    g = 1.0
    for k in range(1, m_top // 2 + 1):
        if k > 1:
            g *= (nu + k - 1.0) / k
        lam[k] = (nu + 2.0 * k) * g
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    total = lam[m_top // 2] * j_cur
    for k in range(m_top, 0, -1):
        j_prev = 2.0 * (nu + k) / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if (k - 1) % 2 == 0:
            total = total + lam[(k - 1) // 2] * j_cur
        big = np.abs(j_cur) > 1e250
        if big.any():
            f = np.where(big, 1e-250, 1.0)
            j_cur, j_next, total = j_cur * f, j_next * f, total * f
    return j_cur * (0.5 * x) ** nu / (math.gamma(nu + 1.0) * total)


def _bessel_hankel_np(nu, x):
    mu = 4.0 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    last = np.full_like(x, np.inf)
    live = np.ones(x.shape, dtype=bool)
    for k in range(1, 80):
        term = term * (mu - (2.0 * k - 1.0) ** 2) / (k * 8.0 * x)
        mag = np.abs(term)
        stop = live & (mag > last)
        live = live & ~stop
        signed = term if (k // 2) % 2 == 0 else -term
        add = np.where(live, signed, 0.0)
        if k % 2 == 1:
            q += add
        else:
            p += add
        live = live & (mag >= 1e-17)
        last = mag
        if not live.any():
            break
    chi = x - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j_np(nu, x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    switch = bessel_switch(nu)
    lo = x <= BESSEL_SERIES_MAX_X
    hi = x >= switch
    mid = ~lo & ~hi
    if lo.any():
        out[lo] = _bessel_series_np(nu, x[lo])
    if mid.any():
        out[mid] = _bessel_miller_np(nu, x[mid])
    if hi.any():
        out[hi] = _bessel_hankel_np(nu, x[hi])
    return out


# ---------------------------------------------------------------------------
# dispatch

if USE_NUMBA:
    theta = theta_nb
    rs_z = rs_z_nb
    em_zeta = em_zeta_nb
    theta_prime = theta_prime_nb
    rs_z_prime = rs_z_prime_nb
    em_zeta_ds = em_zeta_ds_nb
    cumsum_compensated = cumsum_compensated_nb
    march_rk4 = march_rk4_nb
    sncndn = sncndn_nb
    bessel_j = bessel_j_nb
else:
    theta = theta_np
    rs_z = rs_z_np
    em_zeta = em_zeta_np
    theta_prime = theta_prime_np
    rs_z_prime = rs_z_prime_np
    em_zeta_ds = em_zeta_ds_np
    cumsum_compensated = cumsum_compensated_np
    march_rk4 = march_rk4_np
    sncndn = sncndn_np
    bessel_j = bessel_j_np
