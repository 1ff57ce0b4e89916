"""Adaptive quadrature, bracketed root finding and damped fixed-point iteration."""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import BracketError, ConvergenceError

# Kronrod 21-point abscissae on [0, 1]; the odd entries are the 10-point Gauss nodes.
_XGK = np.array(
    [
        0.995657163025808080735527280689003,
        0.973906528517171720077964012084452,
        0.930157491355708226001207180059508,
        0.865063366688984510732096688423493,
        0.780817726586416897063717578345042,
        0.679409568299024406234327365114874,
        0.562757134668604683339000099272694,
        0.433395394129247190799265943165784,
        0.294392862701460198131126603103866,
        0.148874338981631210884826001129720,
        0.000000000000000000000000000000000,
    ]
)


def _kronrod_rule():
    nodes = np.concatenate([-_XGK[:-1], _XGK[::-1]])
    # weights from exact Legendre moments: int P_0 = 2, int P_k = 0 for k >= 1
    vander = np.polynomial.legendre.legvander(nodes, nodes.size - 1).T
    moments = np.zeros(nodes.size)
    moments[0] = 2.0
    weights = np.linalg.solve(vander, moments)
    weights = 0.5 * (weights + weights[::-1])
    g_nodes, g_weights = np.polynomial.legendre.leggauss(10)
    gauss = np.zeros(nodes.size)
    for x, w in zip(g_nodes, g_weights):
        gauss[np.argmin(np.abs(nodes - x))] = w
    return nodes, weights, gauss


GK_NODES, GK_WEIGHTS, GAUSS_WEIGHTS = _kronrod_rule()
#: degree of polynomials the 21-point Kronrod rule integrates exactly
GK_DEGREE = 31

ABS_FLOOR = 1e-14
MAX_PANELS = 10_000


@dataclass
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    converged: bool
    panels: int = 0


def _panel_rule(f, lo, hi):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * GK_NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    kron = half * (y @ GK_WEIGHTS)
    gauss = half * (y @ GAUSS_WEIGHTS)
    return kron, np.abs(kron - gauss)


def adaptive_integrate(f, a, b, tol=1e-10, singular_hints=(), abs_floor=ABS_FLOOR, max_panels=MAX_PANELS):
    """Integrate a vectorized ``f`` over ``[a, b]`` by adaptive Gauss-Kronrod 10/21.

    ``tol`` is relative to the integral, with ``abs_floor`` as absolute floor.
    Points in ``singular_hints`` that fall strictly inside ``(a, b)`` become
    forced panel boundaries (kinks, peaks, endpoint singularities).  Panels are
    bisected in vectorized rounds until the summed error estimate meets the
    target or ``max_panels`` is reached, in which case the result is returned
    with ``converged=False``.
    """
    a = float(a)
    b = float(b)
    if b < a:
        raise ValueError("adaptive_integrate requires a <= b")
    if a == b:
        return QuadratureResult(0.0, 0.0, 0, True, 0)
    cuts = sorted({a, b, *(float(h) for h in singular_hints if a < h < b)})
    lo = np.array(cuts[:-1])
    hi = np.array(cuts[1:])
    vals, errs = _panel_rule(f, lo, hi)
    evaluations = lo.size * GK_NODES.size
    done_val = 0.0
    done_err = 0.0
    n_panels = lo.size
    length = b - a
    while True:
        total = done_val + vals.sum()
        err = done_err + errs.sum()
        target = max(tol * abs(total), abs_floor)
        if err <= target:
            return QuadratureResult(float(total), float(err), evaluations, True, n_panels)
        # panels whose share of the budget is exceeded get bisected
        share = target * (hi - lo) / length
        bad = errs > share
        if not bad.any():
            bad = errs >= errs.max()
        if n_panels + int(bad.sum()) > max_panels:
            return QuadratureResult(float(total), float(err), evaluations, False, n_panels)
        done_val += vals[~bad].sum()
        done_err += errs[~bad].sum()
        mid = 0.5 * (lo[bad] + hi[bad])
        lo, hi = np.concatenate([lo[bad], mid]), np.concatenate([mid, hi[bad]])
        vals, errs = _panel_rule(f, lo, hi)
        evaluations += lo.size * GK_NODES.size
        n_panels += lo.size // 2


def find_root_bracketed(f, lo, hi, tol=1e-12, max_iter=200):
    """Brent's method on a sign-changing bracket.

    Never evaluates outside ``[lo, hi]``; the returned abscissa is the best
    iterate seen, so ``|f(root)|`` never exceeds ``|f|`` at either endpoint.
    """
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise BracketError(f"no sign change on [{a}, {b}]: f = {fa}, {fb}")
    c, fc = a, fa
    d = e = b - a
    for _ in range(max_iter):
        if math.copysign(1.0, fb) == math.copysign(1.0, fc):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * 2.2e-16 * abs(b) + 0.5 * tol
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = xm
        else:
            d = e = xm
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = f(b)
    raise ConvergenceError(f"Brent iteration budget ({max_iter}) exhausted", last=b)


@dataclass
class FixedPointResult:
    x: float
    iterations: int
    residual: float
    history: list = field(default_factory=list)


def fixed_point(g, x0, damping=0.5, tol=1e-10, max_iter=100):
    """Damped iteration ``x <- (1 - damping) x + damping g(x)``.

    Stops when successive iterates differ by at most ``tol``.  ``residual`` is
    ``|x - g(x)|`` at the returned point, computed from the last evaluation.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    x = float(x0)
    history = [x]
    for it in range(1, max_iter + 1):
        gx = float(g(x))
        if not math.isfinite(gx):
            raise ConvergenceError("fixed-point map returned a non-finite value", last=x, history=history)
        x_new = (1.0 - damping) * x + damping * gx
        history.append(x_new)
        if abs(x_new - x) <= tol:
            # |x_new - g(x_new)| ~ |x - g(x)| (1 - damping) for a slowly varying g
            return FixedPointResult(x_new, it, abs(x - gx) * (1.0 - damping), history)
        x = x_new
    raise ConvergenceError(f"fixed point not reached in {max_iter} iterations", last=x, history=history)
