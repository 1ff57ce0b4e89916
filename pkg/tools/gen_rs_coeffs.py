"""Regenerate ``src/jacobs_ladder/_rs_coeffs.py``.

The Riemann-Siegel correction terms C0..C4 are expanded as power series in
``u = p - 1/2`` where ``p`` is the fractional part of ``sqrt(t / 2 pi)``.
Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) = -cos(2 pi u^2 - 5 pi / 8) / cos(2 pi u)
is entire, so its Taylor series (built here by exact formal division at high
precision) converges on the whole interval |u| <= 1/2.

Usage: python3 tools/gen_rs_coeffs.py > src/jacobs_ladder/_rs_coeffs.py
"""

import mpmath as mp

mp.mp.dps = 80
DEG = 90


def series_cos(a, b, deg):
    # cos(a * u**2 + b) as coefficients in u
    out = [mp.mpf(0)] * (deg + 1)
    for k in range(deg // 2 + 1):
        # d^k/dx^k cos(x + b) at x=0 divided by k!, times a^k, at u^(2k)
        out[2 * k] = mp.cos(b + k * mp.pi / 2) * a**k / mp.factorial(k)
    return out


def series_cos_lin(a, deg):
    # cos(a * u)
    return [mp.cos(k * mp.pi / 2) * a**k / mp.factorial(k) for k in range(deg + 1)]


def divide(num, den, deg):
    q = [mp.mpf(0)] * (deg + 1)
    for n in range(deg + 1):
        s = num[n] - sum(q[j] * den[n - j] for j in range(n))
        q[n] = s / den[0]
    return q


def deriv(c, m):
    out = list(c)
    for _ in range(m):
        out = [out[k] * k for k in range(1, len(out))] + [mp.mpf(0)]
    return out


def lincomb(*pairs):
    n = len(pairs[0][1])
    return [sum(w * s[k] for w, s in pairs) for k in range(n)]


def main():
    num = series_cos(2 * mp.pi, -5 * mp.pi / 8, DEG)
    den = series_cos_lin(2 * mp.pi, DEG)
    psi = [-c for c in divide(num, den, DEG)]
    pi = mp.pi
    c0 = psi
    c1 = lincomb((-1 / (96 * pi**2), deriv(psi, 3)))
    c2 = lincomb((1 / (64 * pi**2), deriv(psi, 2)), (1 / (18432 * pi**4), deriv(psi, 6)))
    c3 = lincomb(
        (-1 / (64 * pi**2), deriv(psi, 1)),
        (-1 / (3840 * pi**4), deriv(psi, 5)),
        (-1 / (5308416 * pi**6), deriv(psi, 9)),
    )
    c4 = lincomb(
        (1 / (128 * pi**2), psi),
        (mp.mpf(19) / (24576 * pi**4), deriv(psi, 4)),
        (mp.mpf(11) / (5898240 * pi**6), deriv(psi, 8)),
        (1 / (2038431744 * pi**8), deriv(psi, 12)),
    )
    print('"""Taylor coefficients of the Riemann-Siegel corrections C0..C4 in u = p - 1/2.')
    print()
    print("Generated by tools/gen_rs_coeffs.py; do not edit by hand.")
    print('"""')
    print()
    print("RS_COEFFS = (")
    for series in (c0, c1, c2, c3, c4):
        # drop terms below 1e-20 at |u| = 1/2
        keep = [k for k in range(len(series)) if abs(series[k]) * mp.mpf(0.5) ** k > mp.mpf("1e-20")]
        top = max(keep) if keep else 0
        print("    (")
        for k in range(top + 1):
            v = series[k] if abs(series[k]) > mp.mpf("1e-50") else mp.mpf(0)
            print(f"        {mp.nstr(v, 20, min_fixed=-1, max_fixed=-1)},")
        print("    ),")
    print(")")


if __name__ == "__main__":
    main()
