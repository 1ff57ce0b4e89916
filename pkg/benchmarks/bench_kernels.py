"""Time the numba kernels against their numpy twins on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat N] [--size N]

Both variants are imported directly, so the JACOBS_LADDER_NUMBA flag does not
matter here.  The first numba call of each kernel is a warm-up and excluded.
"""

import argparse
import timeit

import numpy as np

from jacobs_ladder import _accel
from jacobs_ladder import _kernels as K


def cases(size):
    rng = np.random.default_rng(0)
    t_rs = np.sort(rng.uniform(200, 1e4, size))
    t_em = np.sort(rng.uniform(10, 200, max(size // 10, 1)))
    x = rng.uniform(-500, 500, size)
    xb = rng.uniform(0.5, 3000, size)
    w = rng.uniform(0.5, 5, 4 * size + 1)
    return [
        ("theta", K.theta_nb, K.theta_np, (t_rs,)),
        ("rs_z", K.rs_z_nb, K.rs_z_np, (t_rs,)),
        ("rs_z_prime", K.rs_z_prime_nb, K.rs_z_prime_np, (t_rs,)),
        ("em_zeta", K.em_zeta_nb, K.em_zeta_np, (t_em,)),
        ("sncndn", K.sncndn_nb, K.sncndn_np, (x, 0.5)),
        ("bessel_j", K.bessel_j_nb, K.bessel_j_np, (0.0, xb)),
        ("cumsum_compensated", K.cumsum_compensated_nb, K.cumsum_compensated_np, (w,)),
        ("march_rk4", K.march_rk4_nb, K.march_rk4_np, (w, 0.01, 100.0, -0.26)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=20000)
    args = ap.parse_args()
    if not _accel.NUMBA_AVAILABLE:
        print("numba is not installed; both columns time the numpy kernels")
    print(f"{'kernel':<20} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8} {'max diff':>10}")
    for name, fast, slow, argv in cases(args.size):
        a = fast(*argv)  # warm-up compiles
        b = slow(*argv)
        diff = max(float(np.max(np.abs(np.asarray(u) - np.asarray(v)))) for u, v in
                   zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)))
        tf = min(timeit.repeat(lambda: fast(*argv), number=1, repeat=args.repeat)) * 1e3
        ts = min(timeit.repeat(lambda: slow(*argv), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<20} {tf:>10.3f} {ts:>10.3f} {ts / tf:>8.1f} {diff:>10.2e}")


if __name__ == "__main__":
    main()
