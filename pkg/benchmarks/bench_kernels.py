"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat N] [--quick]

Both paths are imported side by side, so the env flag is not needed here.
The first numba call (compilation, or a cache load) is reported separately.
"""
import argparse
import time

import numpy as np

from onewaypos import _kernels as K
from onewaypos.ranging import hull_halfplanes


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(quick):
    rng = np.random.default_rng(0)
    n = 20_000 if quick else 200_000
    tri = rng.uniform(0, 100, size=(3, 2))
    tet = rng.uniform(0, 100, size=(4, 3))
    p2 = rng.uniform(-10, 110, size=(n, 2))
    p3 = rng.uniform(-10, 110, size=(n, 3))
    q2 = rng.uniform(20, 80, size=(n, 2))

    S = rng.uniform(0, 100, size=(5, 2))
    b = np.linalg.norm(S - 50.0, axis=1) + rng.normal(0, 0.3, 5)
    step = 0.05 if quick else 0.01
    lo, hi = S.min(axis=0), S.max(axis=0)
    nx, ny = int((hi[0] - lo[0]) / step) + 1, int((hi[1] - lo[1]) / step) + 1
    ha, hb = hull_halfplanes(S)
    xs, ys = np.linspace(lo[0], hi[0], 400), np.linspace(lo[1], hi[1], 400)

    return [
        (f"barycentric 2D x{n}", "barycentric_batch", (tri, p2)),
        (f"barycentric 3D x{n}", "barycentric_batch", (tet, p3)),
        (f"witness 2D x{n}", "witness_batch", (tri, p2, q2)),
        (f"grid min {nx}x{ny} hull", "grid_min", (S, b, lo, step, nx, ny, ha, hb)),
        ("objective grid 400x400", "objective_grid", (S, b, xs, ys)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args(argv)

    if not K.HAVE_NUMBA:
        print("numba is not installed; only the numpy path is available")
    print(f"{'kernel':<34}{'numpy s':>10}{'numba s':>10}{'first s':>10}{'speedup':>9}")
    for label, name, data in cases(args.quick):
        f_np = getattr(K, f"{name}_numpy")
        f_nb = getattr(K, f"{name}_numba")
        t0 = time.perf_counter()
        f_nb(*data)
        first = time.perf_counter() - t0
        t_np = best_of(lambda: f_np(*data), args.repeat)
        t_nb = best_of(lambda: f_nb(*data), args.repeat)
        print(f"{label:<34}{t_np:>10.4f}{t_nb:>10.4f}{first:>10.3f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
