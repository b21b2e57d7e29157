"""Timing comparison of the jitted kernels against the numpy fallbacks.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from grasplog import kernels
from grasplog.scene import generate_pile


def _time(fn, repeats=5):
    fn()  # warm up (includes jit compile on the numba path)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_perlin(n=512):
    xs = np.linspace(0.0, 5.0, n)
    xx, yy = np.meshgrid(xs, xs)

    def run():
        kernels.perlin_points(xx, yy, 4, 0.05, 1.0, 12345)

    return run


def bench_raster(n=512):
    pile = generate_pile(8, 3)
    xs = np.linspace(0.0, 5.0, n)
    terrain = np.zeros((n, n))
    seg_a = np.array([log.endpoints_3d()[0] for log in pile.logs])
    seg_b = np.array([log.endpoints_3d()[1] for log in pile.logs])
    radii = np.array([log.radius for log in pile.logs])

    def run():
        kernels.raster_cylinders(xs, xs[::-1], terrain, seg_a, seg_b, radii)

    return run


def main():
    if not kernels.HAVE_NUMBA:
        print("numba path unavailable (missing or disabled); "
              "timing numpy fallback only")
    rows = []
    for name, factory in (("perlin 512x512x4oct", bench_perlin),
                          ("raster 512x512x8logs", bench_raster)):
        fast = _time(factory()) if kernels.HAVE_NUMBA else None

        kernels.HAVE_NUMBA, saved = False, kernels.HAVE_NUMBA
        try:
            slow = _time(factory())
        finally:
            kernels.HAVE_NUMBA = saved
        rows.append((name, fast, slow))

    print(f"{'kernel':<22} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, fast, slow in rows:
        if fast is None:
            print(f"{name:<22} {'n/a':>10} {slow * 1e3:>8.1f}ms {'':>8}")
        else:
            print(f"{name:<22} {fast * 1e3:>8.1f}ms {slow * 1e3:>8.1f}ms "
                  f"{slow / fast:>7.1f}x")


if __name__ == "__main__":
    main()
