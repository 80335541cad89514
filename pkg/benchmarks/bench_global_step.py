"""Compare the numba and numpy global-step kernels on rings of growing size.

    python benchmarks/bench_global_step.py [--sizes 1000 10000 100000 1000000] [--work 20000000]

Each size runs roughly ``work`` cell updates, so the per-update times are
comparable across sizes.
"""

import argparse
import time

import numpy as np

from mca import kernels, zoo
from mca.automaton import evolve_array, step_array


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[10**3, 10**4, 10**5, 10**6])
    ap.add_argument("--work", type=int, default=2 * 10**7)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    print(f"{'cells':>9} {'backend':>7} {'one step ms':>12} {'ns/update':>10} {'speedup':>8}")
    for n in args.sizes:
        ca = zoo.ring(n)
        c = np.random.default_rng(n).integers(0, 2, n)
        steps = max(1, args.work // n)
        base = None
        for be in backends:
            evolve_array(ca, c, 1, be)  # compile / warm caches
            one = best_of(lambda: step_array(ca, c, be), args.repeat)
            many = best_of(lambda: evolve_array(ca, c, steps, be), args.repeat)
            per = many / (steps * n) * 1e9
            base = base or per
            print(f"{n:>9} {be:>7} {one * 1e3:>12.3f} {per:>10.3f} {base / per:>7.1f}x")


if __name__ == "__main__":
    main()
