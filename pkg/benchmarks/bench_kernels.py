"""Compare the compiled trajectory kernel against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--n N] [--trials T]

Checks that both backends draw identical letter streams and near-identical
samples, then times them on the same workload.
"""

import argparse
import math
import time

import numpy as np

from cocyclekit._kernels import run_paths_compiled, run_paths_numpy


def workload():
    mats = np.array([[[2.0, 0.0], [0.0, 0.5]],
                     [[0.0, 0.0], [0.0, 1.0]],
                     [[0.6, -0.8], [0.8, 0.6]]])
    p = np.array([0.4, 0.3, 0.3])
    cdf0 = np.cumsum(p)
    cdfP = np.tile(cdf0[:, None], (1, 3))
    return mats, cdf0, cdfP


def bench(fn, mats, cdf0, cdfP, start, seed, n, trials, repeats=3):
    best = math.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(mats, cdf0, cdfP, True, start, seed, n, trials)
        best = min(best, time.perf_counter() - t0)
    return np.asarray(out), best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=12345)
    args = ap.parse_args()

    mats, cdf0, cdfP = workload()
    start = np.tile([math.cos(0.7), math.sin(0.7)], (args.trials, 1))

    numpy_out, numpy_t = bench(run_paths_numpy, mats, cdf0, cdfP, start,
                               args.seed, args.n, args.trials)
    print(f"numpy fallback : {numpy_t * 1e3:9.2f} ms "
          f"({args.n * args.trials / numpy_t / 1e6:.1f} Msteps/s)")

    if run_paths_compiled is None:
        print("compiled kernel: not built")
        return

    comp_out, comp_t = bench(run_paths_compiled, mats, cdf0, cdfP, start,
                             args.seed, args.n, args.trials)
    print(f"compiled kernel: {comp_t * 1e3:9.2f} ms "
          f"({args.n * args.trials / comp_t / 1e6:.1f} Msteps/s)")
    print(f"speedup        : {numpy_t / comp_t:9.2f}x")

    gap = float(np.max(np.abs(comp_out - numpy_out)))
    scale = float(np.max(np.abs(numpy_out))) or 1.0
    print(f"max sample gap : {gap:.3e} (relative {gap / scale:.3e})")
    assert gap / scale < 1e-10, "backends disagree beyond rounding"
    print("backends agree within rounding")


if __name__ == "__main__":
    main()
