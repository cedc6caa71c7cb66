"""Compiled vs pure-Python SMO, plus a timed selection run.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from ifra import _smo_py, kernels
from ifra.pipeline import run_demo


def _gram(n, d, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    y = np.where(np.arange(n) < n // 2, 1.0, -1.0)
    x[y > 0, 0] += 2.0
    return np.ascontiguousarray(x @ x.T), y


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    print(f"active backend: {kernels.BACKEND}")
    print(f"{'n':>5} {'compiled ms':>12} {'python ms':>10} {'speedup':>8}")
    for n in (40, 78, 160):
        k, y = _gram(n, 100, n)
        py = _best(lambda: _smo_py.smo_solve(k, y, 1.0, 1e-3, 100, 1), args.repeat)
        if kernels.BACKEND == "compiled":
            from ifra import _smo
            c = _best(lambda: _smo.smo_solve(k, y, 1.0, 1e-3, 100, 1), args.repeat)
            print(f"{n:>5} {c * 1e3:>12.3f} {py * 1e3:>10.3f} {py / c:>8.1f}")
        else:
            print(f"{n:>5} {'n/a':>12} {py * 1e3:>10.3f} {'':>8}")

    t = time.perf_counter()
    run_demo(0, iterations=1000)
    print(f"end-to-end demo, 1000 iterations ({kernels.BACKEND}): {time.perf_counter() - t:.2f} s")


if __name__ == "__main__":
    main()
