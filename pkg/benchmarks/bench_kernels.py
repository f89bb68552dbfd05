#!/usr/bin/env python3
"""Benchmark the SVM training kernel: numba JIT build vs interpreted build.

The workload mirrors one experiment's loss-table cells: many small trainings
(32 samples, 1-2 features, C=1). Outputs a timing table and verifies that
both builds return bit-identical results.

Usage:
    python benchmarks/bench_kernels.py [--cells 2000] [--seed 0]
"""

import argparse
import time

import numpy as np

from cvpool._kernels import BACKEND, smo_train, smo_train_python


def make_workload(n_cells: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    cells = []
    for _ in range(n_cells):
        n = 32
        d = int(rng.integers(1, 3))
        X = rng.standard_normal((n, d))
        y = np.where(rng.random(n) < 0.55, 1.0, -1.0)
        if np.all(y == y[0]):
            y[0] = -y[0]
        # plant a weak signal in half the cells so workloads are mixed
        if rng.random() < 0.5:
            X[:, 0] += y * 0.6
        cells.append((X, y))
    return cells


def run(fn, cells) -> float:
    t0 = time.perf_counter()
    for X, y in cells:
        fn(X, y, 1.0, 1e-3, 100_000)
    return time.perf_counter() - t0


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cells", type=int, default=2000, help="number of trainings per pass")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    cells = make_workload(args.cells, args.seed)

    if BACKEND != "numba":
        print("note: numba backend unavailable or disabled; timing interpreted build only")
        elapsed = run(smo_train_python, cells)
        print(f"python    {elapsed:8.3f} s total  {elapsed / len(cells) * 1e6:9.1f} us/train")
        return

    # warm up (JIT compile) outside the timed region
    X0, y0 = cells[0]
    smo_train(X0, y0, 1.0, 1e-3, 100_000)

    t_jit = run(smo_train, cells)
    t_py = run(smo_train_python, cells)

    print(f"workload: {len(cells)} trainings, 32 samples each, 1-2 features")
    print(f"{'build':<10}{'total':>10}{'per train':>14}")
    print(f"{'numba':<10}{t_jit:9.3f}s{t_jit / len(cells) * 1e6:11.1f} us")
    print(f"{'python':<10}{t_py:9.3f}s{t_py / len(cells) * 1e6:11.1f} us")
    print(f"speedup: {t_py / t_jit:.1f}x")

    mismatches = 0
    for X, y in cells[:200]:
        a1, w1, b1, c1, s1 = smo_train(X, y, 1.0, 1e-3, 100_000)
        a2, w2, b2, c2, s2 = smo_train_python(X, y, 1.0, 1e-3, 100_000)
        same = (
            np.array_equal(a1, a2)
            and np.array_equal(w1, w2)
            and b1 == b2
            and c1 == c2
            and s1 == s2
        )
        mismatches += 0 if same else 1
    print(f"bit-identical results on 200 spot checks: {'yes' if mismatches == 0 else f'NO ({mismatches} mismatches)'}")


if __name__ == "__main__":
    main()
