"""Benchmark the compiled training kernels against the pure-Python/NumPy path.

Runs the same sigmoid and softmax training workloads through both backends
and reports wall-clock time per epoch plus the maximum per-cell weight
divergence (the loops are arithmetic mirrors, so divergence should sit at
floating-point noise).

Usage: python benchmarks/bench_kernels.py [--rows 2048] [--dim 512]
       [--classes 20] [--epochs 50] [--repeats 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mwi.kernels import _python

try:
    from mwi.kernels import _speedups
except ImportError:
    _speedups = None


def make_workload(rows: int, dim: int, classes: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((rows, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    w = rng.standard_normal((dim, classes))
    w /= np.linalg.norm(w, axis=0, keepdims=True)
    labels = rng.integers(0, classes, size=rows)
    y = np.zeros((rows, classes))
    y[np.arange(rows), labels] = 1.0
    extra = rng.random((rows, classes)) < 0.15
    y_multi = np.maximum(y, extra)
    return x, w, y, y_multi


def run_backend(module, name: str, x, w0, y, epochs: int, repeats: int):
    fn = getattr(module, name)
    best = float("inf")
    weights = None
    for _ in range(repeats):
        weights = np.ascontiguousarray(w0.copy())
        start = time.perf_counter()
        fn(weights, x, y, epochs, 1e-3, 0.9, 0.999, 1e-8, True)
        best = min(best, time.perf_counter() - start)
    return best, weights


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=2048)
    parser.add_argument("--dim", type=int, default=512)
    parser.add_argument("--classes", type=int, default=20)
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    x, w0, y_single, y_multi = make_workload(args.rows, args.dim, args.classes)
    print(
        f"workload: {args.rows} rows x {args.dim} dims, {args.classes} classes, "
        f"{args.epochs} epochs, best of {args.repeats}"
    )

    for head, target in (("sigmoid", y_multi), ("softmax", y_single)):
        name = f"train_{head}"
        py_time, py_w = run_backend(_python, name, x, w0, target, args.epochs, args.repeats)
        line = f"{name:14s} python {py_time:8.3f}s ({py_time / args.epochs * 1e3:7.2f} ms/epoch)"
        if _speedups is None:
            print(line + "   cython: not built")
            continue
        cy_time, cy_w = run_backend(_speedups, name, x, w0, target, args.epochs, args.repeats)
        diff = float(np.max(np.abs(py_w - cy_w)))
        print(
            line
            + f"   cython {cy_time:8.3f}s ({cy_time / args.epochs * 1e3:7.2f} ms/epoch)"
            + f"   speedup {py_time / cy_time:5.2f}x   max|dw| {diff:.2e}"
        )


if __name__ == "__main__":
    main()
