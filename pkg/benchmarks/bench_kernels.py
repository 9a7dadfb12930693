"""Compare the compiled scatter-add kernel against the pure-numpy fallback.

Builds the same intensive observables with both backends and reports wall
time plus the max elementwise deviation between the results.  Run as
``python3 benchmarks/bench_kernels.py [--sizes 6 8 10 ...]``.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from macrolab import backend
from macrolab._kernels_py import accumulate_embedded as pure_kernel
from macrolab.hilbert import PAULI_X, PAULI_Z, HilbertSpace, LocalOperator
from macrolab.observables import build_intensive

TEMPLATES = {
    "one-body": LocalOperator((0,), PAULI_Z),
    "two-body": LocalOperator((0, 1), np.kron(PAULI_Z, PAULI_Z)),
    "two-body-x": LocalOperator((0, 1), np.kron(PAULI_X, PAULI_X)),
}


def _timed(func, repeats: int = 3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = func()
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--sizes", type=int, nargs="+", default=[6, 8, 10, 12], metavar="F"
    )
    args = parser.parse_args()

    if backend.KERNEL_BACKEND != "compiled":
        print(
            "compiled kernel unavailable (or MACROLAB_PURE set); "
            "both columns will use the pure fallback"
        )

    compiled_kernel = backend.accumulate_embedded
    header = f"{'template':>12s} {'f':>3s} {'compiled':>12s} {'pure':>12s} {'speedup':>8s} {'max|diff|':>10s}"
    print(header)
    print("-" * len(header))
    for name, template in TEMPLATES.items():
        for f in args.sizes:
            space = HilbertSpace(f)
            results = {}
            times = {}
            for label, kernel in (("compiled", compiled_kernel), ("pure", pure_kernel)):
                backend.accumulate_embedded = kernel
                try:
                    times[label], results[label] = _timed(
                        lambda: build_intensive(template, space)
                    )
                finally:
                    backend.accumulate_embedded = compiled_kernel
            diff = np.abs(
                results["compiled"].operator.matrix - results["pure"].operator.matrix
            ).max()
            speedup = times["pure"] / times["compiled"]
            print(
                f"{name:>12s} {f:3d} {times['compiled']:12.6f} {times['pure']:12.6f} "
                f"{speedup:7.1f}x {diff:10.2e}"
            )


if __name__ == "__main__":
    main()
