"""Benchmark the numba kernels against the pure-numpy fallbacks.

Usage:
    python benchmarks/bench_kernels.py [--repeats 5]

Times each kernel pair on sizes well above the bundled experiment scale
so the loop cost dominates. The numba path is compiled (and disk-cached)
before timing starts.
"""

import argparse
import time

import numpy as np

from sogran.kernels import _NUMPY_IMPLS, compile_numba_kernels


def best_of(repeats, fn, *args):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def make_problems(rng):
    units, dim = 144, 8
    data = rng.normal(size=(4000, dim))
    codebook = rng.normal(size=(units, dim))
    order = rng.permutation(data.shape[0]).astype(np.int64)
    rows, cols = np.divmod(np.arange(units), 12)
    grid_d2 = ((rows[:, None] - rows) ** 2 + (cols[:, None] - cols) ** 2).astype(float)

    rules = 10
    centers = rng.normal(size=(rules, dim))
    widths = rng.uniform(0.5, 2.0, size=(rules, dim))
    coeffs = rng.normal(size=(rules, dim + 1))
    targets = rng.normal(size=data.shape[0])

    return {
        "assign_bmus": (codebook, data),
        "som_epoch": (codebook.copy(), data, order, grid_d2, 0.0,
                      float(10 * len(data)), 0.5, 2.0),
        "fis_firing": (centers, widths, data),
        "fis_premise_gradient": (centers, widths, coeffs, data, targets),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    problems = make_problems(rng)
    numba_impls = compile_numba_kernels()

    print(f"{'kernel':<22} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, base_args in problems.items():
        # fresh argument copies per run so som_epoch's in-place update
        # does not accumulate across timings
        def run(impl):
            call_args = tuple(a.copy() if isinstance(a, np.ndarray) else a
                              for a in base_args)
            return impl(*call_args)

        run(numba_impls[name])  # warm-up / compile
        t_np = best_of(args.repeats, run, _NUMPY_IMPLS[name])
        t_nb = best_of(args.repeats, run, numba_impls[name])
        print(f"{name:<22} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
