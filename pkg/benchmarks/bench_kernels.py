"""Compare the compiled and numpy backends on the two hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per (kernel, size, backend) with the best wall time, and
checks that both backends return identical results.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from signed_iwasawa import kernels


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def bench_howell(backends: dict, repeat: int) -> None:
    rng = np.random.default_rng(0)
    for p, n, rows, cols in ((3, 2, 60, 60), (5, 1, 250, 250), (5, 2, 250, 250), (3, 3, 400, 300)):
        N = p**n
        A = rng.integers(0, N, size=(rows, cols), dtype=np.int64)
        # depress valuations so non-unit pivots and saturation rows occur
        A[:, : cols // 2] = A[:, : cols // 2] * p % N
        results = {}
        for name, mod in backends.items():
            def run(mod=mod):
                T = np.zeros((rows + cols + 1, cols), dtype=np.int64)
                T[:rows] = A
                used, piv = mod.howell_eliminate(T, rows, cols, p, n)
                return T[: len(piv)].copy(), piv

            results[name] = run()
            dt = _best(run, repeat)
            print("howell    p=%d n=%d %4dx%-4d %-7s %9.4f s" % (p, n, rows, cols, name, dt))
        ref = next(iter(results.values()))
        for name, (T, piv) in results.items():
            assert np.array_equal(T, ref[0]) and piv == ref[1], "backend %s disagrees" % name


def bench_points(backends: dict, repeat: int) -> None:
    for ell in (10007, 65521, 1000003):
        results = {}
        for name, mod in backends.items():
            results[name] = mod.count_points_odd(0, 0, 1, -1, 0, ell)
            dt = _best(lambda mod=mod: mod.count_points_odd(0, 0, 1, -1, 0, ell), repeat)
            print("points    ell=%-8d          %-7s %9.4f s" % (ell, name, dt))
        assert len(set(results.values())) == 1, results


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print("active backend: %s; comparing %s" % (kernels.BACKEND, ", ".join(backends)))
    bench_howell(backends, args.repeat)
    bench_points(backends, args.repeat)


if __name__ == "__main__":
    main()
