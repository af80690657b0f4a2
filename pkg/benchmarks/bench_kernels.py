"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 256] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from aotomo import _kernels_py, kernels

try:
    from aotomo import _kernels
except ImportError:
    _kernels = None


def bench(label, fn, repeat):
    t = min(timeit.repeat(fn, number=1, repeat=repeat))
    print(f"  {label:<10s} {1e3 * t:9.3f} ms")
    return t


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    n = args.n
    f = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    x = -1 + (np.arange(n) + 0.5) * (2 / n)
    xs, ys = 0.9 * x + 0.013, 0.9 * x - 0.021
    impls = [("numpy", _kernels_py)] + ([("cython", _kernels)] if _kernels else [])

    print(f"bilinear_tensor, {n}x{n} samples")
    times = {name: bench(name, lambda m=m: kernels.bilinear_tensor(f, xs, ys, -1.0, 2 / n, impl=m), args.repeat)
             for name, m in impls}
    print(f"bilinear_tensor periodic, {n}x{n} samples")
    for name, m in impls:
        bench(name, lambda m=m: kernels.bilinear_tensor(f, xs, ys, -1.0, 2 / n, True, impl=m), args.repeat)

    batch = rng.standard_normal((16, n, n)) + 0j
    print(f"neumann_update, 16 x {n}x{n}")
    for name, m in impls:
        bench(name, lambda m=m: kernels.neumann_update(batch, batch, batch, 2 / 7, impl=m), args.repeat)

    if len(times) == 2:
        print(f"bilinear speed-up: {times['numpy'] / times['cython']:.1f}x")


if __name__ == "__main__":
    main()
