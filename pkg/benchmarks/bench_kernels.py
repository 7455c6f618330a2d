"""Time the numba kernels against the pure-numpy fallbacks.

Usage:
    python benchmarks/bench_kernels.py [--dims 32 128 1000] [--repeats 20000]

The package picks its kernel family at import time from the
GROUPCC_NO_NUMBA environment variable; this script loads both families
side by side and reports per-call times and the speedup.
"""

import argparse
import time

import numpy as np

from groupcc._kernels import jit_kernels, numpy_kernels


def time_kernel(fn, z, repeats):
    fn(z)  # warm-up (triggers JIT compilation on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(z)
    return (time.perf_counter() - t0) / repeats


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--dims", type=int, nargs="+", default=[32, 128, 1000])
    parser.add_argument("--repeats", type=int, default=20000)
    args = parser.parse_args()

    plain = numpy_kernels()
    jitted = jit_kernels()
    if jitted is None:
        print("numba unavailable or disabled (GROUPCC_NO_NUMBA); nothing to compare")
        return

    rng = np.random.default_rng(0)
    print(f"{'kernel':<12} {'n':>5} {'numpy us':>10} {'numba us':>10} {'speedup':>8}")
    for name in sorted(plain):
        for n in args.dims:
            z = rng.uniform(-5.0, 5.0, size=n)
            t_np = time_kernel(plain[name], z, args.repeats)
            t_jit = time_kernel(jitted[name], z, args.repeats)
            print(
                f"{name:<12} {n:>5} {t_np * 1e6:>10.2f} {t_jit * 1e6:>10.2f} "
                f"{t_np / t_jit:>8.1f}x"
            )


if __name__ == "__main__":
    main()
