"""Compare the compiled separable sum against the NumPy fallback.

Run ``python3 benchmarks/bench_kernels.py``.  The first table times the
kernel alone on random panels; the second times a full threshold integral
in a fresh interpreter per backend (so caches do not interfere).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fspec import kernels

END_TO_END = (
    "import time; from fspec.determinant import SpectralPoint, lattice_integral; "
    "t = time.perf_counter(); v = lattice_integral(SpectralPoint((0, 0, 0), 0.0), {tol}).value; "
    "print(v, time.perf_counter() - t)"
)


def kernel_inputs(n, seed):
    rng = np.random.default_rng(seed)
    axes = [rng.uniform(0.0, 3.0, n) for _ in range(3)]
    weights = [rng.uniform(0.1, 1.0, n) for _ in range(3)]
    return axes[0], weights[0], axes[1], weights[1], axes[2], weights[2], -0.5


def time_kernel(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def end_to_end(tol, pure):
    env = dict(os.environ)
    env.pop("FSPEC_PURE_PYTHON", None)
    if pure:
        env["FSPEC_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", END_TO_END.format(tol=tol)], env=env,
                         capture_output=True, text=True, check=True).stdout.split()
    return float(out[0]), float(out[1])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--tol", type=float, default=1e-9)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if kernels.compiled_separable_sum is None:
        print("compiled extension not built; only the fallback can run")
        return 1
    print(f"{'points/axis':>12} {'python [s]':>12} {'cython [s]':>12} {'speedup':>8} {'rel diff':>10}")
    for n in args.sizes:
        inputs = kernel_inputs(n, args.seed)
        slow = time_kernel(kernels.python_separable_sum, inputs, args.repeat)
        fast = time_kernel(kernels.compiled_separable_sum, inputs, args.repeat)
        a = kernels.python_separable_sum(*inputs)
        b = kernels.compiled_separable_sum(*inputs)
        print(f"{n:>12} {slow:>12.4f} {fast:>12.4f} {slow / fast:>8.1f} {abs(a - b) / abs(a):>10.1e}")

    print(f"\nthreshold integral at tol={args.tol:g}")
    for label, pure in (("python", True), ("cython", False)):
        value, seconds = end_to_end(args.tol, pure)
        print(f"{label:>8}: {value:.13f} in {seconds:.3f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
