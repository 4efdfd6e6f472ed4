"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the NT scaling-matrix construction for several block sizes and the
erasure shell test for several blocklengths, checks that both backends
agree, and finishes with one end-to-end solve under each backend.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from qconverse import _kernels_py, kernels
from qconverse.asymptotics import _shell_logs


def _random_pd(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return g @ g.conj().T + n * np.eye(n)


def _best(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 10_000:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def _row(name: str, fast: float, slow: float, err: float) -> str:
    return f"{name:<28} {fast * 1e3:>12.4f} {slow * 1e3:>12.4f} {slow / fast:>8.1f}x {err:>10.1e}"


def bench_kernels(repeat: int) -> None:
    if kernels.BACKEND != "compiled":
        print("compiled extension not available; only the fallback can be timed")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28} {'compiled ms':>12} {'numpy ms':>12} {'speedup':>9} {'max diff':>10}")
    for n in (4, 8, 12, 18):
        w = _random_pd(n, rng)
        fast = _best(lambda: kernels.scaling_matrix(w, "complex"), repeat)
        slow = _best(lambda: _kernels_py.scaling_matrix(w, "complex"), repeat)
        err = float(np.max(np.abs(kernels.scaling_matrix(w, "complex") - _kernels_py.scaling_matrix(w, "complex"))))
        print(_row(f"scaling_matrix complex n={n}", fast, slow, err))
    for n in (6, 12):
        w = np.real(_random_pd(n, rng))
        fast = _best(lambda: kernels.scaling_matrix(w, "real"), repeat)
        slow = _best(lambda: _kernels_py.scaling_matrix(w, "real"), repeat)
        err = float(np.max(np.abs(kernels.scaling_matrix(w, "real") - _kernels_py.scaling_matrix(w, "real"))))
        print(_row(f"scaling_matrix real n={n}", fast, slow, err))
    for n in (1_000, 100_000):
        lp, lq = _shell_logs(n, 2, 0.5)
        target = np.log1p(-0.05)
        fast = _best(lambda: kernels.shell_test(lp, lq, target), repeat)
        slow = _best(lambda: _kernels_py.shell_test(lp, lq, target), repeat)
        err = abs(kernels.shell_test(lp, lq, target)[2] - _kernels_py.shell_test(lp, lq, target)[2])
        print(_row(f"shell_test n={n}", fast, slow, err))


_SOLVE = (
    "import time; from qconverse import bounds, channel, kernels;"
    "c = channel.random_channel(3, 3, __import__('numpy').random.default_rng(1));"
    "t = time.perf_counter(); r = bounds.activated_ns(c, 0.1);"
    "print(kernels.BACKEND, time.perf_counter() - t, r.value_bits)"
)


def bench_solve() -> None:
    print("\nend-to-end activated NS bound, random 3x3 channel:")
    for pure in ("0", "1"):
        env = dict(os.environ, QCONVERSE_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", _SOLVE], env=env, capture_output=True, text=True, check=True)
        backend, secs, value = out.stdout.split()
        print(f"  {backend:<9} {float(secs):8.3f} s   value {float(value):.12f} bits")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-solve", action="store_true")
    args = ap.parse_args()
    bench_kernels(args.repeat)
    if not args.skip_solve:
        bench_solve()


if __name__ == "__main__":
    main()
