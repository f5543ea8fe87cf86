"""Compare the numba and pure-numpy kernel paths.

    python benchmarks/bench_kernels.py [--repeat 5]

Kernels are called directly, so both paths run in one process regardless of
EIGENLOOP_DISABLE_NUMBA.  The end-to-end rows spawn a subprocess per path.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from eigenloop import _kernels


def best_time(fn, repeat):
    fn()  # compile / warm caches
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def jacobi_batch(kernel, mats):
    def run():
        for m in mats:
            kernel(m, 1e-13, 64)

    return run


def shorten(kernel, loop):
    rec = np.zeros(0, dtype=np.int64)
    return lambda: kernel(loop, 200_000, max(8, len(loop) // 4), rec, 64)


def wavy_loop(k):
    t = 2 * np.pi * np.arange(k) / k
    p = np.stack([np.cos(t), np.sin(t), 0.6 * np.sin(3 * t), 0.4 * np.cos(2 * t) - 0.4], axis=1)
    return p / np.linalg.norm(p, axis=1)[:, None]


END_TO_END = (
    "import time\n"
    "from eigenloop.models import builtin_g_g\n"
    "from eigenloop.loops import circle_loop\n"
    "from eigenloop.topology import classify\n"
    "m = builtin_g_g(1.0)\n"
    "classify(m, circle_loop(1.0, 32, d=4, center=(0, 0, 0, 3)))\n"
    "start = time.perf_counter()\n"
    "classify(m, circle_loop(1.0, 1024, d=4, center=(0, 0, 0, 3)))\n"
    "print(time.perf_counter() - start)\n"
)


def end_to_end(disable):
    env = dict(os.environ, EIGENLOOP_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    if not _kernels._HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    rows = []
    for n in (2, 4, 8):
        mats = [a + a.T for a in rng.normal(size=(500, n, n))]
        rows.append(
            (
                f"jacobi n={n} x500",
                best_time(jacobi_batch(_kernels.jacobi_eigh_numba, mats), args.repeat),
                best_time(jacobi_batch(_kernels.jacobi_eigh_numpy, mats), args.repeat),
            )
        )
    for k in (64, 256):
        loop = wavy_loop(k)
        rows.append(
            (
                f"shorten K={k}",
                best_time(shorten(_kernels.shorten_loop_numba, loop), args.repeat),
                best_time(shorten(_kernels.shorten_loop_numpy, loop), args.repeat),
            )
        )
    rows.append(("classify g-g 1024 samples", end_to_end(False), end_to_end(True)))

    print(f"{'case':<28} {'numba [ms]':>12} {'numpy [ms]':>12} {'speedup':>9}")
    for name, fast, slow in rows:
        print(f"{name:<28} {1e3 * fast:>12.2f} {1e3 * slow:>12.2f} {slow / fast:>8.1f}x")


if __name__ == "__main__":
    main()
