"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the extension must be built.
"""
import argparse
import timeit

import numpy as np

from crntm import _kernels_py

try:
    from crntm import _kernels
except ImportError:
    _kernels = None


def cases(n):
    x = np.random.default_rng(0).uniform(0.05, 50.0, n)
    alpha = np.random.default_rng(1).uniform(0.1, 10.0, n)
    return {
        "lgamma": lambda k: k.lgamma(x),
        "digamma": lambda k: k.digamma(x),
        "trigamma": lambda k: k.trigamma(x),
        "gamma_noise": lambda k: k.gamma_noise(alpha, np.random.Generator(np.random.PCG64(2))),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("-n", type=int, default=20000, help="array length")
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if _kernels is None:
        raise SystemExit("compiled extension not built; run pip install -e .")
    print(f"{'kernel':<12} {'python ms':>10} {'compiled ms':>12} {'speedup':>8}   (n={args.n})")
    for name, fn in cases(args.n).items():
        py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        cy = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat))
        print(f"{name:<12} {py * 1e3:>10.2f} {cy * 1e3:>12.3f} {py / cy:>7.0f}x")


if __name__ == "__main__":
    main()
