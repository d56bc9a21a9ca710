"""Time the hot kernels under the compiled and pure-Python backends.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--seed 0]

Prints one line per (kernel, backend) with the best per-call time and the
speed-up of the compiled core.  Without the compiled extension only the
Python timings are shown.
"""
import argparse
import timeit

import numpy as np

from dascof import _backend
from dascof.lattice import cholesky_factor, enumerate_short_vectors, find_best_coefficients, lll_reduce
from dascof.schemes import build_system_matrix


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def workloads(rng):
    """(name, calls per batch, callable) triples on fixed random inputs."""
    bases = [cholesky_factor(cn(rng, 4), 100.0) for _ in range(20)]
    reduced = [lll_reduce(B) for B in bases]
    radii = [1.2 * np.linalg.norm(r.basis, axis=0).min() for r in reduced]
    hs = [cn(rng, 5) for _ in range(20)]
    H = cn(rng, 25, 5)
    return [
        ("lll_reduce (4x4)", len(bases), lambda: [lll_reduce(B) for B in bases]),
        ("enumerate (4x4)", len(reduced), lambda: [enumerate_short_vectors(r, d) for r, d in zip(reduced, radii)]),
        ("find_best_coefficients (K=5)", len(hs), lambda: [find_best_coefficients(h, 100.0) for h in hs]),
        ("build_system_matrix (25x5)", 1, lambda: build_system_matrix(H, 100.0, 251)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    jobs = workloads(np.random.default_rng(args.seed))
    backends = sorted(_backend.BACKENDS)
    print(f"{'kernel':32s} " + " ".join(f"{b:>12s}" for b in backends) + ("     speed-up" if len(backends) > 1 else ""))
    for name, calls, fn in jobs:
        times = {}
        for b in backends:
            with _backend.using(b):
                fn()  # warm up
                times[b] = min(timeit.repeat(fn, number=1, repeat=args.repeat)) / calls
        row = f"{name:32s} " + " ".join(f"{times[b] * 1e6:10.1f}us" for b in backends)
        if "cython" in times:
            row += f" {times['python'] / times['cython']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
