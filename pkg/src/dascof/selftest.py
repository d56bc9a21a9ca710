"""Quick oracle checks behind ``dascof selftest``.

Each check compares a fast routine with a slow, obviously correct one on a
handful of random instances.  The full-size versions live in the test suite.
"""
from __future__ import annotations

import itertools
import math
import time

import numpy as np

from .gfield import FqMatrix, GaussianPrime, fq_inverse_matrix, fq_rank
from .lattice import exhaustive_coefficients, find_best_coefficients
from .quantized import QuantGrid, algebraic_symbols, empirical_pmf, noise_pmf, simulate_quantized_symbols
from .selection import exhaustive_select, greedy_select

__all__ = ["run_selftest", "CHECKS"]


def _cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def check_coefficients(rng, n=20):
    """Coefficient search matches the exhaustive box search."""
    for _ in range(n):
        h = _cn(rng, int(rng.integers(2, 4)))
        snr = 10.0 ** (rng.choice([0, 10, 20]) / 10)
        fast = find_best_coefficients(h, snr).sigma2
        slow = exhaustive_coefficients(h, snr, box=4).sigma2
        if not math.isclose(fast, slow, rel_tol=1e-9):
            return False
    return True


def check_field_inverse(rng, n=20, p=7):
    """Random invertible matrices times their inverses give the identity."""
    P = GaussianPrime(p)
    done = 0
    while done < n:
        M = FqMatrix(rng.integers(0, p, (4, 4)), rng.integers(0, p, (4, 4)), P)
        if fq_rank(M) < 4:
            continue
        if M @ fq_inverse_matrix(M) != FqMatrix.identity(4, P):
            return False
        done += 1
    return True


def check_greedy(rng, n=30, p=7):
    """Matroid greedy equals exhaustive search for linear weights."""
    P = GaussianPrime(p)
    for _ in range(n):
        m, k = int(rng.integers(3, 7)), int(rng.integers(1, 4))
        M = FqMatrix(rng.integers(0, p, (m, k)), rng.integers(0, p, (m, k)), P)
        if fq_rank(M) < k:
            continue
        w = rng.random(m)
        if not math.isclose(greedy_select(M, w).objective, exhaustive_select(M, w).objective):
            return False
    return True


def check_pmf(rng, n=200_000):
    """Noise pmf against a sampled histogram (total variation below 0.01)."""
    for p, s in itertools.product((7, 11), (0.3, 3.0)):
        tv = 0.5 * np.abs(noise_pmf(p, s).probs - empirical_pmf(p, s, n, rng)).sum()
        if tv > 0.01:
            return False
    return True


def check_chain(rng, n=500, p=7):
    """Quantized receiver chain equals its algebraic form symbol by symbol."""
    P = GaussianPrime(p)
    K, L = 3, 3
    H = _cn(rng, L, K)
    snr = 100.0
    A = np.array([find_best_coefficients(h, snr).a for h in H])
    grid = QuantGrid(P, snr)
    c = FqMatrix(rng.integers(0, p, (K, n)), rng.integers(0, p, (K, n)), P)
    d = rng.uniform(0, grid.tau, (K, n)) + 1j * rng.uniform(0, grid.tau, (K, n))
    z = _cn(rng, L, n)
    u = simulate_quantized_symbols(H, A, grid, c, d, z)
    u2, _ = algebraic_symbols(H, A, grid, c, d, z)
    return u == u2


CHECKS = {
    "coefficient search": check_coefficients,
    "field inverse": check_field_inverse,
    "matroid greedy": check_greedy,
    "noise pmf": check_pmf,
    "quantized chain": check_chain,
}


def run_selftest(seed: int = 0, out=print) -> bool:
    """Run every check, print one line each, and return overall success."""
    ok = True
    for name, fn in CHECKS.items():
        t = time.perf_counter()
        passed = bool(fn(np.random.default_rng(seed)))
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'}  {name}  ({time.perf_counter() - t:.2f} s)")
    return ok
