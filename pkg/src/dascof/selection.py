"""Antenna (uplink) and user (downlink) selection.

The core is the matroid greedy: scan rows by decreasing weight and keep a
row iff it raises the rank over F_{p^2}.  It is exactly optimal for linear
objectives and for the max-min objective; the decomposition-aware uplink
pipeline runs it per subnetwork.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .gfield import FqMatrix, RowSpace, fq_rank
from .quantized import BackhaulTooSmall, quantized_row_rates
from .schemes import SystemMatrix, decomposed_sum_rate, network_decompose

__all__ = [
    "SelectionResult",
    "NoBasis",
    "TooLarge",
    "greedy_select",
    "at_select_cof",
    "at_select_lqf",
    "ut_select_downlink",
    "exhaustive_select",
    "selection_objective",
]

EXHAUSTIVE_LIMIT = 10**5


class NoBasis(ArithmeticError):
    """No subset of the rows has full column rank."""


class TooLarge(ValueError):
    """Exhaustive enumeration would exceed the configured number of subsets."""


@dataclass(frozen=True)
class SelectionResult:
    chosen: tuple
    objective: float
    full_rank: bool = True
    possibly_suboptimal: bool = False


def selection_objective(Q: FqMatrix, weights, chosen, objective: str = "linear") -> float:
    """Value of a row subset under ``linear`` (sum), ``maxmin`` (min) or
    ``decomposed`` (per-subnetwork size times block minimum) objectives."""
    w = np.asarray(weights, dtype=float)[list(chosen)]
    if objective == "linear":
        return float(w.sum())
    if objective == "maxmin":
        return float(w.min())
    if objective == "decomposed":
        total, _, _ = decomposed_sum_rate(Q.submatrix(chosen), w, math.inf)
        return float(total)
    raise ValueError(f"unknown objective {objective!r}")


def greedy_select(Q: FqMatrix, weights, n: int | None = None, objective: str = "linear") -> SelectionResult:
    """Greedy basis selection over the rows of ``Q``.

    Rows are visited by decreasing weight; equal weights keep their original
    order (stable sort).  A row is accepted iff it increases the rank, and
    the scan stops once ``n`` rows (default: number of columns) are chosen.

    Raises
    ------
    NoBasis
        If the rows of ``Q`` span fewer than ``n`` dimensions.
    """
    w = np.asarray(weights, dtype=float)
    m = Q.rows
    n = Q.cols if n is None else int(n)
    if w.shape != (m,):
        raise ValueError(f"need {m} weights, got {w.shape}")
    space = RowSpace(Q.cols, Q.modulus)
    chosen = []
    for i in np.argsort(-w, kind="stable"):
        if space.add(Q.re[i], Q.im[i]):
            chosen.append(int(i))
            if len(chosen) == n:
                break
    if len(chosen) < n:
        raise NoBasis(f"rows span only {len(chosen)} of {n} dimensions")
    chosen = tuple(sorted(chosen))
    return SelectionResult(chosen, selection_objective(Q, w, chosen, objective))


def at_select_cof(S: SystemMatrix, r0: float, rates=None) -> SelectionResult:
    """Uplink AT selection for CoF / QCoF.

    Decompose the full system matrix into subnetworks, run the greedy in
    each with weights ``min(r0, R_l)``, and take the union.  The objective
    is the decomposed sum rate of the chosen rows.  ``possibly_suboptimal``
    is set when a block's greedy choice splits into further subnetworks,
    the case where the per-block greedy carries no optimality guarantee.

    ``rates`` overrides the per-row rates (pass quantized rates for QCoF).
    """
    rates = S.per_row_rate if rates is None else np.asarray(rates, dtype=float)
    w = np.minimum(r0, rates)
    Q = S.Q
    chosen = []
    flag = False
    for rows, cols in network_decompose(Q):
        if not cols:
            continue
        if not rows:
            raise NoBasis(f"users {cols} are not reached by any receiver")
        block = Q.submatrix(rows, cols)
        try:
            res = greedy_select(block, w[list(rows)], len(cols))
        except NoBasis as exc:
            raise NoBasis(f"subnetwork with users {cols}: {exc}") from None
        picked = [rows[i] for i in res.chosen]
        if len(network_decompose(Q.submatrix(picked, cols))) > 1:
            flag = True
        chosen.extend(picked)
    chosen = tuple(sorted(chosen))
    total, _, _ = decomposed_sum_rate(Q.submatrix(chosen), rates[list(chosen)], r0)
    return SelectionResult(chosen, float(total), True, flag)


def at_select_lqf(S: SystemMatrix, r0: float, rates=None) -> SelectionResult:
    """Uplink AT selection for LQF: matroid greedy on ``min(r0, 2 log2 p - H)``."""
    if 2.0 * math.log2(S.p) > r0:
        raise BackhaulTooSmall(f"2 log2 p = {2 * math.log2(S.p):.3f} exceeds r0 = {r0}")
    rates = quantized_row_rates(S) if rates is None else np.asarray(rates, dtype=float)
    return greedy_select(S.Q, np.minimum(r0, rates))


def ut_select_downlink(Qd: FqMatrix, weights) -> SelectionResult:
    """Downlink user selection: matroid greedy over the users' rows.

    ``weights`` are the clamped per-user rates ``min(r0, R_k)``.
    """
    return greedy_select(Qd, weights)


def exhaustive_select(Q: FqMatrix, weights, objective: str = "linear", target: int | None = None,
                      limit: int = EXHAUSTIVE_LIMIT) -> SelectionResult:
    """Best full-rank ``target``-subset of rows by enumeration (reference oracle).

    Ties keep the lexicographically first subset.
    """
    m = Q.rows
    n = Q.cols if target is None else int(target)
    if math.comb(m, n) > limit:
        raise TooLarge(f"C({m},{n}) = {math.comb(m, n)} subsets exceed {limit}")
    w = np.asarray(weights, dtype=float)
    best = None
    for sub in combinations(range(m), n):
        if fq_rank(Q.submatrix(sub)) < n:
            continue
        val = selection_objective(Q, w, sub, objective)
        if best is None or val > best[1]:
            best = (sub, val)
    if best is None:
        raise NoBasis(f"no full-rank subset of {n} rows")
    return SelectionResult(tuple(best[0]), float(best[1]))
