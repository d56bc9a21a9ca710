"""Compute-and-forward uplink and reverse compute-and-forward downlink.

Every receiver picks its integer coefficients independently with
:func:`dascof.lattice.find_best_coefficients`; the coefficient rows reduced
mod pZ[j] form the system matrix.  Sum rates follow the per-subnetwork
minimum (uplink) or per-user clamp (downlink) rules.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .gfield import FqMatrix, GaussianPrime, fq_rank, fq_solve
from .lattice import RankDeficient, effective_noise_variance, find_best_coefficients, log2_plus

__all__ = [
    "RateReport",
    "SystemMatrix",
    "NetworkDecomposition",
    "build_system_matrix",
    "network_decompose",
    "cof_sum_rate",
    "rcof_sum_rate",
    "rcof_from_system",
    "ff_precode",
    "decomposed_sum_rate",
    "RankDeficient",
]


@dataclass
class RateReport:
    """Sum rate of one scheme on one channel draw.

    ``per_receiver`` holds the rate credited to each active receiver (AT for
    the uplink, UT for the downlink), in the order of ``selected``.
    """

    scheme: str
    sum_rate: float
    per_receiver: tuple = ()
    selected: tuple = ()
    outage: bool = False
    blocks: int = 1
    possibly_suboptimal: bool = False
    info: dict = field(default_factory=dict)

    @classmethod
    def outage_report(cls, scheme, reason="rank deficient", selected=()):
        return cls(scheme, 0.0, (), tuple(selected), True, 0, False, {"reason": reason})


@dataclass(frozen=True)
class SystemMatrix:
    """Per-receiver integer coefficients, their reduction, and computation rates.

    Attributes
    ----------
    Q : FqMatrix
        ``g^{-1}([A] mod pZ[j])``, one row per receiver.
    A : ndarray (complex, integral entries)
    per_row_rate : ndarray
    sigma2 : ndarray
        Effective noise variance of each row.
    H : ndarray
        The channel the rows were computed for.
    snr : float
    """

    Q: FqMatrix
    A: np.ndarray
    per_row_rate: np.ndarray
    sigma2: np.ndarray
    H: np.ndarray
    snr: float

    @property
    def usable(self) -> np.ndarray:
        """Rows whose reduced coefficient vector is nonzero."""
        return self.Q.nonzero_mask().any(axis=1)

    @property
    def p(self) -> int:
        return self.Q.p

    def rows(self, idx) -> "SystemMatrix":
        idx = np.asarray(list(idx), dtype=np.intp)
        return SystemMatrix(
            self.Q.submatrix(idx),
            self.A[idx],
            self.per_row_rate[idx],
            self.sigma2[idx],
            self.H[idx],
            self.snr,
        )


@dataclass(frozen=True)
class NetworkDecomposition:
    """Independent subnetworks as (row indices, column indices) pairs."""

    blocks: tuple

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)


def build_system_matrix(H, snr: float, p) -> SystemMatrix:
    """Run the coefficient search at every receiver (row of ``H``)."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    if not np.all(np.isfinite(H)):
        raise ValueError("channel matrix has non-finite entries")
    p = p if isinstance(p, GaussianPrime) else GaussianPrime(int(p))
    L, K = H.shape
    A = np.zeros((L, K), dtype=complex)
    rates = np.zeros(L)
    sig = np.zeros(L)
    for ell in range(L):
        sol = find_best_coefficients(H[ell], snr)
        A[ell] = sol.a
        rates[ell] = sol.rate
        sig[ell] = sol.sigma2
    return SystemMatrix(FqMatrix.from_gaussian(A, p), A, rates, sig, H, float(snr))


def network_decompose(Q: FqMatrix) -> NetworkDecomposition:
    """Connected components of the bipartite row/column graph of nonzero entries.

    Blocks are listed by their smallest row index (rows first, then
    column-only blocks); index lists are sorted.
    """
    L, K = Q.shape
    mask = Q.nonzero_mask()
    r, c = np.nonzero(mask)
    n = L + K
    graph = coo_matrix((np.ones(r.size), (r, L + c)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    groups = {}
    for node, lab in enumerate(labels):
        groups.setdefault(lab, []).append(node)
    blocks = []
    for nodes in groups.values():
        rows = tuple(v for v in nodes if v < L)
        cols = tuple(v - L for v in nodes if v >= L)
        blocks.append((rows, cols))
    blocks.sort(key=lambda b: (0, b[0][0]) if b[0] else (1, b[1][0]))
    return NetworkDecomposition(tuple(blocks))


def decomposed_sum_rate(Q: FqMatrix, rates, r0: float):
    """Sum over subnetworks of (users in block) x min(r0, min row rate in block).

    Returns ``(sum_rate, per_row_credit, n_blocks)``.  A row whose reduced
    coefficients are all zero forms a block without users and contributes
    nothing.
    """
    rates = np.asarray(rates, dtype=float)
    dec = network_decompose(Q)
    credit = np.zeros(Q.rows)
    total = 0.0
    nblocks = 0
    for rows, cols in dec:
        if not rows or not cols:
            continue
        nblocks += 1
        common = min(r0, float(rates[list(rows)].min()))
        common = max(common, 0.0)
        total += len(cols) * common
        # spread the block's sum rate over its rows (equal when square)
        credit[list(rows)] = common * len(cols) / len(rows)
    return total, credit, nblocks


def _require_rank(Q: FqMatrix, k: int):
    rank = fq_rank(Q)
    if rank < k:
        raise RankDeficient(f"system matrix has rank {rank} < {k}")


def cof_sum_rate(S: SystemMatrix, r0: float, rows=None, scheme: str = "cof") -> RateReport:
    """Uplink compute-and-forward sum rate with network decomposition.

    Parameters
    ----------
    S : SystemMatrix
        All receivers (ATs).
    r0 : float
        Backhaul rate per link.
    rows : sequence of int, optional
        Active receivers; all rows when omitted.  More active rows than
        users is allowed: every active AT must then decode, and each
        subnetwork is credited its number of users times its minimum rate.

    Raises
    ------
    RankDeficient
        If the active rows do not have rank K over the field.
    """
    if r0 < 0:
        raise ValueError("r0 must be nonnegative")
    rows = tuple(range(S.Q.rows)) if rows is None else tuple(int(r) for r in rows)
    sub = S.Q.submatrix(rows)
    _require_rank(sub, S.Q.cols)
    total, credit, nb = decomposed_sum_rate(sub, S.per_row_rate[list(rows)], r0)
    return RateReport(scheme, total, tuple(float(x) for x in credit), rows, False, nb)


def rcof_from_system(S: SystemMatrix, r0: float, rows=None, scheme: str = "rcof") -> RateReport:
    """Downlink reverse CoF sum rate for the UTs in ``rows`` (a square system)."""
    if r0 < 0:
        raise ValueError("r0 must be nonnegative")
    rows = tuple(range(S.Q.rows)) if rows is None else tuple(int(r) for r in rows)
    L = S.Q.cols
    if len(rows) != L:
        raise ValueError(f"reverse CoF needs exactly {L} active users, got {len(rows)}")
    _require_rank(S.Q.submatrix(rows), L)
    per = np.minimum(r0, S.per_row_rate[list(rows)])
    return RateReport(scheme, float(per.sum()), tuple(float(x) for x in per), rows, False, 1)


def rcof_sum_rate(Hd, snr: float, p, r0: float) -> RateReport:
    """Reverse CoF sum rate on a square downlink channel (rows are users)."""
    Hd = np.atleast_2d(np.asarray(Hd, dtype=complex))
    if Hd.shape[0] != Hd.shape[1]:
        raise ValueError("reverse CoF expects a square channel; select users first")
    return rcof_from_system(build_system_matrix(Hd, snr, p), r0)


def ff_precode(Qd: FqMatrix, messages: FqMatrix) -> FqMatrix:
    """Finite-field zero forcing at the central processor: ``Qd^{-1} messages``."""
    return fq_solve(Qd, messages)


def row_rate(h, a, snr: float) -> float:
    sigma2, _ = effective_noise_variance(h, a, snr)
    return log2_plus(snr / sigma2)
