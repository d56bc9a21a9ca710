"""Integer-forcing beamforming for the downlink with unlimited backhaul.

The precoder is ``B = Hd^{-1} A`` with a unimodular Gaussian-integer matrix
``A``, so the effective channel ``Hd B = A`` is integer valued and every
user decodes its integer combination without a non-integer penalty.  The
central processor undoes ``A`` over the finite field beforehand.

``A`` starts from complex LLL reduction of the columns of ``Hd^{-1}`` (the
sum-power surrogate) and is then refined by a short-vector search that
scores candidates by the actual sum rate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import Singular
from .gfield import FqMatrix, GaussianPrime, fq_rank, gaussian_det
from .lattice import RadiusTooLarge, enumerate_short_vectors, lll_reduce, log2_plus
from .schemes import RateReport

__all__ = [
    "IfbDesign",
    "RankDeficientModP",
    "ifb_design",
    "ifb_objective",
    "ifb_sum_rate",
    "ifb_rate",
    "is_unimodular",
]

#: units of Z[j] used by the local refinement moves
_UNITS = np.array([1, -1, 1j, -1j])
MAX_REFINE_SWEEPS = 50
RESTARTS = 12
SEARCH_RADIUS = 1.3
SEARCH_CAP = 20000
_IMPROVE_TOL = 1e-12


class RankDeficientModP(ArithmeticError):
    """The integer matrix is singular after reduction mod pZ[j]."""


@dataclass(frozen=True)
class IfbDesign:
    """An integer-forcing precoder.

    Attributes
    ----------
    A_tilde : ndarray
        L x L Gaussian-integer matrix; row ``l`` is user ``l``'s effective channel.
    B : ndarray
        Precoding matrix ``Hd^{-1} A_tilde``; row ``l`` feeds antenna ``l``.
    max_row_power : float
        ``max_l ||b_l||^2`` over the rows of ``B``.
    """

    A_tilde: np.ndarray
    B: np.ndarray
    max_row_power: float

    @property
    def sum_power(self) -> float:
        """``tr(B B^H)``, the quantity the lattice reduction minimizes."""
        return float(np.sum(np.abs(self.B) ** 2))


def _inverse(Hd) -> np.ndarray:
    Hd = np.atleast_2d(np.asarray(Hd, dtype=complex))
    if Hd.ndim != 2 or Hd.shape[0] != Hd.shape[1]:
        raise ValueError("integer forcing needs a square channel")
    if not np.all(np.isfinite(Hd)) or np.linalg.cond(Hd) > 1e14:
        raise Singular("channel is numerically singular")
    return np.linalg.inv(Hd)


def _rate(a2, rowpow, snr):
    """Sum rate from row powers of ``A`` and ``B``; works on stacked candidates."""
    snr_eff = snr / np.max(rowpow, axis=-1, keepdims=True)
    return np.log2(snr_eff + 1.0 / a2).sum(axis=-1)


def ifb_objective(A, B, snr: float) -> float:
    """Sum rate ``sum_l log2(snr' + 1/||a_l||^2)`` with ``snr' = snr / max_l ||b_l||^2``.

    This is the computation rate of row ``a_l`` on channel ``a_l`` at the
    scaled SNR, summed over users.
    """
    a2 = np.sum(np.abs(A) ** 2, axis=1)
    return float(_rate(a2, np.sum(np.abs(B) ** 2, axis=1), snr))


def _short_vectors(red, Hinv):
    """Short lattice vectors of ``Hinv`` as (coefficients, lattice points)."""
    radius = SEARCH_RADIUS * float(np.sqrt(np.max(np.sum(np.abs(red.basis) ** 2, axis=0))))
    for _ in range(20):
        try:
            V = enumerate_short_vectors(red, radius, SEARCH_CAP)
            break
        except RadiusTooLarge:
            radius *= 0.8
    else:  # pragma: no cover - the radius shrinks below the shortest vector first
        V = []
    V = np.array(V, dtype=complex).reshape(-1, Hinv.shape[1])
    return V, V @ Hinv.T


def _local_search(Hinv, A, V, HV, snr, cap=np.inf, max_sweeps=MAX_REFINE_SWEEPS):
    """Best-improvement search over single-column replacements.

    Column ``k`` of ``A`` may be replaced by ``A[:, k] + u A[:, i]`` for a
    unit ``u``, or by any enumerated short vector ``c`` with
    ``(A^{-1} c)_k`` a unit.  Both keep ``A`` unimodular.  Moves that push
    the sum power above ``cap`` are not taken.  Stops when a full sweep over
    the columns finds no improving move.
    """
    A = A.copy()
    B = Hinv @ A
    L = A.shape[1]
    best = ifb_objective(A, B, snr)
    trace = float(np.sum(np.abs(B) ** 2))
    for _ in range(max_sweeps):
        improved = False
        for k in range(L):
            others = [i for i in range(L) if i != k]
            C = (A[:, k][None, :] + _UNITS[:, None, None] * A[:, others].T[None]).reshape(-1, L)
            HC = (B[:, k][None, :] + _UNITS[:, None, None] * B[:, others].T[None]).reshape(-1, L)
            if len(V):
                coef = V @ np.linalg.inv(A)[k]
                unit = (np.abs(np.abs(coef) - 1.0) < 1e-9) & (np.abs(coef.real * coef.imag) < 1e-9)
                C = np.vstack([C, V[unit]])
                HC = np.vstack([HC, HV[unit]])
            rowpow = np.sum(np.abs(B) ** 2, axis=1) - np.abs(B[:, k]) ** 2
            a2 = np.sum(np.abs(A) ** 2, axis=1) - np.abs(A[:, k]) ** 2
            vals = _rate(a2[None] + np.abs(C) ** 2, rowpow[None] + np.abs(HC) ** 2, snr)
            vals[np.sum(np.abs(HC) ** 2, axis=1) > cap - (trace - np.sum(np.abs(B[:, k]) ** 2))] = -np.inf
            j = int(np.argmax(vals))
            if vals[j] > best + _IMPROVE_TOL:
                A[:, k] = C[j]
                B[:, k] = HC[j]
                trace = float(np.sum(np.abs(B) ** 2))
                best = float(vals[j])
                improved = True
        if not improved:
            break
    return A


def _make(Hinv, A) -> IfbDesign:
    A = np.round(A.real) + 1j * np.round(A.imag)
    B = Hinv @ A
    return IfbDesign(A, B, float(np.max(np.sum(np.abs(B) ** 2, axis=1))))


def _starts(Hinv, restarts):
    """Identity, the LLL transform, and LLL transforms of column-permuted inverses."""
    L = Hinv.shape[0]
    out = [np.eye(L, dtype=complex), lll_reduce(Hinv).unimodular]
    rng = np.random.default_rng(L)
    for _ in range(restarts if L > 1 else 0):
        P = np.eye(L)[rng.permutation(L)]
        out.append(P @ lll_reduce(Hinv @ P).unimodular)
    return out


def ifb_design(Hd, snr: float, p=None, restarts: int = RESTARTS) -> IfbDesign:
    """Choose the integer matrix for integer-forcing beamforming.

    The LLL transform of the columns of ``Hd^{-1}`` minimizes the sum power
    only approximately, and sum power is itself a stand-in for the sum rate.
    So several starting matrices (identity, LLL, and LLL after random column
    permutations) are each improved by a local search that swaps single
    columns for short lattice vectors, scored by the true sum rate.
    Results whose sum power exceeds the zero-forcing value are discarded.
    The best survivor wins; the identity wins exact ties, so the design
    never falls below zero forcing.

    Parameters
    ----------
    Hd : array_like, shape (L, L)
        Downlink channel, one row per user.
    snr : float
        Per-antenna SNR (linear).
    p : int or GaussianPrime, optional
        When given, candidates that are singular mod pZ[j] are skipped.
    restarts : int
        Number of permuted LLL starting points.

    Raises
    ------
    Singular
        If ``Hd`` is not invertible.
    """
    Hinv = _inverse(Hd)
    V, HV = _short_vectors(lll_reduce(Hinv), Hinv)
    zf_power = float(np.sum(np.abs(Hinv) ** 2))
    best = None
    for A0 in _starts(Hinv, restarts):
        for A in (A0, _local_search(Hinv, A0, V, HV, snr, zf_power * (1.0 + 1e-12))):
            d = _make(Hinv, A)
            if d.sum_power > zf_power * (1.0 + 1e-12):
                continue
            if p is not None and not _invertible_mod_p(d.A_tilde, p):
                continue
            val = ifb_objective(d.A_tilde, d.B, snr)
            if best is None or val > best[0] + _IMPROVE_TOL:
                best = (val, d)
    return best[1]


def _invertible_mod_p(A, p) -> bool:
    p = p if isinstance(p, GaussianPrime) else GaussianPrime(int(p))
    return fq_rank(FqMatrix.from_gaussian(A, p)) == A.shape[0]


def ifb_rate(design: IfbDesign, snr: float) -> np.ndarray:
    """Per-user rates of a design (no finite-field check)."""
    a2 = np.sum(np.abs(design.A_tilde) ** 2, axis=1)
    snr_eff = snr / design.max_row_power
    return np.array([log2_plus(snr_eff + 1.0 / x) for x in a2])


def ifb_sum_rate(design: IfbDesign, snr: float, p) -> RateReport:
    """Integer-forcing sum rate of ``design``.

    Raises
    ------
    RankDeficientModP
        If ``A_tilde`` is singular over the field for this ``p``.
    """
    if not _invertible_mod_p(design.A_tilde, p):
        raise RankDeficientModP(f"integer matrix is singular modulo {int(p)}")
    per = ifb_rate(design, snr)
    info = {"unimodular": gaussian_det(design.A_tilde).norm() == 1, "max_row_power": design.max_row_power}
    return RateReport("ifb", float(per.sum()), tuple(float(x) for x in per),
                      tuple(range(len(per))), False, 1, False, info)


def is_unimodular(A) -> bool:
    """Whether the Gaussian-integer determinant of ``A`` is a unit."""
    return gaussian_det(A).norm() == 1
