"""Scalar-quantized compute-and-forward: QCoF, LQF and RQCoF.

With a cubic shaping lattice ``tau Z[j]`` (``tau^2 = 6 snr``) and an ideal
scalar quantizer on ``(tau/p) Z[j]``, each receiver sees a finite-field
channel ``u = (sum_k q_k c_k) + zeta`` with discrete additive noise.  The
noise pmf is computed under a Gaussian approximation of the scaled residual
``(p/tau) xi``; real and imaginary parts are i.i.d.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .gfield import FqMatrix, GaussianPrime
from .lattice import effective_noise_variance
from .schemes import RateReport, SystemMatrix, build_system_matrix, decomposed_sum_rate, _require_rank

__all__ = [
    "QuantGrid",
    "NoisePmf",
    "BackhaulTooSmall",
    "noise_pmf",
    "effective_noise_pmf",
    "noise_entropy",
    "quantized_row_rates",
    "qcof_sum_rate",
    "qcof_from_system",
    "lqf_sum_rate",
    "lqf_from_system",
    "rqcof_sum_rate",
    "rqcof_from_system",
    "sawtooth",
    "round_gaussian",
    "simulate_quantized_symbols",
    "algebraic_symbols",
    "empirical_pmf",
]

DEFAULT_M_MAX = 2
# number of standard deviations the wrapped sum must cover when m_max is automatic
_TAIL_SIGMAS = 8.5


class BackhaulTooSmall(ValueError):
    """LQF forwards raw quantized symbols and needs ``2 log2 p <= r0``."""


@dataclass(frozen=True)
class QuantGrid:
    """Shaping interval ``tau = sqrt(6 snr)`` and quantizer step ``tau / p``."""

    p: GaussianPrime
    snr: float

    def __post_init__(self):
        if not isinstance(self.p, GaussianPrime):
            object.__setattr__(self, "p", GaussianPrime(int(self.p)))
        if self.snr <= 0:
            raise ValueError("snr must be positive")

    @property
    def tau(self) -> float:
        return math.sqrt(6.0 * self.snr)

    @property
    def step(self) -> float:
        return self.tau / self.p.p


@dataclass(frozen=True)
class NoisePmf:
    """pmf of one real component of the discrete noise, over Z_p.

    ``truncation_mass`` is the probability left out by the finite wrap-around
    sum before renormalization.
    """

    p: int
    probs: np.ndarray
    sigma_eps: float
    truncation_mass: float = 0.0


def _phi(x, s):
    # P(eps in [x - 1/2, x + 1/2]) written with upper tails (accurate for x > 0)
    return ndtr(-(x - 0.5) / s) - ndtr(-(x + 0.5) / s)


def noise_pmf(p: int, sigma_eps: float, m_max: int | None = None) -> NoisePmf:
    """pmf of ``[round(eps)] mod p`` for ``eps ~ N(0, sigma_eps^2)``.

    Parameters
    ----------
    p : int
    sigma_eps : float
        Standard deviation of one real component.
    m_max : int, optional
        Number of wrap-around terms beyond the base interval.  ``None``
        picks the smallest value >= 2 whose neglected tail is below 1e-16.
    """
    p = int(p)
    if sigma_eps < 0:
        raise ValueError("sigma_eps must be nonnegative")
    if sigma_eps == 0:
        probs = np.zeros(p)
        probs[0] = 1.0
        return NoisePmf(p, probs, 0.0, 0.0)
    if m_max is None:
        m_max = max(DEFAULT_M_MAX, math.ceil((_TAIL_SIGMAS * sigma_eps + 0.5) / p) - 1)
    m = np.arange(m_max + 1)
    probs = np.empty(p)
    probs[0] = _phi(0.0, sigma_eps) + 2.0 * _phi(p * m[1:], sigma_eps).sum()
    for beta in range(1, p):
        probs[beta] = (_phi(beta + p * m, sigma_eps) + _phi(p - beta + p * m, sigma_eps)).sum()
    total = float(probs.sum())
    # symmetric pairs beta, p - beta are equal by construction; renormalize
    return NoisePmf(p, probs / total, float(sigma_eps), max(0.0, 1.0 - total))


def effective_noise_pmf(h, a, grid: QuantGrid, m_max: int | None = None) -> NoisePmf:
    """Discrete noise pmf at a receiver with channel ``h`` and coefficients ``a``."""
    sigma2, _ = effective_noise_variance(h, a, grid.snr)
    return _pmf_from_sigma2(sigma2, grid, m_max)


def _pmf_from_sigma2(sigma2, grid: QuantGrid, m_max=None) -> NoisePmf:
    p = grid.p.p
    sigma_xi2 = (p / grid.tau) ** 2 * sigma2
    return noise_pmf(p, math.sqrt(sigma_xi2 / 2.0), m_max)


def noise_entropy(pmf: NoisePmf) -> float:
    """Entropy in bits of the complex noise (two i.i.d. components)."""
    pr = np.asarray(pmf.probs, dtype=float)
    pr = pr[pr > 0]
    return float(2.0 * -(pr * np.log2(pr)).sum())


def quantized_row_rates(S: SystemMatrix, m_max=None) -> np.ndarray:
    """Per-receiver rate ``2 log2 p - H(zeta)`` using the rows' coefficients."""
    grid = QuantGrid(S.Q.modulus, S.snr)
    cap = 2.0 * math.log2(S.p)
    out = np.empty(S.Q.rows)
    for i, s2 in enumerate(S.sigma2):
        out[i] = max(0.0, cap - noise_entropy(_pmf_from_sigma2(s2, grid, m_max)))
    return out


def _rows(S, rows):
    return tuple(range(S.Q.rows)) if rows is None else tuple(int(r) for r in rows)


def qcof_from_system(S: SystemMatrix, r0: float, rows=None, rates=None) -> RateReport:
    """Quantized CoF with network decomposition (per-block minimum rule)."""
    rows = _rows(S, rows)
    rates = quantized_row_rates(S) if rates is None else np.asarray(rates)
    sub = S.Q.submatrix(rows)
    _require_rank(sub, S.Q.cols)
    total, credit, nb = decomposed_sum_rate(sub, rates[list(rows)], r0)
    return RateReport("qcof", total, tuple(float(c) for c in credit), rows, False, nb)


def lqf_from_system(S: SystemMatrix, r0: float, rows=None, rates=None) -> RateReport:
    """Lattice quantize-and-forward: ``2 K log2 p - sum_k H(zeta_k)``.

    ``rows`` must select exactly K receivers (a square full-rank system).
    """
    if 2.0 * math.log2(S.p) > r0:
        raise BackhaulTooSmall(f"2 log2 p = {2 * math.log2(S.p):.3f} exceeds r0 = {r0}")
    rows = _rows(S, rows)
    K = S.Q.cols
    if len(rows) != K:
        raise ValueError(f"LQF needs exactly {K} active receivers, got {len(rows)}")
    rates = quantized_row_rates(S) if rates is None else np.asarray(rates)
    _require_rank(S.Q.submatrix(rows), K)
    per = rates[list(rows)]
    return RateReport("lqf", float(per.sum()), tuple(float(x) for x in per), rows, False, 1)


def rqcof_from_system(S: SystemMatrix, r0: float, rows=None, rates=None) -> RateReport:
    """Reverse quantized CoF: ``sum_l min(r0, 2 log2 p - H(zeta_l))``."""
    rows = _rows(S, rows)
    L = S.Q.cols
    if len(rows) != L:
        raise ValueError(f"RQCoF needs exactly {L} active users, got {len(rows)}")
    rates = quantized_row_rates(S) if rates is None else np.asarray(rates)
    _require_rank(S.Q.submatrix(rows), L)
    per = np.minimum(r0, rates[list(rows)])
    return RateReport("rqcof", float(per.sum()), tuple(float(x) for x in per), rows, False, 1)


def qcof_sum_rate(H, snr, p, r0) -> RateReport:
    return qcof_from_system(build_system_matrix(H, snr, p), r0)


def lqf_sum_rate(H, snr, p, r0) -> RateReport:
    return lqf_from_system(build_system_matrix(H, snr, p), r0)


def rqcof_sum_rate(Hd, snr, p, r0) -> RateReport:
    return rqcof_from_system(build_system_matrix(Hd, snr, p), r0)


# -- symbol-level chain -----------------------------------------------------


def round_gaussian(x) -> np.ndarray:
    """Nearest Gaussian integer, rounding halves upward in each component."""
    x = np.asarray(x, dtype=complex)
    return np.floor(x.real + 0.5) + 1j * np.floor(x.imag + 0.5)


def sawtooth(x, tau: float) -> np.ndarray:
    """Reduction modulo ``tau Z[j]`` into the centered square ``[-tau/2, tau/2)^2``."""
    return np.asarray(x, dtype=complex) - tau * round_gaussian(np.asarray(x, dtype=complex) / tau)


def _to_fq(k: np.ndarray, p) -> FqMatrix:
    re = np.rint(k.real).astype(np.int64)
    im = np.rint(k.imag).astype(np.int64)
    return FqMatrix(re, im, p)


def _alphas(H, A, snr):
    return np.array([effective_noise_variance(h, a, snr)[1] for h, a in zip(H, A)])


def simulate_quantized_symbols(H, A, grid: QuantGrid, codewords: FqMatrix, dithers, noise, alpha=None):
    """Run the transmitter and quantizing receiver chain symbol by symbol.

    Parameters
    ----------
    H : (L, K) complex
    A : (L, K) Gaussian-integer coefficients, one row per receiver
    grid : QuantGrid
    codewords : FqMatrix (K, n)
    dithers : (K, n) complex, uniform over ``[0, tau)^2``
    noise : (L, n) complex
    alpha : (L,) complex, optional
        Receiver scalings; the MMSE-optimal values by default.

    Returns
    -------
    FqMatrix (L, n)
        ``g^{-1}`` of the quantized, wrapped and rescaled receiver outputs.
    """
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    d = np.atleast_2d(np.asarray(dithers, dtype=complex))
    z = np.atleast_2d(np.asarray(noise, dtype=complex))
    if H.shape != A.shape or codewords.shape[0] != H.shape[1]:
        raise ValueError("H, A and codewords have incompatible shapes")
    if d.shape != codewords.shape or z.shape != (H.shape[0], codewords.shape[1]):
        raise ValueError("dither / noise shapes do not match the codewords")
    tau, step, p = grid.tau, grid.step, grid.p.p
    alpha = _alphas(H, A, grid.snr) if alpha is None else np.asarray(alpha, dtype=complex)
    t = sawtooth(step * codewords.lift(), tau)
    x = sawtooth(t + d, tau)
    y = H @ x + z
    s = alpha[:, None] * y - A @ d
    v = step * round_gaussian(s / step)
    w = sawtooth(v, tau)
    return _to_fq(w / step, p)


def algebraic_symbols(H, A, grid: QuantGrid, codewords: FqMatrix, dithers, noise, alpha=None):
    """The same outputs from the finite-field model ``Q c + zeta``.

    ``zeta`` is computed from the effective noise
    ``xi = sum_k (alpha h_k - a_k) x_k + alpha z`` of the same realization.
    Returns ``(u, zeta)``.
    """
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    d = np.atleast_2d(np.asarray(dithers, dtype=complex))
    z = np.atleast_2d(np.asarray(noise, dtype=complex))
    tau, step, p = grid.tau, grid.step, grid.p.p
    alpha = _alphas(H, A, grid.snr) if alpha is None else np.asarray(alpha, dtype=complex)
    t = sawtooth(step * codewords.lift(), tau)
    x = sawtooth(t + d, tau)
    xi = (alpha[:, None] * H - A) @ x + alpha[:, None] * z
    zeta = _to_fq(round_gaussian(xi / step), p)
    Q = FqMatrix.from_gaussian(A, p)
    return Q @ codewords + zeta, zeta


def empirical_pmf(p: int, sigma_eps: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo histogram of ``[round(eps)] mod p`` (diagnostic)."""
    eps = rng.normal(0.0, sigma_eps, size=n)
    nu = np.mod(np.floor(eps + 0.5).astype(np.int64), p)
    return np.bincount(nu, minlength=p) / n
