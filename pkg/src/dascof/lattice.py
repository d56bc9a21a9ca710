"""Effective-noise quadratic form, complex LLL, sphere enumeration and the
optimal integer-coefficient search used by every compute-and-forward receiver.

Vectors of Gaussian integers are carried as ``complex128`` arrays with
integral real and imaginary parts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend

__all__ = [
    "ZeroVector",
    "RankDeficient",
    "RadiusTooLarge",
    "CofSolution",
    "ReducedBasis",
    "effective_noise_variance",
    "computation_rate",
    "cholesky_factor",
    "lll_reduce",
    "is_lll_reduced",
    "realify",
    "enumerate_short_vectors",
    "find_best_coefficients",
    "canonical_unit",
    "exhaustive_coefficients",
    "log2_plus",
]

DEFAULT_DELTA = 0.75
ENUM_CAP = 10**6
# relative radius slack for the last enumeration step
RADIUS_EPS = 1e-9
TIE_RTOL = 1e-12


class ZeroVector(ValueError):
    """The all-zero integer vector was supplied where a ≠ 0 is required."""


class RankDeficient(ArithmeticError):
    """A basis (or system matrix) does not have full rank."""


class RadiusTooLarge(RuntimeError):
    """Enumeration would visit more lattice points than the configured cap."""


@dataclass(frozen=True)
class CofSolution:
    a: np.ndarray
    alpha: complex
    sigma2: float
    rate: float


@dataclass(frozen=True)
class ReducedBasis:
    """Reduced generator matrix (columns) and the Gaussian-integer transform.

    ``original @ unimodular == basis`` up to floating-point rounding.
    """

    basis: np.ndarray
    unimodular: np.ndarray


def log2_plus(x: float) -> float:
    return max(math.log2(x), 0.0) if x > 0 else 0.0


def _as_cvec(x) -> np.ndarray:
    return np.asarray(x, dtype=complex).ravel()


def effective_noise_variance(h, a, snr: float) -> tuple[float, complex]:
    """Minimum effective noise variance over the scaling and the optimal scaling.

    Uses the rank-one closed form
    ``snr * (||a||^2 - snr |h^H a|^2 / (1 + snr ||h||^2))``.

    Returns
    -------
    sigma2 : float
    alpha : complex
    """
    h, a = _as_cvec(h), _as_cvec(a)
    if h.shape != a.shape:
        raise ValueError(f"h has {h.size} entries, a has {a.size}")
    if snr <= 0:
        raise ValueError("snr must be positive")
    na2 = float(np.vdot(a, a).real)
    if na2 == 0:
        raise ZeroVector("integer coefficient vector is zero")
    nh2 = float(np.vdot(h, h).real)
    ha = complex(np.vdot(h, a))
    denom = 1.0 + snr * nh2
    sigma2 = snr * (na2 - snr * abs(ha) ** 2 / denom)
    # guard the closed form against cancellation; the true value is >= snr*na2/denom
    sigma2 = max(sigma2, snr * na2 / denom)
    alpha = snr * ha / denom
    return sigma2, alpha


def computation_rate(h, a, snr: float) -> float:
    """Computation rate ``log2+(snr / sigma2)`` in bits per complex channel use."""
    sigma2, _ = effective_noise_variance(h, a, snr)
    return log2_plus(snr / sigma2)


def _noise_form(h: np.ndarray, snr: float) -> np.ndarray:
    # (snr^-1 I + h h^H)^-1 by the matrix inversion lemma
    nh2 = float(np.vdot(h, h).real)
    return snr * np.eye(h.size) - (snr * snr / (1.0 + snr * nh2)) * np.outer(h, h.conj())


def cholesky_factor(h, snr: float) -> np.ndarray:
    """Lower-triangular ``L`` with ``L L^H = (snr^-1 I + h h^H)^-1``."""
    if snr <= 0:
        raise ValueError("snr must be positive")
    return np.linalg.cholesky(_noise_form(_as_cvec(h), snr))


def _check_full_rank(R: np.ndarray, what="basis"):
    d = np.abs(np.diag(R))
    if d.size and (d.min() <= 1e-12 * max(d.max(), 1e-300)):
        raise RankDeficient(f"{what} is not full column rank")


def lll_reduce(basis, delta: float = DEFAULT_DELTA) -> ReducedBasis:
    """Complex LLL reduction of the lattice spanned by the columns of ``basis``.

    Size reduction rounds real and imaginary parts of the Gram-Schmidt
    coefficients separately (Gaussian-integer rounding), so the recorded
    transform is a unimodular matrix over Z[j].
    """
    if not 0.25 < delta <= 1.0:
        raise ValueError("delta must lie in (0.25, 1]")
    B = np.array(basis, dtype=complex, order="C", ndmin=2)
    n, m = B.shape
    if m > n:
        raise RankDeficient("more basis vectors than ambient dimension")
    R = np.linalg.qr(B, mode="r")
    _check_full_rank(R)
    R = np.ascontiguousarray(R[:m, :m], dtype=complex)
    U = np.eye(m, dtype=complex)
    if m > 1:
        _backend.kernels.clll_inplace(B, R, U, float(delta))
    return ReducedBasis(basis=B, unimodular=np.round(U.real) + 1j * np.round(U.imag))


def is_lll_reduced(basis, delta: float = DEFAULT_DELTA, tol: float = 1e-9) -> bool:
    """Check complex size-reduction and Lovász conditions."""
    B = np.asarray(basis, dtype=complex)
    R = np.linalg.qr(B, mode="r")
    m = B.shape[1]
    for k in range(m):
        for j in range(k):
            mu = R[j, k] / R[j, j]
            if abs(mu.real) > 0.5 + tol or abs(mu.imag) > 0.5 + tol:
                return False
    for k in range(1, m):
        lhs = abs(R[k, k]) ** 2 + abs(R[k - 1, k]) ** 2
        if lhs < delta * abs(R[k - 1, k - 1]) ** 2 * (1 - tol):
            return False
    return True


def realify(B) -> np.ndarray:
    """Real generator of the lattice ``B Z[j]^m``, acting on ``[Re z; Im z]``."""
    B = np.asarray(B, dtype=complex)
    return np.block([[B.real, -B.imag], [B.imag, B.real]])


def canonical_unit(a) -> np.ndarray:
    """Multiply by the unit in {1, j, -1, -j} that puts the first nonzero entry
    in the quadrant Re > 0, Im >= 0."""
    a = np.asarray(a, dtype=complex)
    nz = np.flatnonzero(a)
    if nz.size == 0:
        return a.copy()
    x = a[nz[0]]
    for u in (1, -1j, -1, 1j):
        y = x * u
        if y.real > 0 and y.imag >= 0:
            return a * u
    raise AssertionError("unreachable")


def _lex_key(a: np.ndarray):
    return tuple(int(v) for pair in zip(np.rint(a.real), np.rint(a.imag)) for v in pair)


def _ball_points(B: np.ndarray, radius2: float, cap: int) -> np.ndarray:
    """All nonzero Gaussian-integer ``z`` with ``||B z||^2 <= radius2`` (rows)."""
    m = B.shape[1]
    R = np.linalg.qr(realify(B), mode="r")
    _check_full_rank(R)
    d = 2 * m
    logdet = float(np.sum(np.log(np.abs(np.diag(R)))))
    logvol = 0.5 * d * math.log(math.pi) + 0.5 * d * math.log(radius2) - math.lgamma(0.5 * d + 1)
    if logvol - logdet > math.log(cap):
        raise RadiusTooLarge(
            f"about {math.exp(logvol - logdet):.3g} lattice points in the ball exceed cap {cap}"
        )
    pts, overflow = _backend.kernels.enum_ball(np.ascontiguousarray(R), float(radius2), int(cap))
    if overflow:
        raise RadiusTooLarge(f"more than {cap} lattice points within radius")
    if not pts:
        return np.zeros((0, m), dtype=complex)
    w = np.asarray(pts, dtype=float)
    return w[:, :m] + 1j * w[:, m:]


def enumerate_short_vectors(
    basis, radius: float, cap: int = ENUM_CAP, canonical: bool = True
) -> list[np.ndarray]:
    """Nonzero coefficient vectors of lattice points within ``radius`` of the origin.

    Parameters
    ----------
    basis : ReducedBasis or array_like
        Enumeration runs on the reduced generator; returned coefficient
        vectors refer to the *original* generator (``a = U z``).  A plain
        matrix is enumerated as given.
    radius : float
    cap : int
        Abort with :class:`RadiusTooLarge` beyond this many points.
    canonical : bool
        Keep one representative per unit orbit ``{a, ja, -a, -ja}``
        (first nonzero entry in the first quadrant).  With ``False`` every
        lattice point is returned.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if isinstance(basis, ReducedBasis):
        B, U = basis.basis, basis.unimodular
    else:
        B = np.array(basis, dtype=complex, ndmin=2)
        U = np.eye(B.shape[1], dtype=complex)
    Z = _ball_points(B, radius * radius, cap)
    A = Z @ U.T
    A = np.round(A.real) + 1j * np.round(A.imag)
    out = []
    seen = set()
    for a in A:
        if canonical:
            a = canonical_unit(a)
            key = _lex_key(a)
            if key in seen:
                continue
            seen.add(key)
        out.append(a)
    return out


def _select_best(h: np.ndarray, snr: float, A: np.ndarray):
    """Pick the minimizer of the effective noise among the rows of ``A``.

    Ties (relative ``TIE_RTOL``) resolve to the lexicographically smallest
    canonical vector.
    """
    nh2 = float(np.vdot(h, h).real)
    denom = 1.0 + snr * nh2
    na2 = np.sum(np.abs(A) ** 2, axis=1)
    ha = A @ h.conj()
    sig = snr * (na2 - snr * np.abs(ha) ** 2 / denom)
    sig = np.maximum(sig, snr * na2 / denom)
    best = float(sig.min())
    ties = np.flatnonzero(sig <= best * (1 + TIE_RTOL))
    if ties.size == 1:
        a = canonical_unit(A[ties[0]])
    else:
        a = min((canonical_unit(A[t]) for t in ties), key=_lex_key)
    return a, best


def find_best_coefficients(h, snr: float, delta: float = DEFAULT_DELTA, cap: int = ENUM_CAP) -> CofSolution:
    """Integer coefficient vector minimising the effective noise variance.

    Steps: factor the quadratic form as ``||L^H a||^2``; LLL-reduce the
    columns of ``L^H``; take the shortest reduced column as the search
    radius (plus a relative ``1e-9`` slack); enumerate the ball and keep the
    global minimiser.
    """
    h = _as_cvec(h)
    if snr <= 0:
        raise ValueError("snr must be positive")
    if not np.all(np.isfinite(h)):
        raise ValueError("channel vector has non-finite entries")
    K = h.size
    F = np.ascontiguousarray(np.linalg.cholesky(_noise_form(h, snr)).conj().T)
    if K == 1:
        U = np.eye(1, dtype=complex)
    else:
        R = np.ascontiguousarray(np.linalg.qr(F, mode="r"), dtype=complex)
        U = np.eye(K, dtype=complex)
        _backend.kernels.clll_inplace(F, R, U, float(delta))
        U = np.round(U.real) + 1j * np.round(U.imag)
    rho = float(np.sqrt(np.min(np.sum(np.abs(F) ** 2, axis=0)))) * (1 + RADIUS_EPS)
    Z = _ball_points(F, rho * rho, cap)
    A = Z @ U.T
    A = np.round(A.real) + 1j * np.round(A.imag)
    a, sigma2 = _select_best(h, snr, A)
    _, alpha = effective_noise_variance(h, a, snr)
    return CofSolution(a=a, alpha=alpha, sigma2=sigma2, rate=log2_plus(snr / sigma2))


def exhaustive_coefficients(h, snr: float, box: int = 4) -> CofSolution:
    """Brute-force minimiser over ``|Re a_k|, |Im a_k| <= box`` (reference oracle)."""
    h = _as_cvec(h)
    K = h.size
    vals = np.arange(-box, box + 1)
    g = np.array(np.meshgrid(*([vals] * (2 * K)), indexing="ij")).reshape(2 * K, -1).T
    A = g[:, :K] + 1j * g[:, K:]
    A = A[np.any(A != 0, axis=1)]
    a, sigma2 = _select_best(h, snr, A)
    _, alpha = effective_noise_variance(h, a, snr)
    return CofSolution(a=a, alpha=alpha, sigma2=sigma2, rate=log2_plus(snr / sigma2))
