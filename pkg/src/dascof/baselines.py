"""Reference schemes: QMF, QF, DF (uplink) and CDPC, CZFB, ZFB, DPC (downlink),
plus the Wyner-model helpers and the odd/even power allocation for CoF.

All rates are in bits per complex channel use.  Downlink channels have one
row per user; uplink channels one row per antenna terminal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .gfield import GaussianPrime
from .lattice import find_best_coefficients

__all__ = [
    "WynerParams",
    "TooManyRelays",
    "NonConvergence",
    "Singular",
    "wyner_matrix",
    "wyner_effective_channels",
    "logdet2",
    "qmf_rate",
    "qmf_wyner_fixed_point",
    "qmf_wyner_per_user",
    "wyner_cutset_per_user",
    "qf_rate",
    "df_wyner_rate",
    "BcResult",
    "bc_sum_capacity",
    "cdpc_rate",
    "czfb_rate",
    "zfb_rate",
    "dpc_sum_capacity",
    "dpc_sum_power_capacity",
    "cooperative_bound",
    "wyner_power_allocation",
    "wyner_rates",
    "qf_greedy_select",
    "czfb_greedy_users",
]

QMF_MAX_RELAYS = 12
BETA_STEP = 0.005


class TooManyRelays(ValueError):
    """Finite-L QMF enumerates 2^L subsets and is limited to small L."""


class NonConvergence(RuntimeError):
    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


class Singular(np.linalg.LinAlgError):
    """Zero-forcing precoder requested for a singular channel."""


@dataclass(frozen=True)
class WynerParams:
    """Symmetric Wyner model: unit direct gain, ``gamma`` to both neighbours."""

    gamma: float
    snr: float
    r0: float
    L: int | None = None  # None stands for the infinite-cell limit

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.snr < 0 or self.r0 < 0:
            raise ValueError("snr and r0 must be nonnegative")


def wyner_matrix(L: int, gamma: float, circulant: bool = True) -> np.ndarray:
    """``L x L`` Wyner channel: ones on the diagonal, ``gamma`` on both neighbours.

    With ``circulant`` (needs ``L >= 3``) the first and last cells are
    neighbours as well; otherwise the matrix is tridiagonal.
    """
    if circulant and L < 3:
        raise ValueError("a circulant Wyner network needs at least 3 cells")
    H = np.eye(L, dtype=complex)
    for i in range(L):
        for j in (i - 1, i + 1):
            if circulant:
                H[i, j % L] = gamma
            elif 0 <= j < L:
                H[i, j] = gamma
    return H


def wyner_effective_channels(gamma: float, beta: float):
    """Effective channels seen by odd and even receivers under power split ``beta``.

    Odd users send at ``beta P`` and even users at ``(2 - beta) P``.
    """
    if not 0 <= beta <= 1:
        raise ValueError("beta must lie in [0, 1]")
    a, b = math.sqrt(2 - beta), math.sqrt(beta)
    h_odd = np.array([gamma * a, b, gamma * a], dtype=complex)
    h_even = np.array([gamma * b, a, gamma * b], dtype=complex)
    return h_odd, h_even


def logdet2(M) -> float:
    """``log2 det`` of a Hermitian positive-definite matrix."""
    sign, ld = np.linalg.slogdet(M)
    if sign.real <= 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return float(ld / math.log(2))


# -- uplink -----------------------------------------------------------------


def qmf_rate(H, snr: float, r0: float, max_relays: int = QMF_MAX_RELAYS) -> float:
    """Quantize-remap-and-forward sum rate for a finite network.

    Maximises over the quantization margin ``r`` the minimum over relay
    subsets S of ``|S| (r0 - r) + log2 det(I + snr (1 - 2^-r) H_Sc H_Sc^H)``.
    The inner minimum is concave in ``r``, so a bounded scalar search
    suffices.
    """
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    L = H.shape[0]
    if L > max_relays:
        raise TooManyRelays(f"{L} relays exceed the subset-enumeration limit {max_relays}")
    if r0 <= 0:
        return 0.0
    # eigenvalues of H_Sc H_Sc^H for every subset S (bitmask of relays in S)
    terms = []
    for mask in range(1 << L):
        keep = [i for i in range(L) if not (mask >> i) & 1]
        size = L - len(keep)
        ev = np.linalg.eigvalsh(H[keep] @ H[keep].conj().T) if keep else np.zeros(0)
        terms.append((size, np.clip(ev, 0, None)))

    def inner(r):
        x = snr * (1.0 - 2.0 ** (-r))
        return min(s * (r0 - r) + float(np.log2(1.0 + x * ev).sum()) for s, ev in terms)

    res = optimize.minimize_scalar(lambda r: -inner(r), bounds=(0.0, r0), method="bounded",
                                   options={"xatol": 1e-12})
    return max(inner(res.x), inner(0.0), inner(r0))


def _wyner_F(r: float, gamma: float, snr: float) -> float:
    c = snr * (1.0 - 2.0 ** (-r))
    val, _ = integrate.quad(
        lambda t: math.log2(1.0 + c * (1.0 + 2.0 * gamma * math.cos(2 * math.pi * t)) ** 2),
        0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200,
    )
    return val


def qmf_wyner_fixed_point(params: WynerParams):
    """Solve ``F(r) = r0 - r``; returns ``(rate, r_star, residual)``."""
    g, snr, r0 = params.gamma, params.snr, params.r0
    if r0 == 0 or snr == 0:
        return 0.0, 0.0, 0.0
    r_star = optimize.brentq(lambda r: _wyner_F(r, g, snr) - (r0 - r), 0.0, r0, xtol=1e-13, rtol=1e-14)
    F = _wyner_F(r_star, g, snr)
    return F, r_star, abs(F - (r0 - r_star))


def qmf_wyner_per_user(params: WynerParams) -> float:
    """Per-user QMF rate in the infinite Wyner network."""
    return qmf_wyner_fixed_point(params)[0]


def wyner_cutset_per_user(params: WynerParams) -> float:
    """Per-user cut-set bound: ``min(r0, F(infinity))``."""
    val, _ = integrate.quad(
        lambda t: math.log2(1.0 + params.snr * (1.0 + 2.0 * params.gamma * math.cos(2 * math.pi * t)) ** 2),
        0.0, 1.0, epsabs=1e-12, limit=200,
    )
    return min(params.r0, val)


def qf_rate(H, snr: float, r0: float) -> float:
    """Quantize-and-forward sum rate ``log2 det(I + snr D H H^H)``."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    if r0 <= 0:
        return 0.0
    nh2 = np.sum(np.abs(H) ** 2, axis=1)
    Dq = (1.0 + snr * nh2) / math.expm1(r0 * math.log(2))
    D = 1.0 / (1.0 + Dq)
    # symmetric form: D^{1/2} H H^H D^{1/2} has the same determinant as D H H^H
    s = np.sqrt(D)
    M = np.eye(H.shape[0]) + snr * (s[:, None] * (H @ H.conj().T) * s[None, :])
    return logdet2(M)


def qf_greedy_select(H, snr: float, r0: float, n: int):
    """Greedily add the AT that most increases the QF sum rate, ``n`` times."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    chosen = []
    rate = 0.0
    for _ in range(n):
        best = None
        for i in range(H.shape[0]):
            if i in chosen:
                continue
            r = qf_rate(H[chosen + [i]], snr, r0)
            if best is None or r > best[1]:
                best = (i, r)
        chosen.append(best[0])
        rate = best[1]
    return tuple(sorted(chosen)), rate


def df_wyner_rate(params: WynerParams) -> float:
    """Per-user decode-and-forward rate in the Wyner model."""
    g2s = 2.0 * params.gamma ** 2 * params.snr
    r1 = math.log2(1.0 + params.snr / (1.0 + g2s))
    r2 = min(0.5 * math.log2(1.0 + g2s), math.log2(1.0 + (1.0 + 2 * params.gamma ** 2) * params.snr) / 3.0)
    return min(max(r1, r2), params.r0)


# -- downlink ---------------------------------------------------------------


@dataclass
class BcResult:
    """Broadcast sum capacity from the minimax dual.

    ``gap`` bounds the distance of ``value`` to the true saddle value.
    """

    value: float
    gap: float
    iterations: int
    user_powers: np.ndarray = field(repr=False, default=None)
    noise_weights: np.ndarray = field(repr=False, default=None)


def _bc_terms(G, d, lam):
    M = np.diag(lam).astype(complex) + G.conj().T @ (d[:, None] * G)
    S = np.linalg.inv(M)
    S = 0.5 * (S + S.conj().T)
    GS = G @ S
    return M, S, GS


def bc_sum_capacity(G, powers, tol: float = 1e-9, max_iter: int = 2000) -> BcResult:
    """Sum capacity of a Gaussian broadcast channel with per-antenna power limits.

    Solves the convex-concave minimax dual
    ``min_lambda max_d log2 det(Lambda + G^H D G) - log2 det Lambda`` with
    ``sum d = sum P``, ``sum lambda_i P_i = sum P``, ``d, lambda >= 0``, by a
    primal-dual log-barrier Newton method on the saddle point.

    Parameters
    ----------
    G : (K, L) complex
        User channels (rows), already divided by each user's noise std.
    powers : float or (L,) array
        Per-antenna power limits.
    """
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    K, L = G.shape
    P = np.broadcast_to(np.asarray(powers, dtype=float), (L,)).copy()
    if np.any(P <= 0):
        raise ValueError("per-antenna powers must be positive")
    PT = float(P.sum())
    d = np.full(K, PT / K)
    lam = np.ones(L)
    one_k, zk, zl = np.ones(K), np.zeros(K), np.zeros(L)
    mu = 1e-1
    it = 0

    def grads(d, lam, mu):
        _, S, GS = _bc_terms(G, d, lam)
        gd = np.einsum("kl,kl->k", GS, G.conj()).real + mu / d
        gl = np.diag(S).real - (1.0 + mu) / lam
        return gd, gl, S, GS

    def resid(gd, gl):
        rd = gd - gd.mean()
        rl = gl - P * (P @ gl) / (P @ P)
        return math.sqrt(float(rd @ rd + rl @ rl))

    while True:
        for _ in range(100):
            it += 1
            gd, gl, S, GS = grads(d, lam, mu)
            r = resid(gd, gl)
            if r < 1e-10 * (1 + mu):
                break
            W = GS @ G.conj().T
            Hdd = -np.abs(W) ** 2 - np.diag(mu / d ** 2)
            Hll = -np.abs(S) ** 2 + np.diag((1.0 + mu) / lam ** 2)
            Hdl = -np.abs(GS) ** 2
            n = K + L
            kkt = np.zeros((n + 2, n + 2))
            kkt[:K, :K] = Hdd
            kkt[:K, K:n] = Hdl
            kkt[K:n, :K] = Hdl.T
            kkt[K:n, K:n] = Hll
            kkt[:K, n] = one_k
            kkt[n, :K] = one_k
            kkt[K:n, n + 1] = P
            kkt[n + 1, K:n] = P
            rhs = -np.concatenate([gd, gl, [0.0, 0.0]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
            dd, dl = sol[:K], sol[K:n]
            # fraction to the boundary, then backtrack on the residual
            t = 1.0
            neg = dd < 0
            if neg.any():
                t = min(t, 0.99 * float(np.min(-d[neg] / dd[neg])))
            neg = dl < 0
            if neg.any():
                t = min(t, 0.99 * float(np.min(-lam[neg] / dl[neg])))
            while t > 1e-12:
                nd, nl = d + t * dd, lam + t * dl
                ngd, ngl, _, _ = grads(nd, nl, mu)
                if resid(ngd, ngl) <= (1 - 0.01 * t) * r:
                    break
                t *= 0.5
            d, lam = nd, nl
        else:
            if mu < 1e-6:
                break
            raise NonConvergence(f"Newton stage at mu={mu:g} did not converge", best=_bc_value(G, d, lam))
        if mu <= tol / (K + L) or it >= max_iter:
            break
        mu *= 0.1
    value = _bc_value(G, d, lam)
    gap = mu * (K + L) / math.log(2)
    if it >= max_iter and gap > 1e-6:
        raise NonConvergence(f"no convergence after {it} Newton steps", best=value)
    return BcResult(value, gap, it, d, lam)


def _bc_value(G, d, lam):
    M = np.diag(lam).astype(complex) + G.conj().T @ (d[:, None] * G)
    return logdet2(M) - float(np.log2(lam).sum())


def cdpc_rate(Hd, snr: float, r0: float) -> float:
    """Compressed DPC sum rate: per-antenna DPC with quantization noise.

    Antennas transmit at most ``snr (2^r0 - 1) / 2^r0`` of useful power and
    user ``k`` sees noise variance ``1 + ||h_k||^2 snr 2^-r0``.
    """
    if r0 <= 0:
        return 0.0
    Hd = np.atleast_2d(np.asarray(Hd, dtype=complex))
    frac = -math.expm1(-r0 * math.log(2))
    Pa = snr * frac
    noise = 1.0 + np.sum(np.abs(Hd) ** 2, axis=1) * snr * 2.0 ** (-r0)
    G = Hd / np.sqrt(noise)[:, None]
    return bc_sum_capacity(G, Pa).value


def dpc_sum_capacity(Hd, snr: float) -> float:
    """Sum capacity under a per-antenna power limit ``snr`` (unit noise)."""
    return bc_sum_capacity(np.atleast_2d(np.asarray(Hd, dtype=complex)), snr).value


def dpc_sum_power_capacity(Hd, total_power: float, tol=1e-10) -> float:
    """Sum capacity under a total power limit, via the uplink dual.

    Maximises ``log2 det(I + H^H D H)`` over diagonal ``D >= 0`` with
    ``tr D = total_power`` (exponentiated-gradient iterations).
    """
    Hd = np.atleast_2d(np.asarray(Hd, dtype=complex))
    K, L = Hd.shape
    d = np.full(K, total_power / K)
    prev = -np.inf
    for _ in range(20000):
        M = np.eye(L) + Hd.conj().T @ (d[:, None] * Hd)
        S = np.linalg.inv(M)
        g = np.einsum("kl,lm,km->k", Hd, S, Hd.conj()).real
        # multiplicative update keeps d on the simplex; fixed point is KKT
        d = d * g
        d *= total_power / d.sum()
        val = logdet2(np.eye(L) + Hd.conj().T @ (d[:, None] * Hd))
        if val - prev < tol:
            break
        prev = val
    return val


def cooperative_bound(Hd, snr: float) -> float:
    """Full-cooperation bound: MIMO capacity with total power ``L snr``."""
    Hd = np.atleast_2d(np.asarray(Hd, dtype=complex))
    P = Hd.shape[1] * snr
    g = np.linalg.svd(Hd, compute_uv=False) ** 2
    g = np.sort(g[g > 1e-15])[::-1]
    # water filling: the k strongest modes are active at level w
    for k in range(len(g), 0, -1):
        w = (P + float(np.sum(1.0 / g[:k]))) / k
        if w > 1.0 / g[k - 1]:
            return float(np.log2(w * g[:k]).sum())
    return 0.0


def _zf_rows(Hd):
    Hd = np.atleast_2d(np.asarray(Hd, dtype=complex))
    if Hd.shape[0] != Hd.shape[1]:
        raise ValueError("zero forcing needs a square channel")
    try:
        B = np.linalg.inv(Hd)
    except np.linalg.LinAlgError as exc:
        raise Singular(str(exc)) from None
    if not np.all(np.isfinite(B)) or np.linalg.cond(Hd) > 1e14:
        raise Singular("channel is numerically singular")
    return np.sum(np.abs(B) ** 2, axis=1)


def czfb_rate(Hd, snr: float, r0: float) -> float:
    """Compressed zero-forcing beamforming sum rate with ``B = Hd^{-1}``."""
    if r0 <= 0:
        return 0.0
    Hd = np.atleast_2d(np.asarray(Hd, dtype=complex))
    b2 = _zf_rows(Hd)
    nh2 = np.sum(np.abs(Hd) ** 2, axis=1)
    qn = (1.0 + nh2 * snr) / math.expm1(r0 * math.log(2))
    return float(np.log2(1.0 + (snr / b2) / (1.0 + qn)).sum())


def zfb_rate(Hd, snr: float, normalization: str = "max_row") -> float:
    """Zero-forcing beamforming sum rate.

    ``max_row`` scales all streams so the most loaded antenna meets the
    power limit (the integer-forcing power rule with the identity matrix);
    ``per_stream`` uses ``sum log2(1 + snr / ||b_l||^2)``.
    """
    b2 = _zf_rows(Hd)
    if normalization == "max_row":
        return float(len(b2) * math.log2(1.0 + snr / b2.max()))
    if normalization == "per_stream":
        return float(np.log2(1.0 + snr / b2).sum())
    raise ValueError(f"unknown normalization {normalization!r}")


def czfb_greedy_users(Hd, snr: float, r0: float, n: int):
    """Standard greedy user selection for CZFB: add the user that most
    increases the CZFB sum rate of the selected users on ``n`` antennas.

    ``Hd`` is ``K x n``; returns ``(users, rate)``.
    """
    Hd = np.atleast_2d(np.asarray(Hd, dtype=complex))
    K = Hd.shape[0]
    chosen = []
    best_rate = 0.0
    for _ in range(n):
        best = None
        for k in range(K):
            if k in chosen:
                continue
            sub = Hd[chosen + [k]]
            rate = _czfb_rect(sub, snr, r0)
            if best is None or rate > best[1]:
                best = (k, rate)
        if best is None or best[1] <= best_rate and chosen:
            break
        chosen.append(best[0])
        best_rate = best[1]
    chosen = sorted(chosen)
    if len(chosen) == n:
        # the square formula pairs user l with antenna l; report it for the
        # returned (sorted) user order
        best_rate = czfb_rate(Hd[chosen], snr, r0)
    return tuple(chosen), best_rate


def _czfb_rect(Hs, snr, r0):
    # zero forcing for fewer users than antennas: pseudo-inverse precoder
    if r0 <= 0:
        return 0.0
    B = np.linalg.pinv(Hs)
    b2 = np.sum(np.abs(B) ** 2, axis=0)
    nh2 = np.sum(np.abs(Hs) ** 2, axis=1)
    qn = (1.0 + nh2 * snr) / math.expm1(r0 * math.log(2))
    return float(np.log2(1.0 + (snr / b2) / (1.0 + qn)).sum())


# -- Wyner power allocation -------------------------------------------------


PA_CHECK_CELLS = 20
PA_CHECK_PRIME = 251


def _pa_full_rank(a_odd, a_even, p, cells=PA_CHECK_CELLS) -> bool:
    """Whether the alternating coefficient rows give a full-rank system.

    Checked on a circulant network with an even number of cells; row ``i``
    puts ``a[0], a[1], a[2]`` on users ``i - 1, i, i + 1``.
    """
    from .gfield import FqMatrix, fq_rank

    A = np.zeros((cells, cells), dtype=complex)
    for i in range(cells):
        a = a_odd if i % 2 == 0 else a_even
        for off, c in zip((-1, 0, 1), a):
            A[i, (i + off) % cells] += c
    return fq_rank(FqMatrix.from_gaussian(A, p)) == cells


@lru_cache(maxsize=65536)
def _pa_rates(gamma, beta, snr, p):
    """Odd/even receiver rates; ``None`` when the coefficients are unusable.

    Cached: the rates do not depend on the backhaul rate, so sweeps over
    ``r0`` reuse them.
    """
    ho, he = wyner_effective_channels(gamma, beta)
    so, se = find_best_coefficients(ho, snr), find_best_coefficients(he, snr)
    if not _pa_full_rank(so.a, se.a, PA_CHECK_PRIME if p is None else p):
        return None
    if p is None:
        return so.rate, se.rate
    from .quantized import QuantGrid, _pmf_from_sigma2, noise_entropy

    grid = QuantGrid(p, snr)
    cap = 2 * math.log2(grid.p.p)
    ro = max(0.0, cap - noise_entropy(_pmf_from_sigma2(so.sigma2, grid)))
    re = max(0.0, cap - noise_entropy(_pmf_from_sigma2(se.sigma2, grid)))
    return ro, re


def wyner_rates(params: WynerParams, beta: float = 1.0, p=None):
    """Odd and even receiver rates at a given power split (``None`` if the
    resulting system matrix is rank deficient)."""
    return _pa_rates(params.gamma, beta, params.snr, p)


def wyner_power_allocation(params: WynerParams, scheme: str = "cof", p=None, step: float = BETA_STEP):
    """Optimise the odd/even power split ``beta`` for CoF or RCoF.

    Splits whose coefficient choices make the system matrix rank deficient
    (for instance ``beta = 0``, which silences the odd users) are excluded.
    The objective is ``min(r0, R_odd, R_even)`` for ``cof`` and the average
    of the two clamped rates for ``rcof``.  With ``p`` the quantized rates
    ``2 log2 p - H(zeta)`` are used instead of the computation rates.  A grid
    of spacing ``step`` is refined by a bounded scalar search around the best
    grid point.  Returns ``(beta, per-user rate)``.
    """
    if scheme not in ("cof", "rcof"):
        raise ValueError("scheme must be 'cof' or 'rcof'")
    if params.snr <= 0 or params.r0 == 0:
        return 1.0, 0.0
    if p is not None and not isinstance(p, GaussianPrime):
        p = GaussianPrime(int(p))
    r0 = params.r0

    def obj(beta):
        rates = _pa_rates(float(params.gamma), float(beta), float(params.snr), p)
        if rates is None:
            return -1.0
        ro, re = rates
        if scheme == "cof":
            return min(r0, ro, re)
        return 0.5 * (min(r0, ro) + min(r0, re))

    grid = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    vals = [obj(b) for b in grid]
    i = int(np.argmax(vals))
    best_b, best_v = float(grid[i]), float(vals[i])
    lo, hi = max(0.0, best_b - step), min(1.0, best_b + step)
    if hi > lo:
        res = optimize.minimize_scalar(lambda b: -obj(b), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-5})
        if -res.fun > best_v:
            best_b, best_v = float(res.x), float(-res.fun)
    return best_b, best_v
