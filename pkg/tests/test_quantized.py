import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cn
from dascof.channels import ChannelModel, draw_channel
from dascof.gfield import FqMatrix
from dascof.lattice import ZeroVector
from dascof.quantized import (
    BackhaulTooSmall,
    NoisePmf,
    QuantGrid,
    algebraic_symbols,
    effective_noise_pmf,
    empirical_pmf,
    lqf_from_system,
    noise_entropy,
    noise_pmf,
    qcof_from_system,
    quantized_row_rates,
    rqcof_from_system,
    sawtooth,
    simulate_quantized_symbols,
)
from dascof.schemes import RankDeficient, SystemMatrix, build_system_matrix, rcof_from_system
from dascof.selection import ut_select_downlink


def fake_system(Q):
    L, K = Q.shape
    return SystemMatrix(Q, Q.lift(), np.zeros(L), np.ones(L), np.zeros((L, K), complex), 1.0)


def test_grid():
    g = QuantGrid(7, 10.0)
    assert g.tau ** 2 == pytest.approx(60.0)
    assert g.step * 7 == pytest.approx(g.tau)
    with pytest.raises(ValueError):
        QuantGrid(7, 0.0)
    with pytest.raises(ValueError):
        QuantGrid(5, 1.0)


@pytest.mark.parametrize("p", [3, 7, 11, 251])
@pytest.mark.parametrize("s", [0.01, 0.3, 1.0, 3.0, 10.0, 300.0])
def test_pmf_normalised_and_symmetric(p, s):
    pmf = noise_pmf(p, s)
    assert pmf.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(pmf.probs >= 0)
    np.testing.assert_allclose(pmf.probs[1:], pmf.probs[1:][::-1], rtol=1e-12, atol=1e-300)


def test_pmf_limits():
    assert noise_pmf(7, 0.0).probs[0] == 1.0
    assert noise_pmf(7, 1e-3).probs[0] == pytest.approx(1.0)
    np.testing.assert_allclose(noise_pmf(7, 100.0).probs, 1 / 7, atol=1e-9)


def test_pmf_zero_symbol_against_direct_sum():
    # P(nu = 0) collects the intervals centred at multiples of p
    from scipy.stats import norm

    p, s = 5, 4.0
    direct = sum(norm.cdf((p * m + 0.5) / s) - norm.cdf((p * m - 0.5) / s) for m in range(-40, 41))
    assert noise_pmf(p, s).probs[0] == pytest.approx(direct, rel=1e-12)


def test_pmf_fixed_truncation_reports_mass():
    pmf = noise_pmf(7, 10.0, m_max=2)
    assert pmf.truncation_mass > 0.01
    assert pmf.probs.sum() == pytest.approx(1.0)
    assert noise_pmf(7, 10.0).truncation_mass < 1e-12


@pytest.mark.parametrize("p", [7, 11])
@pytest.mark.parametrize("s", [0.3, 1.0, 3.0, 10.0])
def test_pmf_against_histogram(p, s):
    rng = np.random.default_rng(1000 * p + int(10 * s))
    emp = empirical_pmf(p, s, 10 ** 6, rng)
    tv = 0.5 * np.abs(noise_pmf(p, s).probs - emp).sum()
    assert tv <= 0.01


def test_effective_pmf_scaling():
    g = QuantGrid(7, 10.0)
    h, a = np.array([1.0, 0.5]), np.array([1, 0])
    pmf = effective_noise_pmf(h, a, g)
    from dascof.lattice import effective_noise_variance

    s2 = effective_noise_variance(h, a, 10.0)[0]
    assert pmf.sigma_eps == pytest.approx(math.sqrt((7 / g.tau) ** 2 * s2 / 2))
    with pytest.raises(ZeroVector):
        effective_noise_pmf(h, [0, 0], g)


def test_entropy_examples():
    point = NoisePmf(7, np.array([1.0, 0, 0, 0, 0, 0, 0]), 0.0)
    assert noise_entropy(point) == 0.0
    uni = NoisePmf(7, np.full(7, 1 / 7), 1.0)
    assert noise_entropy(uni) == pytest.approx(2 * math.log2(7))
    assert noise_entropy(uni) == pytest.approx(5.615, abs=1e-3)
    pr = np.array([0.9, 0.05, 0, 0, 0, 0, 0.05])
    want = 2 * (0.9 * math.log2(1 / 0.9) + 2 * 0.05 * math.log2(20))
    assert noise_entropy(NoisePmf(7, pr, 1.0)) == pytest.approx(want)
    assert want == pytest.approx(1.138, abs=1e-3)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([3, 7, 11, 19]), st.floats(1e-3, 50.0))
def test_entropy_bounds(p, s):
    h = noise_entropy(noise_pmf(p, s))
    assert -1e-12 <= h <= 2 * math.log2(p) + 1e-9


def test_qcof_noiseless_and_clamped():
    Q = FqMatrix(np.eye(3, dtype=int), np.zeros((3, 3), int), 7)
    cap = 2 * math.log2(7)
    assert qcof_from_system(fake_system(Q), 10.0, None, [cap] * 3).sum_rate == pytest.approx(3 * cap)
    dense = FqMatrix(np.ones((3, 3), int) + np.eye(3, dtype=int), np.zeros((3, 3), int), 7)
    assert qcof_from_system(fake_system(dense), 10.0, None, [cap, 0.0, cap]).sum_rate == 0.0
    with pytest.raises(RankDeficient):
        qcof_from_system(fake_system(FqMatrix(np.ones((2, 2), int), np.zeros((2, 2), int), 7)), 5.0, None, [1, 1])


def test_lqf_examples():
    Q = FqMatrix(np.eye(3, dtype=int), np.zeros((3, 3), int), 7)
    cap = 2 * math.log2(7)
    assert lqf_from_system(fake_system(Q), 6.0, None, [cap] * 3).sum_rate == pytest.approx(3 * cap)
    one = FqMatrix([[1]], [[0]], 7)
    assert lqf_from_system(fake_system(one), 6.0, None, [0.0]).sum_rate == 0.0
    with pytest.raises(BackhaulTooSmall):
        lqf_from_system(fake_system(Q), 5.0, None, [1, 1, 1])


def test_lqf_at_least_qcof_with_unequal_rows(rng):
    m = ChannelModel("bernoulli_gaussian", K=4, L=4, q=0.5)
    seen = 0
    for t in range(60):
        S = build_system_matrix(draw_channel(m, t), 100.0, 7)
        rates = quantized_row_rates(S)
        try:
            q = qcof_from_system(S, 50.0, None, rates).sum_rate
        except RankDeficient:
            continue
        assert lqf_from_system(S, 50.0, None, rates).sum_rate >= q - 1e-12
        seen += 1
    assert seen > 10


def test_rqcof_examples():
    Q = FqMatrix(np.eye(3, dtype=int), np.zeros((3, 3), int), 7)
    cap = 2 * math.log2(7)
    assert rqcof_from_system(fake_system(Q), 2.0, None, [cap] * 3).sum_rate == pytest.approx(6.0)
    assert rqcof_from_system(fake_system(Q), 0.0, None, [cap] * 3).sum_rate == 0.0


def test_quantized_rate_near_unquantized(rng):
    # sanity band: quantization can lose a lot but never gain more than a little
    for _ in range(30):
        S = build_system_matrix(cn(rng, 3, 3), 10 ** rng.uniform(0, 3), 251)
        assert np.all(quantized_row_rates(S) <= S.per_row_rate + 2.0)


def test_rqcof_gap_is_the_shaping_loss():
    m = ChannelModel("bernoulli_gaussian", K=25, L=5, q=0.5)
    gaps = []
    for t in range(40):
        S = build_system_matrix(draw_channel(m, t, "downlink", shape=(25, 5)), 100.0, 251)
        qr = quantized_row_rates(S)
        rows = ut_select_downlink(S.Q, S.per_row_rate).chosen
        gaps.append((rcof_from_system(S, 100.0, rows).sum_rate - rqcof_from_system(S, 100.0, rows, qr).sum_rate) / 5)
    assert 0.3 <= np.mean(gaps) <= 0.7


def test_sawtooth_range(rng):
    tau = 3.7
    x = 50 * cn(rng, 1000)
    w = sawtooth(x, tau)
    assert np.all((w.real >= -tau / 2) & (w.real < tau / 2))
    assert np.all((w.imag >= -tau / 2) & (w.imag < tau / 2))
    r = (x - w) / tau
    np.testing.assert_allclose(r, np.round(r), atol=1e-9)


def test_quantize_and_modulo_commute(rng):
    p, tau = 7, math.sqrt(60.0)
    step = tau / p
    x = 40 * (rng.standard_normal(10 ** 5) + 1j * rng.standard_normal(10 ** 5))

    def idx(v):
        k = np.floor(v / step + 0.5)
        return np.mod(k, p)

    a = idx(x.real) + 1j * idx(x.imag)
    w = sawtooth(x, tau)
    b = idx(w.real) + 1j * idx(w.imag)
    np.testing.assert_array_equal(a, b)


def _chain_inputs(rng, grid, K, L, n):
    p = grid.p.p
    c = FqMatrix(rng.integers(0, p, (K, n)), rng.integers(0, p, (K, n)), p)
    d = rng.uniform(0, grid.tau, (K, n)) + 1j * rng.uniform(0, grid.tau, (K, n))
    return c, d


def test_chain_noiseless_integer_channel(rng):
    grid = QuantGrid(7, 50.0)
    A = np.array([[1, 1j], [2, -1]])
    c, d = _chain_inputs(rng, grid, 2, 2, 200)
    u = simulate_quantized_symbols(A, A, grid, c, d, np.zeros((2, 200)), alpha=np.ones(2))
    assert u == FqMatrix.from_gaussian(A, 7) @ c


def test_chain_single_user_by_hand(rng):
    p = 11
    grid = QuantGrid(p, 20.0)
    c, d = _chain_inputs(rng, grid, 1, 1, 100)
    z = cn(rng, 1, 100)
    u = simulate_quantized_symbols([[1.0]], [[1]], grid, c, d, z, alpha=np.ones(1))
    k = z[0] / grid.step
    want_re = np.mod(c.re[0] + np.floor(k.real + 0.5), p).astype(int)
    want_im = np.mod(c.im[0] + np.floor(k.imag + 0.5), p).astype(int)
    np.testing.assert_array_equal(u.re[0], want_re)
    np.testing.assert_array_equal(u.im[0], want_im)


@pytest.mark.parametrize("p", [7, 251])
@pytest.mark.parametrize("snr_db", [0, 15, 30])
def test_chain_equals_algebraic_form(rng, p, snr_db):
    snr = 10 ** (snr_db / 10)
    grid = QuantGrid(p, snr)
    H = cn(rng, 3, 3)
    S = build_system_matrix(H, snr, p)
    c, d = _chain_inputs(rng, grid, 3, 3, 2000)
    z = cn(rng, 3, 2000)
    u = simulate_quantized_symbols(H, S.A, grid, c, d, z)
    u2, _ = algebraic_symbols(H, S.A, grid, c, d, z)
    assert u == u2


def test_chain_rejects_bad_shapes(rng):
    grid = QuantGrid(7, 10.0)
    c, d = _chain_inputs(rng, grid, 2, 2, 10)
    with pytest.raises(ValueError):
        simulate_quantized_symbols(np.eye(2), np.eye(3), grid, c, d, np.zeros((2, 10)))
    with pytest.raises(ValueError):
        simulate_quantized_symbols(np.eye(2), np.eye(2), grid, c, d, np.zeros((2, 9)))


def test_discrete_noise_matches_pmf():
    # the symbols' noise component follows the predicted pmf
    rng = np.random.default_rng(5)
    p, snr = 7, 10.0
    grid = QuantGrid(p, snr)
    h, a = np.array([[1.0]]), np.array([[1]])
    n = 200_000
    c, d = _chain_inputs(rng, grid, 1, 1, n)
    z = cn(rng, 1, n)
    _, zeta = algebraic_symbols(h, a, grid, c, d, z)
    emp = np.bincount(zeta.re[0], minlength=p) / n
    pmf = effective_noise_pmf(h[0], a[0], grid).probs
    assert 0.5 * np.abs(emp - pmf).sum() < 0.02
