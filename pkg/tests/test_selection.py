import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cn
from dascof.channels import ChannelModel, draw_channel
from dascof.gfield import FqMatrix, fq_rank
from dascof.quantized import BackhaulTooSmall, quantized_row_rates
from dascof.schemes import SystemMatrix, build_system_matrix, decomposed_sum_rate, network_decompose
from dascof.selection import (
    NoBasis,
    TooLarge,
    at_select_cof,
    at_select_lqf,
    exhaustive_select,
    greedy_select,
    selection_objective,
    ut_select_downlink,
)


def rand_fq(rng, m, n, p=7):
    return FqMatrix(rng.integers(0, p, (m, n)), rng.integers(0, p, (m, n)), p)


def real_fq(rows, p=7):
    rows = np.array(rows, dtype=int)
    return FqMatrix(rows, np.zeros_like(rows), p)


def fake_system(Q, rates):
    L, K = Q.shape
    return SystemMatrix(Q, Q.lift(), np.asarray(rates, float), np.ones(L), np.zeros((L, K), complex), 1.0)


def test_square_full_rank_takes_everything(rng):
    Q = real_fq(np.eye(3) + np.triu(np.ones((3, 3))))
    assert greedy_select(Q, [0.1, 5.0, 2.0]).chosen == (0, 1, 2)


def test_dependent_row_is_skipped():
    Q = real_fq([[1, 0], [1, 0], [0, 1]])
    res = greedy_select(Q, [3.0, 2.0, 1.0])
    assert res.chosen == (0, 2)
    assert res.objective == pytest.approx(4.0)


def test_ties_prefer_lower_index():
    Q = real_fq([[1, 0], [1, 0], [0, 1], [0, 1]])
    assert greedy_select(Q, [1.0, 1.0, 1.0, 1.0]).chosen == (0, 2)


def test_no_basis():
    with pytest.raises(NoBasis):
        greedy_select(real_fq([[1, 0], [2, 0], [3, 0]]), [1, 2, 3])
    with pytest.raises(ValueError):
        greedy_select(real_fq([[1, 0], [0, 1]]), [1, 2, 3])


def test_matroid_greedy_equals_exhaustive(rng):
    checked = 0
    while checked < 500:
        m = int(rng.integers(2, 9))
        n = int(rng.integers(1, min(m, 4) + 1))
        Q = rand_fq(rng, m, n)
        # sprinkle zeros so that dependencies actually occur
        mask = rng.random((m, n)) < 0.4
        Q = FqMatrix(np.where(mask, 0, Q.re), np.where(mask, 0, Q.im), 7)
        w = rng.integers(0, 5, m).astype(float)
        try:
            want = exhaustive_select(Q, w)
        except NoBasis:
            with pytest.raises(NoBasis):
                greedy_select(Q, w)
            continue
        got = greedy_select(Q, w)
        assert got.objective == want.objective
        assert fq_rank(Q.submatrix(got.chosen)) == n
        checked += 1


def test_maxmin_greedy_is_optimal_when_not_decomposable(rng):
    seen = 0
    for _ in range(400):
        m, n = 6, 3
        Q = rand_fq(rng, m, n)
        mask = rng.random((m, n)) < 0.3
        Q = FqMatrix(np.where(mask, 0, Q.re), np.where(mask, 0, Q.im), 7)
        w = rng.uniform(0, 5, m)
        try:
            want = exhaustive_select(Q, w, "maxmin")
        except NoBasis:
            continue
        if len(network_decompose(Q.submatrix(want.chosen))) > 1:
            continue
        assert greedy_select(Q, w, objective="maxmin").objective == pytest.approx(want.objective)
        seen += 1
    assert seen > 100


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_permuting_equal_weights_keeps_objective(seed):
    rng = np.random.default_rng(seed)
    Q = rand_fq(rng, 7, 3)
    w = rng.integers(0, 3, 7).astype(float)
    try:
        base = greedy_select(Q, w).objective
    except NoBasis:
        return
    perm = rng.permutation(7)
    assert greedy_select(Q.submatrix(perm), w[perm]).objective == base


def test_selection_objectives():
    Q = real_fq([[1, 0], [0, 1], [1, 1]])
    w = [2.0, 3.0, 5.0]
    assert selection_objective(Q, w, (0, 1)) == 5.0
    assert selection_objective(Q, w, (0, 1), "maxmin") == 2.0
    assert selection_objective(Q, w, (0, 1), "decomposed") == 5.0
    assert selection_objective(Q, w, (0, 2), "decomposed") == 4.0
    with pytest.raises(ValueError):
        selection_objective(Q, w, (0, 1), "median")


def test_exhaustive_limits():
    Q = real_fq(np.eye(2))
    assert exhaustive_select(Q, [1, 2]).chosen == (0, 1)
    with pytest.raises(TooLarge):
        exhaustive_select(rand_fq(np.random.default_rng(0), 40, 10), np.ones(40))
    with pytest.raises(NoBasis):
        exhaustive_select(real_fq([[1, 0], [2, 0]]), [1, 1])


def test_at_select_dense_equals_greedy(rng):
    # no zero entries: a single subnetwork
    Q = FqMatrix(rng.integers(1, 7, (6, 3)), rng.integers(0, 7, (6, 3)), 7)
    rates = rng.uniform(0, 4, 6)
    S = fake_system(Q, rates)
    res = at_select_cof(S, 3.0)
    assert res.chosen == greedy_select(Q, np.minimum(3.0, rates)).chosen


def test_at_select_two_blocks_against_exhaustive(rng):
    for _ in range(100):
        # two subnetworks of 2 users, each reachable by 3 receivers
        top = rand_fq(rng, 3, 2)
        bot = rand_fq(rng, 3, 2)
        re = np.zeros((6, 4), int)
        im = np.zeros((6, 4), int)
        re[:3, :2], im[:3, :2] = top.re, top.im
        re[3:, 2:], im[3:, 2:] = bot.re, bot.im
        Q = FqMatrix(re, im, 7)
        perm = rng.permutation(6)
        Q = Q.submatrix(perm)
        rates = rng.uniform(0, 4, 6)
        S = fake_system(Q, rates)
        try:
            res = at_select_cof(S, 10.0)
        except NoBasis:
            assert fq_rank(Q) < 4
            continue
        best = max(
            decomposed_sum_rate(Q.submatrix(c), rates[list(c)], 10.0)[0]
            for c in combinations(range(6), 4)
            if fq_rank(Q.submatrix(c)) == 4
        )
        if not res.possibly_suboptimal:
            assert res.objective == pytest.approx(best)
        assert res.objective <= best + 1e-12


def test_at_select_equal_weights():
    Q = real_fq([[1, 1], [1, 2], [2, 1]])
    res = at_select_cof(fake_system(Q, [1.5, 1.5, 1.5]), 1.0)
    assert len(res.chosen) == 2
    assert res.objective == pytest.approx(2 * 1.0)


def test_at_select_unreached_user():
    Q = real_fq([[1, 0], [2, 0]])
    with pytest.raises(NoBasis):
        at_select_cof(fake_system(Q, [1, 1]), 1.0)


def test_at_select_lqf(rng):
    m = ChannelModel("bernoulli_gaussian", K=3, L=8, q=0.6)
    checked = 0
    for t in range(40):
        S = build_system_matrix(draw_channel(m, t), 100.0, 7)
        rates = quantized_row_rates(S)
        try:
            res = at_select_lqf(S, 6.0, rates)
        except NoBasis:
            continue
        want = exhaustive_select(S.Q, np.minimum(6.0, rates))
        assert res.objective == pytest.approx(want.objective)
        checked += 1
    assert checked > 10
    with pytest.raises(BackhaulTooSmall):
        at_select_lqf(S, 5.0, rates)


def test_at_select_lqf_skips_duplicates():
    Q = real_fq([[1, 0], [1, 0], [0, 1]])
    S = fake_system(Q, [0, 0, 0])
    res = at_select_lqf(S, 6.0, [4.0, 4.0, 1.0])
    assert res.chosen == (0, 2)


def test_ut_select_downlink(rng):
    Q = real_fq([[1, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    res = ut_select_downlink(Q, [1.0, 100.0, 1.0, 1.0])
    assert res.chosen == (1, 2, 3)
    Qh = real_fq([[1, 0], [1, 0], [0, 1]])
    assert ut_select_downlink(Qh, [1.0, 100.0, 2.0]).chosen == (1, 2)
    for _ in range(50):
        Q = rand_fq(rng, 8, 3)
        w = rng.uniform(0, 3, 8)
        try:
            want = exhaustive_select(Q, w)
        except NoBasis:
            continue
        assert ut_select_downlink(Q, w).objective == pytest.approx(want.objective)


def test_selected_rows_always_form_a_basis(rng):
    for _ in range(50):
        S = build_system_matrix(cn(rng, 8, 3), 100.0, 7)
        res = at_select_cof(S, 4.0)
        assert fq_rank(S.Q.submatrix(res.chosen)) == 3
        assert len(res.chosen) == 3
