import math

import numpy as np
import pytest

from conftest import cn
from dascof.baselines import Singular, zfb_rate
from dascof.gfield import gaussian_det
from dascof.ifb import (
    IfbDesign,
    RankDeficientModP,
    ifb_design,
    ifb_objective,
    ifb_rate,
    ifb_sum_rate,
    is_unimodular,
)


def unimodular_box(Hinv, box=3):
    """Every 2 x 2 unimodular matrix with entries in the box, as (A, B) stacks."""
    vals = np.arange(-box, box + 1)
    re, im = np.meshgrid(vals, vals, indexing="ij")
    z = (re + 1j * im).ravel()
    cols = np.array(np.meshgrid(z, z, indexing="ij")).reshape(2, -1)  # (2, n) column vectors
    det = np.outer(cols[0], cols[1]) - np.outer(cols[1], cols[0])
    i, k = np.nonzero(np.abs(np.abs(det) - 1.0) < 1e-9)
    A = np.stack([cols[:, i], cols[:, k]], axis=-1).transpose(1, 0, 2)  # (m, 2, 2)
    B = np.einsum("ij,mjk->mik", Hinv, A)
    return A, B


def box_oracle(Hd, snr, box=3):
    """Best rate among box matrices whose sum power is at most the identity's,
    and the smallest sum power in the box."""
    Hinv = np.linalg.inv(Hd)
    A, B = unimodular_box(Hinv, box)
    a2 = np.sum(np.abs(A) ** 2, axis=2)
    rowpow = np.sum(np.abs(B) ** 2, axis=2)
    rates = np.log2(snr / rowpow.max(axis=1, keepdims=True) + 1.0 / a2).sum(axis=1)
    traces = rowpow.sum(axis=1)
    feasible = traces <= np.sum(np.abs(Hinv) ** 2) * (1 + 1e-12)
    return float(rates[feasible].max()), float(traces.min())


def test_identity_channel():
    d = ifb_design(np.eye(3), 100.0)
    np.testing.assert_array_equal(d.A_tilde, np.eye(3))
    np.testing.assert_allclose(d.B, np.eye(3))
    rep = ifb_sum_rate(d, 100.0, 251)
    assert rep.sum_rate == pytest.approx(3 * math.log2(101))
    assert rep.sum_rate == pytest.approx(zfb_rate(np.eye(3), 100.0))


def test_power_penalty_scaling():
    d = IfbDesign(np.eye(2), 2 * np.eye(2), 4.0)
    assert ifb_sum_rate(d, 100.0, 7).sum_rate == pytest.approx(2 * math.log2(1 + 25.0))
    np.testing.assert_allclose(ifb_rate(d, 100.0), math.log2(26.0))


def test_unitary_channel_keeps_identity(rng):
    for _ in range(5):
        U, _ = np.linalg.qr(cn(rng, 2, 2))
        d = ifb_design(U, 100.0)
        best, _ = box_oracle(U, 100.0)
        zf = ifb_objective(np.eye(2), np.linalg.inv(U), 100.0)
        assert ifb_objective(d.A_tilde, d.B, 100.0) == pytest.approx(zf)
        assert best <= zf + 1e-9


def test_near_singular_channel_beats_zero_forcing():
    Hd = np.array([[1.0, 0.95], [0.9, 1.0 + 0.05j]])
    snr = 1000.0
    d = ifb_design(Hd, snr)
    zf_trace = float(np.sum(np.abs(np.linalg.inv(Hd)) ** 2))
    best_rate, best_trace = box_oracle(Hd, snr)
    assert d.sum_power < zf_trace
    assert best_trace < zf_trace
    # the search may leave the box, so it can only do better
    assert ifb_objective(d.A_tilde, d.B, snr) >= best_rate - 1e-9


def test_design_against_box_oracle(rng):
    for _ in range(20):
        Hd = cn(rng, 2, 2)
        snr = 10 ** rng.uniform(1, 3)
        d = ifb_design(Hd, snr)
        best, _ = box_oracle(Hd, snr)
        got = ifb_objective(d.A_tilde, d.B, snr)
        assert got >= best - 1e-9
        np.testing.assert_allclose(Hd @ d.B, d.A_tilde, atol=1e-9)


def test_ensemble_properties(rng):
    for _ in range(40):
        L = int(rng.integers(2, 6))
        Hd = cn(rng, L, L)
        snr = 10 ** rng.uniform(0, 3)
        d = ifb_design(Hd, snr, 251)
        assert is_unimodular(d.A_tilde)
        assert gaussian_det(d.A_tilde).norm() == 1
        zf_trace = float(np.sum(np.abs(np.linalg.inv(Hd)) ** 2))
        assert d.sum_power <= zf_trace * (1 + 1e-9)
        assert d.max_row_power == pytest.approx(np.max(np.sum(np.abs(d.B) ** 2, axis=1)))
        rep = ifb_sum_rate(d, snr, 251)
        assert rep.sum_rate >= zfb_rate(Hd, snr) - 1e-9
        assert rep.info["unimodular"]


def test_row_permutation_keeps_sum_rate(rng):
    for _ in range(10):
        Hd = cn(rng, 3, 3)
        perm = rng.permutation(3)
        a = ifb_sum_rate(ifb_design(Hd, 100.0), 100.0, 251)
        b = ifb_sum_rate(ifb_design(Hd[perm], 100.0), 100.0, 251)
        assert b.sum_rate == pytest.approx(a.sum_rate, abs=1e-9)


def test_singular_mod_p():
    d = IfbDesign(np.diag([1, 3]).astype(complex), np.eye(2), 1.0)
    with pytest.raises(RankDeficientModP):
        ifb_sum_rate(d, 10.0, 3)
    assert ifb_sum_rate(d, 10.0, 7).sum_rate > 0
    assert not is_unimodular(d.A_tilde)


def test_bad_channels():
    with pytest.raises(Singular):
        ifb_design(np.ones((2, 2)), 10.0)
    with pytest.raises(ValueError):
        ifb_design(np.ones((2, 3)), 10.0)
