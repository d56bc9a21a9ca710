import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dascof.gfield import (
    FqElem,
    FqMatrix,
    GaussianInt,
    GaussianPrime,
    InvalidPrime,
    RowSpace,
    Singular,
    ZeroInverse,
    fq_inverse,
    fq_inverse_matrix,
    fq_rank,
    fq_solve,
    gaussian_det,
    mod_p_reduce,
)

P7 = GaussianPrime(7)
small = st.integers(-50, 50)


def all_elems(p):
    P = GaussianPrime(p)
    return [FqElem(a, b, P) for a in range(p) for b in range(p)]


def rand_fq(rng, m, n, p=7):
    return FqMatrix(rng.integers(0, p, (m, n)), rng.integers(0, p, (m, n)), p)


def rand_invertible(rng, n, p=7):
    while True:
        M = rand_fq(rng, n, n, p)
        if fq_rank(M) == n:
            return M


@pytest.mark.parametrize("p", [2, 5, 13, 17, 9, 1, 0])
def test_rejects_non_gaussian_primes(p):
    with pytest.raises(InvalidPrime):
        GaussianPrime(p)


@pytest.mark.parametrize("p", [3, 7, 11, 19, 251])
def test_accepts_gaussian_primes(p):
    assert GaussianPrime(p).p == p


@pytest.mark.parametrize(
    "z, expected",
    [(0, (0, 0)), (-1 + 8j, (6, 1)), (3 - 4j, (3, 3))],
)
def test_mod_p_reduce_examples(z, expected):
    x = mod_p_reduce(z, 7)
    assert (x.re, x.im) == expected


def test_fq_inverse_examples():
    assert fq_inverse(FqElem(1, 0, P7)) == FqElem(1, 0, P7)
    assert fq_inverse(FqElem(1, 1, P7)) == FqElem(4, 3, P7)
    with pytest.raises(ZeroInverse):
        fq_inverse(FqElem(0, 0, P7))


def test_inverse_by_exhaustive_search():
    one = FqElem(1, 0, P7)
    elems = all_elems(7)
    for x in elems[1:]:
        matches = [y for y in elems if x * y == one]
        assert matches == [fq_inverse(x)]


def test_field_axioms_exhaustive_p7():
    E = all_elems(7)
    zero, one = FqElem(0, 0, P7), FqElem(1, 0, P7)
    for x in E:
        assert x + zero == x and x * one == x
        assert x + (-x) == zero
        if x:
            assert x * fq_inverse(x) == one
    # associativity and distributivity over all triples
    for x, y, z in itertools.product(E, repeat=3):
        assert (x + y) + z == x + (y + z)
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z
    for x, y in itertools.product(E, repeat=2):
        assert x + y == y + x and x * y == y * x


def test_multiplicative_group_order():
    # the nonzero elements form a cyclic group of order p^2 - 1: some element has that order
    one = FqElem(1, 0, P7)
    orders = []
    for x in all_elems(7)[1:]:
        y, k = x, 1
        while y != one:
            y, k = y * x, k + 1
        orders.append(k)
    assert max(orders) == 48
    assert all(48 % k == 0 for k in orders)


@given(small, small, small, small)
def test_reduction_is_a_ring_homomorphism(a, b, c, d):
    x, y = GaussianInt(a, b), GaussianInt(c, d)
    assert mod_p_reduce(x * y, 7) == mod_p_reduce(x, 7) * mod_p_reduce(y, 7)
    assert mod_p_reduce(x + y, 7) == mod_p_reduce(x, 7) + mod_p_reduce(y, 7)


@given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 6), st.integers(0, 6))
def test_natural_map_homomorphism(a, b, c, d):
    x, y = FqElem(a, b, P7), FqElem(c, d, P7)
    prod = x.lift() * y.lift()
    assert mod_p_reduce(prod, 7) == x * y


def test_rank_examples(rng):
    assert fq_rank(FqMatrix.identity(4, 7)) == 4
    assert fq_rank(FqMatrix.zeros(3, 5, 7)) == 0
    D = FqMatrix(np.diag([1, 2, 3, 0, 0]), np.zeros((5, 5), int), 7)
    for _ in range(20):
        M = rand_invertible(rng, 5) @ D @ rand_invertible(rng, 5)
        assert fq_rank(M) == 3


def test_rank_transpose_and_permutation(rng):
    for _ in range(50):
        m, n = rng.integers(1, 7, 2)
        M = rand_fq(rng, m, n)
        r = fq_rank(M)
        assert r <= min(m, n)
        assert fq_rank(M.T) == r
        assert fq_rank(M.submatrix(rng.permutation(m), rng.permutation(n))) == r


def test_inverse_matrix_examples(rng):
    I = FqMatrix.identity(3, 7)
    assert fq_inverse_matrix(I) == I
    D = FqMatrix(2 * np.eye(3, dtype=int), np.zeros((3, 3), int), 7)
    assert fq_inverse_matrix(D) == FqMatrix(4 * np.eye(3, dtype=int), np.zeros((3, 3), int), 7)
    for _ in range(100):
        M = rand_invertible(rng, 5)
        Mi = fq_inverse_matrix(M)
        assert M @ Mi == FqMatrix.identity(5, 7)
        assert fq_inverse_matrix(Mi) == M


def test_singular_matrix_raises():
    M = FqMatrix([[1, 2], [2, 4]], [[0, 0], [0, 0]], 7)
    with pytest.raises(Singular):
        fq_inverse_matrix(M)
    with pytest.raises(Singular):
        fq_solve(M, FqMatrix.identity(2, 7))


def test_solve_examples(rng):
    b = rand_fq(rng, 4, 2)
    assert fq_solve(FqMatrix.identity(4, 7), b) == b
    for _ in range(30):
        M = rand_invertible(rng, 4, 11)
        x = rand_fq(rng, 4, 3, 11)
        assert fq_solve(M, M @ x) == x


def test_mixed_moduli_rejected():
    with pytest.raises(ValueError):
        FqElem(1, 0, P7) + FqElem(1, 0, GaussianPrime(11))
    with pytest.raises(ValueError):
        FqMatrix.identity(2, 7) @ FqMatrix.identity(2, 11)


def test_gaussian_det_matches_numpy(rng):
    for _ in range(50):
        n = int(rng.integers(1, 5))
        A = rng.integers(-3, 4, (n, n)) + 1j * rng.integers(-3, 4, (n, n))
        d = gaussian_det(A)
        assert complex(d) == pytest.approx(np.linalg.det(A), abs=1e-6)


def test_gaussian_det_unimodular():
    U = np.array([[1, 1j], [0, 1]])
    assert gaussian_det(U).norm() == 1
    assert gaussian_det(np.array([[1 + 1j, 0], [0, 1]])).norm() == 2


def test_rowspace_tracks_rank(rng):
    for _ in range(50):
        m, n = rng.integers(1, 8), rng.integers(1, 5)
        M = rand_fq(rng, m, n)
        space = RowSpace(n, 7)
        for i in range(m):
            before = space.rank
            grew = space.add(M.re[i], M.im[i])
            assert space.rank == before + grew
            assert space.rank == fq_rank(M.submatrix(range(i + 1)))


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=9, max_size=9))
def test_rank_of_random_3x3_matches_inverse_existence(entries):
    re = np.array([e[0] for e in entries]).reshape(3, 3)
    im = np.array([e[1] for e in entries]).reshape(3, 3)
    M = FqMatrix(re, im, 7)
    if fq_rank(M) == 3:
        assert M @ fq_inverse_matrix(M) == FqMatrix.identity(3, 7)
    else:
        with pytest.raises(Singular):
            fq_inverse_matrix(M)
