import numpy as np
import pytest

from chordal_logdet import oracle
from chordal_logdet.multifrontal import (NoPositiveCompletion, NotPositiveDefinite, barrier_value,
                                         completion, completion_factored, dual_barrier_value,
                                         factor, logdet, product, projected_inverse)
from chordal_logdet.patterns import arrow, band, pattern17
from chordal_logdet.symbolic import SparseSymMatrix, SparsityPattern, etree_only


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.fixture(scope="module")
def p17():
    V = pattern17()
    return V, etree_only(V)


@pytest.fixture
def two():
    return SparseSymMatrix(SparsityPattern.dense(2), [2.0, 1.0, 2.0])


def test_identity(p17):
    V, sym = p17
    I = SparseSymMatrix.identity(V)
    F = factor(I, sym)
    assert np.array_equal(F.D, np.ones(17))
    assert np.array_equal(F.dense_L(), np.eye(17))
    assert np.array_equal(projected_inverse(F).values, I.values)
    G = completion(I, sym)
    assert np.allclose(G.D, 1) and np.allclose(G.dense_L(), np.eye(17))
    assert logdet(F) == 0.0
    assert dual_barrier_value(I, sym) == pytest.approx(-17)


def test_two_by_two(two):
    F = factor(two)
    assert F.D.tolist() == [2.0, 1.5]
    assert F.L[1] == 0.5
    assert np.allclose(product(F).values, two.values)
    assert np.allclose(projected_inverse(F).values, [2 / 3, -1 / 3, 2 / 3])
    assert logdet(F) == pytest.approx(np.log(3))
    assert barrier_value(two) == pytest.approx(-np.log(3))


def test_factor_matches_dense_ldl(p17):
    V, sym = p17
    X = oracle.gen_spd(V, 4)
    F = factor(X, sym)
    L, d = oracle.dense_ldl(X.todense())
    assert np.abs(F.dense_L() - L).max() <= 1e-12
    assert np.abs(F.D - d).max() <= 1e-12 * d.max()
    assert logdet(F) == pytest.approx(oracle.dense_logdet(X), rel=1e-10)


def test_product_on_band_matches_dense():
    V = band(100, 5)
    sym = etree_only(V)
    rng = np.random.default_rng(0)
    F = factor(oracle.gen_spd(V, 1), sym)
    diag = V.rowind == V.columns_of_entries()
    F.L[:] = np.where(diag, 1.0, rng.uniform(-1, 1, F.L.size) / np.sqrt(6))
    F.D[:] = rng.uniform(0.5, 2, 100)
    X = product(F)
    ref = oracle.dense_project(F.todense(), V)
    assert rel(X.values, ref.values) <= 1e-12
    G = factor(X, sym)
    assert rel(np.r_[G.L, G.D], np.r_[F.L, F.D]) <= 1e-12


def test_projected_inverse_matches_dense(p17):
    V, sym = p17
    X = oracle.gen_spd(V, 9)
    S = projected_inverse(factor(X, sym))
    ref = oracle.dense_project(np.linalg.inv(X.todense()), V)
    assert rel(S.values, ref.values) <= 1e-10


def test_not_positive_definite(two):
    bad = SparseSymMatrix(two.pattern, [1.0, 2.0, 1.0])
    with pytest.raises(NotPositiveDefinite) as exc:
        factor(bad)
    assert exc.value.where == 1


def test_completion_recovers_inverse(p17):
    # S = P(Z^{-1}) with Z on the pattern: the completion's factor is Z's
    V, sym = p17
    Z = oracle.gen_spd(V, 2)
    S = oracle.dense_project(np.linalg.inv(Z.todense()), V)
    F = factor(Z, sym)
    for G in (completion(S, sym), completion_factored(S, sym)):
        assert rel(np.r_[G.L, G.D], np.r_[F.L, F.D]) <= 1e-10
    # the completion of S is Z itself, so f*(S) = log det Z - n
    assert dual_barrier_value(S, sym) == pytest.approx(oracle.dense_logdet(Z) - 17, rel=1e-10)


def test_completion_roundtrip(p17):
    V, sym = p17
    S = oracle.gen_completable(V, 3)
    G = completion(S, sym)
    assert rel(projected_inverse(G).values, S.values) <= 1e-9
    Zinv = np.linalg.inv(G.todense())
    assert rel(oracle.dense_project(Zinv, V).values, S.values) <= 1e-9


def test_factored_agrees_on_band():
    V = band(500, 20)
    sym = etree_only(V)
    S = oracle.gen_completable(V, 0)
    a, b = completion(S, sym), completion_factored(S, sym)
    assert rel(np.r_[b.L, b.D], np.r_[a.L, a.D]) <= 1e-11
    # each of the 479 full-width children costs 19 reflections of length 2
    assert b.rotations == 19 * 479


def test_arrow_needs_no_reflections():
    V = arrow(200, 15)
    S = oracle.gen_completable(V, 0)
    assert completion_factored(S).rotations == 0


def test_dual_scaling(p17):
    V, sym = p17
    S = oracle.gen_completable(V, 6)
    assert dual_barrier_value(2 * S, sym) == pytest.approx(
        dual_barrier_value(S, sym) - 17 * np.log(2), rel=1e-12)


def test_no_completion():
    # [[1, 2], [2, 1]] has no positive definite completion
    S = SparseSymMatrix(SparsityPattern.dense(2), [1.0, 2.0, 1.0])
    with pytest.raises(NoPositiveCompletion):
        completion(S)
    with pytest.raises(NoPositiveCompletion):
        completion_factored(S)


def test_chain_without_completion():
    # 3-chain with |S_12| = |S_23| = 1: positive semidefinite only, no PD completion
    V = SparsityPattern.from_entries(3, [1, 2], [0, 1])
    S = SparseSymMatrix(V, [1.0, 1.0, 1.0, 1.0, 1.0])
    with pytest.raises(NoPositiveCompletion):
        completion(S)


def test_gradient_directional_derivative(p17):
    V, sym = p17
    X = oracle.gen_spd(V, 1)
    Y = oracle.random_sym(V, 2)
    grad = -projected_inverse(factor(X, sym))
    fd = oracle.finite_diff_gradient(X, Y)
    assert fd == pytest.approx(grad.inner(Y), rel=1e-5)
