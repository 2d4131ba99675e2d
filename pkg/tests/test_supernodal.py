import numpy as np
import pytest

from chordal_logdet import oracle
from chordal_logdet.chordal import clique_tree, singleton_forest
from chordal_logdet.multifrontal import (NoPositiveCompletion, NotPositiveDefinite, completion,
                                         factor, product, projected_inverse)
from chordal_logdet.patterns import arrow, band, pattern17
from chordal_logdet.supernodal import (sn_completion, sn_factor, sn_projected_inverse,
                                       to_scalar_factor)
from chordal_logdet.symbolic import SparseSymMatrix, SparsityPattern, etree_only


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.fixture(scope="module", params=["max-degree", "first-eligible"])
def cf17(request):
    return clique_tree(etree_only(pattern17()), request.param)


def test_identity_blocks(cf17):
    I = SparseSymMatrix.identity(cf17.sym.pattern)
    F = sn_factor(I, cf17)
    for j in cf17.reps:
        D, L = F.block(j)
        assert np.array_equal(D, np.eye(len(cf17.new[j])))
        assert not L.any()
    assert np.array_equal(sn_projected_inverse(F).values, I.values)
    G = sn_completion(I, cf17)
    assert np.allclose(G.todense(), np.eye(17))


def test_factor_reconstructs(cf17):
    X = oracle.gen_spd(cf17.sym.pattern, 3)
    F = sn_factor(X, cf17)
    # the assembled product is the dense X, fill included (V is filled)
    assert rel(F.todense(), X.todense()) <= 1e-12
    s = to_scalar_factor(F)
    ref = factor(X, cf17.sym)
    assert rel(np.r_[s.L, s.D], np.r_[ref.L, ref.D]) <= 1e-12


def test_d_blocks_are_positive_definite(cf17):
    F = sn_factor(oracle.gen_spd(cf17.sym.pattern, 5), cf17)
    for j in cf17.reps:
        D, _ = F.block(j)
        assert np.allclose(D, D.T)
        assert np.linalg.eigvalsh(D).min() > 0


def test_projected_inverse_agrees(cf17):
    X = oracle.gen_spd(cf17.sym.pattern, 8)
    S = sn_projected_inverse(sn_factor(X, cf17))
    assert rel(S.values, projected_inverse(factor(X, cf17.sym)).values) <= 1e-12


@pytest.mark.parametrize("factored", [True, False])
def test_completion_agrees(cf17, factored):
    S = oracle.gen_completable(cf17.sym.pattern, 4)
    G = sn_completion(S, cf17, factored=factored)
    ref = completion(S, cf17.sym)
    s = to_scalar_factor(G)
    assert rel(np.r_[s.L, s.D], np.r_[ref.L, ref.D]) <= 1e-11
    assert rel(sn_projected_inverse(G).values, S.values) <= 1e-9


def test_band_reconstruction():
    V = band(1000, 20)
    cf = clique_tree(etree_only(V))
    # the band's cliques are I'_0 .. I'_979; only the last absorbs the tail
    assert cf.size == 980
    X = oracle.gen_spd(V, 0)
    F = sn_factor(X, cf)
    s = to_scalar_factor(F)
    assert rel(product(s).values, X.values) <= 1e-11


def test_random_chordal_against_dense():
    V = oracle.gen_chordal(200, 0.02, seed=4)
    cf = clique_tree(etree_only(V))
    assert cf.mean_supernode() > 1
    X = oracle.gen_spd(V, 1)
    S = sn_projected_inverse(sn_factor(X, cf))
    ref = oracle.dense_project(np.linalg.inv(X.todense()), V)
    assert rel(S.values, ref.values) <= 1e-10


def test_arrow_factored_needs_no_reflections():
    V = arrow(300, 10)
    S = oracle.gen_completable(V, 2)
    G = sn_completion(S)
    assert G.rotations == 0
    assert rel(sn_projected_inverse(G).values, S.values) <= 1e-9


def test_singleton_forest_reproduces_scalar_sweeps():
    V = oracle.gen_chordal(60, 0.08, seed=2)
    sym = etree_only(V)
    cf = singleton_forest(sym)
    X = oracle.gen_spd(V, 0)
    F, B = factor(X, sym), sn_factor(X, cf)
    s = to_scalar_factor(B)
    assert np.abs(s.L - F.L).max() <= 1e-14
    assert np.abs(s.D - F.D).max() <= 1e-14 * F.D.max()
    a, b = projected_inverse(F).values, sn_projected_inverse(B).values
    assert np.abs(a - b).max() <= 1e-14 * np.abs(a).max()


def test_not_positive_definite_names_clique():
    X = SparseSymMatrix(SparsityPattern.dense(3), [1.0, 2.0, 0.0, 1.0, 0.0, 1.0])
    with pytest.raises(NotPositiveDefinite) as exc:
        sn_factor(X)
    assert exc.value.where == 0


def test_no_completion():
    S = SparseSymMatrix(SparsityPattern.dense(2), [1.0, 2.0, 1.0])
    for factored in (True, False):
        with pytest.raises(NoPositiveCompletion):
            sn_completion(S, factored=factored)


def test_pattern_mismatch(cf17):
    with pytest.raises(ValueError):
        sn_factor(SparseSymMatrix.identity(SparsityPattern.diagonal(17)), cf17)
