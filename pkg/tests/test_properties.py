"""Randomized invariants, driven by hypothesis over pattern size, density and seeds."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from chordal_logdet import oracle
from chordal_logdet.chordal import clique_tree, verify_clique_tree
from chordal_logdet.hessian import (HessianContext, hess_apply, hess_factor_adjoint,
                                    hess_factor_apply, hess_factor_apply_sparse, hess_solve)
from chordal_logdet.multifrontal import (completion, completion_factored, factor, product,
                                         projected_inverse)
from chordal_logdet.supernodal import (sn_completion, sn_factor, sn_projected_inverse,
                                       to_scalar_factor)
from chordal_logdet.symbolic import SparseSymMatrix, SparsityPattern, etree_only, fill_pattern

seeds = st.integers(0, 2**31 - 1)
sizes = st.integers(1, 40)
densities = st.floats(0.0, 0.5)

FAST = settings(max_examples=40, deadline=None)


def rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


@st.composite
def chordal(draw):
    return oracle.gen_chordal(draw(sizes), draw(densities), seed=draw(seeds))


@FAST
@given(n=sizes, density=densities, seed=seeds)
def test_fill_is_filled_and_contains_input(n, density, seed):
    rng = np.random.default_rng(seed)
    i, j = np.tril_indices(n, -1)
    keep = rng.random(i.size) < density
    raw = SparsityPattern.from_entries(n, i[keep], j[keep])
    sym = fill_pattern(raw)
    assert oracle.fill_violations(sym.pattern) == []
    assert all((a, b) in sym.pattern for a, b in zip(*raw.entries()))
    # filling is idempotent
    assert fill_pattern(sym.pattern).pattern == sym.pattern


@FAST
@given(V=chordal())
def test_parent_is_first_below_diagonal_entry(V):
    sym = etree_only(V)
    for j in range(V.n):
        below = V.below(j)
        assert sym.parent[j] == (below[0] if below.size else -1)
        assert sym.degree[j] == below.size


@FAST
@given(V=chordal(), pick=st.sampled_from(["max-degree", "first-eligible"]))
def test_clique_tree_is_valid(V, pick):
    cf = clique_tree(etree_only(V), pick)
    assert verify_clique_tree(cf) is None
    assert np.array_equal(np.sort(np.concatenate([cf.new[j] for j in cf.reps])), np.arange(V.n))


@FAST
@given(V=chordal(), seed=seeds)
def test_factor_product_roundtrip(V, seed):
    sym = etree_only(V)
    X = oracle.gen_spd(V, seed)
    assert rel(product(factor(X, sym)).values, X.values) <= 1e-12


@FAST
@given(V=chordal(), seed=seeds)
def test_projected_inverse_against_dense(V, seed):
    X = oracle.gen_spd(V, seed)
    ref = oracle.dense_project(np.linalg.inv(X.todense()), V)
    assert rel(projected_inverse(factor(X)).values, ref.values) <= 1e-10


@FAST
@given(V=chordal(), seed=seeds)
def test_completion_inverts_projected_inverse(V, seed):
    sym = etree_only(V)
    S = oracle.gen_completable(V, seed)
    a, b = completion(S, sym), completion_factored(S, sym)
    assert rel(projected_inverse(a).values, S.values) <= 1e-9
    assert rel(np.r_[b.L, b.D], np.r_[a.L, a.D]) <= 1e-11


@FAST
@given(V=chordal(), seed=seeds)
def test_supernodal_matches_multifrontal(V, seed):
    sym = etree_only(V)
    cf = clique_tree(sym)
    X, S = oracle.gen_spd(V, seed), oracle.gen_completable(V, seed)
    F = factor(X, sym)
    B = sn_factor(X, cf)
    s = to_scalar_factor(B)
    assert rel(np.r_[s.L, s.D], np.r_[F.L, F.D]) <= 1e-11
    assert rel(sn_projected_inverse(B).values, projected_inverse(F).values) <= 1e-11
    G, ref = to_scalar_factor(sn_completion(S, cf)), completion(S, sym)
    assert rel(np.r_[G.L, G.D], np.r_[ref.L, ref.D]) <= 1e-11


@FAST
@given(V=chordal(), seed=seeds)
def test_hessian_identities(V, seed):
    ctx = HessianContext.at(oracle.gen_spd(V, seed))
    Y, Z = oracle.random_sym(V, seed + 1), oracle.random_sym(V, seed + 2)
    HY = hess_apply(ctx, Y)
    assert abs(HY.inner(Z) - Y.inner(hess_apply(ctx, Z))) <= 1e-10 * max(abs(HY.inner(Z)), 1)
    assert HY.inner(Y) > 0
    assert rel(hess_solve(ctx, HY).values, Y.values) <= 1e-8
    RY = hess_factor_apply(ctx, Y)
    assert rel(hess_factor_adjoint(ctx, RY).values, HY.values) <= 1e-9
    lhs, rhs = RY.inner(Z), Y.inner(hess_factor_adjoint(ctx, Z))
    assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1)


@FAST
@given(V=chordal(), seed=seeds, k=st.integers(0, 4))
def test_pruned_factor_apply_is_exact(V, seed, k):
    ctx = HessianContext.at(oracle.gen_spd(V, seed))
    rng = np.random.default_rng(seed)
    Y = SparseSymMatrix(V)
    k = min(k, V.nnz)
    Y.values[rng.choice(V.nnz, k, replace=False)] = rng.standard_normal(k)
    res = hess_factor_apply_sparse(ctx, Y)
    full = hess_factor_apply(ctx, Y).values
    assert np.abs(res.matrix.values - full).max(initial=0) <= \
        1e-12 * np.abs(full).max(initial=1.0)
    assert res.visited == res.columns.size
