import numpy as np
import pytest

from chordal_logdet import oracle
from chordal_logdet.hessian import (HessianContext, gram_matrix, hess_apply, hess_factor_adjoint,
                                    hess_factor_apply, hess_factor_apply_sparse, hess_solve,
                                    reachable)
from chordal_logdet.multifrontal import completion, factor, product
from chordal_logdet.patterns import band, pattern17
from chordal_logdet.symbolic import SparseSymMatrix, SparsityPattern, etree_only


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def one_hot(V, i, j):
    Y = SparseSymMatrix(V)
    Y.values[V.position(i, j)] = 1.0
    return Y


def column_rows(W):
    """1-based {column: rows} of the nonzeros of W."""
    V = W.pattern
    out = {}
    for r, c, v in zip(V.rowind, V.columns_of_entries(), W.values):
        if v != 0:
            out.setdefault(int(c) + 1, []).append(int(r) + 1)
    return out


# nonzero structure of R(Y) on the 17-vertex example, 1-based
FILL_DIAG_22 = {2: [2, 3, 4], 3: [3, 4, 5, 15], 4: [4, 5, 15], 5: [5, 9, 15, 16],
                9: [9, 15, 16], 15: [15, 16, 17], 16: [16, 17], 17: [17]}
FILL_OFF_42 = dict(FILL_DIAG_22)
FILL_OFF_42.update({2: [4], 3: [4, 5, 15]})


@pytest.fixture(scope="module")
def ctx17():
    V = pattern17()
    X = oracle.gen_spd(V, 1)
    return X, HessianContext.at(X, etree_only(V))


def test_identity_point():
    V = pattern17()
    ctx = HessianContext.at(SparseSymMatrix.identity(V))
    Y = oracle.random_sym(V, 0)
    for op in (hess_apply, hess_solve, hess_factor_apply, hess_factor_adjoint):
        assert np.allclose(op(ctx, Y).values, Y.values, rtol=0, atol=1e-15)


def test_apply_matches_dense(ctx17):
    X, ctx = ctx17
    Y = oracle.random_sym(X.pattern, 3)
    Xi = np.linalg.inv(X.todense())
    ref = oracle.dense_project(Xi @ Y.todense() @ Xi, X.pattern)
    assert rel(hess_apply(ctx, Y).values, ref.values) <= 1e-9


def test_apply_matches_finite_differences(ctx17):
    X, ctx = ctx17
    Y = oracle.random_sym(X.pattern, 4)
    fd = oracle.finite_diff_hessian(X, Y)
    assert rel(hess_apply(ctx, Y).values, fd.values) <= 1e-5


def test_solve_inverts_apply(ctx17):
    X, ctx = ctx17
    Y = oracle.random_sym(X.pattern, 5)
    assert rel(hess_solve(ctx, hess_apply(ctx, Y)).values, Y.values) <= 1e-8
    assert rel(hess_apply(ctx, hess_solve(ctx, Y)).values, Y.values) <= 1e-8


def test_factor_composition_and_adjoint(ctx17):
    X, ctx = ctx17
    Y, W = oracle.random_sym(X.pattern, 6), oracle.random_sym(X.pattern, 7)
    RY = hess_factor_apply(ctx, Y)
    assert rel(hess_factor_adjoint(ctx, RY).values, hess_apply(ctx, Y).values) <= 1e-9
    lhs, rhs = RY.inner(W), Y.inner(hess_factor_adjoint(ctx, W))
    assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)


def test_self_adjoint_and_positive(ctx17):
    X, ctx = ctx17
    Y, Z = oracle.random_sym(X.pattern, 8), oracle.random_sym(X.pattern, 9)
    a, b = hess_apply(ctx, Y).inner(Z), Y.inner(hess_apply(ctx, Z))
    assert abs(a - b) <= 1e-10 * max(abs(a), 1.0)
    assert hess_apply(ctx, Y).inner(Y) > 0


def test_r_cache_factors_projected_blocks(ctx17):
    _, ctx = ctx17
    S = ctx.S.todense()
    for j in range(17):
        I = ctx.sym.colset(j)
        R = ctx.R(j)
        assert np.allclose(np.tril(R, -1), 0)
        assert np.allclose(R @ R.T, S[np.ix_(I, I)], atol=1e-13)


def test_diagonal_entry_fill(ctx17):
    X, ctx = ctx17
    res = hess_factor_apply_sparse(ctx, one_hot(X.pattern, 1, 1))
    assert column_rows(res.matrix) == FILL_DIAG_22
    assert (res.columns + 1).tolist() == [2, 3, 4, 5, 9, 15, 16, 17]
    assert res.visited == 8


def test_off_diagonal_entry_fill(ctx17):
    # (4,2): column 2 keeps only its own entry and (3,3) stays zero
    X, ctx = ctx17
    res = hess_factor_apply_sparse(ctx, one_hot(X.pattern, 3, 1))
    assert column_rows(res.matrix) == FILL_OFF_42
    assert res.visited == 8


def test_sparse_equals_full(ctx17):
    X, ctx = ctx17
    rng = np.random.default_rng(0)
    V = X.pattern
    for _ in range(10):
        Y = SparseSymMatrix(V)
        Y.values[rng.choice(V.nnz, 2, replace=False)] = rng.standard_normal(2)
        res = hess_factor_apply_sparse(ctx, Y)
        full = hess_factor_apply(ctx, Y).values
        assert np.abs(res.matrix.values - full).max() <= 1e-12 * np.abs(full).max()
        outside = ~np.isin(V.columns_of_entries(), res.columns)
        assert not full[outside].any()


def test_zero_argument_visits_nothing(ctx17):
    X, ctx = ctx17
    res = hess_factor_apply_sparse(ctx, SparseSymMatrix(X.pattern))
    assert res.visited == 0 and res.columns.size == 0
    assert not res.matrix.values.any()


def test_support_must_cover_nonzeros(ctx17):
    X, ctx = ctx17
    Y = one_hot(X.pattern, 3, 1)
    with pytest.raises(ValueError, match="column 2"):
        hess_factor_apply_sparse(ctx, Y, support=[4])
    with pytest.raises(ValueError):
        hess_factor_apply_sparse(ctx, Y, support=[1, 40])
    wider = hess_factor_apply_sparse(ctx, Y, support=[1, 9])
    assert wider.visited > 8


def test_reachable_closes_under_parent():
    sym = etree_only(pattern17())
    assert (np.flatnonzero(reachable(sym, [9])) + 1).tolist() == [10, 11, 13, 14, 16, 17]


def test_context_rejects_wrong_projected_inverse(ctx17):
    X, ctx = ctx17
    with pytest.raises(ValueError):
        HessianContext(ctx.F, ctx.S * 2.0)
    with pytest.raises(ValueError):
        hess_apply(ctx, SparseSymMatrix.identity(SparsityPattern.diagonal(17)))


def test_gram_single_argument_is_order(ctx17):
    # <P(X^-1 X X^-1), X> = tr(X^-1 X) = n
    X, ctx = ctx17
    assert gram_matrix(ctx, [X])[0, 0] == pytest.approx(17, rel=1e-12)


def test_gram_diagonal_pattern():
    V = SparsityPattern.diagonal(5)
    x = np.array([0.5, 1.0, 2.0, 3.0, 4.0])
    ctx = HessianContext.at(SparseSymMatrix(V, x))
    A = [SparseSymMatrix(V, np.eye(5)[i]) for i in range(5)]
    assert np.allclose(gram_matrix(ctx, A), np.diag(1 / x ** 2), rtol=1e-14)


def test_gram_matches_dense(ctx17):
    X, ctx = ctx17
    V = X.pattern
    rng = np.random.default_rng(1)
    A = []
    for _ in range(5):
        Ai = SparseSymMatrix(V)
        Ai.values[rng.choice(V.nnz, 3, replace=False)] = rng.standard_normal(3)
        A.append(Ai)
    Xi = np.linalg.inv(X.todense())
    ref = np.array([[np.trace(A[i].todense() @ Xi @ A[j].todense() @ Xi) for j in range(5)]
                    for i in range(5)])
    H = gram_matrix(ctx, A)
    assert rel(H, ref) <= 1e-9
    assert np.array_equal(H, H.T)
    assert np.linalg.eigvalsh(H).min() > -1e-12


def test_dual_hessian_relation():
    # the Hessian of the conjugate at S is the inverse Hessian at the completion
    V = band(12, 3)
    S = oracle.gen_completable(V, 0)
    T = oracle.random_sym(V, 1)
    sym = etree_only(V)
    Xhat = product(completion(S, sym))
    ctx = HessianContext.at(Xhat, sym)
    t = 1e-5
    fd = -(product(completion(S + T * t, sym)).values
           - product(completion(S - T * t, sym)).values) / (2 * t)
    assert rel(hess_solve(ctx, T).values, fd) <= 1e-4


def test_band_sparse_speed_path_agrees():
    V = band(400, 8)
    ctx = HessianContext.at(oracle.gen_spd(V, 0))
    Y = one_hot(V, 205, 200)
    res = hess_factor_apply_sparse(ctx, Y)
    assert res.visited == 200
    full = hess_factor_apply(ctx, Y).values
    assert np.abs(res.matrix.values - full).max() <= 1e-12 * np.abs(full).max()
