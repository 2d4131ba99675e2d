"""Hessian of the log-det barrier: apply, inverse, and the factor R.

The Hessian at X is Y -> P(X^{-1} Y X^{-1}) and factors as R^adj o R.
All maps are evaluated by linearizing the multifrontal sweeps around the
factorization X = L D L^T and the projected inverse S = P(X^{-1}).
"""

from typing import NamedTuple

import numpy as np
from numba import njit

from . import _kernels as K
from .multifrontal import CholeskyFactor, NumericalBreakdown, factor, projected_inverse
from .symbolic import SparseSymMatrix

__all__ = [
    "HessianContext", "PrunedResult", "hess_apply", "hess_solve", "hess_factor_apply",
    "hess_factor_adjoint", "hess_factor_apply_sparse", "gram_matrix", "reachable",
]


class HessianContext:
    """Everything the Hessian sweeps need at a fixed point X.

    Holds the factor ``F`` of X, the projected inverse ``S`` and, once
    requested, the upper factors R_j of S_{I_j I_j}.
    """

    def __init__(self, F: CholeskyFactor, S=None, check=True):
        self.F = F
        self.sym = F.sym
        if S is None:
            S = projected_inverse(F)
        elif check:
            ref = projected_inverse(F)
            err = np.abs(ref.values - S.values).max(initial=0.0)
            if err > 1e-10 * max(np.abs(ref.values).max(initial=0.0), 1.0):
                raise ValueError(f"S is not the projected inverse of the factor (error {err:.2e})")
        self.S = S
        d = self.sym.degree.astype(np.int64)
        self.roff = np.zeros(d.size + 1, dtype=np.int64)
        np.cumsum(d * d, out=self.roff[1:])
        self._rbuf = None

    @classmethod
    def at(cls, X, sym=None):
        return cls(factor(X, sym))

    @property
    def n(self):
        return self.sym.n

    @property
    def rbuf(self):
        """Flat storage of the factors R_j (built on first use)."""
        if self._rbuf is None:
            self._rbuf = self._build_cache()
        return self._rbuf

    def _build_cache(self):
        sym = self.sym
        p = sym.pattern
        rbuf = np.zeros(max(int(self.roff[-1]), 1))
        info = np.zeros(3, np.int64)
        K.mf_factor_cache(p.colptr, p.rowind, sym.relidx, sym.postorder, sym.parent, sym.chptr,
                          sym.chlist, self.S.values, self.roff, rbuf, max(sym.max_front, 1),
                          0.0, info)
        if info[0]:
            raise NumericalBreakdown(info[1])
        return rbuf

    def R(self, j):
        """Upper triangular R_j with R_j R_j^T = S_{I_j I_j}."""
        d = int(self.sym.degree[j])
        o = self.roff[j]
        return self.rbuf[o:o + d * d].reshape(d, d).copy()

    # shorthand used by the sweeps
    def _common(self):
        sym = self.sym
        p = sym.pattern
        return p.colptr, p.rowind, sym.relidx, sym.postorder

    def _buf(self, reverse):
        return np.empty(max(self.sym.rev_stack if reverse else self.sym.fwd_stack, 1))

    def _check(self, A):
        if A.pattern is not self.sym.pattern and A.pattern != self.sym.pattern:
            raise ValueError("argument lives on a different pattern")


class PrunedResult(NamedTuple):
    """Output of the pruned factor evaluation.

    ``columns`` lists the columns that may be nonzero (all others are
    structural zeros); ``visited`` counts elimination-tree nodes processed.
    """

    matrix: SparseSymMatrix
    columns: np.ndarray
    visited: int


def _linear_factor(ctx, Y, reach):
    sym = ctx.sym
    cp, ri, rel, post = ctx._common()
    kv = np.zeros(ri.size)
    visited = K.lin_factor(cp, ri, rel, post, sym.chptr, sym.chlist, reach, ctx.F.L, Y.values,
                           kv, ctx._buf(False), max(sym.max_front, 1))
    return kv, visited


def hess_apply(ctx: HessianContext, Y: SparseSymMatrix) -> SparseSymMatrix:
    """T = P(X^{-1} Y X^{-1})."""
    ctx._check(Y)
    sym = ctx.sym
    cp, ri, rel, post = ctx._common()
    kv, _ = _linear_factor(ctx, Y, np.ones(sym.n, dtype=np.bool_))
    tv = np.empty(ri.size)
    K.hess_scale_projinv(cp, ri, rel, post, sym.parent, sym.chptr, sym.chlist, ctx.F.L, ctx.F.D,
                         ctx.S.values, kv, tv, ctx._buf(True), ctx._buf(True),
                         max(sym.max_front, 1))
    return SparseSymMatrix(sym.pattern, tv)


def hess_solve(ctx: HessianContext, T: SparseSymMatrix) -> SparseSymMatrix:
    """The Y on the pattern with hess_apply(ctx, Y) = T."""
    ctx._check(T)
    sym = ctx.sym
    cp, ri, rel, post = ctx._common()
    m = max(sym.max_front, 1)
    mv = np.empty(ri.size)
    K.lin_completion(cp, ri, rel, post, sym.parent, sym.chptr, sym.chlist, ctx.F.L, T.values, mv,
                     ctx._buf(True), m)
    kv = np.empty(ri.size)
    K.solve_scale(cp, ctx.F.D, ctx.roff, ctx.rbuf, mv, kv, m)
    yv = np.empty(ri.size)
    K.lin_product(cp, ri, rel, post, sym.chptr, sym.chlist, ctx.F.L, kv, yv, ctx._buf(False), m)
    return SparseSymMatrix(sym.pattern, yv)


def hess_factor_apply(ctx: HessianContext, Y: SparseSymMatrix) -> SparseSymMatrix:
    """W = R(Y), with the Hessian equal to R^adj o R."""
    ctx._check(Y)
    reach = np.ones(ctx.n, dtype=np.bool_)
    kv, _ = _linear_factor(ctx, Y, reach)
    wv = np.zeros(kv.size)
    K.factor_scale(ctx.sym.pattern.colptr, reach, ctx.F.D, ctx.roff, ctx.rbuf, kv, wv)
    return SparseSymMatrix(ctx.sym.pattern, wv)


def hess_factor_adjoint(ctx: HessianContext, W: SparseSymMatrix) -> SparseSymMatrix:
    """R^adj(W)."""
    ctx._check(W)
    sym = ctx.sym
    cp, ri, rel, post = ctx._common()
    mv = np.empty(ri.size)
    K.factor_scale_adj(cp, ctx.F.D, ctx.roff, ctx.rbuf, W.values, mv)
    tv = np.empty(ri.size)
    K.lin_projinv(cp, ri, rel, post, sym.parent, sym.chptr, sym.chlist, ctx.F.L, mv, tv,
                  ctx._buf(True), max(sym.max_front, 1))
    return SparseSymMatrix(sym.pattern, tv)


@njit(cache=True)
def _close_under_parent(parent, cols, reach):
    for c in cols:
        v = c
        while v >= 0 and not reach[v]:
            reach[v] = True
            v = parent[v]


def reachable(sym, columns):
    """Boolean mask of the given columns and all their etree ancestors."""
    reach = np.zeros(sym.n, dtype=np.bool_)
    _close_under_parent(sym.parent, np.asarray(columns, dtype=np.int64), reach)
    return reach


def hess_factor_apply_sparse(ctx: HessianContext, Y: SparseSymMatrix, support=None):
    """R(Y) visiting only the ancestors of the columns in ``support``.

    ``support`` must cover every column holding a nonzero of Y; it defaults
    to the actual nonzero columns.  Returns a :class:`PrunedResult`.
    """
    ctx._check(Y)
    if support is None:
        support = Y.support()
    else:
        support = np.unique(np.asarray(support, dtype=np.int64))
        if support.size and (support[0] < 0 or support[-1] >= ctx.n):
            raise ValueError("support lists a column outside the matrix")
        missing = np.setdiff1d(Y.support(), support)
        if missing.size:
            raise ValueError(f"support misses nonzero column {missing[0] + 1}")
    reach = reachable(ctx.sym, support)
    kv, visited = _linear_factor(ctx, Y, reach)
    wv = np.zeros(kv.size)
    K.factor_scale(ctx.sym.pattern.colptr, reach, ctx.F.D, ctx.roff, ctx.rbuf, kv, wv)
    return PrunedResult(SparseSymMatrix(ctx.sym.pattern, wv), np.flatnonzero(reach), visited)


def gram_matrix(ctx: HessianContext, A, supports=None):
    """H_ij = <A_i, hess_apply(A_j)> = <R(A_i), R(A_j)>."""
    m = len(A)
    if supports is None:
        supports = [None] * m
    W = np.zeros((m, ctx.sym.pattern.nnz))
    for i, (Ai, si) in enumerate(zip(A, supports)):
        W[i] = hess_factor_apply_sparse(ctx, Ai, si).matrix.values
    w = np.full(W.shape[1], 2.0)
    w[ctx.sym.pattern.colptr[:-1]] = 1.0
    H = (W * w) @ W.T
    return 0.5 * (H + H.T)
