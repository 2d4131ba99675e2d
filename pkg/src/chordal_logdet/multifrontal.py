"""Column-by-column multifrontal recursions over the elimination tree.

All sweeps share the same storage discipline: a postorder (forward) or
reverse-postorder (backward) traversal with dense update matrices kept on a
LIFO stack whose peak size is known from the symbolic analysis.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .symbolic import SparseSymMatrix, SymbolicAnalysis, etree_only

__all__ = [
    "CholeskyFactor", "NotPositiveDefinite", "NoPositiveCompletion", "NumericalBreakdown",
    "factor", "product", "projected_inverse", "completion", "completion_factored",
    "logdet", "barrier_value", "dual_barrier_value", "PIVOT_RTOL",
]

# pivots at or below PIVOT_RTOL * (largest diagonal entry) count as failures
PIVOT_RTOL = 1e-14


class NotPositiveDefinite(ValueError):
    def __init__(self, where, what="column"):
        self.where = int(where)
        super().__init__(f"matrix is not positive definite (pivot failed at {what} {self.where + 1})")


class NoPositiveCompletion(ValueError):
    def __init__(self, where, what="column"):
        self.where = int(where)
        super().__init__(f"no positive definite completion (failed at {what} {self.where + 1})")


class NumericalBreakdown(ArithmeticError):
    def __init__(self, where, what="column"):
        self.where = int(where)
        super().__init__(f"factor update broke down at {what} {self.where + 1}")


@dataclass
class CholeskyFactor:
    """X = L D L^T with unit lower triangular L stored on the filled pattern.

    ``L`` is aligned with ``sym.pattern.rowind``; the diagonal slots hold 1.
    """

    sym: SymbolicAnalysis
    L: np.ndarray
    D: np.ndarray
    rotations: int = 0

    @property
    def n(self):
        return self.sym.n

    def dense_L(self):
        p = self.sym.pattern
        out = np.zeros((p.n, p.n))
        out[p.rowind, p.columns_of_entries()] = self.L
        return out

    def todense(self):
        L = self.dense_L()
        return (L * self.D) @ L.T


def _arrays(sym):
    p = sym.pattern
    return (p.colptr, p.rowind, sym.relidx, sym.postorder)


def _analysis(A, sym):
    if sym is None:
        return etree_only(A.pattern)
    if A.pattern is not sym.pattern and A.pattern != sym.pattern:
        raise ValueError("matrix pattern differs from the symbolic analysis")
    return sym


def _threshold(values, sym):
    diag = values[sym.pattern.colptr[:-1]]
    scale = diag.max() if diag.size else 0.0
    return PIVOT_RTOL * max(scale, 0.0)


def factor(X: SparseSymMatrix, sym=None) -> CholeskyFactor:
    """LDL^T factorization of a positive definite X on a filled pattern."""
    sym = _analysis(X, sym)
    cp, ri, rel, post = _arrays(sym)
    n = sym.n
    L = np.empty(ri.size)
    D = np.empty(n)
    info = np.zeros(3, np.int64)
    buf = np.empty(max(sym.fwd_stack, 1))
    K.mf_factor(cp, ri, rel, post, sym.chptr, sym.chlist, X.values, L, D, buf,
                max(sym.max_front, 1), _threshold(X.values, sym), info)
    if info[0]:
        raise NotPositiveDefinite(info[1])
    return CholeskyFactor(sym, L, D)


def product(F: CholeskyFactor) -> SparseSymMatrix:
    """Recompute X = L D L^T (which lies on the filled pattern)."""
    sym = F.sym
    cp, ri, rel, post = _arrays(sym)
    xv = np.empty(ri.size)
    buf = np.empty(max(sym.fwd_stack, 1))
    K.mf_product(cp, ri, rel, post, sym.chptr, sym.chlist, F.L, F.D, xv, buf,
                 max(sym.max_front, 1))
    return SparseSymMatrix(sym.pattern, xv)


def projected_inverse(F: CholeskyFactor) -> SparseSymMatrix:
    """S = P(X^{-1}), the negative gradient of -log det at X."""
    sym = F.sym
    cp, ri, rel, post = _arrays(sym)
    sv = np.empty(ri.size)
    buf = np.empty(max(sym.rev_stack, 1))
    K.mf_projected_inverse(cp, ri, rel, post, sym.parent, sym.chptr, sym.chlist,
                           F.L, F.D, sv, buf, max(sym.max_front, 1))
    return SparseSymMatrix(sym.pattern, sv)


def completion(S: SparseSymMatrix, sym=None) -> CholeskyFactor:
    """Factor of the inverse of the maximum determinant completion of S.

    The returned X satisfies P(X^{-1}) = S.  Each column solves with a
    freshly factored dense V_j; see :func:`completion_factored` for the
    variant that propagates triangular factors instead.
    """
    sym = _analysis(S, sym)
    cp, ri, rel, post = _arrays(sym)
    L = np.empty(ri.size)
    D = np.empty(sym.n)
    info = np.zeros(3, np.int64)
    buf = np.empty(max(sym.rev_stack, 1))
    K.mf_completion(cp, ri, rel, post, sym.parent, sym.chptr, sym.chlist, S.values, L, D,
                    buf, max(sym.max_front, 1), _threshold(S.values, sym), info)
    if info[0]:
        raise NoPositiveCompletion(info[1])
    return CholeskyFactor(sym, L, D)


def completion_factored(S: SparseSymMatrix, sym=None) -> CholeskyFactor:
    """Same result as :func:`completion`, with V_j = R_j R_j^T propagated.

    The number of Householder reflections used to re-triangularize the
    parent factors is returned in ``rotations``.
    """
    sym = _analysis(S, sym)
    cp, ri, rel, post = _arrays(sym)
    L = np.empty(ri.size)
    D = np.empty(sym.n)
    info = np.zeros(3, np.int64)
    buf = np.empty(max(sym.rev_stack, 1))
    K.mf_completion_factored(cp, ri, rel, post, sym.parent, sym.chptr, sym.chlist, S.values,
                             L, D, buf, max(sym.max_front, 1), _threshold(S.values, sym), info)
    if info[0] == K.NOT_PD:
        raise NoPositiveCompletion(info[1])
    if info[0] == K.BREAKDOWN:
        raise NumericalBreakdown(info[1])
    return CholeskyFactor(sym, L, D, rotations=int(info[2]))


def logdet(F: CholeskyFactor) -> float:
    return float(np.log(F.D).sum())


def barrier_value(X: SparseSymMatrix, sym=None) -> float:
    """f(X) = -log det X."""
    return -logdet(factor(X, sym))


def dual_barrier_value(S: SparseSymMatrix, sym=None) -> float:
    """f*(S) = log det X - n where X = completion(S)."""
    F = completion_factored(S, sym)
    return logdet(F) - F.n
