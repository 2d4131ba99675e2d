"""Supernodal (clique-tree) factorization, projected inverse and completion.

A clique I'_j is split into new(j) (eliminated at j) and anc(j).  Blocks
are gathered from and scattered to the scalar storage through per-clique
index maps, so supernodes need not be contiguous.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .chordal import CliqueForest, clique_tree
from .multifrontal import (PIVOT_RTOL, CholeskyFactor, NoPositiveCompletion,
                           NotPositiveDefinite, NumericalBreakdown)
from .symbolic import SparseSymMatrix

__all__ = ["BlockCholeskyFactor", "sn_factor", "sn_projected_inverse", "sn_completion",
           "to_scalar_factor"]


@dataclass
class BlockCholeskyFactor:
    """X = L D L^T with dense diagonal blocks D_{new,new} and blocks L_{anc,new}.

    Block ``k`` (clique order of ``cf.reps``) is stored row-major at
    ``doff[k]`` in ``D`` and ``C`` (lower Cholesky factor of D) and at
    ``loff[k]`` in ``Lb``.
    """

    cf: CliqueForest
    D: np.ndarray
    C: np.ndarray
    Lb: np.ndarray
    doff: np.ndarray
    loff: np.ndarray
    rotations: int = 0

    @property
    def sym(self):
        return self.cf.sym

    def block(self, j):
        """(D_{new(j),new(j)}, L_{anc(j),new(j)}) for representative j."""
        k = int(np.searchsorted(self.cf.reps, j))
        s, a = len(self.cf.new[j]), len(self.cf.anc[j])
        D = self.D[self.doff[k]:self.doff[k] + s * s].reshape(s, s)
        L = self.Lb[self.loff[k]:self.loff[k] + a * s].reshape(a, s)
        return D, L

    def todense(self):
        n = self.cf.n
        L = np.eye(n)
        D = np.zeros((n, n))
        for j in self.cf.reps:
            Dj, Lj = self.block(j)
            nw, an = self.cf.new[j], self.cf.anc[j]
            D[np.ix_(nw, nw)] = Dj
            L[np.ix_(an, nw)] = Lj
        return L @ D @ L.T


def _offsets(cf):
    a = cf.arrays
    nn = a["nn"]
    na = np.diff(a["clptr"]) - nn
    doff = np.zeros(nn.size + 1, dtype=np.int64)
    np.cumsum(nn * nn, out=doff[1:])
    loff = np.zeros(nn.size + 1, dtype=np.int64)
    np.cumsum(na * nn, out=loff[1:])
    sizes = np.diff(a["clptr"])
    return doff, loff, int(sizes.max()) if sizes.size else 1, na


def _stack_size(cf, na, reverse):
    a = cf.arrays
    d2 = na * na
    cur = peak = 0
    post = a["cpost"]
    chptr, chlist, cparent = a["cchptr"], a["cchlist"], a["cparent"]
    for k in (post[::-1] if reverse else post):
        kids = chlist[chptr[k]:chptr[k + 1]]
        if reverse:
            if cparent[k] >= 0:
                cur -= d2[k]
            cur += d2[kids].sum()
        else:
            cur += d2[k] - d2[kids].sum()
        peak = max(peak, cur)
    return max(int(peak), 1)


def _forest(A, cf):
    if cf is None:
        from .symbolic import etree_only
        cf = clique_tree(etree_only(A.pattern))
    elif A.pattern is not cf.sym.pattern and A.pattern != cf.sym.pattern:
        raise ValueError("matrix pattern differs from the clique forest")
    return cf


def _threshold(A):
    d = A.diagonal()
    return PIVOT_RTOL * max(float(d.max()) if d.size else 0.0, 0.0)


def sn_factor(X: SparseSymMatrix, cf=None) -> BlockCholeskyFactor:
    """Block LDL^T factorization, one frontal matrix per clique."""
    cf = _forest(X, cf)
    a = cf.arrays
    doff, loff, maxm, na = _offsets(cf)
    D = np.empty(doff[-1])
    C = np.empty(doff[-1])
    Lb = np.empty(loff[-1])
    buf = np.empty(_stack_size(cf, na, False))
    info = np.zeros(3, np.int64)
    p = cf.sym.pattern
    K.sn_factor(p.colptr, a["cl"], a["clptr"], a["nn"], a["crel"], a["cpost"], a["cchptr"],
                a["cchlist"], a["vpos"], a["snpos"], X.values, D, C, doff, Lb, loff, buf,
                maxm, _threshold(X), info)
    if info[0]:
        raise NotPositiveDefinite(cf.reps[info[1]], "clique")
    return BlockCholeskyFactor(cf, D, C, Lb, doff, loff)


def sn_projected_inverse(F: BlockCholeskyFactor) -> SparseSymMatrix:
    """S = P(X^{-1}) from a block factorization."""
    cf = F.cf
    a = cf.arrays
    doff, loff, maxm, na = _offsets(cf)
    p = cf.sym.pattern
    sv = np.empty(p.nnz)
    buf = np.empty(_stack_size(cf, na, True))
    K.sn_projected_inverse(p.colptr, a["cl"], a["clptr"], a["nn"], a["crel"], a["cpost"],
                           a["cparent"], a["cchptr"], a["cchlist"], a["vpos"], a["snpos"],
                           F.C, doff, F.Lb, loff, sv, buf, maxm)
    return SparseSymMatrix(p, sv)


def sn_completion(S: SparseSymMatrix, cf=None, factored=True) -> BlockCholeskyFactor:
    """Block factor of X with P(X^{-1}) = S.

    With ``factored`` the update matrices V_j travel as upper triangular
    factors; otherwise each V_j is factored afresh.
    """
    cf = _forest(S, cf)
    a = cf.arrays
    doff, loff, maxm, na = _offsets(cf)
    D = np.empty(doff[-1])
    C = np.empty(doff[-1])
    Lb = np.empty(loff[-1])
    buf = np.empty(_stack_size(cf, na, True))
    info = np.zeros(3, np.int64)
    p = cf.sym.pattern
    K.sn_completion(p.colptr, a["cl"], a["clptr"], a["nn"], a["crel"], a["cpost"],
                    a["cparent"], a["cchptr"], a["cchlist"], a["vpos"], a["snpos"], S.values,
                    D, C, doff, Lb, loff, buf, maxm, _threshold(S), bool(factored), info)
    if info[0] == K.NOT_PD:
        raise NoPositiveCompletion(cf.reps[info[1]], "clique")
    if info[0] == K.BREAKDOWN:
        raise NumericalBreakdown(cf.reps[info[1]], "clique")
    return BlockCholeskyFactor(cf, D, C, Lb, doff, loff, rotations=int(info[2]))


def to_scalar_factor(F: BlockCholeskyFactor) -> CholeskyFactor:
    """Convert block D to scalar form, giving the unique LDL^T factor."""
    cf, sym = F.cf, F.cf.sym
    p = sym.pattern
    L = np.zeros(p.nnz)
    d = np.empty(p.n)
    for j in cf.reps:
        Dj, Lj = F.block(j)
        nw, an = cf.new[j], cf.anc[j]
        C = np.linalg.cholesky(Dj)
        c = np.diag(C).copy()
        Lnn = C / c
        d[nw] = c * c
        col = np.vstack([Lnn, Lj @ Lnn])
        rows = np.concatenate([nw, an])
        order = np.argsort(rows)
        for q, v in enumerate(nw):
            r = rows[order]
            vals = col[order, q]
            keep = r >= v
            L[p.colptr[v]:p.colptr[v + 1]] = vals[keep]
    return CholeskyFactor(sym, L, d)
