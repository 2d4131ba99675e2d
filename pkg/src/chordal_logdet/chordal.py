"""Cliques, supernodes and clique trees of a filled pattern."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .symbolic import SymbolicAnalysis

__all__ = [
    "CliqueForest", "representative_vertices", "clique_tree", "singleton_forest",
    "verify_clique_tree", "contiguous_order", "PICK_RULES",
]

PICK_RULES = ("max-degree", "first-eligible")


@dataclass
class CliqueForest:
    """Supernode partition and clique tree, indexed by representative vertex.

    ``new``, ``anc``, ``cparent`` and ``first_anc`` are dicts keyed by the
    representative; ``snode`` maps every vertex to its representative.
    Roots have ``cparent`` -1 and ``first_anc`` -1.
    """

    sym: SymbolicAnalysis
    reps: np.ndarray
    snode: np.ndarray
    new: dict
    anc: dict
    cparent: dict
    first_anc: dict
    _kernel: tuple = field(default=None, repr=False, compare=False)

    @property
    def n(self):
        return self.sym.n

    @property
    def size(self):
        """Number of cliques."""
        return len(self.reps)

    def clique(self, j):
        return np.concatenate([self.new[j], self.anc[j]])

    def children(self, j):
        return [k for k in self.reps if self.cparent[k] == j]

    def mean_supernode(self):
        return self.n / max(self.size, 1)

    def clique_postorder(self):
        """Representatives in a depth-first postorder of the clique tree."""
        kids = {int(j): [] for j in self.reps}
        roots = []
        for j in self.reps:
            p = self.cparent[j]
            (kids[p] if p >= 0 else roots).append(int(j))
        out = []
        for r in roots:
            stack = [(r, 0)]
            while stack:
                v, k = stack[-1]
                if k < len(kids[v]):
                    stack[-1] = (v, k + 1)
                    stack.append((kids[v][k], 0))
                else:
                    stack.pop()
                    out.append(v)
        return out

    @cached_property
    def arrays(self):
        """Flat index arrays consumed by the compiled supernodal sweeps."""
        n = self.n
        p = self.sym.pattern
        reps = [int(j) for j in self.reps]
        cid = {j: k for k, j in enumerate(reps)}
        l = len(reps)
        nn = np.array([len(self.new[j]) for j in reps], dtype=np.int64)
        sizes = np.array([len(self.new[j]) + len(self.anc[j]) for j in reps], dtype=np.int64)
        clptr = np.zeros(l + 1, dtype=np.int64)
        np.cumsum(sizes, out=clptr[1:])
        cl = np.concatenate([self.clique(j) for j in reps]).astype(np.int64) if l else \
            np.zeros(0, np.int64)
        cparent = np.array([cid[self.cparent[j]] if self.cparent[j] >= 0 else -1 for j in reps],
                           dtype=np.int64)
        kids = [[] for _ in range(l)]
        for k in range(l):
            if cparent[k] >= 0:
                kids[cparent[k]].append(k)
        cchptr = np.zeros(l + 1, dtype=np.int64)
        np.cumsum([len(c) for c in kids], out=cchptr[1:])
        cchlist = np.array([c for cs in kids for c in cs], dtype=np.int64)
        cpost = np.array([cid[j] for j in self.clique_postorder()], dtype=np.int64)
        where = np.full(n, -1, dtype=np.int64)
        crel = np.full(cl.size, -1, dtype=np.int64)
        vpos = np.empty(n, dtype=np.int64)
        snpos = np.empty(p.rowind.size, dtype=np.int64)
        for k in range(l):
            verts = cl[clptr[k]:clptr[k + 1]]
            where[verts] = np.arange(verts.size)
            for v in verts[:nn[k]]:
                vpos[v] = where[v]
                snpos[p.colptr[v]:p.colptr[v + 1]] = where[p.column(v)]
            for c in kids[k]:
                a0 = clptr[c] + nn[c]
                crel[a0:clptr[c + 1]] = where[cl[a0:clptr[c + 1]]]
            where[verts] = -1
        return dict(cl=cl, clptr=clptr, nn=nn, crel=crel, cpost=cpost, cparent=cparent,
                    cchptr=cchptr, cchlist=cchlist, vpos=vpos, snpos=snpos)


def representative_vertices(sym):
    """Vertices j with |I_j| > |I_k| - 1 for every child k."""
    deg = sym.degree
    out = []
    for j in range(sym.n):
        kids = sym.children(j)
        if kids.size == 0 or np.all(deg[j] > deg[kids] - 1):
            out.append(j)
    return np.array(out, dtype=np.int64)


def _pick(eligible, deg, rule):
    if rule == "max-degree":
        # largest child degree, ties to the smallest vertex
        return max(eligible, key=lambda c: (deg[c], -c))
    if rule == "first-eligible":
        # first hit when scanning the child list newest-first
        return max(eligible)
    raise ValueError(f"unknown child-selection rule {rule!r}; choose from {PICK_RULES}")


def clique_tree(sym, pick="max-degree"):
    """Supernode partition and clique tree from the elimination tree.

    Each vertex either starts a new supernode or joins the supernode of a
    child whose degree exceeds its own by one; ``pick`` chooses among
    several such children.
    """
    n = sym.n
    deg = sym.degree
    snode = np.empty(n, dtype=np.int64)
    new, cparent, first_anc = {}, {}, {}
    for i in range(n):
        kids = [int(c) for c in sym.children(i)]
        eligible = [c for c in kids if deg[i] == deg[c] - 1]
        if eligible:
            k = int(snode[_pick(eligible, deg, pick)])
            new[k].append(i)
        else:
            k = i
            new[k] = [i]
            cparent[k] = -1
            first_anc[k] = -1
        snode[i] = k
        for c in kids:
            l = int(snode[c])
            if l != k:
                cparent[l] = k
                first_anc[l] = i
    return _forest(sym, snode, new, cparent, first_anc)


def singleton_forest(sym):
    """Every vertex its own supernode; the clique tree is the elimination tree."""
    n = sym.n
    new = {j: [j] for j in range(n)}
    cparent = {j: int(sym.parent[j]) for j in range(n)}
    return _forest(sym, np.arange(n), new, cparent, dict(cparent))


def _forest(sym, snode, new, cparent, first_anc):
    reps = np.array(sorted(new), dtype=np.int64)
    newa, anc = {}, {}
    for j in reps:
        nj = np.array(new[j], dtype=np.int64)
        newa[int(j)] = nj
        col = sym.front(j)
        anc[int(j)] = col[~np.isin(col, nj)]
    return CliqueForest(sym, reps, snode, newa, anc,
                        {int(j): int(cparent[j]) for j in reps},
                        {int(j): int(first_anc[j]) for j in reps})


def verify_clique_tree(cf, sym=None):
    """Brute-force check of the clique-tree properties.

    Returns None when everything holds, otherwise a message describing the
    first violation (vertices 1-based).
    """
    sym = sym or cf.sym
    n = sym.n
    seen = np.zeros(n, dtype=np.int64)
    for j in cf.reps:
        seen[cf.new[j]] += 1
    if np.any(seen != 1):
        v = int(np.flatnonzero(seen != 1)[0])
        return f"supernodes do not partition the vertices (vertex {v + 1})"
    for j in cf.reps:
        nj, aj = cf.new[j], cf.anc[j]
        front = set(sym.front(j).tolist())
        if set(nj.tolist()) | set(aj.tolist()) != front:
            return f"clique of representative {j + 1} is not its column set"
        if aj.size and nj.max() > aj.min():
            return f"new({j + 1}) is not ordered before anc({j + 1})"
        p = cf.cparent[j]
        if p < 0:
            if aj.size:
                return f"root clique {j + 1} has a nonempty ancestor set"
            continue
        if cf.first_anc[j] != aj.min():
            return f"first ancestor of clique {j + 1} is wrong"
        if not set(aj.tolist()) <= set(cf.clique(p).tolist()):
            return f"anc({j + 1}) is not contained in the parent clique {p + 1}"
        if aj.min() not in set(cf.new[p].tolist()):
            return f"parent clique {p + 1} does not own the first ancestor of {j + 1}"
    # induced subtree: the cliques holding v are connected, topped by snode(v)
    holders = {v: [] for v in range(n)}
    for j in cf.reps:
        for v in cf.clique(j):
            holders[int(v)].append(int(j))
    for v, hs in holders.items():
        top = int(cf.snode[v])
        for j in hs:
            k = j
            while k != top:
                k = cf.cparent[k]
                if k < 0 or k not in hs:
                    return f"cliques containing vertex {v + 1} are not a subtree"
    return None


def contiguous_order(cf):
    """Permutation (order[new] = old) that makes every supernode contiguous.

    Supernodes are listed in clique-tree postorder; the result is a
    topological order of the elimination tree, so the permuted pattern
    needs no fill.
    """
    return np.concatenate([cf.new[j] for j in cf.clique_postorder()]).astype(np.int64)
