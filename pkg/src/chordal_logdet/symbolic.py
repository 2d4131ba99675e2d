"""Sparsity patterns, symbolic factorization and elimination trees.

Indices are 0-based everywhere in this package; conversion to the 1-based
convention used in Matrix Market files happens only in :mod:`.mmio`.

A pattern is stored column-compressed and lower-triangular: column ``j``
holds the sorted row indices ``i >= j`` with the diagonal first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PatternError",
    "NotChordal",
    "SparsityPattern",
    "SparseSymMatrix",
    "SymbolicAnalysis",
    "fill_pattern",
    "etree_only",
    "monotone_degrees",
    "extend_add",
    "extract",
    "postorder",
]


class PatternError(ValueError):
    """Malformed sparsity pattern or permutation."""


class NotChordal(ValueError):
    """The pattern is not filled: ``(i, k), (j, k)`` present but ``(i, j)`` missing.

    ``witness`` is the 0-based triple ``(i, j, k)`` with ``i > j > k``.
    """

    def __init__(self, witness):
        self.witness = tuple(int(v) for v in witness)
        i, j, k = self.witness
        super().__init__(
            f"pattern is not filled: ({i + 1},{k + 1}) and ({j + 1},{k + 1}) "
            f"present but ({i + 1},{j + 1}) missing"
        )


class SparsityPattern:
    """Lower-triangular positions of a symmetric sparsity pattern.

    Parameters
    ----------
    n : int
        Matrix order.
    colptr, rowind : array_like
        Column-compressed storage.  Each column must start with its diagonal
        and list strictly increasing row indices.
    """

    __slots__ = ("n", "colptr", "rowind", "_cols")

    def __init__(self, n, colptr, rowind, check=True):
        self.n = int(n)
        self.colptr = np.ascontiguousarray(colptr, dtype=np.int64)
        self.rowind = np.ascontiguousarray(rowind, dtype=np.int64)
        self._cols = None
        if check:
            self._validate()

    def _validate(self):
        n, cp, ri = self.n, self.colptr, self.rowind
        if n < 0 or cp.shape != (n + 1,) or cp[0] != 0 or cp[-1] != ri.size:
            raise PatternError("inconsistent column pointers")
        if np.any(np.diff(cp) < 1):
            raise PatternError("every column needs at least its diagonal entry")
        if n == 0:
            return
        cols = np.repeat(np.arange(n), np.diff(cp))
        if np.any(ri[cp[:-1]] != np.arange(n)):
            raise PatternError("missing diagonal entry (or diagonal not first)")
        if np.any(ri < cols) or np.any(ri >= n):
            raise PatternError("row index outside the lower triangle")
        step = np.diff(ri)
        inside = np.ones(ri.size - 1, dtype=bool)
        inside[cp[1:-1] - 1] = False
        if np.any(step[inside] <= 0):
            raise PatternError("row indices must be strictly increasing (no duplicates)")

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_columns(cls, n, columns):
        """Build from per-column iterables of below-diagonal row indices."""
        parts, counts = [], np.empty(n, dtype=np.int64)
        for j in range(n):
            rows = np.unique(np.asarray(list(columns[j]), dtype=np.int64))
            rows = rows[rows > j]
            parts.append(np.concatenate(([j], rows)))
            counts[j] = rows.size + 1
        colptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=colptr[1:])
        rowind = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
        return cls(n, colptr, rowind)

    @classmethod
    def from_entries(cls, n, rows, cols):
        """Build from coordinate pairs in either triangle; the diagonal is added."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.size and (rows.min() < 0 or cols.min() < 0 or max(rows.max(), cols.max()) >= n):
            raise PatternError("entry index out of range")
        lo = np.maximum(rows, cols)
        hi = np.minimum(rows, cols)
        diag = np.arange(n, dtype=np.int64)
        r = np.concatenate((diag, lo))
        c = np.concatenate((diag, hi))
        key = np.unique(c * n + r)
        c, r = np.divmod(key, n) if n else (key, key)
        colptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(c, minlength=n), out=colptr[1:])
        return cls(n, colptr, r)

    @classmethod
    def diagonal(cls, n):
        return cls(n, np.arange(n + 1), np.arange(n))

    @classmethod
    def dense(cls, n):
        return cls.from_columns(n, [range(j + 1, n) for j in range(n)])

    # -- queries ------------------------------------------------------------
    @property
    def nnz(self):
        """Number of stored lower-triangular positions, diagonal included."""
        return int(self.rowind.size)

    def column(self, j):
        """Sorted rows of column ``j``, diagonal first (the index set I'_j)."""
        return self.rowind[self.colptr[j]:self.colptr[j + 1]]

    def below(self, j):
        """Sorted rows strictly below the diagonal in column ``j`` (I_j)."""
        return self.rowind[self.colptr[j] + 1:self.colptr[j + 1]]

    def counts(self):
        return np.diff(self.colptr) - 1

    def columns_of_entries(self):
        """Column index of every stored position."""
        return np.repeat(np.arange(self.n), np.diff(self.colptr))

    def entries(self):
        """Return ``(rows, cols)`` of all stored positions."""
        return self.rowind.copy(), self.columns_of_entries()

    def position(self, i, j):
        """Storage offset of ``(i, j)`` (either triangle), or -1 if absent."""
        i, j = max(i, j), min(i, j)
        col = self.column(j)
        k = int(np.searchsorted(col, i))
        if k < col.size and col[k] == i:
            return int(self.colptr[j] + k)
        return -1

    def __contains__(self, ij):
        return self.position(*ij) >= 0

    def mask(self):
        """Dense boolean matrix of the symmetric pattern."""
        m = np.zeros((self.n, self.n), dtype=bool)
        r, c = self.entries()
        m[r, c] = True
        m[c, r] = True
        return m

    def __eq__(self, other):
        if not isinstance(other, SparsityPattern):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.colptr, other.colptr)
                and np.array_equal(self.rowind, other.rowind))

    def __hash__(self):
        return hash((self.n, self.colptr.tobytes(), self.rowind.tobytes()))

    def __repr__(self):
        return f"SparsityPattern(n={self.n}, nnz={self.nnz})"

    def permuted(self, order):
        """Pattern of ``A[order][:, order]`` (``order[new] = old``)."""
        order = _check_perm(order, self.n)
        inv = np.empty_like(order)
        inv[order] = np.arange(self.n)
        r, c = self.entries()
        return SparsityPattern.from_entries(self.n, inv[r], inv[c])


def _check_perm(order, n):
    order = np.asarray(order, dtype=np.int64)
    if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
        raise PatternError("order is not a permutation of 0..n-1")
    return order


class SparseSymMatrix:
    """Symmetric matrix with values on a fixed pattern (the space S^n_V).

    ``values[p]`` is the entry at stored position ``p`` of ``pattern``.
    """

    __slots__ = ("pattern", "values")

    def __init__(self, pattern, values=None):
        self.pattern = pattern
        if values is None:
            values = np.zeros(pattern.nnz)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.shape != (pattern.nnz,):
            raise ValueError(f"expected {pattern.nnz} values, got shape {values.shape}")
        self.values = values

    @classmethod
    def identity(cls, pattern):
        v = np.zeros(pattern.nnz)
        v[pattern.colptr[:-1]] = 1.0
        return cls(pattern, v)

    @property
    def n(self):
        return self.pattern.n

    def diagonal(self):
        return self.values[self.pattern.colptr[:-1]]

    def copy(self):
        return SparseSymMatrix(self.pattern, self.values.copy())

    def todense(self):
        n = self.pattern.n
        a = np.zeros((n, n))
        r, c = self.pattern.entries()
        a[r, c] = self.values
        a[c, r] = self.values
        return a

    def weights(self):
        """Inner-product weights: 1 on the diagonal, 2 off the diagonal."""
        w = np.full(self.pattern.nnz, 2.0)
        w[self.pattern.colptr[:-1]] = 1.0
        return w

    def inner(self, other):
        """Trace inner product ``tr(A B)`` computed from the lower triangle."""
        self._same(other)
        d = self.pattern.colptr[:-1]
        return 2.0 * float(self.values @ other.values) - float(self.values[d] @ other.values[d])

    def norm(self):
        """Frobenius norm of the full symmetric matrix."""
        return float(np.sqrt(max(self.inner(self), 0.0)))

    def _same(self, other):
        if other.pattern is not self.pattern and other.pattern != self.pattern:
            raise ValueError("matrices live on different patterns")

    def __add__(self, other):
        self._same(other)
        return SparseSymMatrix(self.pattern, self.values + other.values)

    def __sub__(self, other):
        self._same(other)
        return SparseSymMatrix(self.pattern, self.values - other.values)

    def __mul__(self, t):
        return SparseSymMatrix(self.pattern, self.values * float(t))

    __rmul__ = __mul__

    def __neg__(self):
        return SparseSymMatrix(self.pattern, -self.values)

    def __repr__(self):
        return f"SparseSymMatrix(n={self.n}, nnz={self.pattern.nnz})"

    def support(self):
        """Columns holding at least one nonzero value."""
        nz = self.values != 0.0
        cols = self.pattern.columns_of_entries()
        return np.unique(cols[nz])


@dataclass(eq=False)
class SymbolicAnalysis:
    """Elimination tree and index maps of a filled pattern.

    ``relidx`` is aligned with ``pattern.rowind``: for a non-root column
    ``i`` with parent ``j``, ``relidx[p]`` for the below-diagonal positions
    ``p`` of column ``i`` gives the position of that row inside I'_j
    (0 is ``j`` itself).  Diagonal slots and root columns hold -1.
    """

    pattern: SparsityPattern
    parent: np.ndarray
    chptr: np.ndarray
    chlist: np.ndarray
    postorder: np.ndarray
    degree: np.ndarray
    relidx: np.ndarray
    order: np.ndarray = None
    fwd_stack: int = field(init=False)
    rev_stack: int = field(init=False)
    max_front: int = field(init=False)

    def __post_init__(self):
        d2 = self.degree.astype(np.int64) ** 2
        self.fwd_stack, self.rev_stack = _stack_peaks(
            self.parent, self.chptr, self.chlist, self.postorder, d2)
        self.max_front = int(self.degree.max()) + 1 if self.n else 0

    @property
    def n(self):
        return self.pattern.n

    def children(self, j):
        return self.chlist[self.chptr[j]:self.chptr[j + 1]]

    def colset(self, j):
        """I_j: rows strictly below the diagonal of column ``j``."""
        return self.pattern.below(j)

    def front(self, j):
        """I'_j = {j} ∪ I_j."""
        return self.pattern.column(j)

    def relmap(self, i):
        """Positions of I_i inside I'_{parent(i)}."""
        p = self.pattern.colptr
        return self.relidx[p[i] + 1:p[i + 1]]

    def roots(self):
        return np.flatnonzero(self.parent < 0)

    def ancestors(self, k):
        out = []
        k = int(self.parent[k])
        while k >= 0:
            out.append(k)
            k = int(self.parent[k])
        return out

    def front_storage_bytes(self):
        """Predicted peak dense workspace (largest front plus update stack)."""
        return 8 * (self.max_front ** 2 + max(self.fwd_stack, self.rev_stack))


def _stack_peaks(parent, chptr, chlist, post, d2):
    """Peak update-stack sizes (in doubles) for forward and reverse sweeps."""
    cur = peak = 0
    for j in post:
        for c in chlist[chptr[j]:chptr[j + 1]]:
            cur -= d2[c]
        cur += d2[j]
        peak = max(peak, cur)
    fwd = int(peak)
    cur = peak = 0
    for j in post[::-1]:
        if parent[j] >= 0:
            cur -= d2[j]
        for c in chlist[chptr[j]:chptr[j + 1]]:
            cur += d2[c]
        peak = max(peak, cur)
    return fwd, int(peak)


def postorder(parent, chptr, chlist):
    """Depth-first postorder, roots and children in increasing vertex order."""
    n = parent.size
    out = np.empty(n, dtype=np.int64)
    pos = 0
    for root in np.flatnonzero(parent < 0):
        stack = [(int(root), 0)]
        while stack:
            v, k = stack[-1]
            kids = chlist[chptr[v]:chptr[v + 1]]
            if k < kids.size:
                stack[-1] = (v, k + 1)
                stack.append((int(kids[k]), 0))
            else:
                stack.pop()
                out[pos] = v
                pos += 1
    return out


def _build(pattern, order=None):
    """Assemble the analysis of an already filled pattern (no checks)."""
    n = pattern.n
    cp, ri = pattern.colptr, pattern.rowind
    deg = np.diff(cp) - 1
    parent = np.full(n, -1, dtype=np.int64)
    has = deg > 0
    parent[has] = ri[cp[:-1][has] + 1]
    kids = np.flatnonzero(has)
    chorder = kids[np.argsort(parent[kids], kind="stable")]
    chptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(parent[kids], minlength=n), out=chptr[1:])
    post = postorder(parent, chptr, chorder)
    relidx = np.full(ri.size, -1, dtype=np.int64)
    for i in kids:
        j = parent[i]
        relidx[cp[i] + 1:cp[i + 1]] = np.searchsorted(ri[cp[j]:cp[j + 1]], ri[cp[i] + 1:cp[i + 1]])
    return SymbolicAnalysis(pattern, parent, chptr, chorder, post, deg, relidx, order)


def _first_fill_violation(pattern):
    """Return a violating triple ``(i, j, k)`` or None.

    Checks ``I_k \\ {parent(k)} ⊆ I_{parent(k)}`` for every column, which is
    equivalent to the fill property.
    """
    cp, ri = pattern.colptr, pattern.rowind
    for k in range(pattern.n):
        rows = ri[cp[k] + 1:cp[k + 1]]
        if rows.size < 2:
            continue
        j = rows[0]
        pj = ri[cp[j] + 1:cp[j + 1]]
        miss = ~np.isin(rows[1:], pj, assume_unique=True)
        if miss.any():
            return int(rows[1:][miss][0]), int(j), int(k)
    return None


def etree_only(filled):
    """Analyse a pattern that must already be filled; raise :class:`NotChordal` otherwise."""
    bad = _first_fill_violation(filled)
    if bad is not None:
        raise NotChordal(bad)
    return _build(filled)


def fill_pattern(raw, order=None):
    """Symbolic Cholesky factorization of ``raw`` permuted by ``order``.

    ``order[new] = old``.  Returns the analysis of the filled pattern of the
    permuted matrix.
    """
    n = raw.n
    if order is None:
        order = np.arange(n, dtype=np.int64)
        perm = raw
    else:
        order = _check_perm(order, n)
        perm = raw.permuted(order)
    cp, ri = perm.colptr, perm.rowind
    cols = [None] * n
    pending = [[] for _ in range(n)]
    for j in range(n):
        parts = [ri[cp[j] + 1:cp[j + 1]]]
        for c in pending[j]:
            parts.append(cols[c][1:])
        if len(parts) == 1:
            s = parts[0]
        else:
            s = np.unique(np.concatenate(parts))
        cols[j] = s
        if s.size:
            pending[int(s[0])].append(j)
        pending[j] = None
    counts = np.array([c.size + 1 for c in cols], dtype=np.int64)
    colptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=colptr[1:])
    rowind = np.empty(colptr[-1], dtype=np.int64)
    for j in range(n):
        rowind[colptr[j]] = j
        rowind[colptr[j] + 1:colptr[j + 1]] = cols[j]
    return _build(SparsityPattern(n, colptr, rowind, check=False), order)


def monotone_degrees(sym):
    """|I_k| for every vertex."""
    return sym.degree.copy()


def extend_add(front, update, relmap):
    """``front += E U E^T``: scatter-add ``update`` at rows/cols ``relmap``."""
    relmap = np.asarray(relmap, dtype=np.int64)
    if update.shape != (relmap.size, relmap.size):
        raise ValueError(f"update of shape {update.shape} does not match map of length {relmap.size}")
    if relmap.size:
        front[np.ix_(relmap, relmap)] += update
    return front


def extract(big, relmap):
    """``E^T B E``: the principal submatrix of ``big`` at ``relmap``."""
    relmap = np.asarray(relmap, dtype=np.int64)
    if relmap.size and (relmap.min() < 0 or relmap.max() >= big.shape[0]):
        raise ValueError("map positions out of range")
    return big[np.ix_(relmap, relmap)].copy()
