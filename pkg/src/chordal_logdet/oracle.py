"""Dense reference computations and random instance generators.

Nothing here calls the tree sweeps: the references work on full dense
matrices so they can check the fast paths independently.
"""

import numpy as np
import scipy.sparse as sp

from .symbolic import SparseSymMatrix, SparsityPattern, fill_pattern

__all__ = [
    "IndefiniteAtProbe", "dense_project", "dense_hessian_matrix", "to_coords", "from_coords",
    "gen_chordal", "gen_spd", "gen_completable", "random_sym", "finite_diff_gradient",
    "finite_diff_hessian", "dense_ldl", "dense_fill", "fill_violations", "dense_logdet",
]


class IndefiniteAtProbe(ValueError):
    """A finite-difference probe point left the positive definite cone."""


def _dense(A):
    return A.todense() if isinstance(A, SparseSymMatrix) else np.asarray(A, dtype=float)


def dense_project(A, V: SparsityPattern) -> SparseSymMatrix:
    A = _dense(A)
    if A.shape != (V.n, V.n):
        raise ValueError("order of A does not match the pattern")
    return SparseSymMatrix(V, A[V.rowind, V.columns_of_entries()].copy())


def _coord_scale(V):
    r, c = V.rowind, V.columns_of_entries()
    return np.where(r == c, 1.0, np.sqrt(2.0))


def to_coords(A: SparseSymMatrix):
    """Coordinates in the orthonormal basis (off-diagonals scaled by sqrt 2)."""
    return A.values * _coord_scale(A.pattern)


def from_coords(V, x):
    return SparseSymMatrix(V, np.asarray(x, dtype=float) / _coord_scale(V))


def dense_hessian_matrix(X, V: SparsityPattern):
    """Matrix of Y -> P(X^{-1} Y X^{-1}) in orthonormal coordinates on V."""
    W = np.linalg.inv(_dense(X))
    r, c = V.rowind, V.columns_of_entries()
    diag = r == c
    g = np.where(diag, 0.5, 1.0 / np.sqrt(2.0))
    h = np.where(diag, 1.0, np.sqrt(2.0))
    H = W[np.ix_(r, r)] * W[np.ix_(c, c)] + W[np.ix_(r, c)] * W[np.ix_(c, r)]
    return H * h[:, None] * g[None, :]


def dense_ldl(X):
    """Unit lower L and diagonal d with X = L diag(d) L^T."""
    C = np.linalg.cholesky(_dense(X))
    d = np.diag(C)
    return C / d, d ** 2


def dense_logdet(X):
    sign, val = np.linalg.slogdet(_dense(X))
    if sign <= 0:
        raise IndefiniteAtProbe("matrix is not positive definite")
    return val


def dense_fill(raw: SparsityPattern) -> SparsityPattern:
    """Structure of the Cholesky factor of (A + n I), A the 0/1 pattern matrix."""
    n = raw.n
    A = raw.mask().astype(float)
    C = np.linalg.cholesky(A + n * np.eye(n))
    i, j = np.nonzero(np.tril(np.abs(C) > 0))
    return SparsityPattern.from_entries(n, i, j)


def fill_violations(V: SparsityPattern):
    """All triples (i, j, k), i > j > k, breaking the fill property."""
    M = V.mask()
    out = []
    for k in range(V.n):
        rows = np.flatnonzero(M[k + 1:, k]) + k + 1
        for a, j in enumerate(rows):
            for i in rows[a + 1:]:
                if not M[i, j]:
                    out.append((int(i), int(j), k))
    return out


def gen_chordal(n, density=0.1, seed=0, permute=True) -> SparsityPattern:
    """Random filled pattern: random edges, optional random order, then fill."""
    rng = np.random.default_rng(seed)
    i, j = np.tril_indices(n, -1)
    keep = rng.random(i.size) < density
    raw = SparsityPattern.from_entries(n, i[keep], j[keep])
    order = rng.permutation(n) if permute else None
    return fill_pattern(raw, order).pattern


def _lower_factor(V, rng):
    r, c = V.rowind, V.columns_of_entries()
    counts = V.counts() + 1
    vals = rng.uniform(-1.0, 1.0, r.size) / np.sqrt(counts[c])
    vals[r == c] = 1.0
    return sp.csc_matrix((vals, (r, c)), shape=(V.n, V.n))


def gen_spd(V: SparsityPattern, seed=0) -> SparseSymMatrix:
    """X = L D L^T with random unit lower L on V and D uniform in [0.5, 2]."""
    rng = np.random.default_rng(seed)
    L = _lower_factor(V, rng)
    d = rng.uniform(0.5, 2.0, V.n)
    X = (L @ sp.diags(d) @ L.T).tocsc()
    vals = np.asarray(X[V.rowind, V.columns_of_entries()]).ravel()
    return SparseSymMatrix(V, vals)


def gen_completable(V: SparsityPattern, seed=0, rank=8) -> SparseSymMatrix:
    """P(Z) for the positive definite Z = I + G G^T, G of shape n x rank."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((V.n, rank)) / np.sqrt(rank)
    r, c = V.rowind, V.columns_of_entries()
    vals = np.einsum("ij,ij->i", G[r], G[c]) + (r == c)
    return SparseSymMatrix(V, vals)


def random_sym(V: SparsityPattern, seed=0) -> SparseSymMatrix:
    rng = np.random.default_rng(seed)
    return SparseSymMatrix(V, rng.standard_normal(V.nnz))


def _default_step(X, Y):
    return 1e-4 * np.linalg.norm(X) / max(np.linalg.norm(Y), 1e-300)


def _check_pd(A):
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise IndefiniteAtProbe("probe point is not positive definite") from None


def finite_diff_gradient(X, Y, step=None):
    """Central difference of f = -log det along Y: approximates <grad f(X), Y>."""
    Xd, Yd = _dense(X), _dense(Y)
    t = _default_step(Xd, Yd) if step is None else step
    hi, lo = Xd + t * Yd, Xd - t * Yd
    _check_pd(hi)
    _check_pd(lo)
    return (-dense_logdet(hi) + dense_logdet(lo)) / (2 * t)


def finite_diff_hessian(X, Y, step=None, pattern=None):
    """Central difference of grad f(X) = -P(X^{-1}) along Y."""
    if pattern is None:
        pattern = Y.pattern
    Xd, Yd = _dense(X), _dense(Y)
    t = _default_step(Xd, Yd) if step is None else step
    hi, lo = Xd + t * Yd, Xd - t * Yd
    _check_pd(hi)
    _check_pd(lo)
    G = (np.linalg.inv(lo) - np.linalg.inv(hi)) / (2 * t)
    return dense_project(G, pattern)
