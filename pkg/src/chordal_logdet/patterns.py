"""Structured test patterns: band, arrow and the 17-vertex example."""

import numpy as np

from .symbolic import SparsityPattern

__all__ = ["band", "arrow", "pattern17", "PATTERN17_EDGES"]

# Below-diagonal entries (row, col), 1-based, of the 17-vertex filled
# example with elimination tree 1,2->3->4->5->9, 6->9, 7->8->9, 9->15->16,
# 10->11->13, 12->13->14->16->17.
PATTERN17_EDGES = (
    (3, 1),
    (3, 2), (4, 2),
    (4, 3), (5, 3), (15, 3),
    (5, 4), (15, 4),
    (9, 5), (15, 5), (16, 5),
    (9, 6), (16, 6),
    (8, 7), (9, 7), (15, 7),
    (9, 8), (15, 8),
    (15, 9), (16, 9),
    (11, 10), (13, 10), (14, 10), (17, 10),
    (13, 11), (14, 11), (17, 11),
    (13, 12), (14, 12), (16, 12), (17, 12),
    (14, 13), (16, 13), (17, 13),
    (16, 14), (17, 14),
    (16, 15), (17, 15),
    (17, 16),
)


def pattern17():
    r, c = np.array(PATTERN17_EDGES).T - 1
    return SparsityPattern.from_entries(17, r, c)


def band(n, w):
    """Lower band with ``w`` subdiagonals: I_j = {j+1, ..., min(j+w, n-1)}."""
    if w < 0:
        raise ValueError("bandwidth must be nonnegative")
    counts = np.minimum(w, n - 1 - np.arange(n)) + 1
    colptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=colptr[1:])
    starts = np.repeat(colptr[:-1], counts)
    rowind = np.repeat(np.arange(n), counts) + (np.arange(colptr[-1]) - starts)
    return SparsityPattern(n, colptr, rowind)


def arrow(n, w):
    """Arrow pattern: the last ``w`` rows are dense, the rest is diagonal.

    Columns ``j < n - w`` have I_j = {n-w, ..., n-1}; the trailing
    ``w x w`` block is dense.
    """
    if not 0 <= w <= n:
        raise ValueError("need 0 <= w <= n")
    tail = np.arange(n - w, n)
    cols = [tail if j < n - w else np.arange(j + 1, n) for j in range(n)]
    return SparsityPattern.from_columns(n, cols)
