"""A basic minimum-degree ordering."""

import heapq

import numpy as np

from .symbolic import SparsityPattern, fill_pattern

__all__ = ["order_heuristic", "fill_count"]


def order_heuristic(raw: SparsityPattern) -> np.ndarray:
    """Minimum-degree elimination order (order[new] = old).

    Repeatedly eliminates a vertex of smallest current degree, ties going
    to the smallest vertex index, and turns its neighbourhood into a
    clique.  Degrees are exact (no approximation or mass elimination).
    """
    n = raw.n
    adj = [set() for _ in range(n)]
    r, c = raw.entries()
    for i, j in zip(r.tolist(), c.tolist()):
        if i != j:
            adj[i].add(j)
            adj[j].add(i)
    heap = [(len(adj[v]), v) for v in range(n)]
    heapq.heapify(heap)
    done = np.zeros(n, dtype=bool)
    order = []
    while heap:
        deg, v = heapq.heappop(heap)
        if done[v] or deg != len(adj[v]):
            continue
        done[v] = True
        order.append(v)
        nbrs = adj[v]
        for u in nbrs:
            adj[u].discard(v)
            adj[u] |= nbrs - {u}
        for u in nbrs:
            heapq.heappush(heap, (len(adj[u]), u))
        adj[v] = set()
    return np.array(order, dtype=np.int64)


def fill_count(raw: SparsityPattern, order=None) -> int:
    """Stored positions of the filled pattern under ``order``."""
    return fill_pattern(raw, order).pattern.nnz
