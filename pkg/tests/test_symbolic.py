import numpy as np
import pytest

from chordal_logdet import oracle
from chordal_logdet.patterns import arrow, band, pattern17
from chordal_logdet.symbolic import (NotChordal, PatternError, SparseSymMatrix, SparsityPattern,
                                     etree_only, extend_add, extract, fill_pattern,
                                     monotone_degrees)

# 1-based parents of the 17-vertex example; 0 marks the root
P17_PARENTS = [3, 3, 4, 5, 9, 9, 8, 9, 15, 11, 13, 13, 14, 16, 16, 17, 0]
P17_DEGREES = [1, 2, 3, 2, 3, 2, 3, 2, 2, 4, 3, 4, 3, 2, 2, 1, 0]


def test_pattern_validation():
    with pytest.raises(PatternError):
        SparsityPattern(2, np.array([0, 1, 2]), np.array([1, 1]))  # missing diagonal
    with pytest.raises(PatternError):
        SparsityPattern(2, np.array([0, 3, 4]), np.array([0, 1, 1, 1]))  # duplicate
    with pytest.raises(PatternError):
        SparsityPattern.from_entries(3, [5], [0])


def test_from_entries_mirrors_upper_triangle():
    a = SparsityPattern.from_entries(3, [0], [2])
    b = SparsityPattern.from_entries(3, [2], [0])
    assert a == b
    assert (2, 0) in a and (0, 2) in a and (1, 0) not in a


def test_diagonal_pattern_has_no_tree():
    sym = fill_pattern(SparsityPattern.diagonal(6))
    assert sym.pattern == SparsityPattern.diagonal(6)
    assert np.all(sym.parent == -1)
    assert np.all(monotone_degrees(sym) == 0)


def test_pattern17_is_filled_and_has_the_expected_tree():
    V = pattern17()
    sym = fill_pattern(V)
    assert sym.pattern == V
    sym = etree_only(V)
    assert (sym.parent + 1).tolist() == P17_PARENTS
    assert monotone_degrees(sym).tolist() == P17_DEGREES
    assert (sym.front(4) + 1).tolist() == [5, 9, 15, 16]


def test_random_fill_matches_dense_elimination():
    rng = np.random.default_rng(3)
    n = 10
    i, j = np.tril_indices(n, -1)
    keep = rng.random(i.size) < 0.25
    raw = SparsityPattern.from_entries(n, i[keep], j[keep])
    assert fill_pattern(raw).pattern == oracle.dense_fill(raw)


def test_fill_with_order_contains_permuted_pattern():
    raw = SparsityPattern.from_entries(8, [7, 7, 7, 5], [0, 1, 2, 3])
    order = np.array([7, 0, 1, 2, 3, 4, 5, 6])
    sym = fill_pattern(raw, order)
    P = raw.permuted(order)
    r, c = P.entries()
    assert all((a, b) in sym.pattern for a, b in zip(r, c))
    assert np.array_equal(sym.order, order)
    # vertex 7 eliminated first links all its neighbours: a clique of size 4
    assert sym.pattern.nnz == P.nnz + 3


def test_fill_rejects_bad_order():
    with pytest.raises(PatternError):
        fill_pattern(pattern17(), np.zeros(17, dtype=int))


def test_four_cycle_is_not_chordal():
    V = SparsityPattern.from_entries(4, [1, 2, 3, 3], [0, 1, 2, 0])
    with pytest.raises(NotChordal) as exc:
        etree_only(V)
    i, j, k = exc.value.witness
    # the exhaustive scan finds exactly one violation, (4, 2, 1) in 1-based terms
    assert oracle.fill_violations(V) == [(3, 1, 0)]
    assert (i, j, k) == (3, 1, 0)


def test_dense_pattern_chain():
    sym = etree_only(SparsityPattern.dense(5))
    assert sym.parent.tolist() == [1, 2, 3, 4, -1]
    assert sym.degree.tolist() == [4, 3, 2, 1, 0]


def test_band_degrees():
    deg = monotone_degrees(etree_only(band(2000, 10)))
    assert np.all(deg[:1990] == 10)
    assert deg[1990:].tolist() == list(range(9, -1, -1))


def test_arrow_structure():
    sym = etree_only(arrow(12, 3))
    assert np.all(sym.parent[:9] == 9)
    assert sym.degree.tolist() == [3] * 9 + [2, 1, 0]


def test_postorder_is_topological():
    sym = etree_only(pattern17())
    pos = np.empty(17, dtype=int)
    pos[sym.postorder] = np.arange(17)
    for k in range(17):
        if sym.parent[k] >= 0:
            assert pos[k] < pos[sym.parent[k]]
    # children visited in increasing order: subtree of 14 first
    assert (sym.postorder[:5] + 1).tolist() == [10, 11, 12, 13, 14]


def test_relidx_embeds_child_sets():
    sym = etree_only(pattern17())
    for i in range(17):
        j = sym.parent[i]
        if j >= 0:
            assert np.array_equal(sym.front(j)[sym.relmap(i)], sym.colset(i))
    # I_8 = {9, 15} sits at positions 0 and 1 of I'_9 = {9, 15, 16}
    assert sym.relmap(7).tolist() == [0, 1]


def test_extend_add_matches_dense_scatter():
    sym = etree_only(pattern17())
    j, i = 4, 3  # I'_5 = {5, 9, 15, 16}, child 4 with I_4 = {5, 15}
    U = np.array([[2.0, 1.0], [1.0, 3.0]])
    front = np.arange(16.0).reshape(4, 4)
    got = extend_add(front.copy(), U, sym.relmap(i))
    E = np.zeros((17, 17))
    E[np.ix_(sym.colset(i), sym.colset(i))] = U
    assert np.array_equal(got - front, E[np.ix_(sym.front(j), sym.front(j))])
    assert np.array_equal(extend_add(front.copy(), np.zeros((0, 0)), np.zeros(0, int)), front)


def test_extract_then_embed_is_a_projection():
    rel = np.array([0, 2])
    W = np.arange(9.0).reshape(3, 3)
    W = W + W.T
    E = extend_add(np.zeros((3, 3)), extract(W, rel), rel)
    assert np.array_equal(extract(E, rel), extract(W, rel))
    assert np.array_equal(extract(W, np.arange(3)), W)


def test_extend_add_rejects_mismatch():
    with pytest.raises(ValueError):
        extend_add(np.zeros((3, 3)), np.zeros((2, 2)), np.array([0]))


def test_sparse_matrix_inner_product():
    V = SparsityPattern.dense(3)
    A = oracle.random_sym(V, 1)
    B = oracle.random_sym(V, 2)
    assert A.inner(B) == pytest.approx(np.trace(A.todense() @ B.todense()))
    assert A.norm() == pytest.approx(np.linalg.norm(A.todense()))
    with pytest.raises(ValueError):
        SparseSymMatrix(V, np.zeros(2))
