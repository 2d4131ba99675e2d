from pathlib import Path

import numpy as np
import pytest

from chordal_logdet.mmio import MMParseError, read_pattern, write_pattern
from chordal_logdet.ordering import fill_count, order_heuristic
from chordal_logdet.patterns import band, pattern17
from chordal_logdet.symbolic import SparsityPattern

DATA = Path(__file__).parent / "data"


def write(tmp_path, text):
    p = tmp_path / "m.mtx"
    p.write_text(text)
    return p


def test_fixture_is_pattern17():
    assert read_pattern(DATA / "pattern17.mtx") == pattern17()


def test_write_read_roundtrip(tmp_path):
    V = band(30, 4)
    write_pattern(tmp_path / "b.mtx", V, comment="band")
    assert read_pattern(tmp_path / "b.mtx") == V


def test_real_field_values_ignored(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real symmetric\n% c\n3 3 3\n"
                        "1 1 4.0\n3 1 -1.5\n2 2 1e3\n")
    V = read_pattern(p)
    assert (2, 0) in V and V.nnz == 4


def test_upper_entries_are_mirrored(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 1\n1 3\n")
    with pytest.warns(UserWarning, match="mirrored"):
        V = read_pattern(p)
    assert (2, 0) in V


@pytest.mark.parametrize("text, line", [
    ("%%MatrixMarket matrix coordinate pattern general\n2 2 0\n", 1),
    ("%%MatrixMarket matrix array real symmetric\n2 2\n", 1),
    ("not a header\n", 1),
    ("%%MatrixMarket matrix coordinate pattern symmetric\n% c\n2 2\n", 3),
    ("%%MatrixMarket matrix coordinate pattern symmetric\n2 2 2\n1 1\n5 1\n", 4),
    ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 x\n", 3),
    ("%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n1\n", 3),
    ("%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n1 1\n2 2\n", 4),
])
def test_parse_errors_carry_line_numbers(tmp_path, text, line):
    with pytest.raises(MMParseError) as exc:
        read_pattern(write(tmp_path, text))
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")


def test_missing_file():
    with pytest.raises(OSError):
        read_pattern(DATA / "nope.mtx")


def star(n, center):
    leaves = [v for v in range(n) if v != center]
    return SparsityPattern.from_entries(n, leaves, [center] * len(leaves))


def test_star_center_goes_last():
    assert order_heuristic(star(8, 7))[-1] == 7
    # with a low-index centre the last leaf ties it at degree 1 and loses
    order = order_heuristic(star(8, 0)).tolist()
    assert order[-2:] == [0, 7]
    assert fill_count(star(8, 0), order) == 15


def test_band_order_adds_no_fill():
    V = band(60, 5)
    assert fill_count(V, order_heuristic(V)) == fill_count(V) == V.nnz


def test_random_order_beats_natural():
    rng = np.random.default_rng(0)
    i, j = np.tril_indices(100, -1)
    keep = rng.random(i.size) < 0.03
    raw = SparsityPattern.from_entries(100, i[keep], j[keep])
    order = order_heuristic(raw)
    assert sorted(order.tolist()) == list(range(100))
    assert fill_count(raw, order) <= fill_count(raw)
    assert np.array_equal(order, order_heuristic(raw))
