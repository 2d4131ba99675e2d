"""Reading and writing sparsity patterns in Matrix Market coordinate format."""

import warnings

import numpy as np

from .symbolic import SparsityPattern

__all__ = ["MMParseError", "read_pattern", "write_pattern"]


class MMParseError(ValueError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def read_pattern(path) -> SparsityPattern:
    """Pattern of a symmetric coordinate file (values are ignored).

    Only ``pattern`` and ``real``/``integer`` fields with ``symmetric``
    symmetry are accepted.  Entries above the diagonal are mirrored with a
    warning.
    """
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MMParseError("empty file", 1)
    head = lines[0].split()
    if len(head) != 5 or head[0] != "%%MatrixMarket" or head[1].lower() != "matrix":
        raise MMParseError("missing %%MatrixMarket matrix header", 1)
    fmt, field, symm = (h.lower() for h in head[2:])
    if fmt != "coordinate":
        raise MMParseError(f"unsupported format {fmt!r} (need coordinate)", 1)
    if field not in ("pattern", "real", "integer"):
        raise MMParseError(f"unsupported field {field!r}", 1)
    if symm != "symmetric":
        raise MMParseError(f"matrix is {symm!r}, need symmetric", 1)
    k = 1
    while k < len(lines) and (not lines[k].strip() or lines[k].lstrip().startswith("%")):
        k += 1
    if k == len(lines):
        raise MMParseError("missing size line", k)
    try:
        nr, nc, nz = (int(x) for x in lines[k].split())
    except ValueError:
        raise MMParseError("size line must hold three integers", k + 1) from None
    if nr != nc or nr < 0 or nz < 0:
        raise MMParseError("matrix must be square with nonnegative sizes", k + 1)
    need = 2 if field == "pattern" else 3
    rows, cols = np.empty(nz, np.int64), np.empty(nz, np.int64)
    got = 0
    upper = 0
    for ln in range(k + 1, len(lines)):
        text = lines[ln].strip()
        if not text or text.startswith("%"):
            continue
        parts = text.split()
        if len(parts) < need:
            raise MMParseError(f"expected {need} fields", ln + 1)
        if got == nz:
            raise MMParseError("more entries than announced", ln + 1)
        try:
            i, j = int(parts[0]), int(parts[1])
            if field != "pattern":
                float(parts[2])
        except ValueError:
            raise MMParseError("malformed entry", ln + 1) from None
        if not (1 <= i <= nr and 1 <= j <= nr):
            raise MMParseError(f"index ({i}, {j}) out of range", ln + 1)
        upper += i < j
        rows[got], cols[got] = i - 1, j - 1
        got += 1
    if got != nz:
        raise MMParseError(f"announced {nz} entries, found {got}", len(lines))
    if upper:
        warnings.warn(f"{upper} upper-triangle entries mirrored to the lower triangle")
    return SparsityPattern.from_entries(nr, rows, cols)


def write_pattern(path, pattern: SparsityPattern, comment=None):
    r, c = pattern.entries()
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate pattern symmetric\n")
        if comment:
            fh.write(f"% {comment}\n")
        fh.write(f"{pattern.n} {pattern.n} {r.size}\n")
        for i, j in zip(r, c):
            fh.write(f"{i + 1} {j + 1}\n")
