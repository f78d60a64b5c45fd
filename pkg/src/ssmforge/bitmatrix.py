"""Binary matrices stored column-major as machine-word-packed bit vectors.

A matrix has ``n`` rows (points of the ground set) and a sequence of columns
(members of the set family).  Each column is an ``n``-bit integer with bit ``i``
set iff row ``i`` is 1.  Duplicate columns are representable: columns are
identified by index, not by value.

The text serialization is bit-exact::

    ssmforge-matrix v1
    n M
    <n rows, each exactly M characters drawn from {0,1}>

Row ``i`` of the body holds bit ``i`` of every column, in column order, and a
trailing newline after the last row is mandatory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import UsageError

MAGIC = "ssmforge-matrix v1"

ColumnSet = tuple[int, ...]


def popcount_words(a: np.ndarray) -> np.ndarray:
    """Per-element popcount of a uint64 array."""
    return np.bitwise_count(a)


@dataclass(frozen=True)
class BitVector:
    """An ``n``-bit vector; bit ``i`` corresponds to row ``i``."""

    n: int
    bits: int

    def __post_init__(self):
        if self.n < 0:
            raise UsageError("BitVector length must be nonnegative")
        if self.bits < 0 or self.bits >> self.n:
            raise UsageError(f"bits out of range for length {self.n}")

    def covers(self, other: "BitVector") -> bool:
        return covers(self, other)

    def __or__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise UsageError("length mismatch in bitwise or")
        return BitVector(self.n, self.bits | other.bits)

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if (self.bits >> i) & 1)

    def to01(self) -> str:
        return "".join("1" if (self.bits >> i) & 1 else "0" for i in range(self.n))

    @classmethod
    def from01(cls, s: str) -> "BitVector":
        bad = set(s) - {"0", "1"}
        if bad:
            raise UsageError(f"invalid characters in bit string: {sorted(bad)!r}")
        bits = 0
        for i, ch in enumerate(s):
            if ch == "1":
                bits |= 1 << i
        return cls(len(s), bits)


# The decoder treats outcome vectors as plain bit vectors over the rows.
OutcomeVector = BitVector


def covers(a: BitVector, b: BitVector) -> bool:
    """True iff every 1 of ``b`` is a 1 of ``a``.  Lengths must agree."""
    if a.n != b.n:
        raise UsageError(f"length mismatch: {a.n} vs {b.n}")
    return (b.bits & ~a.bits) == 0


class BinaryMatrix:
    """Immutable column-major binary matrix."""

    __slots__ = ("n", "columns")

    def __init__(self, n: int, columns: Iterable[int]):
        if n < 1:
            raise UsageError("matrix must have at least one row")
        cols = tuple(int(c) for c in columns)
        limit = 1 << n
        for j, c in enumerate(cols):
            if c < 0 or c >= limit:
                raise UsageError(f"column {j} is not an {n}-bit value")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "columns", cols)

    def __setattr__(self, *_):
        raise AttributeError("BinaryMatrix is immutable")

    @property
    def num_columns(self) -> int:
        return len(self.columns)

    def column(self, j: int) -> int:
        return self.columns[j]

    def column_vector(self, j: int) -> BitVector:
        return BitVector(self.n, self.columns[j])

    def column_set(self, indices: Iterable[int]) -> ColumnSet:
        """Normalize ``indices`` to a sorted tuple of distinct valid columns."""
        idx = tuple(sorted(int(i) for i in indices))
        if len(set(idx)) != len(idx):
            raise UsageError("column indices must be distinct")
        for i in idx:
            if i < 0 or i >= self.num_columns:
                raise UsageError(f"column index {i} out of range")
        return idx

    def boolean_sum(self, indices: Iterable[int]) -> BitVector:
        """Bitwise OR of the addressed columns; the empty set sums to zero."""
        acc = 0
        for i in self.column_set(indices):
            acc |= self.columns[i]
        return BitVector(self.n, acc)

    def delete_columns(self, indices: Iterable[int]) -> "BinaryMatrix":
        drop = set(self.column_set(indices))
        return BinaryMatrix(
            self.n, (c for j, c in enumerate(self.columns) if j not in drop)
        )

    def submatrix(self, indices: Iterable[int]) -> "BinaryMatrix":
        keep = self.column_set(indices)
        return BinaryMatrix(self.n, (self.columns[i] for i in keep))

    # -- packing -----------------------------------------------------------

    @property
    def word_count(self) -> int:
        return (self.n + 63) // 64

    def packed(self) -> np.ndarray:
        """Columns as a ``(M, W)`` uint64 array, 64 rows per word."""
        w = self.word_count
        mask = (1 << 64) - 1
        out = np.empty((self.num_columns, w), dtype=np.uint64)
        for j, c in enumerate(self.columns):
            for k in range(w):
                out[j, k] = (c >> (64 * k)) & mask
        return out

    # -- serialization -----------------------------------------------------

    def to_text(self) -> str:
        rows = []
        for i in range(self.n):
            bit = 1 << i
            rows.append("".join("1" if c & bit else "0" for c in self.columns))
        return f"{MAGIC}\n{self.n} {self.num_columns}\n" + "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BinaryMatrix":
        if not text.endswith("\n"):
            raise UsageError("matrix text must end with a newline")
        lines = text.split("\n")
        # split() leaves one empty element after the final newline
        if lines and lines[-1] == "":
            lines = lines[:-1]
        else:  # pragma: no cover - guarded by the endswith check
            raise UsageError("matrix text must end with a newline")
        if len(lines) < 2:
            raise UsageError("matrix text is truncated")
        if lines[0] != MAGIC:
            raise UsageError(f"unrecognized header {lines[0]!r}")
        parts = lines[1].split(" ")
        if len(parts) != 2:
            raise UsageError("dimension line must be 'n M'")
        try:
            n, m = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise UsageError("dimension line must hold two integers") from exc
        if n < 1 or m < 0:
            raise UsageError(f"invalid dimensions n={n} M={m}")
        if len(lines) != 2 + n:
            raise UsageError(f"expected {n} row lines, found {len(lines) - 2}")
        cols = [0] * m
        for i, row in enumerate(lines[2:]):
            if len(row) != m:
                raise UsageError(f"row {i} has {len(row)} characters, expected {m}")
            bit = 1 << i
            for j, ch in enumerate(row):
                if ch == "1":
                    cols[j] |= bit
                elif ch != "0":
                    raise UsageError(f"invalid character {ch!r} in row {i}")
        return cls(n, cols)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinaryMatrix)
            and self.n == other.n
            and self.columns == other.columns
        )

    def __hash__(self):
        return hash((self.n, self.columns))

    def __repr__(self) -> str:
        return f"BinaryMatrix(n={self.n}, M={self.num_columns})"


def write_matrix(m: BinaryMatrix, path) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(m.to_text())


def read_matrix(path) -> BinaryMatrix:
    with open(path, "r", encoding="ascii", newline="") as fh:
        return BinaryMatrix.from_text(fh.read())


def matrix_from_strings(rows: Sequence[str]) -> BinaryMatrix:
    """Build a matrix from row strings, row ``i`` giving bit ``i`` of each column."""
    if not rows:
        raise UsageError("need at least one row")
    m = len(rows[0])
    cols = [0] * m
    for i, row in enumerate(rows):
        if len(row) != m:
            raise UsageError("ragged rows")
        bit = 1 << i
        for j, ch in enumerate(row):
            if ch == "1":
                cols[j] |= bit
            elif ch != "0":
                raise UsageError(f"invalid character {ch!r}")
    return BinaryMatrix(len(rows), cols)


def matrix_from_column_strings(cols: Sequence[str]) -> BinaryMatrix:
    """Build a matrix from per-column bit strings (character ``i`` = row ``i``)."""
    if not cols:
        raise UsageError("need at least one column")
    n = len(cols[0])
    vecs = [BitVector.from01(c) for c in cols]
    if any(v.n != n for v in vecs):
        raise UsageError("ragged columns")
    return BinaryMatrix(n, (v.bits for v in vecs))


def random_matrix(
    n: int, num_columns: int, density: float, rng: np.random.Generator
) -> BinaryMatrix:
    """Independent Bernoulli(density) entries; used by the randomized test suites."""
    if not 0.0 <= density <= 1.0:
        raise UsageError("density must lie in [0, 1]")
    cols = []
    for _ in range(num_columns):
        bits = 0
        draws = rng.random(n)
        for i in range(n):
            if draws[i] < density:
                bits |= 1 << i
        cols.append(bits)
    return BinaryMatrix(n, cols)
