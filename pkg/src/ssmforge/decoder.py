"""Pooled-test outcome simulation and defective-set identification.

An outcome vector is the boolean sum (OR) of the defective columns.  On a
strongly t-separable matrix the defective set is recovered in polynomial time
by a cover-and-filter rule; on a disjunct matrix plain cover filtering
suffices.
"""

from __future__ import annotations

from typing import Iterable

from .bitmatrix import BinaryMatrix, BitVector, OutcomeVector
from .errors import InconsistentOutcomeError, UsageError

INCONSISTENT_MSG = "outcome inconsistent with a size-t defective set on this matrix"


def _check_ids(m: BinaryMatrix, defectives: Iterable[int]) -> list[int]:
    ids = list(defectives)
    if len(set(ids)) != len(ids):
        raise UsageError("duplicate defective column index")
    for i in ids:
        if not 0 <= i < m.num_columns:
            raise UsageError(f"column index {i} out of range")
    return ids


def simulate_outcome(m: BinaryMatrix, defectives: Iterable[int]) -> OutcomeVector:
    """OR together the given columns; empty set gives the all-negative outcome."""
    return m.boolean_sum(_check_ids(m, defectives))


def _covered_columns(m: BinaryMatrix, y: BitVector) -> list[int]:
    return [c for c in range(m.num_columns) if m.column(c) & ~y.bits == 0]


def decode_ssm(m: BinaryMatrix, y: OutcomeVector, t: int) -> tuple[int, ...]:
    """Identify the size-``t`` defective set behind outcome ``y``.

    Let S be the columns covered by ``y``.  A column c in S is essential when
    the remaining candidates no longer explain the outcome, i.e. S minus c is
    empty or its boolean sum differs from ``y``.  On a strongly t-separable
    matrix the essential columns are exactly the defectives.  Raises
    :class:`InconsistentOutcomeError` when no size-``t`` set explains ``y``.
    """
    if t < 1:
        raise UsageError("t must be at least 1")
    if y.n != m.n:
        raise UsageError("outcome length does not match matrix rows")
    s = _covered_columns(m, y)
    if m.boolean_sum(s).bits != y.bits:
        raise InconsistentOutcomeError(INCONSISTENT_MSG)
    result = []
    for c in s:
        rest = [d for d in s if d != c]
        if not rest:
            result.append(c)
            continue
        u = 0
        for d in rest:
            u |= m.column(d)
        if u != y.bits:
            result.append(c)
    if len(result) != t:
        raise InconsistentOutcomeError(INCONSISTENT_MSG)
    return tuple(result)


def decode_disjunct(m: BinaryMatrix, y: OutcomeVector, t: int) -> tuple[int, ...]:
    """Cover-filter decoding: all columns covered by the outcome.

    Correct whenever the matrix is t-disjunct and at most ``t`` columns are
    defective; no consistency checking is performed here.
    """
    if t < 1:
        raise UsageError("t must be at least 1")
    if y.n != m.n:
        raise UsageError("outcome length does not match matrix rows")
    return tuple(_covered_columns(m, y))
