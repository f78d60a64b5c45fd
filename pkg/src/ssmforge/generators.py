"""Structured column families and deterministic sampling.

Two family variants over a ground set of ``n`` rows:

``plain-block``
    Rows are split into ``n/b`` blocks of ``b``; a member picks exactly one row
    per block.  Member code: the chosen offset in each block.

``triplet-parity``
    Rows are split into blocks of 45 = 15 triplets (triplet ``j`` of a block is
    rows ``3j, 3j+1, 3j+2``; the offset within a triplet is its *label*).  A
    member takes one full triplet and one labelled row from each of the other
    14 triplets, with the 14 labels summing to 0 mod 3 — so a member has
    exactly 17 rows per block and each block offers ``15 * 3**13`` choices.
    Member code per block: ``(full_triplet, labels)`` with the 14 labels in
    ascending triplet order.

Members are ordered lexicographically by code (block-major; within a
triplet-parity block the full-triplet index is major and the label tuple
minor) and addressed by *rank* in that order.

Randomness is pinned to ``numpy.random.Generator(numpy.random.PCG64(seed))``
with a fixed draw pattern, so equal seeds reproduce byte-identical families.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

import mpmath
import numpy as np

from .bitmatrix import BinaryMatrix
from .errors import SizeGuardError, UsageError

PLAIN = "plain-block"
TRIPLET = "triplet-parity"
VARIANTS = (PLAIN, TRIPLET)

RNG_NAME = "numpy-pcg64"

_TRIPLETS_PER_BLOCK = 15
_FREE_LABELS = 13
_M13 = 3**_FREE_LABELS
_BLOCK_MEMBERS = _TRIPLETS_PER_BLOCK * _M13  # 23_914_845
_BLOCK_ROWS = 45

PlainBlockCode = int
TripletBlockCode = tuple[int, tuple[int, ...]]
MemberCode = tuple  # one per-block entry per block


@dataclass(frozen=True)
class FamilySpec:
    """Which structured family to draw from."""

    variant: str
    n: int
    b: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise UsageError(f"unknown family variant {self.variant!r}")
        if self.variant == TRIPLET:
            if self.b not in (None, _BLOCK_ROWS):
                raise UsageError("triplet-parity fixes the block size at 45")
            object.__setattr__(self, "b", _BLOCK_ROWS)
        else:
            if self.b is None:
                raise UsageError("plain-block needs a block size b")
            if self.b < 1:
                raise UsageError("block size must be positive")
        if self.n < self.b or self.n % self.b != 0:
            raise UsageError(
                f"n={self.n} must be a positive multiple of the block size {self.b}"
            )

    @property
    def block_count(self) -> int:
        return self.n // self.b

    @property
    def members_per_block(self) -> int:
        return self.b if self.variant == PLAIN else _BLOCK_MEMBERS


def family_size(spec: FamilySpec) -> int:
    """Exact number of members (arbitrary precision)."""
    return spec.members_per_block ** spec.block_count


# ---------------------------------------------------------------------------
# member codes <-> ranks <-> columns
# ---------------------------------------------------------------------------


def _validate_block_code(spec: FamilySpec, entry) -> None:
    if spec.variant == PLAIN:
        if not isinstance(entry, int) or not 0 <= entry < spec.b:
            raise UsageError(f"plain-block code entry {entry!r} out of range")
        return
    try:
        full, labels = entry
    except (TypeError, ValueError) as exc:
        raise UsageError(f"malformed triplet-parity code entry {entry!r}") from exc
    if not 0 <= full < _TRIPLETS_PER_BLOCK:
        raise UsageError(f"full-triplet index {full} out of range")
    if len(labels) != _TRIPLETS_PER_BLOCK - 1:
        raise UsageError("triplet-parity entry needs 14 labels")
    if any(l not in (0, 1, 2) for l in labels):
        raise UsageError("labels must be 0, 1, or 2")
    if sum(labels) % 3 != 0:
        raise UsageError("label sum must be divisible by 3")


def validate_member(spec: FamilySpec, code: MemberCode) -> None:
    if len(code) != spec.block_count:
        raise UsageError(
            f"member code has {len(code)} block entries, expected {spec.block_count}"
        )
    for entry in code:
        _validate_block_code(spec, entry)


def _block_rank(spec: FamilySpec, entry) -> int:
    if spec.variant == PLAIN:
        return entry
    full, labels = entry
    digits = 0
    for j in range(_FREE_LABELS):  # the 14th label is forced by parity
        digits = digits * 3 + labels[j]
    return full * _M13 + digits


def _block_from_rank(spec: FamilySpec, r: int):
    if spec.variant == PLAIN:
        return r
    full, digits = divmod(r, _M13)
    labels = [0] * (_TRIPLETS_PER_BLOCK - 1)
    for j in range(_FREE_LABELS - 1, -1, -1):
        digits, labels[j] = divmod(digits, 3)
    labels[_FREE_LABELS] = (-sum(labels)) % 3
    return (full, tuple(labels))


def member_rank(spec: FamilySpec, code: MemberCode) -> int:
    """Position of ``code`` in lexicographic member order."""
    validate_member(spec, code)
    base = spec.members_per_block
    r = 0
    for entry in code:
        r = r * base + _block_rank(spec, entry)
    return r


def member_from_rank(spec: FamilySpec, rank: int) -> MemberCode:
    if not 0 <= rank < family_size(spec):
        raise UsageError(f"rank {rank} out of range")
    base = spec.members_per_block
    entries = []
    for _ in range(spec.block_count):
        rank, br = divmod(rank, base)
        entries.append(_block_from_rank(spec, br))
    return tuple(reversed(entries))


def member_column(spec: FamilySpec, code: MemberCode) -> int:
    """Incidence column (bit ``i`` = row ``i``) of a member."""
    validate_member(spec, code)
    bits = 0
    for block, entry in enumerate(code):
        base = block * spec.b
        if spec.variant == PLAIN:
            bits |= 1 << (base + entry)
            continue
        full, labels = entry
        bits |= 0b111 << (base + 3 * full)
        for j, label in enumerate(labels):
            triplet = j if j < full else j + 1
            bits |= 1 << (base + 3 * triplet + label)
    return bits


def column_code(spec: FamilySpec, column: int) -> MemberCode:
    """Invert :func:`member_column`; rejects columns outside the family."""
    entries = []
    block_mask = (1 << spec.b) - 1
    for block in range(spec.block_count):
        chunk = (column >> (block * spec.b)) & block_mask
        if spec.variant == PLAIN:
            if chunk.bit_count() != 1:
                raise UsageError(f"block {block} does not pick exactly one row")
            entries.append(chunk.bit_length() - 1)
            continue
        full = None
        labels = {}
        for triplet in range(_TRIPLETS_PER_BLOCK):
            part = (chunk >> (3 * triplet)) & 0b111
            if part == 0b111:
                if full is not None:
                    raise UsageError(f"block {block} has two full triplets")
                full = triplet
            elif part.bit_count() == 1:
                labels[triplet] = part.bit_length() - 1
            else:
                raise UsageError(f"block {block}, triplet {triplet}: bad pattern")
        if full is None or len(labels) != _TRIPLETS_PER_BLOCK - 1:
            raise UsageError(f"block {block} is not a family member pattern")
        ordered = tuple(labels[t] for t in sorted(labels))
        entry = (full, ordered)
        _validate_block_code(spec, entry)
        entries.append(entry)
    if column >> (spec.block_count * spec.b):
        raise UsageError("column has bits beyond the ground set")
    return tuple(entries)


def triplet_block_column_words(ranks: np.ndarray) -> np.ndarray:
    """Vectorized single-block column bits (45-bit values in uint64) for an
    array of triplet-parity block ranks."""
    r = np.asarray(ranks, dtype=np.int64)
    full = r // _M13
    digits = r % _M13
    cols = np.left_shift(np.uint64(0b111), (3 * full).astype(np.uint64))
    label_sum = np.zeros_like(r)
    power = _M13 // 3
    for j in range(_FREE_LABELS):
        d = (digits // power) % 3
        power //= 3
        label_sum += d
        triplet = np.where(j < full, j, j + 1)
        cols |= np.left_shift(np.uint64(1), (3 * triplet + d).astype(np.uint64))
    d_last = (-label_sum) % 3
    triplet = np.where(_FREE_LABELS < full, _FREE_LABELS, _FREE_LABELS + 1)
    cols |= np.left_shift(np.uint64(1), (3 * triplet + d_last).astype(np.uint64))
    return cols


# ---------------------------------------------------------------------------
# enumeration and sampling
# ---------------------------------------------------------------------------


def iter_member_columns(spec: FamilySpec) -> Iterator[int]:
    """Stream all member columns in rank order without materializing them."""
    size = family_size(spec)
    if spec.variant == TRIPLET and spec.block_count == 1:
        chunk = 1 << 18
        for start in range(0, size, chunk):
            ranks = np.arange(start, min(start + chunk, size), dtype=np.int64)
            for word in triplet_block_column_words(ranks):
                yield int(word)
        return
    for rank in range(size):
        yield member_column(spec, member_from_rank(spec, rank))


def enumerate_family(spec: FamilySpec, limit: int = 1_000_000) -> BinaryMatrix:
    """All members as columns, in rank order.  Refuses oversized families."""
    size = family_size(spec)
    if size > limit:
        raise SizeGuardError(
            f"family has {size} members, above the enumeration limit {limit}"
        )
    return BinaryMatrix(spec.n, iter_member_columns(spec))


def _rng_from(seed_or_rng: Union[int, np.random.Generator]) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.Generator(np.random.PCG64(int(seed_or_rng)))


def uniform_member(
    spec: FamilySpec, seed: Union[int, np.random.Generator]
) -> MemberCode:
    """One member drawn uniformly.  For triplet-parity blocks the 13 free
    labels are drawn and the 14th is the mod-3 complement."""
    rng = _rng_from(seed)
    if spec.variant == PLAIN:
        picks = rng.integers(0, spec.b, size=spec.block_count)
        return tuple(int(x) for x in picks)
    entries = []
    for _ in range(spec.block_count):
        full = int(rng.integers(_TRIPLETS_PER_BLOCK))
        free = rng.integers(0, 3, size=_FREE_LABELS)
        labels = tuple(int(x) for x in free) + (int(-free.sum() % 3),)
        entries.append((full, labels))
    return tuple(entries)


def draw_binomial(total: int, q: float, rng: np.random.Generator) -> int:
    """Exact Binomial(total, q) draw by inverse-CDF walk on one uniform.

    Works for arbitrary-precision ``total``; intended for small means (the
    expected value here is a column count, kept modest by size guards).
    """
    if not 0.0 <= q <= 1.0:
        raise UsageError("q must lie in [0, 1]")
    if total < 0:
        raise UsageError("total must be nonnegative")
    if q == 0.0 or total == 0:
        return 0
    if q == 1.0:
        return total
    u = rng.random()
    mean = total * q
    sd = (mean * (1.0 - q)) ** 0.5
    cap = min(total, int(mean + 12.0 * sd) + 64)
    with mpmath.workdps(50):
        mq = mpmath.mpf(q)
        log_pmf0 = total * mpmath.log1p(-mq)
        pmf = mpmath.e**log_pmf0
        cdf = pmf
        ratio = mq / (1 - mq)
        k = 0
        while cdf <= u and k < cap:
            pmf = pmf * ratio * (total - k) / (k + 1)
            cdf += pmf
            k += 1
    return k


def sample_family(spec: FamilySpec, q: float, seed: int) -> BinaryMatrix:
    """Keep each member independently with probability ``q``.

    Implemented as an exact Binomial draw of the member count followed by
    uniform rejection sampling of distinct member codes; columns come out in
    rank order and are byte-identical across runs for equal seeds.
    """
    rng = _rng_from(seed)
    size = family_size(spec)
    count = draw_binomial(size, q, rng)
    if count == size:
        ranks: Sequence[int] = range(size)
    else:
        seen: set[int] = set()
        while len(seen) < count:
            seen.add(member_rank(spec, uniform_member(spec, rng)))
        ranks = sorted(seen)
    cols = (member_column(spec, member_from_rank(spec, r)) for r in ranks)
    return BinaryMatrix(spec.n, cols)


def expected_sample_size(spec: FamilySpec, q: float) -> Fraction:
    """Exact expected member count ``|family| * q``."""
    return family_size(spec) * Fraction(q)
