import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings
from hypothesis import strategies as st

from ssmforge import SizeGuardError, UsageError
from ssmforge.generators import (
    PLAIN,
    RNG_NAME,
    TRIPLET,
    FamilySpec,
    column_code,
    draw_binomial,
    enumerate_family,
    expected_sample_size,
    family_size,
    iter_member_columns,
    member_column,
    member_from_rank,
    member_rank,
    sample_family,
    triplet_block_column_words,
    uniform_member,
)

TRIPLET_45 = FamilySpec(TRIPLET, 45)
TRIPLET_SIZE = 15 * 3**13  # 23_914_845


# ------------------------------------------------------------------- specs

def test_family_sizes():
    assert family_size(FamilySpec(PLAIN, 4, 2)) == 4
    assert family_size(FamilySpec(PLAIN, 90, 6)) == 6**15
    assert family_size(TRIPLET_45) == TRIPLET_SIZE == 23_914_845
    assert family_size(FamilySpec(TRIPLET, 90)) == TRIPLET_SIZE**2


def test_spec_validation():
    with pytest.raises(UsageError):
        FamilySpec("mystery", 10, 2)
    with pytest.raises(UsageError):
        FamilySpec(PLAIN, 10, None)
    with pytest.raises(UsageError):
        FamilySpec(PLAIN, 10, 3)  # not a multiple
    with pytest.raises(UsageError):
        FamilySpec(TRIPLET, 46)
    with pytest.raises(UsageError):
        FamilySpec(TRIPLET, 45, b=9)  # block size is fixed
    assert FamilySpec(TRIPLET, 45).b == 45


def test_plain_enumeration_order():
    m = enumerate_family(FamilySpec(PLAIN, 4, 2))
    assert m.num_columns == 4
    assert [m.column_vector(j).to01() for j in range(4)] == [
        "1010",  # block picks (0, 0)
        "1001",  # (0, 1)
        "0110",  # (1, 0)
        "0101",  # (1, 1)
    ]


def test_plain_rank_roundtrip():
    spec = FamilySpec(PLAIN, 12, 3)
    for r in range(family_size(spec)):
        code = member_from_rank(spec, r)
        assert member_rank(spec, code) == r
        col = member_column(spec, code)
        assert column_code(spec, col) == code


def test_member_weight():
    # plain members pick one row per block; triplet members 3 + 14 rows
    spec = FamilySpec(PLAIN, 20, 5)
    code = member_from_rank(spec, 123)
    assert bin(member_column(spec, code)).count("1") == 4
    code45 = member_from_rank(TRIPLET_45, 12_345_678)
    assert bin(member_column(TRIPLET_45, code45)).count("1") == 17


def test_triplet_rank_zero_column():
    # rank 0: full triplet 0, all labels 0
    code = member_from_rank(TRIPLET_45, 0)
    assert code == ((0, (0,) * 14),)
    col = member_column(TRIPLET_45, code)
    expect = 0b111
    for j in range(1, 15):
        expect |= 1 << (3 * j)
    assert col == expect


def test_triplet_label_parity_enforced():
    bad = ((0, (1,) + (0,) * 13),)  # label sum 1, not divisible by 3
    with pytest.raises(UsageError):
        member_rank(TRIPLET_45, bad)
    with pytest.raises(UsageError):
        member_column(TRIPLET_45, bad)


def test_triplet_rank_roundtrip_sample():
    rng = np.random.default_rng(11)
    for r in rng.integers(0, TRIPLET_SIZE, size=400):
        code = member_from_rank(TRIPLET_45, int(r))
        assert member_rank(TRIPLET_45, code) == int(r)
        assert column_code(TRIPLET_45, member_column(TRIPLET_45, code)) == code


def test_column_code_rejects_non_members():
    with pytest.raises(UsageError):
        column_code(TRIPLET_45, 0b111)  # labels missing
    with pytest.raises(UsageError):
        column_code(FamilySpec(PLAIN, 4, 2), 0b0011)  # two picks in a block


def test_exhaustive_triplet_block():
    """Every one of the 23,914,845 single-block members, streamed: the count
    matches, every column has weight 17, the ends agree with the rank codec,
    and all columns are distinct."""
    arr = np.empty(TRIPLET_SIZE, dtype=np.uint64)
    chunk = 1 << 20
    for start in range(0, TRIPLET_SIZE, chunk):
        ranks = np.arange(start, min(start + chunk, TRIPLET_SIZE), dtype=np.int64)
        words = triplet_block_column_words(ranks)
        assert np.all(np.bitwise_count(words) == 17)
        arr[start : start + len(words)] = words
    assert int(arr[0]) == member_column(TRIPLET_45, member_from_rank(TRIPLET_45, 0))
    assert int(arr[-1]) == member_column(
        TRIPLET_45, member_from_rank(TRIPLET_45, TRIPLET_SIZE - 1)
    )
    arr.sort()
    assert not np.any(arr[1:] == arr[:-1])


def test_iter_matches_vectorized_prefix():
    it = iter_member_columns(TRIPLET_45)
    head = [next(it) for _ in range(3000)]
    words = triplet_block_column_words(np.arange(3000, dtype=np.int64))
    assert head == [int(w) for w in words]


def test_pairwise_union_distinctness():
    """a|b != a|c for distinct members: 1e5 random triples, zero collisions."""
    rng = np.random.default_rng(42)
    ranks = rng.integers(0, TRIPLET_SIZE, size=(100_000, 3), dtype=np.int64)
    distinct = (
        (ranks[:, 0] != ranks[:, 1])
        & (ranks[:, 0] != ranks[:, 2])
        & (ranks[:, 1] != ranks[:, 2])
    )
    ranks = ranks[distinct]
    assert len(ranks) > 99_900
    cols = triplet_block_column_words(ranks.ravel()).reshape(-1, 3)
    a, b, c = cols[:, 0], cols[:, 1], cols[:, 2]
    assert not np.any((a | b) == (a | c))


# -------------------------------------------------------------------- sampling

def test_uniform_member_distribution():
    rng = np.random.default_rng(7)
    n_draws = 20_000
    fulls = np.zeros(15, dtype=int)
    first_label = np.zeros(3, dtype=int)
    for _ in range(n_draws):
        (entry,) = uniform_member(TRIPLET_45, rng)
        full, labels = entry
        fulls[full] += 1
        first_label[labels[0]] += 1
        assert sum(labels) % 3 == 0
    # 3-sigma windows around the uniform expectation
    assert np.all(np.abs(fulls - n_draws / 15) < 107)
    assert np.all(np.abs(first_label - n_draws / 3) < 201)


def test_draw_binomial_edges_and_determinism():
    rng = np.random.default_rng(0)
    assert draw_binomial(100, 0.0, rng) == 0
    assert draw_binomial(0, 0.5, rng) == 0
    assert draw_binomial(7, 1.0, rng) == 7
    with pytest.raises(UsageError):
        draw_binomial(10, 1.5, rng)
    with pytest.raises(UsageError):
        draw_binomial(-1, 0.5, rng)
    a = draw_binomial(10**6, 1e-4, np.random.Generator(np.random.PCG64(5)))
    b = draw_binomial(10**6, 1e-4, np.random.Generator(np.random.PCG64(5)))
    assert a == b


def test_draw_binomial_mean():
    q = 4.487e-5
    expected = float(expected_sample_size(TRIPLET_45, q))
    draws = [
        draw_binomial(TRIPLET_SIZE, q, np.random.Generator(np.random.PCG64(s)))
        for s in range(200)
    ]
    mean = float(np.mean(draws))
    sd = float(np.std(draws, ddof=1))
    assert abs(mean - expected) < 3 * sd / 200**0.5
    assert 24 < sd < 42  # Binomial sd is ~32.8 here


def test_expected_sample_size_exact():
    assert expected_sample_size(TRIPLET_45, 0.5) == Fraction(TRIPLET_SIZE, 2)
    spec = FamilySpec(PLAIN, 90, 6)
    assert expected_sample_size(spec, 0.25) == Fraction(6**15, 4)


def test_sample_family_determinism_and_shape():
    q = 0.02
    spec = FamilySpec(PLAIN, 30, 5)
    a = sample_family(spec, q, seed=3)
    b = sample_family(spec, q, seed=3)
    assert a.to_text() == b.to_text()
    c = sample_family(spec, q, seed=4)
    assert c != a  # different seed, different draw (can only fail by collision)
    # columns are distinct members in rank order
    ranks = [member_rank(spec, column_code(spec, a.column(j))) for j in range(a.num_columns)]
    assert ranks == sorted(set(ranks))


def test_sample_family_q_one_is_full_enumeration():
    spec = FamilySpec(PLAIN, 6, 3)
    assert sample_family(spec, 1.0, seed=0) == enumerate_family(spec)


def test_enumerate_family_size_guard():
    with pytest.raises(SizeGuardError):
        enumerate_family(TRIPLET_45)  # 23.9M members over the 1M default limit
    with pytest.raises(SizeGuardError):
        enumerate_family(FamilySpec(PLAIN, 77, 7), limit=10**9)  # 7^11 members


def test_rng_name_token():
    assert RNG_NAME == "numpy-pcg64"


@settings(max_examples=40)
@given(st.integers(2, 6), st.integers(1, 4), st.integers(0, 10**6))
def test_plain_rank_roundtrip_property(b, blocks, r):
    spec = FamilySpec(PLAIN, b * blocks, b)
    size = family_size(spec)
    rank = r % size
    code = member_from_rank(spec, rank)
    assert member_rank(spec, code) == rank
    assert column_code(spec, member_column(spec, code)) == code
