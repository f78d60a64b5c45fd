"""Exact verifiers for cover-free, separability, thinness, and cancellation
properties of binary matrices.

Every verifier returns a :class:`Verdict`: pass, or fail with a witness that
re-fails when replayed literally against the property definition
(:func:`replay_witness`).  Scanners enumerate candidate column subsets in
lexicographic index order and report the first failure, so verdicts are
deterministic.

The scanners also back the repair loop in :mod:`ssmforge.alteration`: a
violation callback may delete a column (all properties here are preserved
under column deletion, so a scan can continue past a deletion without
revisiting earlier subsets).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Optional

import numpy as np

from .bitmatrix import BinaryMatrix
from .errors import UsageError

# witness callback: return True to keep scanning (after mutating `alive`),
# False to stop the scan at this first failure
OnFail = Callable[[dict], bool]

DISJUNCT = "disjunct"
SEPARABLE = "sep"
BAR_SEPARABLE = "bar-sep"
SSM = "ssm"
SSM_NAIVE = "ssm-naive"
LOCALLY_THIN = "locally-thin"
LOCALLY_2_THIN = "locally-2-thin"
CANCELLATIVE = "cancellative"

NAIVE_COLUMN_LIMIT = 15


@dataclass
class Verdict:
    property_name: str
    params: dict
    passed: bool
    witness: Optional[dict]
    subsets_checked: int = 0
    elapsed_ms: int = 0

    def to_json_dict(self, include_timing: bool = True) -> dict:
        out = {
            "property": self.property_name,
            "params": dict(self.params),
            "pass": self.passed,
            "witness": self.witness,
        }
        if include_timing:
            out["elapsed_ms"] = self.elapsed_ms
        out["subsets_checked"] = self.subsets_checked
        return out


class _Packed:
    """Column bits as an (M, W) uint64 array plus the raw integer columns."""

    def __init__(self, m: BinaryMatrix):
        self.n = m.n
        self.M = m.num_columns
        self.W = m.word_count
        self.words = m.packed()
        self.cols = m.columns


def _or_rows(words: np.ndarray, ids) -> np.ndarray:
    return np.bitwise_or.reduce(words[list(ids)], axis=0)


def _covered_mask(words: np.ndarray, u: np.ndarray, alive: np.ndarray) -> np.ndarray:
    cov = ((words & ~u) == 0).all(axis=1)
    cov &= alive
    return cov


# ---------------------------------------------------------------------------
# disjunct
# ---------------------------------------------------------------------------


def _scan_disjunct(pk: _Packed, t: int, alive: np.ndarray, on_fail: OnFail) -> int:
    checked = 0
    stop = False
    words = pk.words

    def rec(start: int, chosen: list, u: np.ndarray) -> None:
        nonlocal checked, stop
        if stop:
            return
        if chosen and not all(alive[c] for c in chosen):
            return
        if len(chosen) == t:
            checked += 1
            while not stop:
                cov = _covered_mask(words, u, alive)
                cov[chosen] = False
                extras = np.nonzero(cov)[0]
                if extras.size == 0:
                    return
                witness = {"columns": list(chosen), "covered_column": int(extras[0])}
                if not on_fail(witness):
                    stop = True
            return
        for x in range(start, pk.M):
            if stop:
                return
            if not alive[x]:
                continue
            rec(x + 1, chosen + [x], u | words[x])
            if chosen and not all(alive[c] for c in chosen):
                return

    rec(0, [], np.zeros(pk.W, dtype=np.uint64))
    return checked


# ---------------------------------------------------------------------------
# separability (boolean sums injective over fixed-size / bounded-size subsets)
# ---------------------------------------------------------------------------


def _scan_union_injective(
    cols: tuple, sizes: Iterable[int], alive_ids: list, on_fail: OnFail
) -> int:
    checked = 0
    seen: dict[int, tuple] = {}
    for size in sizes:
        for combo in combinations(alive_ids, size):
            u = 0
            for i in combo:
                u |= cols[i]
            checked += 1
            prev = seen.get(u)
            if prev is None:
                seen[u] = combo
                continue
            if not on_fail({"first": list(prev), "second": list(combo)}):
                return checked
    return checked


# ---------------------------------------------------------------------------
# strong separability
# ---------------------------------------------------------------------------


def _scan_ssm(pk: _Packed, t: int, alive: np.ndarray, on_fail: OnFail) -> int:
    checked = 0
    stop = False
    words = pk.words
    M = pk.M
    W = pk.W

    def slow_check(f0: list) -> Optional[dict]:
        # exact evaluation against the live matrix (used when extra columns
        # besides f0 are covered by the union)
        u = _or_rows(words, f0)
        ids = np.nonzero(_covered_mask(words, u, alive))[0]
        id_list = [int(x) for x in ids]
        for c in f0:
            s_ids = [d for d in id_list if d != c]
            if s_ids and np.array_equal(_or_rows(words, s_ids), u):
                return {"f0": list(f0), "excluded_column": c, "candidate_columns": s_ids}
        return None

    if t == 1:
        for i in range(M):
            if stop:
                break
            if not alive[i]:
                continue
            checked += 1
            while not stop and alive[i]:
                witness = slow_check([i])
                if witness is None:
                    break
                if not on_fail(witness):
                    stop = True
        return checked

    def tail_process(prefix: list, u_pre: np.ndarray) -> None:
        nonlocal checked, stop
        tail = [x for x in range(prefix[-1] + 1, M) if alive[x]]
        if not tail:
            return
        tail_arr = np.array(tail, dtype=np.int64)
        L = len(tail)
        checked += L
        tw = words[tail_arr]  # (L, W)
        # residual bits of every column not explained by the prefix union
        E = words & ~u_pre  # (M, W)

        # how many live columns are covered by each tail union (chunked)
        ncov = np.empty(L, dtype=np.int64)
        step = max(1, (1 << 22) // max(M, 1))
        for lo in range(0, L, step):
            hi = min(L, lo + step)
            covered = np.ones((hi - lo, M), dtype=bool)
            for w in range(W):
                covered &= (E[:, w][None, :] & ~tw[lo:hi, w][:, None]) == 0
            covered &= alive[None, :]
            ncov[lo:hi] = covered.sum(axis=1)

        # no-extra fast checks: union of f0 minus one member still equals u
        bad_c = np.zeros((t, L), dtype=bool)
        for a_pos, c in enumerate(prefix):
            others = prefix[:a_pos] + prefix[a_pos + 1 :]
            u_others = _or_rows(words, others) if others else np.zeros(W, np.uint64)
            res = words[c] & ~u_others
            flag = np.ones(L, dtype=bool)
            for w in range(W):
                flag &= (res[w] & ~tw[:, w]) == 0
            bad_c[a_pos] = flag
        flag_k = np.ones(L, dtype=bool)
        for w in range(W):
            flag_k &= E[tail_arr, w] == 0
        bad_c[t - 1] = flag_k

        flagged = np.nonzero(bad_c.any(axis=0) | (ncov > t))[0]
        for l in flagged:
            if stop:
                return
            x = tail[int(l)]
            if not alive[x]:
                continue
            if not all(alive[c] for c in prefix):
                return
            f0 = prefix + [x]
            if ncov[l] > t:
                witness = slow_check(f0)
                if witness is None:
                    continue
            else:
                a_pos = int(np.nonzero(bad_c[:, l])[0][0])
                c = f0[a_pos]
                witness = {
                    "f0": f0,
                    "excluded_column": c,
                    "candidate_columns": [d for d in f0 if d != c],
                }
            if not on_fail(witness):
                stop = True
                return
            if not all(alive[c] for c in prefix):
                return

    def rec(start: int, chosen: list, u_pre: np.ndarray) -> None:
        if stop:
            return
        if len(chosen) == t - 1:
            tail_process(chosen, u_pre)
            return
        for x in range(start, M):
            if stop:
                return
            if not alive[x]:
                continue
            rec(x + 1, chosen + [x], u_pre | words[x])
            if chosen and not all(alive[c] for c in chosen):
                return

    rec(0, [], np.zeros(W, dtype=np.uint64))
    return checked


def _scan_ssm_naive(cols: tuple, t: int, on_fail: OnFail) -> int:
    """Literal evaluation over all nonempty column subsets (M <= 15)."""
    M = len(cols)
    total = 1 << M
    union_of = [0] * total
    full = total - 1
    attain: dict[int, int] = {}
    for s in range(1, total):
        low = s & -s
        union_of[s] = union_of[s ^ low] | cols[low.bit_length() - 1]
        u = union_of[s]
        attain[u] = attain.get(u, full) & s
    checked = 0
    for f0 in combinations(range(M), t):
        checked += 1
        mask = 0
        for i in f0:
            mask |= 1 << i
        inter = attain[union_of[mask]]
        if inter != mask:
            members = [i for i in range(M) if (inter >> i) & 1]
            if not on_fail({"f0": list(f0), "intersection": members}):
                return checked
    return checked


# ---------------------------------------------------------------------------
# locally thin families
# ---------------------------------------------------------------------------


def _multiplicities(cols: tuple, n: int, kset: Iterable[int]) -> list[int]:
    counts = [0] * n
    for j in kset:
        c = cols[j]
        while c:
            low = c & -c
            counts[low.bit_length() - 1] += 1
            c ^= low
    return counts


def _scan_k_subsets_thin(
    pk: _Packed,
    k: int,
    b_points: int,
    two_thin: bool,
    alive: np.ndarray,
    on_fail: OnFail,
) -> int:
    """Shared scan for `some/many rows of multiplicity 1` (b_points) and
    `some row of multiplicity 1 or 2` (two_thin).

    Recursion keeps per-row binary counters of the prefix multiplicities (as
    per-word integers); the last two levels are evaluated in one broadcast per
    prefix: with the prefix rows split into count-0/1/2 masks A/B/C, a pair
    (x, y) has a multiplicity-1 row iff (B & ~x & ~y) | (A & (x ^ y)) is
    nonzero, and a multiplicity-2 row iff (C & ~x & ~y) | (B & (x ^ y)) |
    (A & x & y) is nonzero.
    """
    checked = 0
    stop = False
    M = pk.M
    W = pk.W
    planes_count = max(2, k.bit_length())  # binary counters big enough for k
    mask64 = (1 << 64) - 1
    col_words = [
        [(c >> (64 * w)) & mask64 for w in range(W)] for c in pk.cols
    ]
    words = pk.words

    def tail_pairs(prefix: list, counters: list) -> None:
        nonlocal checked, stop
        start = prefix[-1] + 1 if prefix else 0
        if M - start < 2:
            return
        alive_tail = alive[start:]
        n_alive = int(alive_tail.sum())
        checked += n_alive * (n_alive - 1) // 2
        if n_alive < 2:
            return
        good_bits = None
        ones_count = None
        for w in range(W):
            union_count = 0
            for p in range(planes_count):
                union_count |= counters[p][w]
            a_mask = np.uint64(~union_count & mask64)
            b_mask = np.uint64(
                counters[0][w] & ~_or_above(counters, 1, w) & mask64
            )
            col = words[start:, w]
            x = col[:, None]
            y = col[None, :]
            e1 = (b_mask & ~x & ~y) | (a_mask & (x ^ y))
            if two_thin:
                c_mask = np.uint64(
                    counters[1][w]
                    & ~counters[0][w]
                    & ~_or_above(counters, 2, w)
                    & mask64
                )
                e2 = (c_mask & ~x & ~y) | (b_mask & (x ^ y)) | (a_mask & x & y)
                ok = e1 | e2
                good_bits = ok if good_bits is None else good_bits | ok
            elif b_points == 1:
                good_bits = e1 if good_bits is None else good_bits | e1
            else:
                cnt = np.bitwise_count(e1)
                ones_count = cnt if ones_count is None else ones_count + cnt
        if two_thin or b_points == 1:
            bad = good_bits == 0
        else:
            bad = ones_count < b_points
        bad &= alive_tail[:, None]
        bad &= alive_tail[None, :]
        bad = np.triu(bad, 1)
        for i, j in zip(*np.nonzero(bad)):
            if stop:
                return
            x_id = start + int(i)
            y_id = start + int(j)
            if not (alive[x_id] and alive[y_id]):
                continue
            if not all(alive[c] for c in prefix):
                return
            kset = prefix + [x_id, y_id]
            witness = {"columns": kset}
            if not two_thin:
                witness["multiplicities"] = _multiplicities(pk.cols, pk.n, kset)
            if not on_fail(witness):
                stop = True
                return

    def rec(start: int, prefix: list, counters: list) -> None:
        if stop:
            return
        if len(prefix) == k - 2:
            tail_pairs(prefix, counters)
            return
        for x in range(start, M):
            if stop:
                return
            if not alive[x]:
                continue
            carry = col_words[x]
            new_counters = []
            for p in range(planes_count):
                cur = counters[p]
                new_counters.append([cur[w] ^ carry[w] for w in range(W)])
                carry = [cur[w] & carry[w] for w in range(W)]
            rec(x + 1, prefix + [x], new_counters)
            if prefix and not all(alive[c] for c in prefix):
                return

    rec(0, [], [[0] * W for _ in range(planes_count)])
    return checked


def _or_above(counters: list, lowest_plane: int, w: int) -> int:
    out = 0
    for p in range(lowest_plane, len(counters)):
        out |= counters[p][w]
    return out


# ---------------------------------------------------------------------------
# cancellative families
# ---------------------------------------------------------------------------


def _scan_cancellative(cols: tuple, t: int, alive: np.ndarray, on_fail: OnFail) -> int:
    checked = 0
    stop = False
    M = len(cols)

    def rec(start: int, chosen: list, u: int) -> None:
        nonlocal checked, stop
        if stop:
            return
        if chosen and not all(alive[c] for c in chosen):
            return
        if len(chosen) == t:
            checked += 1
            chosen_set = set(chosen)
            while not stop and all(alive[c] for c in chosen):
                first: dict[int, int] = {}
                best = None
                for d in range(M):
                    if not alive[d] or d in chosen_set:
                        continue
                    v = u | cols[d]
                    prev = first.get(v)
                    if prev is None:
                        first[v] = d
                    else:
                        cand = (prev, d)
                        if best is None or cand < best:
                            best = cand
                if best is None:
                    return
                witness = {"base": list(chosen), "first": best[0], "second": best[1]}
                if not on_fail(witness):
                    stop = True
            return
        for x in range(start, M):
            if stop:
                return
            if not alive[x]:
                continue
            rec(x + 1, chosen + [x], u | cols[x])
            if chosen and not all(alive[c] for c in chosen):
                return

    rec(0, [], 0)
    return checked


# ---------------------------------------------------------------------------
# public verifiers
# ---------------------------------------------------------------------------


def _verify(property_name, params, runner) -> Verdict:
    start = time.perf_counter()
    holder: dict = {}

    def on_fail(witness: dict) -> bool:
        holder["witness"] = witness
        return False

    checked = runner(on_fail)
    return Verdict(
        property_name,
        params,
        "witness" not in holder,
        holder.get("witness"),
        checked,
        int((time.perf_counter() - start) * 1000),
    )


def _require_t(t: int) -> None:
    if t < 1:
        raise UsageError("t must be at least 1")


def is_t_disjunct(m: BinaryMatrix, t: int) -> Verdict:
    """No column is covered by the union of ``t`` others."""
    _require_t(t)
    if m.num_columns <= t:
        raise UsageError(f"disjunct check needs more than t={t} columns")
    pk = _Packed(m)
    alive = np.ones(pk.M, dtype=bool)
    return _verify(
        DISJUNCT, {"t": t}, lambda cb: _scan_disjunct(pk, t, alive, cb)
    )


def is_t_separable(m: BinaryMatrix, t: int) -> Verdict:
    """Boolean sums of size-``t`` column sets are pairwise distinct."""
    _require_t(t)
    if m.num_columns < t:
        raise UsageError(f"separable check needs at least t={t} columns")
    ids = list(range(m.num_columns))
    return _verify(
        SEPARABLE,
        {"t": t},
        lambda cb: _scan_union_injective(m.columns, [t], ids, cb),
    )


def is_bar_t_separable(m: BinaryMatrix, t: int) -> Verdict:
    """Boolean sums of nonempty column sets of size <= ``t`` are distinct."""
    _require_t(t)
    if m.num_columns < t:
        raise UsageError(f"bar-separable check needs at least t={t} columns")
    ids = list(range(m.num_columns))
    return _verify(
        BAR_SEPARABLE,
        {"t": t},
        lambda cb: _scan_union_injective(m.columns, range(1, t + 1), ids, cb),
    )


def is_strongly_t_separable(m: BinaryMatrix, t: int) -> Verdict:
    """Every size-``t`` set is the intersection of all column sets attaining
    its boolean sum (checked by the polynomial-time criterion)."""
    _require_t(t)
    if m.num_columns < t:
        raise UsageError(f"ssm check needs at least t={t} columns")
    pk = _Packed(m)
    alive = np.ones(pk.M, dtype=bool)
    return _verify(SSM, {"t": t}, lambda cb: _scan_ssm(pk, t, alive, cb))


def is_strongly_t_separable_naive(m: BinaryMatrix, t: int) -> Verdict:
    """Reference evaluation over all nonempty column subsets; test oracle."""
    _require_t(t)
    if m.num_columns < t:
        raise UsageError(f"ssm check needs at least t={t} columns")
    if m.num_columns > NAIVE_COLUMN_LIMIT:
        raise UsageError(
            f"naive ssm evaluation is limited to {NAIVE_COLUMN_LIMIT} columns"
        )
    return _verify(
        SSM_NAIVE, {"t": t}, lambda cb: _scan_ssm_naive(m.columns, t, cb)
    )


def is_locally_thin(m: BinaryMatrix, k: int, b_points: int = 1) -> Verdict:
    """Every ``k`` columns leave at least ``b_points`` rows covered exactly once."""
    if k < 2:
        raise UsageError("k must be at least 2")
    if b_points < 1:
        raise UsageError("b_points must be at least 1")
    if m.num_columns < k:
        raise UsageError(f"locally-thin check needs at least k={k} columns")
    pk = _Packed(m)
    alive = np.ones(pk.M, dtype=bool)
    return _verify(
        LOCALLY_THIN,
        {"k": k, "points": b_points},
        lambda cb: _scan_k_subsets_thin(pk, k, b_points, False, alive, cb),
    )


def is_k_locally_2_thin(m: BinaryMatrix, k: int) -> Verdict:
    """Every ``k`` columns leave some row covered exactly once or twice."""
    if k < 2:
        raise UsageError("k must be at least 2")
    if m.num_columns < k:
        raise UsageError(f"locally-2-thin check needs at least k={k} columns")
    pk = _Packed(m)
    alive = np.ones(pk.M, dtype=bool)
    return _verify(
        LOCALLY_2_THIN,
        {"k": k},
        lambda cb: _scan_k_subsets_thin(pk, k, 1, True, alive, cb),
    )


def is_t_cancellative(m: BinaryMatrix, t: int) -> Verdict:
    """Unions of a ``t``-set with one extra column never collide."""
    _require_t(t)
    if m.num_columns < t + 2:
        raise UsageError(f"cancellative check needs at least t+2={t + 2} columns")
    alive = np.ones(m.num_columns, dtype=bool)
    return _verify(
        CANCELLATIVE,
        {"t": t},
        lambda cb: _scan_cancellative(m.columns, t, alive, cb),
    )


def verify_property(m: BinaryMatrix, property_name: str, **params) -> Verdict:
    """Dispatch by property token (the command-line names)."""
    if property_name == DISJUNCT:
        return is_t_disjunct(m, params["t"])
    if property_name == SEPARABLE:
        return is_t_separable(m, params["t"])
    if property_name == BAR_SEPARABLE:
        return is_bar_t_separable(m, params["t"])
    if property_name == SSM:
        return is_strongly_t_separable(m, params["t"])
    if property_name == SSM_NAIVE:
        return is_strongly_t_separable_naive(m, params["t"])
    if property_name == LOCALLY_THIN:
        return is_locally_thin(m, params["k"], params.get("points", 1))
    if property_name == LOCALLY_2_THIN:
        return is_k_locally_2_thin(m, params["k"])
    if property_name == CANCELLATIVE:
        return is_t_cancellative(m, params["t"])
    raise UsageError(f"unknown property {property_name!r}")


# ---------------------------------------------------------------------------
# witness replay
# ---------------------------------------------------------------------------


def replay_witness(m: BinaryMatrix, verdict_or_property, params=None, witness=None) -> bool:
    """Re-evaluate a failure witness literally; True iff it still fails."""
    if isinstance(verdict_or_property, Verdict):
        prop = verdict_or_property.property_name
        params = verdict_or_property.params
        witness = verdict_or_property.witness
    else:
        prop = verdict_or_property
    if witness is None:
        raise UsageError("no witness to replay")
    cols = m.columns
    M = m.num_columns

    def valid_ids(ids):
        return all(isinstance(i, int) and 0 <= i < M for i in ids)

    if prop == DISJUNCT:
        s, c = witness["columns"], witness["covered_column"]
        if not (valid_ids(s) and valid_ids([c])) or c in s or len(set(s)) != params["t"]:
            return False
        u = 0
        for i in s:
            u |= cols[i]
        return (cols[c] & ~u) == 0
    if prop in (SEPARABLE, BAR_SEPARABLE):
        a, b = witness["first"], witness["second"]
        if not (valid_ids(a) and valid_ids(b)) or sorted(a) == sorted(b):
            return False
        if prop == SEPARABLE and (len(a) != params["t"] or len(b) != params["t"]):
            return False
        if prop == BAR_SEPARABLE and not (
            1 <= len(a) <= params["t"] and 1 <= len(b) <= params["t"]
        ):
            return False
        ua = ub = 0
        for i in a:
            ua |= cols[i]
        for i in b:
            ub |= cols[i]
        return ua == ub
    if prop == SSM:
        f0, c, s = witness["f0"], witness["excluded_column"], witness["candidate_columns"]
        if not (valid_ids(f0) and valid_ids(s)) or len(set(f0)) != params["t"]:
            return False
        if c not in f0 or c in s or not s:
            return False
        u = 0
        for i in f0:
            u |= cols[i]
        us = 0
        for i in s:
            us |= cols[i]
        return us == u
    if prop == SSM_NAIVE:
        f0 = witness["f0"]
        if not valid_ids(f0) or len(set(f0)) != params["t"]:
            return False
        u = 0
        mask = 0
        for i in f0:
            u |= cols[i]
            mask |= 1 << i
        inter = (1 << M) - 1
        for smask in range(1, 1 << M):
            su = 0
            s = smask
            while s:
                low = s & -s
                su |= cols[low.bit_length() - 1]
                s ^= low
            if su == u:
                inter &= smask
        return inter != mask
    if prop == LOCALLY_THIN:
        kset = witness["columns"]
        if not valid_ids(kset) or len(set(kset)) != params["k"]:
            return False
        counts = _multiplicities(cols, m.n, kset)
        return sum(1 for c in counts if c == 1) < params.get("points", 1)
    if prop == LOCALLY_2_THIN:
        kset = witness["columns"]
        if not valid_ids(kset) or len(set(kset)) != params["k"]:
            return False
        counts = _multiplicities(cols, m.n, kset)
        return not any(c in (1, 2) for c in counts)
    if prop == CANCELLATIVE:
        base, b, c = witness["base"], witness["first"], witness["second"]
        if not (valid_ids(base) and valid_ids([b, c])) or len(set(base)) != params["t"]:
            return False
        if b == c or b in base or c in base:
            return False
        u = 0
        for i in base:
            u |= cols[i]
        return (u | cols[b]) == (u | cols[c])
    raise UsageError(f"unknown property {prop!r}")
