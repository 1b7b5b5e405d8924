"""Dissociativity and restricted-combination family testing over F_2^n.

In characteristic 2 the signs {-1, 0, 1} of a combination collapse to
subset membership, so dissociativity is exactly GF(2) linear independence
and the weight-k family test becomes: no nonempty subset of at most k
elements XORs into the forbidden set R.  This module is therefore *not* a
correct family test for groups where signs matter.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import reduce
from math import comb
from typing import Iterable, Optional

from .core import F2Set

DEFAULT_WORK_BUDGET = 5_000_000


def gf2_rank(vectors: Iterable[int]) -> int:
    """Rank of bit-vectors over GF(2), incremental elimination."""
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)


def is_dissociated(l: F2Set) -> bool:
    """True iff no nonempty subset XORs to zero (= linear independence)."""
    return gf2_rank(l.elems) == len(l)


@dataclass(frozen=True)
class FamilySpec:
    """Weight cap k and forbidden set R (0 must belong to R)."""

    k: int
    forbidden: F2Set

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("weight cap k must be >= 1")
        if 0 not in self.forbidden:
            raise ValueError("forbidden set R must contain 0")

    @classmethod
    def zero(cls, k: int, dim: int) -> "FamilySpec":
        return cls(k, F2Set(dim, (0,)))


@dataclass(frozen=True)
class FamilyCheck:
    """Tri-state result; bench code must never treat 'undecided' as an answer."""

    status: str  # "true" | "false" | "undecided"
    witness: Optional[tuple[int, ...]]  # offending subset when status == "false"
    work: int  # subsets enumerated (or the estimate that broke the budget)


def _subset_xors(elems: tuple[int, ...], max_size: int):
    """Yield (xor, size) over all subsets of size <= max_size."""
    yield 0, 0
    for size in range(1, max_size + 1):
        for combo in itertools.combinations(elems, size):
            yield reduce(lambda a, b: a ^ b, combo), size


def in_family(l: F2Set, spec: FamilySpec, budget: int = DEFAULT_WORK_BUDGET) -> FamilyCheck:
    """Meet-in-the-middle test of membership in the family Lambda_R(k).

    Splits the ground set in half; any violating subset S splits as
    (S cap A, S cap B) with the halves enumerated independently, so the
    work is ~ C(|L|/2, <=k) per side instead of C(|L|, <=k).
    """
    if l.dim != spec.forbidden.dim:
        raise ValueError("set and forbidden set live in different groups")
    k = spec.k
    elems = l.elems
    half = len(elems) // 2
    a_side, b_side = elems[:half], elems[half:]
    ka = min(k, len(a_side))
    kb = min(k, len(b_side))
    work = sum(comb(len(a_side), s) for s in range(ka + 1))
    work_b = sum(comb(len(b_side), s) for s in range(kb + 1))
    total_work = work + work_b * len(spec.forbidden)
    if total_work > budget:
        return FamilyCheck("undecided", None, total_work)

    # min subset size per achievable XOR on the A side; 0 maps to the empty
    # subset, so track the smallest *nonempty* subset reaching 0 separately.
    min_size: dict[int, int] = {}
    min_nonzero_at_zero = None
    for x, size in _subset_xors(a_side, ka):
        if size == 0:
            continue
        if x == 0:
            if min_nonzero_at_zero is None or size < min_nonzero_at_zero:
                min_nonzero_at_zero = size
        cur = min_size.get(x)
        if cur is None or size < cur:
            min_size[x] = size

    r_elems = spec.forbidden.elems

    def witness_for(xa: int, sa: int, b_combo: tuple[int, ...]) -> tuple[int, ...]:
        if sa == 0:
            return tuple(sorted(b_combo))
        for combo in itertools.combinations(a_side, sa):
            if reduce(lambda a, b: a ^ b, combo) == xa:
                return tuple(sorted(combo + b_combo))
        raise AssertionError("witness reconstruction failed")

    for xb, sb in _subset_xors(b_side, kb):
        b_combo: Optional[tuple[int, ...]] = None
        for r in r_elems:
            target = xb ^ r
            if target == 0:
                sa = min_nonzero_at_zero if sb == 0 else 0
                if sa is None:
                    continue
            else:
                sa = min_size.get(target)
                if sa is None:
                    continue
            if sa + sb <= k and sa + sb >= 1:
                if b_combo is None:
                    b_combo = _find_combo(b_side, xb, sb)
                return FamilyCheck("false", witness_for(target, sa, b_combo), total_work)
    return FamilyCheck("true", None, total_work)


def _find_combo(elems: tuple[int, ...], xor: int, size: int) -> tuple[int, ...]:
    if size == 0:
        return ()
    for combo in itertools.combinations(elems, size):
        if reduce(lambda a, b: a ^ b, combo) == xor:
            return combo
    raise AssertionError("no combination with recorded xor")


def random_dissociated(
    n: int,
    m: int,
    spec: Optional[FamilySpec] = None,
    seed: int = 0,
    max_tries: Optional[int] = None,
) -> F2Set:
    """Greedy rejection sampling of an m-element set in the given family.

    With spec=None the target is full dissociativity (so m <= n is needed);
    deterministic for a fixed seed.  Raises after the retry budget.
    """
    if spec is None and m > n:
        raise ValueError("a dissociated set in F_2^n has at most n elements")
    rng = random.Random(seed)
    tries_left = max_tries if max_tries is not None else 256 * max(m, 1)
    chosen: list[int] = []
    basis: list[int] = []
    while len(chosen) < m:
        if tries_left <= 0:
            raise RuntimeError(f"could not extend to {m} elements within retry budget")
        tries_left -= 1
        cand = rng.getrandbits(n)
        if cand == 0 or cand in chosen:
            continue
        if spec is None:
            red = cand
            for b in basis:
                red = min(red, red ^ b)
            if red == 0:
                continue
            basis.append(red)
            basis.sort(reverse=True)
            chosen.append(cand)
        else:
            trial = F2Set.from_bits(n, chosen + [cand])
            check = in_family(trial, spec)
            if check.status == "undecided":
                raise RuntimeError("family check undecided during generation; refusing")
            if check.status == "true":
                chosen.append(cand)
    return F2Set.from_bits(n, chosen)
