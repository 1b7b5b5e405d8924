"""Exact arithmetic and set machinery for the group F_2^n.

Elements are n-bit machine words (bit i-1 of the word = coordinate i of the
vector), sets are strictly sorted tuples of such words.  All values are
immutable and every operation is a pure function of its inputs, so anything
here can be shared freely between threads.
"""

from __future__ import annotations

import itertools
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

MAX_DIM = 30
SUMSET_BUDGET = 10_000_000


class DimensionError(ValueError):
    """Operands live in different F_2^n or n is out of range."""


class SetFileError(ValueError):
    """Malformed set file (bad length, bad character, duplicate line)."""


class BudgetError(RuntimeError):
    """An exact enumeration would exceed its documented budget."""


def _check_dim(dim: int) -> None:
    if not 1 <= dim <= MAX_DIM:
        raise DimensionError(f"dimension {dim} outside 1..{MAX_DIM}")


@dataclass(frozen=True)
class F2Element:
    """A point of F_2^n stored as an n-bit word."""

    bits: int
    dim: int

    def __post_init__(self) -> None:
        _check_dim(self.dim)
        if not 0 <= self.bits < (1 << self.dim):
            raise DimensionError(f"bits {self.bits} out of range for n={self.dim}")

    def __xor__(self, other: "F2Element") -> "F2Element":
        return add(self, other)

    def to_bitstring(self) -> str:
        return bits_to_string(self.bits, self.dim)

    @classmethod
    def from_bitstring(cls, s: str) -> "F2Element":
        return cls(string_to_bits(s), len(s))


def bits_to_string(bits: int, dim: int) -> str:
    """Render as a {0,1}^n string, leftmost character = coordinate 1."""
    return "".join("1" if (bits >> i) & 1 else "0" for i in range(dim))


def string_to_bits(s: str) -> int:
    bits = 0
    for i, ch in enumerate(s):
        if ch == "1":
            bits |= 1 << i
        elif ch != "0":
            raise SetFileError(f"bad character {ch!r} in element string")
    return bits


def add(x: F2Element, y: F2Element) -> F2Element:
    """Group law of F_2^n: bitwise XOR."""
    if x.dim != y.dim:
        raise DimensionError("cannot add elements of different dimension")
    return F2Element(x.bits ^ y.bits, x.dim)


def dot(r: F2Element, x: F2Element) -> int:
    """Standard bilinear form <r, x>: parity of the AND popcount."""
    if r.dim != x.dim:
        raise DimensionError("dot product needs equal dimensions")
    return (r.bits & x.bits).bit_count() & 1


@dataclass(frozen=True)
class F2Set:
    """A finite subset of F_2^n as a strictly sorted tuple of words."""

    dim: int
    elems: tuple[int, ...]

    def __post_init__(self) -> None:
        _check_dim(self.dim)
        top = 1 << self.dim
        prev = -1
        for e in self.elems:
            if not 0 <= e < top:
                raise DimensionError(f"element {e} out of range for n={self.dim}")
            if e <= prev:
                raise ValueError("elements must be strictly sorted (no duplicates)")
            prev = e

    @classmethod
    def from_bits(cls, dim: int, bits: Iterable[int]) -> "F2Set":
        return cls(dim, tuple(sorted(set(bits))))

    def __len__(self) -> int:
        return len(self.elems)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elems)

    def __contains__(self, bits: int) -> bool:
        i = bisect_left(self.elems, bits)
        return i < len(self.elems) and self.elems[i] == bits

    def union(self, other: "F2Set") -> "F2Set":
        self._same_group(other)
        return F2Set.from_bits(self.dim, self.elems + other.elems)

    def difference(self, other: "F2Set") -> "F2Set":
        self._same_group(other)
        drop = set(other.elems)
        return F2Set(self.dim, tuple(e for e in self.elems if e not in drop))

    def intersection(self, other: "F2Set") -> "F2Set":
        self._same_group(other)
        keep = set(other.elems)
        return F2Set(self.dim, tuple(e for e in self.elems if e in keep))

    def issubset(self, other: "F2Set") -> bool:
        self._same_group(other)
        return set(self.elems) <= set(other.elems)

    def translate(self, a: int) -> "F2Set":
        """The coset {x + a : x in this set}."""
        return F2Set.from_bits(self.dim, (e ^ a for e in self.elems))

    def _same_group(self, other: "F2Set") -> None:
        if self.dim != other.dim:
            raise DimensionError("sets live in different groups")


def distinct_sumset(sets: Sequence[F2Set], budget: int = SUMSET_BUDGET) -> F2Set:
    """Sums a_1 + ... + a_d with a_i from the i-th set, all pairwise distinct.

    For the d-fold power of a single set this is the set of sums of d
    distinct members.  Enumeration cost is capped by `budget` tuples.
    """
    if not sets:
        raise ValueError("distinct_sumset needs at least one set")
    dim = sets[0].dim
    for s in sets:
        if s.dim != dim:
            raise DimensionError("sumset arguments live in different groups")
    d = len(sets)
    if all(s.elems == sets[0].elems for s in sets):
        base = sets[0].elems
        count = _ncomb(len(base), d)
        if count > budget:
            raise BudgetError(f"{count} combinations exceed budget {budget}")
        out = set()
        for combo in itertools.combinations(base, d):
            acc = 0
            for e in combo:
                acc ^= e
            out.add(acc)
        return F2Set.from_bits(dim, out)

    total = 1
    for s in sets:
        total *= max(len(s), 1)
    if total > budget:
        raise BudgetError(f"{total} tuples exceed budget {budget}")
    out = set()

    def rec(i: int, acc: int, used: set[int]) -> None:
        if i == d:
            out.add(acc)
            return
        for e in sets[i].elems:
            if e not in used:
                used.add(e)
                rec(i + 1, acc ^ e, used)
                used.remove(e)

    rec(0, 0, set())
    return F2Set.from_bits(dim, out)


def distinct_sumset_power(a: F2Set, d: int, budget: int = SUMSET_BUDGET) -> F2Set:
    """d-fold distinct sumset of a single set."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return distinct_sumset([a] * d, budget=budget)


def _ncomb(n: int, k: int) -> int:
    from math import comb

    return comb(n, k) if 0 <= k <= n else 0


def parse_set(text: str) -> F2Set:
    """Parse the canonical set-file format.

    First line is the dimension n, each following nonempty line one element
    as an n-character {0,1} string (leftmost character = coordinate 1).
    Duplicate lines are a hard error, never silently merged.
    """
    lines = text.splitlines()
    if not lines:
        raise SetFileError("empty set file")
    try:
        dim = int(lines[0].strip())
    except ValueError:
        raise SetFileError(f"bad dimension header {lines[0]!r}") from None
    _check_dim(dim)
    seen: dict[int, int] = {}
    out = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if len(line) != dim:
            raise SetFileError(f"line {lineno}: length {len(line)} != dimension {dim}")
        try:
            bits = string_to_bits(line)
        except SetFileError as exc:
            raise SetFileError(f"line {lineno}: {exc}") from None
        if bits in seen:
            raise SetFileError(f"line {lineno}: duplicate element (first at line {seen[bits]})")
        seen[bits] = lineno
        out.append(bits)
    return F2Set.from_bits(dim, out)


def serialize_set(s: F2Set) -> str:
    """Canonical set-file text: sorted elements, one per line."""
    lines = [str(s.dim)]
    lines.extend(bits_to_string(e, s.dim) for e in s.elems)
    return "\n".join(lines) + "\n"


def read_set_file(path: str) -> F2Set:
    with open(path, "r", encoding="ascii") as fh:
        return parse_set(fh.read())


def write_set_file(path: str, s: F2Set) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(serialize_set(s))
