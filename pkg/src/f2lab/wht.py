"""Exact fast Walsh-Hadamard transform and large-spectrum extraction.

Tables hold arbitrary-precision Python integers throughout, so Parseval and
all downstream energy computations are exact.  The butterfly may be split
across threads (F2LAB_THREADS); stages write disjoint index pairs, so the
parallel result is identical to the serial one.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .core import BudgetError, DimensionError, F2Set, bits_to_string
from .exact import ExactnessError

WHT_DIM_CAP = 26  # full tables above 2^26 entries are out of desk scale


@dataclass(frozen=True)
class IntFunction:
    """An integer-valued function on F_2^n as a table of length 2^n."""

    dim: int
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.values) != 1 << self.dim:
            raise DimensionError("table length must be exactly 2^n")

    @classmethod
    def indicator(cls, s: F2Set) -> "IntFunction":
        vals = [0] * (1 << s.dim)
        for e in s.elems:
            vals[e] = 1
        return cls(s.dim, tuple(vals))

    def abs(self) -> "IntFunction":
        return IntFunction(self.dim, tuple(abs(v) for v in self.values))


@dataclass(frozen=True)
class SpectrumTable:
    """Fourier table {A_hat(r)} of an integer function, exact integers."""

    dim: int
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.values) != 1 << self.dim:
            raise DimensionError("table length must be exactly 2^n")


def thread_count() -> int:
    raw = os.environ.get("F2LAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"F2LAB_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def _stage(vals: list[int], starts: Iterable[int], h: int) -> None:
    for start in starts:
        for i in range(start, start + h):
            a = vals[i]
            b = vals[i + h]
            vals[i] = a + b
            vals[i + h] = a - b


def _butterfly(vals: list[int]) -> None:
    n = len(vals)
    workers = thread_count()
    pool = None
    if workers > 1 and n >= 1 << 12:
        from concurrent.futures import ThreadPoolExecutor

        pool = ThreadPoolExecutor(max_workers=workers)
    try:
        h = 1
        while h < n:
            step = 2 * h
            starts = range(0, n, step)
            if pool is not None and len(starts) >= workers * 2:
                chunks = [starts[i::workers] for i in range(workers)]
                futures = [pool.submit(_stage, vals, c, h) for c in chunks]
                for f in futures:
                    f.result()
            else:
                _stage(vals, starts, h)
            h = step
    finally:
        if pool is not None:
            pool.shutdown()


def wht(f: IntFunction) -> SpectrumTable:
    """A_hat(r) = sum_x f(x) (-1)^<r,x>, exact, O(N log N) integer ops."""
    if f.dim > WHT_DIM_CAP:
        raise BudgetError(f"transform table 2^{f.dim} exceeds cap 2^{WHT_DIM_CAP}")
    vals = list(f.values)
    _butterfly(vals)
    return SpectrumTable(f.dim, tuple(vals))


def spectrum_of_set(a: F2Set) -> SpectrumTable:
    """Fourier table of the 0/1 indicator of a set."""
    return wht(IntFunction.indicator(a))


def inverse_wht(s: SpectrumTable) -> IntFunction:
    """Inverse transform; the WHT is an involution up to the factor N."""
    n = 1 << s.dim
    vals = list(s.values)
    _butterfly(vals)
    out = []
    for v in vals:
        q, r = divmod(v, n)
        if r:
            raise ExactnessError("inverse transform is not integer-valued")
        out.append(q)
    return IntFunction(s.dim, tuple(out))


def large_spectrum(a: F2Set, alpha: Fraction) -> F2Set:
    """R_alpha = { r : |A_hat(r)| >= alpha * N }, threshold compared exactly."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if len(a) == 0:
        raise ValueError("large spectrum of an empty set")
    table = spectrum_of_set(a)
    return large_spectrum_from_table(table, alpha)


def large_spectrum_from_table(table: SpectrumTable, alpha: Fraction) -> F2Set:
    n = 1 << table.dim
    p, q = alpha.numerator, alpha.denominator
    hits = [r for r, v in enumerate(table.values) if abs(v) * q >= p * n]
    return F2Set(table.dim, tuple(hits))


def spectrum_rows(s: SpectrumTable) -> Iterator[tuple[str, int]]:
    """(bitstring of r, A_hat(r)) rows for the CSV dump format."""
    for r, v in enumerate(s.values):
        yield bits_to_string(r, s.dim), v
