"""Exact additive energies, convolution machinery, and inequality checkers.

T_k counts 2k-tuples with equal k-fold sums.  Three independent routes are
implemented (tuple meet-in-the-middle, spectral moments, convolution
powers); they must agree exactly, and the spectral route asserts the
divisibility of the moment sum by N, which would only fail on an
implementation bug.
"""

from __future__ import annotations

import math
import time
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import BudgetError, DimensionError, F2Set
from .exact import ExactnessError, root_sum_dominates
from .wht import IntFunction, SpectrumTable, inverse_wht, spectrum_of_set, wht

BRUTE_BUDGET = 10**8


def _tuple_sum_counts(elems: Sequence[int], j: int) -> dict[int, int]:
    """counts[v] = number of ordered j-tuples of elems with XOR v."""
    counts = {0: 1}
    for _ in range(j):
        nxt: dict[int, int] = defaultdict(int)
        for v, c in counts.items():
            for a in elems:
                nxt[v ^ a] += c
        counts = dict(nxt)
    return counts


def energy_bruteforce(a: F2Set, k: int, budget: int = BRUTE_BUDGET) -> int:
    """T_k by meet-in-the-middle over k-tuples of partial sums."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(a) == 0:
        return 0
    if len(a) ** k > budget:
        raise BudgetError(f"|A|^k = {len(a) ** k} exceeds budget {budget}")
    k1 = (k + 1) // 2
    c1 = _tuple_sum_counts(a.elems, k1)
    c2 = c1 if k - k1 == k1 else _tuple_sum_counts(a.elems, k - k1)
    full: dict[int, int] = defaultdict(int)
    for u, cu in c1.items():
        for v, cv in c2.items():
            full[u ^ v] += cu * cv
    return sum(c * c for c in full.values())


def energy_spectral(a: F2Set, k: int) -> int:
    """T_k = N^-1 sum_r A_hat(r)^(2k); the sum must divide exactly."""
    if k < 1:
        raise ValueError("k must be >= 1")
    table = spectrum_of_set(a)
    return _spectral_moment(table, k)


def _spectral_moment(table: SpectrumTable, k: int) -> int:
    n = 1 << table.dim
    total = sum(v ** (2 * k) for v in table.values)
    q, r = divmod(total, n)
    if r:
        raise ExactnessError("spectral moment sum not divisible by N (bug)")
    return q


def energy_convolution(a: F2Set, k: int) -> int:
    """T_k via the k-fold convolution power of the indicator."""
    g = conv_power(IntFunction.indicator(a), k)
    return sum(v * v for v in g.values)


def additive_energy(a: F2Set, k: int, method: str = "auto") -> int:
    """T_k(A) by the requested route ("auto" picks the cheaper exact one)."""
    if method == "auto":
        if len(a) == 0:
            return 0
        spectral_cost = (1 << a.dim) * (a.dim + 2 * k)
        brute_cost = len(a) ** ((k + 1) // 2) * (len(a) + 4)
        method = "spectral" if spectral_cost <= brute_cost else "brute"
    if method == "brute":
        return energy_bruteforce(a, k)
    if method == "spectral":
        return energy_spectral(a, k)
    if method == "conv":
        return energy_convolution(a, k)
    raise ValueError(f"unknown energy method {method!r}")


@dataclass(frozen=True)
class EnergyReport:
    """Values per method plus agreement flag and timings."""

    k: int
    set_size: int
    values: dict
    agree: bool
    runtime: float


def energy_report(a: F2Set, k: int, methods: Sequence[str] = ("brute", "spectral", "conv")) -> EnergyReport:
    start = time.perf_counter()
    values = {m: additive_energy(a, k, method=m) for m in methods}
    agree = len(set(values.values())) <= 1
    return EnergyReport(k, len(a), values, agree, time.perf_counter() - start)


def energy_multiset(sets: Sequence[F2Set]) -> int:
    """Mixed energy T_k(A_1, ..., A_2k), spectral product route."""
    if len(sets) < 2 or len(sets) % 2 != 0:
        raise ValueError("need an even number 2k >= 2 of sets")
    dim = sets[0].dim
    for s in sets:
        if s.dim != dim:
            raise DimensionError("sets live in different groups")
    n = 1 << dim
    tables = [spectrum_of_set(s).values for s in sets]
    total = 0
    for r in range(n):
        prod = 1
        for t in tables:
            prod *= t[r]
            if prod == 0:
                break
        total += prod
    q, rem = divmod(total, n)
    if rem:
        raise ExactnessError("mixed energy spectral sum not divisible by N (bug)")
    return q


def convolve(f: IntFunction, g: IntFunction) -> IntFunction:
    """(f*g)(x) = sum_s f(s) g(x+s), via transform-multiply-invert."""
    if f.dim != g.dim:
        raise DimensionError("convolution needs equal dimensions")
    fh = wht(f)
    gh = wht(g)
    prod = SpectrumTable(f.dim, tuple(x * y for x, y in zip(fh.values, gh.values)))
    return inverse_wht(prod)


def convolve_direct(f: IntFunction, g: IntFunction) -> IntFunction:
    """Definition-level O(N^2) convolution; agrees exactly with convolve."""
    if f.dim != g.dim:
        raise DimensionError("convolution needs equal dimensions")
    n = 1 << f.dim
    out = [0] * n
    for s, fv in enumerate(f.values):
        if fv == 0:
            continue
        for x in range(n):
            out[x] += fv * g.values[x ^ s]
    return IntFunction(f.dim, tuple(out))


def conv_power(f: IntFunction, k: int) -> IntFunction:
    """k-fold convolution power f * f * ... * f (k factors)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    fh = wht(f)
    powered = SpectrumTable(f.dim, tuple(v**k for v in fh.values))
    return inverse_wht(powered)


def energy_function(f: IntFunction, k: int) -> int:
    """T_k(f) = sum_x ((k-fold conv power)(x))^2, cross-checked spectrally."""
    if k < 1:
        raise ValueError("k must be >= 1")
    g = conv_power(f, k)
    by_conv = sum(v * v for v in g.values)
    by_spec = _spectral_moment(wht(f), k)
    if by_conv != by_spec:
        raise ExactnessError("convolution and spectral T_k(f) disagree (bug)")
    return by_conv


@dataclass(frozen=True)
class HolderReport:
    """Both sides of the convolution Hoelder inequality, roots cleared.

    The inequality LHS <= prod T_s(f_i)^(1/2s) * prod T_t(g_j)^(1/2t) is
    verified as LHS^(2st) <= prod T_s(f_i)^t * prod T_t(g_j)^s.
    """

    s: int
    t: int
    lhs: int
    lhs_power: int
    rhs_power: int
    holds: bool
    slack_log2: Optional[float]


def holder_check(fs: Sequence[IntFunction], gs: Sequence[IntFunction]) -> HolderReport:
    s, t = len(fs), len(gs)
    if s < 2 or t < 2:
        raise ValueError("need s, t >= 2")
    conv_f = fs[0]
    for f in fs[1:]:
        conv_f = convolve(conv_f, f)
    conv_g = gs[0]
    for g in gs[1:]:
        conv_g = convolve(conv_g, g)
    lhs = abs(sum(x * y for x, y in zip(conv_f.values, conv_g.values)))
    rhs_power = 1
    for f in fs:
        rhs_power *= energy_function(f, s) ** t
    for g in gs:
        rhs_power *= energy_function(g, t) ** s
    lhs_power = lhs ** (2 * s * t)
    holds = lhs_power <= rhs_power
    slack = None
    if lhs_power > 0 and rhs_power > 0:
        slack = (_log2(rhs_power) - _log2(lhs_power)) / (2 * s * t)
    return HolderReport(s, t, lhs, lhs_power, rhs_power, holds, slack)


@dataclass(frozen=True)
class SubadditivityReport:
    """T_k(A u B)^(1/2k) <= T_k(A)^(1/2k) + T_k(B)^(1/2k), exact."""

    k: int
    energy_union: int
    energy_a: int
    energy_b: int
    holds: bool


def subadditivity_check(a: F2Set, b: F2Set, k: int) -> SubadditivityReport:
    union = a.union(b)
    tu = additive_energy(union, k)
    ta = additive_energy(a, k)
    tb = additive_energy(b, k)
    holds = root_sum_dominates(tu, ta, tb, 2 * k)
    return SubadditivityReport(k, tu, ta, tb, holds)


def _log2(x: int) -> float:
    if x <= 0:
        raise ValueError("log2 of nonpositive")
    if x.bit_length() <= 512:
        return math.log2(x)
    shift = x.bit_length() - 64
    return math.log2(x >> shift) + shift


def dk_zeta(a: F2Set, k: int) -> tuple[float, float]:
    """Excess exponent D_k and log-ratio zeta_k of the exact energy.

    D_k solves T_k = 2^D_k k^k |A|^k; zeta_k = log2 T_k / log2 |A|.
    Floating on top of the exact T_k (1e-12 relative is plenty here).
    """
    if len(a) < 2:
        raise ValueError("need |A| >= 2")
    t = additive_energy(a, k)
    log_t = _log2(t)
    d_k = log_t - k * math.log2(k) - k * math.log2(len(a))
    zeta = log_t / math.log2(len(a))
    return d_k, zeta


def energy_excess_compare(t_small: int, size_small: int, t_big: int, size_big: int, k: int) -> bool:
    """Exact test of D_k(small) > D_k(big) without logs.

    D_k comparison reduces to T_small * |big|^k > T_big * |small|^k.
    """
    return t_small * size_big**k > t_big * size_small**k
