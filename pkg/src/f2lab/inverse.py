"""Connectedness refinement, support selection, and rectangle extraction.

Refine a set until every mid-sized subset keeps a proportional energy
share, split the dissociated ground set, decompose into fibers, pick
near-disjoint supports greedily, intersect fibers Bombieri-style, and peel
combinatorial rectangles L + L' out of Q.  The full-strength guarantees
behind this pipeline carry constants far beyond desk scale, so outputs are
validated by direct containment checks and planted-instance recovery
instead; every search is seeded and tie-broken lexicographically for
reproducibility.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from math import comb, factorial
from typing import Optional, Sequence

from .core import BudgetError, F2Set
from .dissociation import FamilySpec, in_family
from .energy import additive_energy, energy_excess_compare
from .exact import PRECISIONS, EULER_HI, EULER_LO, certify_le, log2_bounds, pow_bounds


# ---------------------------------------------------------------------------
# connectedness refinement


@dataclass(frozen=True)
class ConnectednessParams:
    """Degree, window, constant, and search budget of the refinement loop."""

    k: int = 2
    beta1: Fraction = Fraction(1, 4)
    beta2: Fraction = Fraction(1, 2)
    constant: Fraction = Fraction(1, 8)
    search_budget: int = 256
    exhaustive_limit: int = 14
    sumset_arity: Optional[int] = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError("degree k must be >= 2")
        if not (0 < self.beta1 <= self.beta2 < 1):
            raise ValueError("need 0 < beta1 <= beta2 < 1")
        if not (0 < self.constant <= 1):
            raise ValueError("the constant must lie in (0, 1]")


@dataclass(frozen=True)
class RefineStep:
    size_before: int
    removed: int
    energy_before: int
    energy_after: int


@dataclass(frozen=True)
class RefineResult:
    result: F2Set
    steps: tuple[RefineStep, ...]
    certified: bool  # final no-violation pass was exhaustive
    step_bound_ok: Optional[bool]
    energy_initial: int
    energy_final: int


class _EnergyCache:
    """T_k memo keyed by the sorted element tuple; shared across calls so
    exhaustive sweeps over many Q reuse subset energies."""

    def __init__(self, dim: int, k: int, store: Optional[dict] = None):
        self.dim = dim
        self.k = k
        self.store = store if store is not None else {}

    def __call__(self, s: F2Set) -> int:
        return self.of_tuple(s.elems)

    def of_tuple(self, elems: tuple[int, ...]) -> int:
        val = self.store.get(elems)
        if val is None:
            val = additive_energy(F2Set(self.dim, elems), self.k)
            self.store[elems] = val
        return val


def _violates(
    t_b: int, b: int, t_q: int, m: int, k: int, c: Fraction
) -> bool:
    """Exact test of T_k(B) < C^2k (|B|/|Q|)^2k T_k(Q)."""
    e = 2 * k
    return t_b * c.denominator**e * m**e < c.numerator**e * b**e * t_q


def refine_connected(
    q: F2Set,
    params: ConnectednessParams,
    energy_cache: Optional[dict] = None,
) -> RefineResult:
    """Iteratively delete energy-poor mid-sized subsets.

    A step fires on a subset B with beta1|Q| <= |B| <= beta2|Q| whose
    energy falls below the proportional share; the complement then strictly
    increases the excess exponent D_k, which is asserted exactly.  Runs are
    "certified" connected only when the final pass searched every window
    subset (|Q| <= exhaustive_limit); larger sets get seeded random search
    plus local moves and an honest best-effort tag.
    """
    k = params.k
    energy = _EnergyCache(q.dim, k, energy_cache)
    rng = random.Random(params.seed)
    cur = q
    t_cur = energy(cur)
    t_initial = t_cur
    m_initial = len(q)
    steps: list[RefineStep] = []
    certified = False
    while True:
        m = len(cur)
        if m <= 2:
            certified = True
            break
        lo = max(1, -((-params.beta1.numerator * m) // params.beta1.denominator))
        hi = min(m - 1, (params.beta2.numerator * m) // params.beta2.denominator)
        if lo > hi:
            certified = True  # no admissible B: connected vacuously
            break
        violation = None
        exhaustive = m <= params.exhaustive_limit
        if exhaustive:
            # hoisted constants: B violates iff T_k(B) * lhs_scale < rhs_size[b]
            e = 2 * k
            lhs_scale = params.constant.denominator**e * m**e
            rhs_base = params.constant.numerator**e * t_cur
            cache_get = energy.store.get
            of_tuple = energy.of_tuple
            for size in range(lo, hi + 1):
                rhs_size = rhs_base * size**e
                for combo in itertools.combinations(cur.elems, size):
                    t_b = cache_get(combo)
                    if t_b is None:
                        t_b = of_tuple(combo)
                    if t_b * lhs_scale < rhs_size:
                        violation = F2Set(cur.dim, combo)
                        break
                if violation is not None:
                    break
        else:
            best: Optional[tuple[Fraction, F2Set]] = None
            for _ in range(params.search_budget):
                size = rng.randint(lo, hi)
                combo = tuple(sorted(rng.sample(cur.elems, size)))
                b = F2Set(cur.dim, combo)
                t_b = energy(b)
                if _violates(t_b, size, t_cur, m, k, params.constant):
                    violation = b
                    break
                margin = Fraction(t_b * params.constant.denominator ** (2 * k) * m ** (2 * k)) / (
                    params.constant.numerator ** (2 * k) * size ** (2 * k) * t_cur
                )
                if best is None or margin < best[0]:
                    best = (margin, b)
            if violation is None and best is not None:
                violation = _local_descent(best[1], cur, t_cur, energy, params, rng, lo, hi)
        if violation is None:
            certified = exhaustive
            break
        nxt = cur.difference(violation)
        t_nxt = energy(nxt)
        # strict D_k increase is guaranteed by subadditivity whenever C < 1/4
        if not energy_excess_compare(t_nxt, len(nxt), t_cur, m, k):
            if params.constant < Fraction(1, 4):
                raise AssertionError("excess exponent failed to increase on a fired step")
        steps.append(RefineStep(m, len(violation), t_cur, t_nxt))
        cur, t_cur = nxt, t_nxt

    # cardinality guarantee |Q'| >= (1 - beta2)^s |Q|, exact rationals
    s = len(steps)
    b2 = params.beta2
    if len(cur) * b2.denominator**s < (b2.denominator - b2.numerator) ** s * m_initial:
        raise AssertionError("cardinality guarantee violated")
    step_bound_ok: Optional[bool] = None
    if params.sumset_arity is not None:
        step_bound_ok = _step_bound_holds(
            s, k, params.sumset_arity, params.beta1, params.constant, t_initial, m_initial
        )
        if not step_bound_ok:
            raise AssertionError("step-count bound violated")
    return RefineResult(cur, tuple(steps), certified, step_bound_ok, t_initial, t_cur)


def _local_descent(start, cur, t_cur, energy, params, rng, lo, hi):
    """Swap-based descent from the least-connected sampled subset."""
    k = params.k
    m = len(cur)
    b = list(start.elems)
    outside = [e for e in cur.elems if e not in set(b)]

    def margin(elems):
        t_b = energy(F2Set(cur.dim, tuple(sorted(elems))))
        lhs = t_b * params.constant.denominator ** (2 * k) * m ** (2 * k)
        rhs = params.constant.numerator ** (2 * k) * len(elems) ** (2 * k) * t_cur
        return lhs - rhs

    cur_margin = margin(b)
    for _ in range(max(8, params.search_budget // 8)):
        if cur_margin < 0:
            return F2Set(cur.dim, tuple(sorted(b)))
        if not outside:
            break
        i = rng.randrange(len(b))
        j = rng.randrange(len(outside))
        b[i], outside[j] = outside[j], b[i]
        new_margin = margin(b)
        if new_margin < cur_margin:
            cur_margin = new_margin
        else:
            b[i], outside[j] = outside[j], b[i]
    return None


def _step_bound_holds(
    s: int, k: int, d: int, beta1: Fraction, c: Fraction, t0: int, m0: int
) -> bool:
    """Exact form of the step-count bound.

    s <= (8d log d + k(d-1) log k - D_k(Q0)) / (k log(1 + beta1(1-4C)))
    is equivalent, clearing logs, to
    (1 + beta1(1-4C))^(sk) * T_k(Q0) <= d^(8d) * k^(kd) * |Q0|^k.
    """
    x = 1 + beta1 * (1 - 4 * c)
    lhs = Fraction(x.numerator, x.denominator) ** (s * k) * t0
    rhs = d ** (8 * d) * k ** (k * d) * m0**k
    return lhs <= rhs


# ---------------------------------------------------------------------------
# greedy near-disjoint supports


def greedy_disjoint_supports(
    supports: Sequence[frozenset], zeta: Fraction, width: int
) -> list[int]:
    """First-feasible greedy selection of supports with small overlap.

    Returns indices n_1, n_2, ... (at most `width`) such that each chosen
    support meets the union of the earlier ones in at most zeta*p elements,
    p being the common support size.  Total: may return fewer than width.
    """
    if not supports:
        return []
    p = len(supports[0])
    if any(len(s) != p for s in supports):
        raise ValueError("all supports must have the same size")
    if len(set(supports)) != len(supports):
        raise ValueError("supports must be pairwise different")
    chosen = [0]
    union = set(supports[0])
    while len(chosen) < width:
        found = None
        for i, s in enumerate(supports):
            if i in chosen:
                continue
            if len(union & s) * zeta.denominator <= zeta.numerator * p:
                found = i
                break
        if found is None:
            break
        chosen.append(found)
        union |= supports[found]
    return chosen


def greedy_support_threshold(
    p: int, width: int, zeta: Fraction, block_sizes: Sequence[int], multiplicities: Sequence[int]
) -> Fraction:
    """The guarantee threshold 2*sigma* of the greedy-support lemma.

    When the number of available supports is at least this value, the
    greedy selection provably returns the full width.
    """
    if len(block_sizes) != len(multiplicities):
        raise ValueError("need one multiplicity per block")
    rho = len(block_sizes)
    omega_min = -((-zeta.numerator * p) // zeta.denominator)  # ceil(zeta p)
    total = Fraction(0)

    def compositions(remaining: int, idx: int):
        if idx == rho - 1:
            if remaining <= multiplicities[idx]:
                yield (remaining,)
            return
        for v in range(min(remaining, multiplicities[idx]) + 1):
            for rest in compositions(remaining - v, idx + 1):
                yield (v,) + rest

    for omega in range(omega_min, p + 1):
        inner = Fraction(0)
        if rho:
            for ns in compositions(p - omega, 0):
                term = Fraction(1)
                for a, n in zip(block_sizes, ns):
                    term *= Fraction(a**n, factorial(n))
                inner += term
        elif p - omega == 0:
            inner = Fraction(1)
        total += Fraction((p * width) ** omega, factorial(omega)) * inner
    return 2 * total


# ---------------------------------------------------------------------------
# Bombieri-style intersections


@dataclass(frozen=True)
class BombieriResult:
    indices: tuple[int, ...]
    intersection: F2Set
    exhaustive: bool
    bound: Fraction
    bound_checked: bool


def _best_common_intersection(
    sets: Sequence[frozenset],
    t: int,
    budget: int,
    rng: Optional[random.Random],
) -> tuple[tuple[int, ...], frozenset, bool]:
    """Indices of t sets maximizing the common intersection.

    Exhaustive below `budget` combinations; otherwise greedy descent with
    restarts driven by `rng`.  Ties go to the lexicographically first index
    tuple.
    """
    q = len(sets)
    if not 1 <= t <= q:
        raise ValueError("depth t out of range")
    if comb(q, t) <= budget:
        best_idx: Optional[tuple[int, ...]] = None
        best_inter: frozenset = frozenset()
        for combo in itertools.combinations(range(q), t):
            inter = sets[combo[0]]
            for i in combo[1:]:
                inter = inter & sets[i]
                if len(inter) <= len(best_inter):
                    break
            if best_idx is None or len(inter) > len(best_inter):
                best_idx, best_inter = combo, inter
        return best_idx, best_inter, True
    if rng is None:
        rng = random.Random(0)
    best_idx = tuple(range(t))
    best_inter = frozenset.intersection(*(sets[i] for i in best_idx))
    for _ in range(8):
        idx = sorted(rng.sample(range(q), t))
        inter = frozenset.intersection(*(sets[i] for i in idx))
        improved = True
        while improved:
            improved = False
            for pos in range(t):
                for cand in range(q):
                    if cand in idx:
                        continue
                    trial = sorted(idx[:pos] + idx[pos + 1 :] + [cand])
                    trial_inter = frozenset.intersection(*(sets[i] for i in trial))
                    if len(trial_inter) > len(inter):
                        idx, inter = trial, trial_inter
                        improved = True
        if len(inter) > len(best_inter):
            best_idx, best_inter = tuple(idx), inter
    return tuple(best_idx), best_inter, False


def bombieri_intersection(
    universe: F2Set,
    subsets: Sequence[F2Set],
    lam: Fraction,
    t: int,
    budget: int = 10**6,
    seed: int = 0,
) -> BombieriResult:
    """Find t subsets with large common intersection and check the bound.

    Preconditions |B_i| >= lam |B| and t <= lam q are enforced; on the
    exhaustive path the returned intersection is asserted to meet
    (lam - t/q) C(q,t)^-1 |B|.
    """
    q = len(subsets)
    if q == 0:
        raise ValueError("need at least one subset")
    size = len(universe)
    for b in subsets:
        if len(b) * lam.denominator < lam.numerator * size:
            raise ValueError("every subset must have |B_i| >= lam |B|")
        if not b.issubset(universe):
            raise ValueError("subsets must live inside the universe")
    if Fraction(t) > lam * q:
        raise ValueError("depth t must be at most lam * q")
    sets = [frozenset(b.elems) for b in subsets]
    idx, inter, exhaustive = _best_common_intersection(sets, t, budget, random.Random(seed))
    bound = (lam - Fraction(t, q)) / comb(q, t) * size
    checked = False
    if exhaustive:
        if Fraction(len(inter)) < bound:
            raise AssertionError("intersection bound violated on exhaustive search")
        checked = True
    dim = universe.dim
    return BombieriResult(idx, F2Set.from_bits(dim, inter), exhaustive, bound, checked)


# ---------------------------------------------------------------------------
# fiber decompositions


@dataclass(frozen=True)
class FiberDecomposition:
    """Q inside Lambda_1 + Lambda_2, organised by first coordinate.

    fibers maps lambda in Lambda_1 to D(lambda) = {mu in Lambda_2 :
    lambda + mu in Q}; s1 counts nonempty fibers, s2 = |Lambda_2|.
    """

    lambda1: F2Set
    lambda2: F2Set
    fibers: tuple[tuple[int, F2Set], ...]

    @classmethod
    def build(cls, q: F2Set, lambda1: F2Set, lambda2: F2Set) -> "FiberDecomposition":
        if lambda1.intersection(lambda2).elems:
            raise ValueError("Lambda_1 and Lambda_2 must be disjoint")
        qset = set(q.elems)
        fibers = []
        for lam in lambda1.elems:
            d = tuple(mu for mu in lambda2.elems if (lam ^ mu) in qset)
            fibers.append((lam, F2Set(lambda2.dim, d)))
        return cls(lambda1, lambda2, tuple(fibers))

    @property
    def s1(self) -> int:
        return sum(1 for _, d in self.fibers if len(d))

    @property
    def s2(self) -> int:
        return len(self.lambda2)

    def nonempty(self) -> list[tuple[int, F2Set]]:
        return [(lam, d) for lam, d in self.fibers if len(d)]

    def total_mass(self) -> int:
        return sum(len(d) for _, d in self.fibers)

    def covered_points(self) -> set[int]:
        out: set[int] = set()
        for lam, d in self.fibers:
            for mu in d.elems:
                out.add(lam ^ mu)
        return out

    def power_sum(self, x: int) -> int:
        return sum(len(d) ** x for _, d in self.fibers)


# ---------------------------------------------------------------------------
# the T_p upper bound through fiber intersections


@dataclass(frozen=True)
class Inverse2Report:
    status: str  # holds | violated | undecided | hypothesis-not-met
    energy: int
    rhs_lo: Optional[Fraction]
    rhs_hi: Optional[Fraction]
    hypothesis_failures: tuple[str, ...]
    delta0_bounds: Optional[tuple[Fraction, Fraction]]
    ceil_delta0: Optional[int]


def inverse2_bound(
    q: F2Set,
    decomp: FiberDecomposition,
    p: int,
    m_param: Fraction,
    s1_cap: int = 14,
    p_cap: int = 6,
) -> Inverse2Report:
    """Compare exact T_p(Q) against the fiber-intersection upper bound.

    The bound is 2^(5p) X p^(3p) s2^p * sum_{r} (p s2)^-r *
    (sum over r-subsets S of the nonempty fibers of prod_{a in S}
    sum_{b in S} |D_a cap D_b|) + p^(2p)|Q|^p / (2 M^p), with
    delta0 = max(p log2(2 e M) / log2(|Q|/(s2 p)), 1), X = max(delta0^
    (4 delta0), 1).  Transcendental pieces are bracketed rationally and the
    verdict is only issued when the bracket decides it.
    """
    nonempty = decomp.nonempty()
    s1, s2 = len(nonempty), decomp.s2
    if s1 > s1_cap or p > p_cap:
        raise BudgetError(f"s1 = {s1}, p = {p} beyond caps ({s1_cap}, {p_cap})")
    failures = []
    if p < 5:
        failures.append("p < 5")
    lam_all = decomp.lambda1.union(decomp.lambda2)
    fam = in_family(lam_all, FamilySpec.zero(min(4 * p, max(1, len(lam_all))), lam_all.dim))
    if fam.status != "true":
        failures.append(f"Lambda_1 u Lambda_2 family status: {fam.status}")
    pair_sums = {l1 ^ l2 for l1 in decomp.lambda1 for l2 in decomp.lambda2}
    if not set(q.elems) <= pair_sums:
        raise ValueError("Q must be contained in Lambda_1 + Lambda_2")
    m = len(q)
    if s2 == 0 or m == 0:
        failures.append("degenerate instance")
    else:
        if not (m >= 2 * s2 * p and Fraction(m) >= 2**8 * s2 * p * m_param**8):
            failures.append("|Q| below max(2 s2 p, 2^8 s2 p M^8)")
    energy = additive_energy(q, p)
    if failures:
        return Inverse2Report("hypothesis-not-met", energy, None, None, tuple(failures), None, None)

    ratio = Fraction(m, s2 * p)
    inter = [
        [len(set(da.elems) & set(db.elems)) for _, db in nonempty] for _, da in nonempty
    ]

    status = "undecided"
    rhs_lo = rhs_hi = None
    d0_bounds = None
    ceil_d0 = None
    for prec in PRECISIONS:
        log_m = log2_bounds_interval(2 * EULER_LO * m_param, 2 * EULER_HI * m_param, prec)
        num = (p * log_m[0], p * log_m[1])  # may be negative for small M
        den = log2_bounds(ratio, prec)
        if den[0] <= 0:
            failures = ("log |Q|/(s2 p) not positive",)
            return Inverse2Report(
                "hypothesis-not-met", energy, None, None, failures, None, None
            )
        raw_lo = num[0] / (den[1] if num[0] >= 0 else den[0])
        raw_hi = num[1] / (den[0] if num[1] >= 0 else den[1])
        d0 = (max(raw_lo, Fraction(1)), max(raw_hi, Fraction(1)))
        d0_bounds = d0
        c_lo = -((-d0[0].numerator) // d0[0].denominator)
        c_hi = -((-d0[1].numerator) // d0[1].denominator)
        if c_lo != c_hi:
            continue  # escalate precision to pin the ceiling
        ceil_d0 = c_lo
        if d0[0] == d0[1] == 1:
            x_bounds = (Fraction(1), Fraction(1))
        else:
            pw = pow_bounds(d0, (4 * d0[0], 4 * d0[1]), prec)
            x_bounds = (max(pw[0], Fraction(1)), max(pw[1], Fraction(1)))
        double_sum = Fraction(0)
        for r in range(max(0, p - ceil_d0), p + 1):
            if r > s1:
                continue
            inner = 0
            for combo in itertools.combinations(range(s1), r):
                prod = 1
                for a in combo:
                    row = inter[a]
                    acc = 0
                    for b in combo:
                        acc += row[b]
                    prod *= acc
                    if prod == 0:
                        break
                inner += prod
            double_sum += Fraction(inner, (p * s2) ** r)
        tail = Fraction(p ** (2 * p) * m**p) / (2 * m_param**p)
        scale = 2 ** (5 * p) * p ** (3 * p) * s2**p
        rhs_lo = scale * x_bounds[0] * double_sum + tail
        rhs_hi = scale * x_bounds[1] * double_sum + tail
        verdict = certify_le(energy, (rhs_lo, rhs_hi))
        if verdict != "unknown":
            status = verdict
            break
    return Inverse2Report(status, energy, rhs_lo, rhs_hi, (), d0_bounds, ceil_d0)


def log2_bounds_interval(lo: Fraction, hi: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    return log2_bounds(lo, prec)[0], log2_bounds(hi, prec)[1]


# ---------------------------------------------------------------------------
# rectangles and the extraction pipelines


@dataclass(frozen=True)
class Rectangle:
    """A product piece (sum of prefix) + L + L' found inside Q."""

    prefix: tuple[int, ...]
    rows: F2Set
    cols: F2Set

    def __post_init__(self) -> None:
        if self.rows.intersection(self.cols).elems:
            raise ValueError("L and L' must be disjoint")
        members = set(self.rows.elems) | set(self.cols.elems)
        if any(a in members for a in self.prefix):
            raise ValueError("prefix elements must avoid L and L'")

    def points(self) -> set[int]:
        shift = 0
        for a in self.prefix:
            shift ^= a
        return {shift ^ r ^ c for r in self.rows for c in self.cols}

    def area(self) -> int:
        return len(self.rows) * len(self.cols)


@dataclass(frozen=True)
class InverseParams:
    """Free parameters of the extraction pipeline (all recorded in reports).

    epsilon defaults to 1/4 at desk scale; the full-strength analysis would
    take 1/(16 K_1) with K_1 = 2^13 K, which is reported alongside for
    reference but is degenerate for desk-sized instances.
    """

    p: int = 2
    big_k: Fraction = Fraction(1)
    eta: Fraction = Fraction(1, 2)
    epsilon: Optional[Fraction] = None
    zeta: Fraction = Fraction(1, 4)
    width: int = 8
    depth: int = 4
    rounds: int = 24
    split_trials: int = 32
    split_exhaustive_limit: int = 12870  # C(16, 8): full split search below this
    coverage_target: Fraction = Fraction(1)
    min_rows: int = 1
    min_cols: int = 1
    seed: int = 0
    refine: bool = True
    refine_budget: int = 96
    stall_limit: int = 3

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not 0 < self.eta <= Fraction(1, 2):
            raise ValueError("eta must lie in (0, 1/2]")

    def derived_epsilon(self) -> Fraction:
        if self.epsilon is not None:
            return self.epsilon
        return Fraction(1, 4)

    def reference_epsilon(self) -> Fraction:
        k1 = 2**13 * self.big_k
        return 1 / (16 * k1)


@dataclass(frozen=True)
class ExtractionReport:
    rectangles: tuple[Rectangle, ...]
    covered: int
    q_size: int
    coverage: Fraction
    family_status: str
    trace: tuple[dict, ...]
    params: InverseParams
    warnings: tuple[str, ...]


def _pair_table(lam: F2Set) -> dict[int, tuple[int, int]]:
    """sum -> unordered pair of distinct Lambda elements (unique if
    Lambda is in the weight-4 family)."""
    table: dict[int, tuple[int, int]] = {}
    for a, b in itertools.combinations(lam.elems, 2):
        s = a ^ b
        if s in table:
            raise ValueError("pair sums collide; Lambda is not 4-dissociated")
        table[s] = (a, b)
    return table


def _subset_table(lam: F2Set, d: int, budget: int = 2_000_000) -> dict[int, tuple[int, ...]]:
    """sum -> d-subset of Lambda (unique under the weight-2d family)."""
    if comb(len(lam), d) > budget:
        raise BudgetError("subset table too large")
    table: dict[int, tuple[int, ...]] = {}
    for combo in itertools.combinations(lam.elems, d):
        s = 0
        for e in combo:
            s ^= e
        if s in table:
            raise ValueError(f"{d}-subset sums collide; Lambda is not {2*d}-dissociated")
        table[s] = combo
    return table


def _best_split(
    q_elems: list[int],
    pair_of: dict[int, tuple[int, int]],
    lam: F2Set,
    trials: int,
    exhaustive_limit: int,
    rng: random.Random,
) -> tuple[F2Set, F2Set, int, bool]:
    """Balanced split of Lambda maximizing the crossing mass of Q.

    Exhaustive over all balanced splits when their number is within the
    limit (the averaging argument then guarantees the best split carries at
    least half the mass); otherwise best of `trials` seeded random splits.
    """
    n_lam = len(lam)
    a = -((-n_lam) // 2)  # ceil
    elems = lam.elems

    def crossing(first: frozenset) -> int:
        cnt = 0
        for qq in q_elems:
            x, y = pair_of[qq]
            if (x in first) != (y in first):
                cnt += 1
        return cnt

    best = None
    exhaustive = comb(n_lam, a) <= exhaustive_limit
    if exhaustive:
        for combo in itertools.combinations(elems, a):
            first = frozenset(combo)
            score = crossing(first)
            if best is None or score > best[0]:
                best = (score, first)
    else:
        for _ in range(trials):
            combo = rng.sample(elems, a)
            first = frozenset(combo)
            score = crossing(first)
            if best is None or score > best[0]:
                best = (score, first)
    if exhaustive and n_lam >= 2:
        # averaging guarantee: the best balanced split crosses at least
        # 2 a (L - a) / (L (L-1)) of the mass, which exceeds half of it
        m = len(q_elems)
        if best[0] * n_lam * (n_lam - 1) < 2 * a * (n_lam - a) * m:
            raise AssertionError("best split below the averaging guarantee (bug)")
    first = best[1]
    lam1 = F2Set.from_bits(lam.dim, first)
    lam2 = lam.difference(lam1)
    return lam1, lam2, best[0], exhaustive


def _bite_once(
    remaining: set[int],
    lam: F2Set,
    pair_of: dict[int, tuple[int, int]],
    params: InverseParams,
    rng: random.Random,
    trace: list,
    energy_store: dict,
) -> Optional[Rectangle]:
    """One split + fiber + support + intersection pass; returns a rectangle
    with all points inside `remaining`, or None."""
    q_now = F2Set.from_bits(lam.dim, remaining)
    work = q_now
    if params.refine and len(work) > 2:
        conn = ConnectednessParams(
            k=max(2, params.p),
            search_budget=params.refine_budget,
            sumset_arity=2,
            seed=rng.randrange(1 << 30),
        )
        work = refine_connected(work, conn, energy_cache=energy_store).result
    lam1, lam2, crossing, split_exhaustive = _best_split(
        list(work.elems), pair_of, lam, params.split_trials, params.split_exhaustive_limit, rng
    )
    averaging_met = 2 * crossing >= len(work)
    decomp = FiberDecomposition.build(work, lam1, lam2)
    nonempty = decomp.nonempty()
    if not nonempty:
        trace.append({"stage": "fibers", "note": "no nonempty fibers"})
        return None
    fiber_of = {lam_: set(d.elems) for lam_, d in nonempty}
    p1 = params.p
    eps = params.derived_epsilon()
    min_support = max(params.min_rows, -((-eps.numerator * p1) // eps.denominator))
    # supports: for each second coordinate, the set of rows whose fiber holds it
    col_rows: dict[int, set[int]] = {}
    for lam_, d in nonempty:
        for mu in d.elems:
            col_rows.setdefault(mu, set()).add(lam_)
    raw_supports = {frozenset(rows) for rows in col_rows.values() if len(rows) >= min_support}
    if not raw_supports:
        trace.append({"stage": "supports", "note": "no supports above threshold"})
        return None
    # greedy selection needs equal sizes: trim every support to the common
    # size by keeping the rows with the largest fibers (ties lexicographic)
    psize = min(len(s) for s in raw_supports)
    trimmed = []
    for s in sorted(raw_supports, key=lambda fs: (-len(fs), tuple(sorted(fs)))):
        ranked = sorted(s, key=lambda lam_: (-len(fiber_of[lam_]), lam_))
        trimmed.append(frozenset(ranked[:psize]))
    supports = []
    seen = set()
    for s in trimmed:
        if s not in seen:
            seen.add(s)
            supports.append(s)
    chosen = greedy_disjoint_supports(supports, params.zeta, params.width)
    candidate_rows = sorted(set().union(*(supports[i] for i in chosen)))
    sets = [frozenset(fiber_of[lam_]) for lam_ in candidate_rows]
    best_rect = None
    best_score = None
    for depth in range(max(1, params.min_rows), min(params.depth, len(sets)) + 1):
        idx, inter, _ = _best_common_intersection(sets, depth, 200_000, rng)
        if len(inter) < params.min_cols:
            continue
        score = (depth * len(inter), depth)
        if best_score is None or score > best_score:
            best_score = score
            rows = F2Set.from_bits(lam.dim, (candidate_rows[i] for i in idx))
            cols = F2Set.from_bits(lam.dim, inter)
            best_rect = Rectangle((), rows, cols)
    if best_rect is None:
        trace.append({"stage": "intersection", "note": "no admissible rectangle"})
        return None
    pts = best_rect.points()
    if not pts <= remaining:
        raise AssertionError("extracted rectangle leaves the current set (bug)")
    trace.append(
        {
            "stage": "bite",
            "split_mass": crossing,
            "split_exhaustive": split_exhaustive,
            "averaging_met": averaging_met,
            "rows": len(best_rect.rows),
            "cols": len(best_rect.cols),
            "points": len(pts),
        }
    )
    return best_rect


def extract_rectangles_pair(
    q: F2Set, lam: F2Set, params: InverseParams
) -> ExtractionReport:
    """Peel disjoint rectangles L + L' out of Q inside Lambda + Lambda.

    Every returned rectangle is machine-checked to satisfy
    L + L' <= Q; pairwise disjointness holds because each round works on Q
    minus the points already covered.  An empty result with diagnostics is
    a legitimate outcome; rectangles are never fabricated.
    """
    warnings = []
    fam = in_family(lam, FamilySpec.zero(min(4 * params.p, max(1, len(lam))), lam.dim))
    if fam.status != "true":
        warnings.append(f"Lambda family status: {fam.status}")
    pair_of = _pair_table(lam)
    missing = [qq for qq in q.elems if qq not in pair_of]
    if missing:
        raise ValueError("Q is not contained in the 2-fold distinct sumset of Lambda")
    rng = random.Random(params.seed)
    remaining = set(q.elems)
    rects: list[Rectangle] = []
    trace: list[dict] = []
    energy_store: dict = {}
    stalls = 0
    q_size = len(q)
    for round_no in range(params.rounds):
        if not remaining:
            break
        covered_frac = Fraction(q_size - len(remaining), q_size) if q_size else Fraction(1)
        if covered_frac >= params.coverage_target:
            break
        rect = _bite_once(remaining, lam, pair_of, params, rng, trace, energy_store)
        if rect is None:
            stalls += 1
            if stalls >= params.stall_limit:
                break
            continue
        stalls = 0
        pts = rect.points()
        if not pts <= set(q.elems):
            raise AssertionError("rectangle not contained in the original Q (bug)")
        remaining -= pts
        rects.append(rect)
    covered = q_size - len(remaining)
    coverage = Fraction(covered, q_size) if q_size else Fraction(1)
    return ExtractionReport(
        tuple(rects), covered, q_size, coverage, fam.status, tuple(trace), params, tuple(warnings)
    )


@dataclass(frozen=True)
class PrefixExtractionReport:
    rectangle: Optional[Rectangle]
    prefix: tuple[int, ...]
    excess_found: bool
    pair_report: Optional[ExtractionReport]
    trace: tuple[dict, ...]
    params: InverseParams
    warnings: tuple[str, ...]


def extract_rectangles_d(
    q: F2Set, lam: F2Set, d: int, params: InverseParams
) -> PrefixExtractionReport:
    """Rectangle extraction inside the d-fold distinct sumset, d >= 2.

    Partitions Lambda into d parts, pigeonholes over (d-2)-prefixes keeping
    an energy-excess prefix of maximal fiber mass, and delegates to the
    pair extractor on the translated fiber.  The returned rectangle
    satisfies (sum of prefix) + L + L' <= Q, machine-checked.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if d == 2:
        rep = extract_rectangles_pair(q, lam, params)
        rect = max(rep.rectangles, key=lambda r: (r.area(),), default=None)
        return PrefixExtractionReport(
            rect, (), True, rep, rep.trace, params, rep.warnings
        )
    warnings = []
    fam = in_family(lam, FamilySpec.zero(min(2 * d * params.p, max(1, len(lam))), lam.dim))
    if fam.status != "true":
        warnings.append(f"Lambda family status: {fam.status}")
    subset_of = _subset_table(lam, d)
    for qq in q.elems:
        if qq not in subset_of:
            raise ValueError("Q is not contained in the d-fold distinct sumset of Lambda")
    rng = random.Random(params.seed)
    n_lam = len(lam)
    a = -((-n_lam) // d)  # ceil; the last part takes the remainder
    sizes = [a] * (d - 1) + [n_lam - a * (d - 1)]
    if sizes[-1] < 1:
        raise ValueError("Lambda too small to split into d parts")
    trace: list[dict] = []

    def part_score(parts: list[frozenset]) -> int:
        cnt = 0
        for qq in q.elems:
            combo = subset_of[qq]
            used = [0] * d
            ok = True
            for e in combo:
                for i, prt in enumerate(parts):
                    if e in prt:
                        used[i] += 1
                        break
            if all(u == 1 for u in used):
                cnt += 1
        return cnt

    best_parts = None
    best_mass = -1
    for _ in range(params.split_trials):
        perm = rng.sample(lam.elems, n_lam)
        parts = []
        at = 0
        for sz in sizes:
            parts.append(frozenset(perm[at : at + sz]))
            at += sz
        mass = part_score(parts)
        if mass > best_mass:
            best_mass = mass
            best_parts = parts
    trace.append({"stage": "partition", "mass": best_mass, "sizes": sizes})
    parts = best_parts
    # group Q by the (d-2)-prefix of its decomposition
    by_prefix: dict[tuple[int, ...], list[int]] = {}
    for qq in q.elems:
        combo = subset_of[qq]
        pref = []
        tail = []
        ok = True
        for i, prt in enumerate(parts):
            inside = [e for e in combo if e in prt]
            if len(inside) != 1:
                ok = False
                break
            (elem,) = inside
            if i < d - 2:
                pref.append(elem)
            else:
                tail.append(elem)
        if ok:
            by_prefix.setdefault(tuple(pref), []).append(qq)
    if not by_prefix:
        trace.append({"stage": "prefix", "note": "no aligned points"})
        return PrefixExtractionReport(None, (), False, None, tuple(trace), params, tuple(warnings))
    m_cor = 2**13 * (8 * params.big_k) ** (d - 1)
    candidates = []
    for pref, pts in by_prefix.items():
        shift = 0
        for e in pref:
            shift ^= e
        translated = F2Set.from_bits(lam.dim, (p_ ^ shift for p_ in pts))
        t_p = additive_energy(translated, params.p)
        excess = (
            Fraction(t_p) * m_cor**params.p
            > params.p ** (2 * params.p) * Fraction(len(translated)) ** params.p
        )
        candidates.append((excess, len(pts), pref, translated))
    with_excess = [c for c in candidates if c[0]]
    excess_found = bool(with_excess)
    pool = with_excess if with_excess else candidates
    pool.sort(key=lambda c: (-c[1], c[2]))
    _, _, pref, translated = pool[0]
    lam_pair = F2Set.from_bits(lam.dim, tuple(parts[d - 2] | parts[d - 1]))
    sub_params = replace(params, seed=rng.randrange(1 << 30))
    pair_rep = extract_rectangles_pair(translated, lam_pair, sub_params)
    trace.extend(pair_rep.trace)
    best = max(pair_rep.rectangles, key=lambda r: (r.area(),), default=None)
    rect = None
    if best is not None:
        rect = Rectangle(tuple(pref), best.rows, best.cols)
        if not rect.points() <= set(q.elems):
            raise AssertionError("prefixed rectangle escapes Q (bug)")
    return PrefixExtractionReport(
        rect, tuple(pref), excess_found, pair_rep, tuple(trace), params, tuple(warnings)
    )


# ---------------------------------------------------------------------------
# planted instance generation


@dataclass(frozen=True)
class PlantedInstance:
    q: F2Set
    lam: F2Set
    rows: tuple[F2Set, ...]
    cols: tuple[F2Set, ...]
    planted: F2Set
    noise: F2Set
    seed: int

    def planted_mass(self) -> int:
        return len(self.planted)


def plant_instance(
    h: int,
    row_size: int,
    col_size: int,
    noise_frac: Fraction,
    seed: int,
    n: int = 18,
    lambda_size: int = 16,
) -> PlantedInstance:
    """Plant h pairwise-disjoint rectangles in 2-fold sums of a random
    dissociated set, plus a fraction of random noise pairs.

    When Lambda is too small to give every rectangle private row and column
    blocks, rectangles share one column block; products stay disjoint
    because the row blocks are disjoint.
    """
    if h < 1 or row_size < 1 or col_size < 1:
        raise ValueError("need h, row and column sizes >= 1")
    rng = random.Random(seed)
    lam = random_dissociated_for_plant(n, lambda_size, rng)
    perm = rng.sample(lam.elems, lambda_size)
    rows: list[F2Set] = []
    cols: list[F2Set] = []
    need_private = h * (row_size + col_size)
    at = 0
    if need_private <= lambda_size:
        for _ in range(h):
            rows.append(F2Set.from_bits(n, perm[at : at + row_size]))
            at += row_size
            cols.append(F2Set.from_bits(n, perm[at : at + col_size]))
            at += col_size
    else:
        if h * row_size + col_size > lambda_size:
            raise ValueError("Lambda too small for the requested rectangles")
        shared = F2Set.from_bits(n, perm[h * row_size : h * row_size + col_size])
        for i in range(h):
            rows.append(F2Set.from_bits(n, perm[i * row_size : (i + 1) * row_size]))
            cols.append(shared)
    planted: set[int] = set()
    for r, c in zip(rows, cols):
        planted |= Rectangle((), r, c).points()
    mass = len(planted)
    noise_count = (noise_frac.numerator * mass) // noise_frac.denominator if mass else 0
    noise: set[int] = set()
    guard = 0
    while len(noise) < noise_count and guard < 10_000:
        guard += 1
        a, b = rng.sample(lam.elems, 2)
        pt = a ^ b
        if pt not in planted and pt not in noise:
            noise.add(pt)
    return PlantedInstance(
        F2Set.from_bits(n, planted | noise),
        lam,
        tuple(rows),
        tuple(cols),
        F2Set.from_bits(n, planted),
        F2Set.from_bits(n, noise),
        seed,
    )


def random_dissociated_for_plant(n: int, m: int, rng: random.Random) -> F2Set:
    from .dissociation import random_dissociated

    return random_dissociated(n, m, seed=rng.randrange(1 << 30))
