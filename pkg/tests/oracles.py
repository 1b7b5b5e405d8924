"""Independent definition-level oracles used to freeze expected values.

Everything here enumerates the definitions directly and stays deliberately
dumb; nothing imports the fast paths it is used to check.
"""

from __future__ import annotations

import itertools
from functools import reduce


def naive_wht(values):
    """O(N^2) transform straight from the character-sum definition."""
    n = len(values)
    out = []
    for r in range(n):
        acc = 0
        for x, v in enumerate(values):
            if v:
                acc += -v if (r & x).bit_count() & 1 else v
        out.append(acc)
    return out


def energy_tuples(elems, k):
    """T_k by full enumeration of 2k-tuples (ordered)."""
    count = 0
    for left in itertools.product(elems, repeat=k):
        sl = reduce(lambda a, b: a ^ b, left, 0)
        for right in itertools.product(elems, repeat=k):
            sr = reduce(lambda a, b: a ^ b, right, 0)
            if sl == sr:
                count += 1
    return count


def energy_tuples_multiset(set_list):
    """Mixed-energy count: a_1+...+a_k = a_(k+1)+...+a_(2k), a_i in A_i."""
    k = len(set_list) // 2
    count = 0
    for left in itertools.product(*set_list[:k]):
        sl = reduce(lambda a, b: a ^ b, left, 0)
        for right in itertools.product(*set_list[k:]):
            sr = reduce(lambda a, b: a ^ b, right, 0)
            if sl == sr:
                count += 1
    return count


def convolve_defn(f, g):
    """(f*g)(x) = sum_s f(s) g(x^s) by double loop."""
    n = len(f)
    return [sum(f[s] * g[x ^ s] for s in range(n)) for x in range(n)]


def subset_xor_hits(elems, k, forbidden):
    """All nonempty subsets of size <= k whose XOR lands in forbidden."""
    hits = []
    for size in range(1, k + 1):
        for combo in itertools.combinations(elems, size):
            if reduce(lambda a, b: a ^ b, combo) in forbidden:
                hits.append(combo)
    return hits


def permanent_perms(rows):
    """Permanent by enumerating injective maps rows -> columns."""
    x = len(rows)
    y = len(rows[0]) if rows else 0
    if x > y:
        return permanent_perms([list(col) for col in zip(*rows)])
    total = 0
    for cols in itertools.permutations(range(y), x):
        prod = 1
        for i, j in enumerate(cols):
            prod *= rows[i][j]
            if prod == 0:
                break
        total += prod
    return total


def distinct_sums(elems, d):
    """Set of XORs of d-element subsets."""
    out = set()
    for combo in itertools.combinations(elems, d):
        out.add(reduce(lambda a, b: a ^ b, combo, 0))
    return out
