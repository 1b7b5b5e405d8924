import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from f2lab.exact import (
    certify_le,
    floor_log2,
    iroot,
    log2_bounds,
    pow2_bounds,
    pow_bounds,
    root_sum_dominates,
)


@given(st.integers(min_value=0, max_value=10**24), st.integers(min_value=1, max_value=7))
def test_iroot_floor_property(n, k):
    r = iroot(n, k)
    assert r**k <= n < (r + 1) ** k


def test_iroot_exact_powers():
    assert iroot(0, 3) == 0
    assert iroot(7**10, 10) == 7
    assert iroot(7**10 - 1, 10) == 6
    assert iroot(2**200, 4) == 2**50


@given(
    st.fractions(
        min_value=Fraction(1, 10**6), max_value=Fraction(10**6), max_denominator=10**6
    )
)
def test_floor_log2_matches_float(x):
    if x <= 0:
        return
    e = floor_log2(x)
    assert Fraction(2) ** e <= x < Fraction(2) ** (e + 1)


@pytest.mark.parametrize("x", [Fraction(3), Fraction(1, 3), Fraction(7, 5), Fraction(1023, 512)])
def test_log2_bounds_bracket_truth(x):
    lo, hi = log2_bounds(x, 24)
    truth = math.log2(float(x))
    assert float(lo) <= truth + 1e-9
    assert truth - 1e-9 <= float(hi)
    assert hi - lo <= Fraction(1, 1 << 24)


def test_log2_bounds_exact_powers():
    assert log2_bounds(Fraction(8), 16) == (Fraction(3), Fraction(3))
    assert log2_bounds(Fraction(1, 4), 16) == (Fraction(-2), Fraction(-2))


@pytest.mark.parametrize(
    "x", [Fraction(0), Fraction(1, 2), Fraction(5, 3), Fraction(-7, 4), Fraction(13, 8)]
)
def test_pow2_bounds_bracket_truth(x):
    lo, hi = pow2_bounds(x, 24)
    truth = 2.0 ** float(x)
    assert float(lo) <= truth * (1 + 1e-6)
    assert truth * (1 - 1e-6) <= float(hi)
    assert lo <= hi


def test_pow2_bounds_exact_integer_exponent():
    assert pow2_bounds(Fraction(5), 16) == (Fraction(32), Fraction(32))


def test_pow_bounds_rational_power():
    # 2^(3/2) = 2.828427...
    lo, hi = pow_bounds((Fraction(2), Fraction(2)), (Fraction(3, 2), Fraction(3, 2)), 32)
    truth = 2 ** 1.5
    assert float(lo) <= truth <= float(hi)
    assert float(hi - lo) < 1e-6


def test_certify_le():
    assert certify_le(3, (Fraction(4), Fraction(5))) == "holds"
    assert certify_le(6, (Fraction(4), Fraction(5))) == "violated"
    assert certify_le(Fraction(9, 2), (Fraction(4), Fraction(5))) == "unknown"


def test_root_sum_dominates_basic():
    # 8^(1/4) <= 1 + 1 i.e. T_2({a,b}) = 8 <= (1+1)^4
    assert root_sum_dominates(8, 1, 1, 4)
    assert not root_sum_dominates(17, 1, 1, 4)
    # equality through a zero side
    assert root_sum_dominates(21, 21, 0, 4)
    assert not root_sum_dominates(22, 21, 0, 4)


@settings(max_examples=200)
@given(
    st.integers(min_value=0, max_value=10**6),
    st.integers(min_value=0, max_value=10**6),
    st.integers(min_value=2, max_value=6),
)
def test_root_sum_dominates_vs_float(ta, tb, e):
    total = int((ta ** (1 / e) + tb ** (1 / e)) ** e * 0.999)
    if total >= 0:
        assert root_sum_dominates(total, ta, tb, e)
