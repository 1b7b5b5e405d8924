import random
from fractions import Fraction
from math import comb

import pytest

from f2lab.bench import (
    build_majority,
    check_bourgain_intersection,
    check_chang,
    check_diss_energy,
    check_full_sumset_lower,
    check_parseval_spectrum,
    check_rudin_even,
    check_spectrum_energy_lower,
    check_sumset_energy,
    hamming_sphere,
    sweep_bourgain,
    sweep_chang,
    sweep_diss_energy,
    sweep_full_sumset_lower,
    sweep_majority,
    sweep_spectrum_energy_lower,
    sweep_sumset_energy,
    verify_majority,
    weight1_binomial_value,
)
from f2lab.core import F2Set, distinct_sumset_power
from f2lab.dissociation import random_dissociated
from f2lab.energy import additive_energy
from f2lab.exact import floor_log2
from f2lab.wht import spectrum_of_set

from oracles import naive_wht


def subspace(dim, free):
    """Coordinate subspace spanned by the first `free` basis vectors."""
    return F2Set(dim, tuple(sorted(x for x in range(1 << dim) if x < (1 << free))))


def test_chang_subspace_case():
    h = subspace(6, 4)  # delta = 1/4, codimension 2
    delta = Fraction(len(h), 64)
    lam = F2Set(6, (16, 32))  # dissociated inside the annihilator
    rep = check_chang(h, delta, lam)
    assert rep.status == "holds"
    assert rep.lhs == 2  # <= 2 * log(1/delta) = 4


def test_chang_precondition_failures():
    h = subspace(6, 4)
    bad_lam = F2Set(6, (16, 32, 48))  # dependent
    assert check_chang(h, Fraction(1, 4), bad_lam).status == "precondition-failed"
    outside = F2Set(6, (1,))  # not in R_alpha for the subspace
    assert check_chang(h, Fraction(1, 4), outside).status == "precondition-failed"


def test_chang_full_group_trivial():
    g = F2Set(4, tuple(range(16)))
    rep = check_chang(g, Fraction(1), F2Set(4, ()))
    assert rep.status == "holds"


def test_parseval_subspace_equality():
    h = subspace(6, 4)
    rep = check_parseval_spectrum(h, Fraction(1, 4))
    assert rep.status == "holds"
    assert rep.lhs == rep.rhs == 4  # equality at alpha = delta


def test_diss_energy_frozen_example():
    rep = check_diss_energy(F2Set(4, (1, 2, 4)), 2)
    assert rep.status == "holds"
    assert rep.lhs == 21 and rep.rhs == 36


def test_diss_energy_singleton():
    rep = check_diss_energy(F2Set(4, (3,)), 2)
    assert rep.status == "holds" and rep.lhs == 1


def test_diss_energy_refuses_dependent():
    rep = check_diss_energy(F2Set(3, (1, 2, 3)), 2)
    assert rep.status == "precondition-failed"


def test_rudin_all_ones_reduces_to_diss_energy():
    lam = F2Set(4, (1, 2, 4))
    rep = check_rudin_even(lam, [1, 1, 1], 2)
    assert rep.status == "holds"
    assert rep.lhs == 21  # same moment as T_2(Lambda)


def test_rudin_single_nonzero_coefficient():
    lam = F2Set(4, (1, 2, 4))
    rep = check_rudin_even(lam, [3, 0, 0], 2)
    assert rep.status == "holds"
    assert rep.lhs == 3**4  # |f|^(2p) constant


def test_rudin_random_signed():
    rng = random.Random(10)
    for _ in range(20):
        n = rng.randint(4, 8)
        m = rng.randint(1, min(6, n))
        lam = random_dissociated(n, m, seed=rng.randrange(1 << 30))
        coeffs = [rng.randint(-4, 4) for _ in range(m)]
        p = rng.randint(2, 3)
        rep = check_rudin_even(lam, coeffs, p)
        assert rep.status == "holds"


def test_sumset_energy_d1_reduces():
    lam = F2Set(5, (1, 2, 4, 8))
    rep = check_sumset_energy(lam, lam, 1, 2)
    assert rep.status == "holds"


def test_sumset_energy_full_pair_sumset():
    lam = F2Set(7, tuple(1 << i for i in range(6)))
    q = distinct_sumset_power(lam, 2)
    rep = check_sumset_energy(q, lam, 2, 2)
    assert rep.status == "holds"
    assert rep.lhs == additive_energy(q, 2)


def test_full_sumset_lower_frozen():
    lam = F2Set(9, tuple(1 << i for i in range(8)))
    rep = check_full_sumset_lower(lam, 2, 2)
    assert rep.status == "holds"
    ways = 24 // (2 * 2) ** 1  # (pd)!/(d!)^p with p = d = 2: 24/4 = 6
    assert rep.detail == f"intermediate={comb(8, 4) * 6 * 6}"


def test_full_sumset_lower_d1():
    lam = F2Set(8, tuple(1 << i for i in range(6)))
    rep = check_full_sumset_lower(lam, 1, 2)
    assert rep.status == "holds"


def test_spectrum_energy_lower_subspace_equality():
    h = subspace(6, 4)
    annihilator = F2Set(6, (0, 16, 32, 48))
    for k in (2, 3):
        rep = check_spectrum_energy_lower(h, annihilator, k, Fraction(1, 4))
        assert rep.status == "holds"
        assert Fraction(rep.lhs) == rep.rhs  # subgroup equality case


def test_spectrum_energy_lower_singleton_zero():
    h = subspace(6, 4)
    rep = check_spectrum_energy_lower(h, F2Set(6, (0,)), 2, Fraction(1, 4))
    assert rep.status == "holds"
    assert rep.lhs == 1


def test_spectrum_energy_lower_precondition():
    h = subspace(6, 4)
    rep = check_spectrum_energy_lower(h, F2Set(6, (1,)), 2, Fraction(1, 4))
    assert rep.status == "precondition-failed"


def test_bourgain_subspace_basis():
    h = subspace(8, 4)  # delta = 1/16, log(1/delta) = 4, d = 1 allowed
    lam = F2Set(8, (16, 32, 64, 128))  # basis of the annihilator directions
    rep = check_bourgain_intersection(h, lam, Fraction(1, 16), 1)
    assert rep.status == "holds"
    assert rep.lhs == 4  # all four frequencies are in R_alpha


def test_bourgain_delta_guard():
    g = F2Set(4, tuple(range(8)))
    rep = check_bourgain_intersection(g, F2Set(4, (1,)), Fraction(1, 4), 1)
    assert rep.status == "precondition-failed"


def test_hamming_sphere_basics():
    assert hamming_sphere(4, 0).elems == (0,)
    assert hamming_sphere(4, 1).elems == (1, 2, 4, 8)
    for w in range(5):
        assert len(hamming_sphere(4, w)) == comb(4, w)


def test_weight1_binomial_values_match_brute_spectrum():
    # exact agreement between the closed form and the naive transform
    for nprime in range(3, 11):
        threshold = (nprime + 1) // 2
        table = [0] * (1 << nprime)
        for x in range(1 << nprime):
            if x.bit_count() >= threshold:
                table[x] = 1
        spectrum = naive_wht(table)
        assert abs(spectrum[1]) == weight1_binomial_value(nprime)


def test_majority_frozen_nprime4():
    inst = build_majority(8, Fraction(1, 64))
    assert inst.nprime == 4 and inst.k == 4
    assert inst.inner_size == 11
    assert abs(inst.weight_values[1]) == 3 == weight1_binomial_value(4)


def test_majority_reports_all_hold():
    for nprime in (3, 5, 8):
        inst = build_majority(nprime + 4, Fraction(1, 64))
        for rep in verify_majority(inst, d=1):
            assert rep.status == "holds", (nprime, rep.theorem)


def test_majority_higher_d():
    inst = build_majority(10, Fraction(1, 64))
    for d in (1, 2, 3):
        reports = verify_majority(inst, d)
        inter = [r for r in reports if r.theorem == "majority-sumset-intersection"][0]
        assert inter.status == "holds"
        assert inter.rhs == inst.nprime * comb(inst.k, d - 1)


def test_majority_spectrum_count_matches_direct():
    # cross-check the structured count against a full-space transform
    inst = build_majority(8, Fraction(1, 64))
    full = F2Set.from_bits(8, inst.inner.elems)  # embedding: outer coords zero
    table = spectrum_of_set(full)
    alpha_sq = inst.alpha_used**2
    n_full = 1 << 8
    direct = sum(1 for v in table.values if Fraction(v * v) >= alpha_sq * n_full**2)
    assert direct == inst.spectrum_count(alpha_sq)


def test_parseval_full_group():
    g = F2Set(4, tuple(range(16)))
    rep = check_parseval_spectrum(g, Fraction(1))
    assert rep.status == "holds"
    assert rep.lhs == 1  # R_1(G) = {0}


def test_full_sumset_lower_larger_instance():
    # |Lambda_1| = 12, d = 2, p = 3 (boundary of p <= |Lambda_1|/(2d))
    lam = F2Set(13, tuple(1 << i for i in range(12)))
    rep = check_full_sumset_lower(lam, 2, 3)
    assert rep.status == "holds"


def test_bourgain_on_majority_instance():
    inst = build_majority(10, Fraction(1, 64))  # nprime = 6, k = 4
    a = F2Set.from_bits(10, inst.inner.elems)  # embedded: outer coords zero
    lam = F2Set(10, tuple(1 << i for i in range(10)))  # full standard basis
    alpha = inst.alpha_used
    rep = check_bourgain_intersection(a, lam, alpha, 1)
    assert rep.status == "holds"
    # weight-1 frequencies: all n' inner ones plus the k outer ones
    assert rep.lhs == inst.nprime + inst.k


def test_majority_formula_agreement_up_to_20():
    # brute-force spectrum agrees with the binomial closed form through
    # the full stated range of inner dimensions
    for nprime in range(17, 21):
        inst = build_majority(nprime + 4, Fraction(1, 64))
        assert abs(inst.weight_values[1]) == weight1_binomial_value(nprime)


def test_sweeps_zero_violations_small():
    assert all(r.status == "holds" for r in sweep_chang(10, 101))
    assert all(r.status == "holds" for r in sweep_diss_energy(10, 102))
    assert all(r.status == "holds" for r in sweep_sumset_energy(10, 103))
    assert all(r.status == "holds" for r in sweep_full_sumset_lower(5, 104))
    assert all(r.status == "holds" for r in sweep_spectrum_energy_lower(10, 105))
    assert all(r.status == "holds" for r in sweep_bourgain(5, 106))
    assert all(r.status == "holds" for r in sweep_majority((3, 4, 5), Fraction(1, 64)))
