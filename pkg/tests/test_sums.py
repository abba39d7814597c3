import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from powmod.arith import mertens
from powmod.characters import build_structure, enumerate_characters, principal
from powmod.errors import DomainError, RangeError, ResourceError
from powmod.oracles import mobius_td, naive_exp_sum, naive_twisted_sum, walsh_product_form
from powmod.sums import (
    character_sums,
    class_sums,
    dirichlet_poly,
    dyadic_block,
    exp_sum,
    max_exp_sum,
    max_over_characters,
    max_progression_sum,
    mobius_sum,
    progression_sum,
    psi_sum,
    walsh_coefficient,
)


def nonprincipal(q):
    return next(c for c in enumerate_characters(build_structure(q)) if not c.is_principal)


def test_mobius_sum_examples(sieve):
    assert mobius_sum(10, principal(1), sieve).value == -1
    for q in (1, 7, 8, 30):
        for c in enumerate_characters(build_structure(q)):
            assert mobius_sum(1, c, sieve).value == 1
    chi4 = nonprincipal(4)
    brute = sum(mobius_td(n) * (-1) ** ((n - 1) // 2) for n in range(1, 21, 2))
    assert mobius_sum(20, chi4, sieve).value == brute == 1
    r = mobius_sum(20, chi4, sieve)
    assert r.normalized == pytest.approx(1 / 20)
    with pytest.raises(RangeError):
        mobius_sum(10**6, chi4, sieve)


def test_psi_sum_examples(sieve):
    psi10 = 3 * math.log(2) + 2 * math.log(3) + math.log(5) + math.log(7)
    assert psi_sum(10, principal(1), sieve).value.real == pytest.approx(psi10, rel=1e-15)
    assert psi_sum(1, principal(1), sieve).value == 0
    assert psi_sum(10, principal(2), sieve).value.real == pytest.approx(psi10 - 3 * math.log(2), rel=1e-15)


def test_max_over_characters_examples(sieve):
    # mu(9) = 0, so |sum over odd n <= 10| = |1 - 1 - 1 - 1 + 0| = 2
    r = max_over_characters(10, 2, "mobius", sieve)
    assert r.value == 2
    assert max_over_characters(10, 1, "mobius", sieve).value == 1
    for q in (3, 8, 16, 45):
        assert max_over_characters(1, q, "mobius", sieve).value == 1


def test_max_over_characters_matches_per_character(sieve):
    for q in (8, 9, 16, 24):
        chars, vals = character_sums(5000, q, "psi", sieve)
        for c, v in zip(chars, vals):
            assert abs(v - psi_sum(5000, c, sieve).value) < 1e-9
        r = max_over_characters(5000, q, "psi", sieve)
        first = next(c for c, v in zip(chars, vals) if abs(v) >= np.abs(vals).max() - 1e-9)
        assert r.argmax_label == first.label
        assert r.argmax_label == max_over_characters(5000, q, "psi", sieve).argmax_label


def test_exp_sum_examples(sieve):
    assert exp_sum(10, 2, 1, sieve) == pytest.approx(3)
    for q, a in ((5, 0), (1, 0), (12, 12)):
        assert exp_sum(777, q, a, sieve) == pytest.approx(mertens(777, sieve))
    for a in range(7):
        assert exp_sum(500, 7, -a, sieve) == pytest.approx(exp_sum(500, 7, a, sieve).conjugate(), abs=1e-12)


def test_progression_sum_examples(sieve):
    assert progression_sum(20, 4, 1, sieve) == -2
    assert progression_sum(321, 1, 0, sieve) == mertens(321, sieve)
    for q in (1, 2, 6, 64):
        assert sum(progression_sum(9999, q, a, sieve) for a in range(q)) == mertens(9999, sieve)


def test_max_exp_and_progression(sieve):
    assert max_exp_sum(10, 2, sieve).value == pytest.approx(3)
    assert max_exp_sum(1000, 1, sieve).value == abs(mertens(1000, sieve))
    assert max_progression_sum(1000, 1, sieve).value == abs(mertens(1000, sieve))
    for q in (3, 10, 16):
        r = max_exp_sum(3000, q, sieve)
        assert r.value == pytest.approx(max(abs(naive_exp_sum(3000, q, a)) for a in range(q)), abs=1e-9)
        assert r.value <= 3000
        units = [a for a in range(q) if math.gcd(a, q) == 1]
        assert max_progression_sum(3000, q, sieve).value == max(abs(progression_sum(3000, q, a, sieve)) for a in units)


def test_partition_and_fourier_relations(sieve):
    x = 10**5
    M = mertens(x, sieve)
    for q in (1, 2, 5, 16, 37, 64):
        D = class_sums(x, q, "mobius", sieve)
        assert int(D.sum()) == M
    for q in (3, 8, 16):
        D = class_sums(x, q, "mobius", sieve)
        for a in range(q):
            fourier = sum(cmath.exp(2j * math.pi * a * b / q) * int(D[b]) for b in range(q))
            assert abs(exp_sum(x, q, a, sieve) - fourier) < 1e-8


def test_primitive_sums_against_double_loop(sieve):
    for q in (5, 8, 9):
        for c in enumerate_characters(build_structure(q)):
            if not c.is_primitive:
                continue
            x = 200 * q
            values = [c(n) for n in range(q)]
            brute = naive_twisted_sum(x, values, mobius_td)
            assert abs(mobius_sum(x, c, sieve).value - brute) < 1e-10


def test_dirichlet_poly_examples(sieve):
    chi = nonprincipal(7)
    direct = sum(chi(n) for n in range(11, 11 + 40))
    assert dirichlet_poly(10, 40, 0.0, chi) == pytest.approx(direct, abs=1e-12)
    assert abs(dirichlet_poly(0, 7, 0.0, chi)) < 1e-12
    with pytest.raises(ResourceError):
        dirichlet_poly(0, 1000, 1.0, chi, cap=500)
    with pytest.raises(DomainError):
        dirichlet_poly(0, 10, 1e12, chi)
    with pytest.raises(DomainError):
        dirichlet_poly(-1, 10, 1.0, chi)


@given(st.integers(0, 5000), st.integers(1, 3000), st.floats(-1e4, 1e4))
@settings(max_examples=200, deadline=None)
def test_dirichlet_poly_trivial_bound(M, N, t):
    chi = nonprincipal(9)
    assert abs(dirichlet_poly(M, N, t, chi)) <= N + 1e-9


def test_dirichlet_poly_real_cutoffs():
    chi = nonprincipal(9)
    # (513.5, 515] holds the two integers 514 and 515
    assert dirichlet_poly(513.5, 1.5, 0.0, chi) == pytest.approx(chi(514) + chi(515))


def test_dyadic_block_examples():
    chi = nonprincipal(5)
    assert dyadic_block(37, 0, chi) == pytest.approx(dirichlet_poly(37, 37, 0.0, chi), abs=1e-12)
    assert dyadic_block(1, 2, principal(1)) == pytest.approx(0.25)
    s = complex(0.7, 13.0)
    bound = sum(n**-0.7 for n in range(101, 201))
    assert abs(dyadic_block(100, s, chi)) <= bound
    brute = sum(chi(n) * n ** (-s) for n in range(101, 201))
    assert dyadic_block(100, s, chi) == pytest.approx(brute, abs=1e-12)


def test_walsh_examples(sieve):
    assert walsh_coefficient(3, [], sieve) == -2
    assert walsh_coefficient(1, [0], sieve) == -1
    assert walsh_coefficient(1, 0b1, sieve) == -1
    assert walsh_coefficient(3, [], sieve, mu_zero=1) == -1
    with pytest.raises(ResourceError):
        walsh_coefficient(31, [], sieve)
    with pytest.raises(RangeError):
        walsh_coefficient(20, [], sieve)
    with pytest.raises(DomainError):
        walsh_coefficient(3, [3], sieve)


@pytest.mark.parametrize("n", range(1, 9))
def test_walsh_product_form_all_subsets(sieve, n):
    for mask in range(1 << n):
        A = [j for j in range(n) if mask >> j & 1]
        assert walsh_coefficient(n, A, sieve) == walsh_product_form(n, A, sieve.mu)
    assert walsh_coefficient(n, [], sieve) == mertens((1 << n) - 1, sieve)
