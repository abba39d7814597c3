import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from powmod.arith import factor
from powmod.characters import (
    build_structure,
    character_from_label,
    conductor,
    enumerate_characters,
    evaluate,
    induce,
    principal,
    root_of_unity,
)
from powmod.errors import DomainError, ResourceError
from powmod.oracles import brute_characters, brute_conductor


def chars(q):
    return list(enumerate_characters(build_structure(q)))


def test_structure_examples():
    s9 = build_structure(9)
    assert [(g.generator, g.order) for g in s9.generators] == [(2, 6)]
    s8 = build_structure(8)
    assert [(g.generator, g.order) for g in s8.generators] == [(7, 2), (5, 2)]
    s2 = build_structure(2)
    assert s2.generators == ()
    assert len(s2.units) == 1


@pytest.mark.parametrize("q", [1, 2, 3, 4, 8, 9, 12, 16, 25, 27, 72, 100, 200, 243, 256])
def test_dlog_round_trip(q):
    s = build_structure(q)
    assert math.prod(s.orders) == len(s.units) == (factor(q).phi() if q > 1 else 1)
    for u in s.units.tolist():
        exps = s.dlog(u)
        back = 1 % q
        for g, e in zip(s.generators, exps):
            back = back * pow(g.lifted, e, q) % q
        assert back == u % q
    if q > 1:
        assert s.dlog(0) is None


def test_counts_and_primitivity():
    assert len(chars(5)) == 4
    c8 = chars(8)
    assert len(c8) == 4
    assert sum(c.is_primitive for c in c8) == 2
    c2 = chars(2)
    assert len(c2) == 1 and c2[0].is_principal


def test_evaluate_examples():
    assert evaluate(principal(5), 3) == 1
    assert all(evaluate(c, 6) == 0 for c in chars(8))
    chi = build_structure(9).character((1,))
    assert abs(evaluate(chi, 2) - cmath.exp(2j * math.pi / 6)) < 1e-15
    assert chi.phase(2) == Fraction(1, 6)


def test_conductor_examples():
    assert conductor(principal(8)) == 1
    assert conductor(build_structure(9).character((1,))) == 9
    s8 = build_structure(8)
    # slot 0 is -1, slot 1 is 5: trivial on 5, nontrivial on -1
    assert conductor(s8.character((1, 0))) == 4


@pytest.mark.parametrize("q", [1, 2, 3, 4, 5, 8, 9, 12, 16, 24, 25, 27, 32, 45, 72])
def test_against_brute_force(q):
    ours = chars(q)
    brute = brute_characters(q)
    assert len(ours) == len(brute)
    B = np.array(brute)
    matched = set()
    for c in ours:
        d = np.abs(B - c.value_table).max(axis=1)
        j = int(np.argmin(d))
        assert d[j] < 1e-9 and j not in matched
        matched.add(j)
        assert c.conductor == brute_conductor(brute[j], q)


@pytest.mark.parametrize("q", [7, 16, 60, 81, 128, 200])
def test_orthogonality_and_distinctness(q):
    cs = chars(q)
    V = np.array([c.value_table for c in cs])
    phi = len(build_structure(q).units)
    assert len(cs) == phi
    for c, total in zip(cs, V.sum(axis=1)):
        assert abs(total - (phi if c.is_principal else 0)) < 1e-10
    G = V @ V.conj().T
    assert np.allclose(G, phi * np.eye(phi), atol=1e-9)


@given(st.sampled_from([8, 9, 15, 16, 27, 49, 64, 100, 243]), st.data())
def test_multiplicative_periodic_and_zero_off_units(q, data):
    cs = chars(q)
    c = cs[data.draw(st.integers(0, len(cs) - 1))]
    m = data.draw(st.integers(-10**6, 10**6))
    n = data.draw(st.integers(-10**6, 10**6))
    assert abs(c(m * n) - c(m) * c(n)) < 1e-12
    assert c(n) == c(n + q)
    assert (c(n) == 0) == (math.gcd(n, q) > 1)
    assert q % c.conductor == 0
    if c.is_primitive:
        assert c.conductor == q


def test_induce_examples():
    assert induce(principal(1), 8) == principal(8)
    chi4 = next(c for c in chars(4) if not c.is_principal)
    up = induce(chi4, 8)
    assert up.q == 8 and conductor(up) == 4
    for n in range(1, 40, 2):
        assert abs(up(n) - chi4(n)) < 1e-15
    chi3 = next(c for c in chars(3) if not c.is_principal)
    up = induce(chi3, 12)
    assert chi3(2) != 0 and up(2) == 0
    with pytest.raises(DomainError):
        induce(chi4, 6)


@pytest.mark.parametrize("q", [9, 16, 40, 81])
def test_induction_round_trip_over_all_characters(q):
    for c in chars(q):
        for mult in (2, 3):
            up = induce(c, q * mult)
            assert up.conductor == c.conductor
            for n in range(1, 3 * q * mult):
                if math.gcd(n, q * mult) == 1:
                    assert abs(up(n) - c(n)) < 1e-12


def test_labels_round_trip():
    for q in (1, 8, 9, 72):
        for c in chars(q):
            assert character_from_label(c.label) == c
    with pytest.raises(DomainError):
        character_from_label("8:5,0")


def test_conjugate_and_real():
    for c in chars(13):
        cc = c.conjugate()
        assert np.allclose(cc.value_table, np.conj(c.value_table))
        assert c.is_real == (cc == c)
    assert sum(c.is_real for c in chars(8)) == 4
    assert sum(c.is_real for c in chars(7)) == 2


def test_roots_exact_at_quarter_turns():
    assert root_of_unity(1, 4) == 1j
    assert root_of_unity(2, 4) == -1
    assert root_of_unity(3, 12) == 1j


def test_structure_cap():
    with pytest.raises(ResourceError):
        build_structure(factor(10007 * 10009), cap=10**6)
