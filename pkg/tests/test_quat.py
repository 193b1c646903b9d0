import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from arithequi.quat import (
    I,
    J,
    K,
    QuatMat2,
    Quaternion,
    dieudonne_det,
    hurwitz_elements_doubled,
    hurwitz_units,
    left_ideal_of,
    pair_is_unimodular,
    pair_is_unimodular_euclid,
    residues_mod,
    translation_length_H5,
    x_gamma,
)

half = st.integers(-6, 6)
hurwitz = st.builds(
    lambda w, x, y, z, h: Quaternion(*(Fraction(2 * t + h, 2) for t in (w, x, y, z))),
    half, half, half, half, st.integers(0, 1),
)
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
quats = st.builds(Quaternion, rationals, rationals, rationals, rationals)


def test_relations():
    assert Quaternion(1, 1, 1, 1).norm() == 4
    assert I * J == K and J * I == -K
    assert I * I == J * J == K * K == I * J * K == -1


@given(quats, quats)
def test_norm_multiplicative(p, q):
    assert (p * q).norm() == p.norm() * q.norm()
    assert (p * q).conj() == q.conj() * p.conj()
    assert (p + q).trace() == p.trace() + q.trace()


@given(quats.filter(bool))
def test_inverse(p):
    assert p * p.inv() == 1 and p.inv() * p == 1


def test_units():
    us = hurwitz_units()
    assert len(us) == 24
    for u in (1, -1, I, -I, J, -J, K, -K):
        assert u in us
    for signs in product((1, -1), repeat=4):
        assert Quaternion(*(Fraction(s, 2) for s in signs)) in us


def test_elements_match_box_scan():
    got = set(hurwitz_elements_doubled(3))
    want = {d for d in product(range(-4, 5), repeat=4)
            if len({v % 2 for v in d}) == 1 and 0 < sum(v * v for v in d) <= 12}
    assert got == want


@pytest.mark.parametrize("v,index", [(Quaternion(1), 1), (Quaternion(1, 1), 4), (Quaternion(2), 16),
                                     (Quaternion(1, 1, 1), 9)])
def test_left_ideal_index(v, index):
    L = left_ideal_of(v)
    assert L.index() == index == v.norm() ** 2
    assert len(residues_mod(v)) == index


def test_residues_are_distinct_mod_v():
    v = Quaternion(1, 2, 0, 1)
    res = residues_mod(v)
    vinv = v.inv()
    for a in res:
        for b in res:
            if a != b:
                assert not ((a - b) * vinv).is_hurwitz()


def test_unimodular_examples():
    assert pair_is_unimodular(Quaternion(1), Quaternion(0))
    assert not pair_is_unimodular(Quaternion(2), Quaternion(1, 1, 1, 1))
    assert pair_is_unimodular(Quaternion(1, 1), J)


@settings(max_examples=60)
@given(hurwitz, hurwitz)
def test_unimodular_lattice_vs_euclid(u, v):
    if u or v:
        assert pair_is_unimodular(u, v) == pair_is_unimodular_euclid(u, v)


def test_dieudonne_examples():
    assert dieudonne_det(QuatMat2.of(1, 0, 0, 1)) == 1
    q = Quaternion(1, 2, -1, 3)
    assert dieudonne_det(QuatMat2.of(q, 0, 0, q.conj() * Fraction(1, q.norm()))) == 1


small_int_quat = st.builds(Quaternion, *(st.integers(-3, 3),) * 4)


@settings(max_examples=60)
@given(*(small_int_quat,) * 8)
def test_dieudonne_multiplicative(a, b, c, d, e, f, g, h):
    X, Y = QuatMat2(a, b, c, d), QuatMat2(e, f, g, h)
    assert dieudonne_det(X * Y) == dieudonne_det(X) * dieudonne_det(Y)


def test_x_gamma_examples():
    g = QuatMat2.of(2, 1, 1, 1)
    assert math.isclose(x_gamma(g), 3.5, abs_tol=1e-12)
    assert math.isclose(translation_length_H5(g), 2 * math.acosh(1.5), abs_tol=1e-9)
    one = QuatMat2.of(1, 0, 0, 1)
    assert math.isclose(x_gamma(one), 1, abs_tol=1e-9)
    assert translation_length_H5(one) < 1e-6


def _elementary(t):
    return QuatMat2.of(1, t, 0, 1)


@settings(max_examples=40)
@given(st.lists(hurwitz, min_size=1, max_size=4))
def test_x_gamma_at_least_one(ts):
    # products of translations and the inversion generate elements of SL2(O)
    S = QuatMat2.of(0, -1, 1, 0)
    g = QuatMat2.of(1, 0, 0, 1)
    for t in ts:
        g = g * _elementary(t) * S
    assert dieudonne_det(g) == 1
    assert x_gamma(g) >= 1 - 1e-9
