import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from arithequi.core_arith import phi_summatory, zeta_K2
from arithequi.mertens import (
    farey_points,
    fundamental_domain_report,
    hurwitz_fundamental_domain_report,
    psi_hurwitz,
    psi_quadratic,
    psi_quadratic_direct,
    psi_rational,
)
from arithequi.qfield import OK, QuadInt, ideal_from_gens, ideal_product, principal_ideal, units
from arithequi.quat import Quaternion, hurwitz_elements_doubled, pair_is_unimodular


def _shear_classes_rational(s):
    """Coprime (u, v) with |v| <= s modulo (u, v) -> (u + kv, v), by explicit reduction."""
    seen = set()
    for v in range(-s, s + 1):
        for u in range(-s - 1, s + 2):
            if math.gcd(u, v) != 1:
                continue
            seen.add((u % abs(v), v) if v else (u, 0))
    return len(seen)


def test_psi_rational_examples():
    assert psi_rational(1) == 4
    assert psi_rational(10) == 66


@pytest.mark.parametrize("s", [1, 2, 5, 13, 30])
def test_psi_rational_against_class_enumeration(s):
    assert psi_rational(s) == _shear_classes_rational(s)


def test_psi_rational_identity():
    for s in range(1, 201):
        assert psi_rational(s) == 2 * phi_summatory(s) + 2


def test_psi_quadratic_small():
    r = psi_quadratic(-4, OK(-4), 1)
    assert r.count == 8
    assert r.breakdown == {0: 4, 1: 4}


@pytest.mark.parametrize("D", [-3, -4, -7, -20])
def test_psi_quadratic_against_ideal_sum_oracle(D):
    m = OK(D)
    for s in (3, 7):
        assert psi_quadratic(D, m, s).count == psi_quadratic_direct(D, m, s)
    if D == -20:
        m2 = ideal_from_gens([QuadInt(D, 2), QuadInt(D, 1, 1)])
        assert psi_quadratic(D, m2, 6).count == psi_quadratic_direct(D, m2, 6)


def test_psi_quadratic_class_invariance():
    D = -20
    m = ideal_from_gens([QuadInt(D, 2), QuadInt(D, 1, 1)])
    base = psi_quadratic(D, m, 12).count
    for u in (QuadInt(D, 3), QuadInt(D, 1, 1), QuadInt(D, 2, -1)):
        assert psi_quadratic(D, ideal_product(m, principal_ideal(u)), 12).count == base


def test_psi_hurwitz_shells():
    assert psi_hurwitz(Fraction(1, 2)).count == 24
    a, b = psi_hurwitz(3), psi_hurwitz(5)
    assert b.count - a.count == sum(v for n, v in b.breakdown.items() if 3 < n <= 5)


def test_psi_hurwitz_shell_against_unimodular_pairs():
    # classes with N(v) = 2: residues u of O/Ov with (u, v) unimodular
    v = Quaternion(1, 1)
    residues = [Quaternion.from_doubled(d) for d in hurwitz_elements_doubled(4)] + [Quaternion(0)]
    classes = set()
    vinv = v.inv()
    for u in residues:
        if not pair_is_unimodular(u, v):
            continue
        # u ~ u' iff (u - u') v^-1 in O
        if not any(((u - w) * vinv).is_hurwitz() for w in classes):
            classes.add(u)
    shell = psi_hurwitz(2).breakdown[2]
    # 24 choices of v of norm 2, each contributes the same number of classes
    assert shell == 24 * len(classes)


def test_farey_rational():
    pts = farey_points("rational", 3, (0, 1))
    assert pts == [(Fraction(0), 2), (Fraction(1, 3), 2), (Fraction(1, 2), 2),
                   (Fraction(2, 3), 2), (Fraction(1), 2)]


def test_farey_quadratic_total_weight():
    s = 120
    pts = farey_points(("quadratic", -4, OK(-4)), s, [(0, 1), (0, 1)], half_open=True)
    mass = sum(w for _, w in pts)
    expected = 2 * math.pi * s * s / (4 * zeta_K2(-4, 1e-9).value)
    assert abs(mass / expected - 1) < 0.05


@pytest.mark.parametrize("D", [-4, -3, -20])
def test_fundamental_domain_reconciles(D):
    rep = fundamental_domain_report(D, OK(D), 20)
    assert rep["reconciled"]


def test_hurwitz_fundamental_domain_reconciles():
    assert hurwitz_fundamental_domain_report(3)["reconciled"]


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 40), st.integers(1, 40))
def test_psi_monotone(s, t):
    lo, hi = sorted((s, t))
    assert psi_quadratic(-4, OK(-4), lo).count <= psi_quadratic(-4, OK(-4), hi).count
    assert psi_rational(lo) <= psi_rational(hi)
