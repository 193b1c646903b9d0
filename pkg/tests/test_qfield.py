import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from arithequi.qfield import (
    OK,
    InconclusiveSearch,
    KElt,
    QuadInt,
    elements_of_norm_up_to,
    euler_phi_K,
    fib_index_kc,
    ideal_class_equal,
    ideal_contains,
    ideal_equal,
    ideal_from_gens,
    ideal_generator,
    ideal_is_principal,
    ideal_norm,
    ideal_product,
    ideal_residues,
    ideal_sum,
    principal_ideal,
    quad_xgcd,
    unit_count,
    units,
)

FIELDS = [-3, -4, -7, -8, -11, -20]
coord = st.integers(-30, 30)


def elts(D):
    return st.builds(lambda x, y: QuadInt(D, x, y), coord, coord)


def test_norm_and_trace_examples():
    assert QuadInt(-4, 1, 1).norm() == 2
    assert QuadInt(-3, 0, 1).trace() == 1


@pytest.mark.parametrize("D", FIELDS)
def test_norm_matches_complex_embedding(D):
    for x in range(-4, 5):
        for y in range(-4, 5):
            z = QuadInt(D, x, y)
            assert math.isclose(abs(z.to_complex()) ** 2, z.norm(), abs_tol=1e-9)
            assert math.isclose(2 * z.to_complex().real, z.trace(), abs_tol=1e-9)


@given(st.sampled_from(FIELDS), st.data())
def test_norm_multiplicative(D, data):
    z, w = data.draw(elts(D)), data.draw(elts(D))
    assert (z * w).norm() == z.norm() * w.norm()
    assert (z * w).conj() == z.conj() * w.conj()


def test_units():
    assert set(units(-4)) == {QuadInt(-4, 1), QuadInt(-4, -1), QuadInt(-4, 0, 1), QuadInt(-4, 0, -1)}
    assert len(units(-3)) == 6
    assert set(units(-7)) == {QuadInt(-7, 1), QuadInt(-7, -1)}
    for D in FIELDS:
        assert unit_count(D) == len(units(D))
        assert all(u.norm() == 1 for u in units(D))


def test_ideal_basics():
    D = -20
    a = ideal_from_gens([QuadInt(D, 2), QuadInt(D, 1, 1)])
    assert ideal_norm(a) == 2
    assert ideal_sum(a, a) == a
    assert not ideal_is_principal(a)
    assert ideal_is_principal(principal_ideal(QuadInt(-4, 2)))
    assert ideal_generator(principal_ideal(QuadInt(-4, 2))).norm() == 4


def test_bounded_search_is_inconclusive():
    a = ideal_from_gens([QuadInt(-20, 2), QuadInt(-20, 1, 1)])
    with pytest.raises(InconclusiveSearch):
        ideal_is_principal(a, search_bound=1)


def _brute_lattice_index(a):
    """Count the residues of O_K mod a by scanning a box against membership."""
    n = a.lattice_det()
    reps = set()
    for x in range(n):
        for y in range(n):
            z = QuadInt(a.D, x, y)
            key = None
            for r in reps:
                if ideal_contains(a, z - r):
                    key = r
                    break
            if key is None:
                reps.add(z)
    return len(reps)


@given(st.sampled_from([-4, -20, -7]), st.data())
def test_norm_multiplicative_on_ideals(D, data):
    small = st.builds(lambda x, y: QuadInt(D, x, y), st.integers(-5, 5), st.integers(-5, 5)).filter(bool)
    a = ideal_from_gens([data.draw(small), data.draw(small)])
    b = ideal_from_gens([data.draw(small), data.draw(small)])
    assert ideal_norm(ideal_product(a, b)) == ideal_norm(a) * ideal_norm(b)


@pytest.mark.parametrize("gens", [[(2, 0), (1, 1)], [(3, 0), (1, 1)], [(6, 0)]])
def test_residue_count_is_norm(gens):
    a = ideal_from_gens([QuadInt(-20, *g) for g in gens])
    res = ideal_residues(OK(-20), a)
    assert len(res) == ideal_norm(a) == _brute_lattice_index(a)


def test_residues_gaussian():
    D = -4
    assert len(ideal_residues(OK(D), principal_ideal(QuadInt(D, 1, 1)))) == 2
    res = ideal_residues(OK(D), principal_ideal(QuadInt(D, 2)))
    assert {(z.x % 2, z.y % 2) for z in res} == {(0, 0), (1, 0), (0, 1), (1, 1)}


@given(st.sampled_from([-4, -20]), st.data())
def test_class_equal_under_principal_multiplier(D, data):
    m = ideal_from_gens([QuadInt(D, 2), QuadInt(D, 1, 1)])
    u = data.draw(st.builds(lambda x, y: QuadInt(D, x, y), st.integers(-4, 4), st.integers(-4, 4)).filter(bool))
    assert ideal_class_equal(m, ideal_product(m, principal_ideal(u)))


def test_phi_K():
    D = -4
    assert euler_phi_K(principal_ideal(QuadInt(D, 1, 1))) == 1
    assert euler_phi_K(OK(D)) == 1
    assert euler_phi_K(principal_ideal(QuadInt(D, 2))) == 2
    # multiplicativity over coprime ideals
    a, b = principal_ideal(QuadInt(D, 2, 1)), principal_ideal(QuadInt(D, 3))
    assert euler_phi_K(ideal_product(a, b)) == euler_phi_K(a) * euler_phi_K(b)


def _fib_oracle(n):
    """Least k with F_{2k} divisible by n (rational integer level)."""
    a, b, k = 0, 1, 0
    while True:
        a, b = b, a + b
        a, b = b, a + b
        k += 1
        if a % n == 0:
            return k


def test_fib_index():
    D = -4
    assert fib_index_kc(principal_ideal(QuadInt(D, 2))) == 3
    assert fib_index_kc(OK(D)) == 1
    assert fib_index_kc(principal_ideal(QuadInt(D, 3))) == 2
    for n in range(2, 30):
        assert fib_index_kc(principal_ideal(QuadInt(D, n))) == _fib_oracle(n)


def test_elements_of_norm_up_to():
    D = -4
    assert set(elements_of_norm_up_to(OK(D), 1)) == {QuadInt(D, 0)} | set(units(D))
    assert len(elements_of_norm_up_to(OK(D), 2)) == 9


@pytest.mark.parametrize("D", FIELDS)
def test_elements_of_norm_against_box_scan(D):
    m = ideal_from_gens([QuadInt(D, 2), QuadInt(D, 1, 1)])
    bound = 60
    got = set(elements_of_norm_up_to(m, bound))
    want = {QuadInt(D, x, y) for x in range(-40, 41) for y in range(-40, 41)
            if QuadInt(D, x, y).norm() <= bound and ideal_contains(m, QuadInt(D, x, y))}
    assert got == want


def test_gauss_circle_growth():
    bound = 4000
    n = len(elements_of_norm_up_to(OK(-4), bound))
    assert abs(n / (math.pi * bound) - 1) < 0.02


@pytest.mark.parametrize("D", [-3, -4, -7, -8, -11])
def test_quad_xgcd(D):
    a, b = QuadInt(D, 7, 3), QuadInt(D, 5, -2)
    g, x, y = quad_xgcd(a, b)
    assert a * x + b * y == g
    assert ideal_equal(principal_ideal(g), ideal_from_gens([a, b]))


def test_kelt_field_arithmetic():
    D = -4
    z = KElt.of(D, (Fraction(1, 2), 3))
    w = KElt.of(D, QuadInt(D, 2, -1))
    assert (z * w) / w == z
    assert z * z.inv() == KElt.of(D, 1)
    assert z.norm() == (z * z.conj()).coords()[0]
    assert (z + w).conj() == z.conj() + w.conj()
