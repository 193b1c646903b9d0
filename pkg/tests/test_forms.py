import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from arithequi.forms import (
    form_compose,
    form_disc,
    form_eval,
    hamiltonian,
    herm_orbit_bfs,
    herm_point,
    herm_reduce,
    hermitian,
    indef_bqf_orbit_count,
    indef_bqf_orbit_count_bruteforce,
    iota_f,
    posdef_count,
    posdef_to_point,
    quadratic,
)
from arithequi.qfield import QuadInt, quad_xgcd
from arithequi.quat import Quaternion, hurwitz_elements_doubled, pair_is_unimodular

gauss = st.builds(lambda x, y: QuadInt(-4, x, y), st.integers(-3, 3), st.integers(-3, 3))


def _sl2_gauss(ts):
    """Product of elementary matrices [[1, t], [0, 1]] and [[1, 0], [t, 1]]."""
    g = ((QuadInt(-4, 1), QuadInt(-4, 0)), (QuadInt(-4, 0), QuadInt(-4, 1)))
    for i, t in enumerate(ts):
        e = ((1, t), (0, 1)) if i % 2 == 0 else ((1, 0), (t, 1))
        (a, b), (c, d) = g
        (p, q), (r, s) = e
        g = ((a * p + b * r, a * q + b * s), (c * p + d * r, c * q + d * s))
    return g


def test_eval_and_compose_examples():
    f = hermitian(-4, 1, 0, 1)
    assert form_eval(f, QuadInt(-4, 1, 1), QuadInt(-4, 1)) == 3
    q = quadratic(1, -1, -1)
    assert form_compose(q, ((2, 1), (1, 1))) == q


@given(st.lists(gauss, min_size=1, max_size=5))
def test_hermitian_disc_invariant(ts):
    f = hermitian(-4, 2, (1, 1), -3)
    g = _sl2_gauss(ts)
    h = form_compose(f, g)
    assert form_disc(h) == form_disc(f)
    # composition agrees with evaluation at the transformed vector
    u, v = QuadInt(-4, 2, -1), QuadInt(-4, 1, 3)
    (p, q), (r, s) = g
    assert form_eval(h, u, v) == form_eval(f, p * u + q * v, r * u + s * v)


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=5))
def test_hamiltonian_disc_invariant(ts):
    f = hamiltonian(2, Quaternion(1, 1, 0, 0), 3)
    g = ((Quaternion(1), Quaternion(0)), (Quaternion(0), Quaternion(1)))
    for i, t in enumerate(ts):
        e = ((1, t), (0, 1)) if i % 2 == 0 else ((1, 0), (t, 1))
        (a, b), (c, d) = g
        (p, q), (r, s) = e
        g = ((a * p + b * r, a * q + b * s), (c * p + d * r, c * q + d * s))
    assert form_disc(form_compose(f, g)) == form_disc(f)


@pytest.mark.parametrize("f,want", [
    ((1, (1, 1), -1), 1),    # a odd
    ((2, (0, 0), 2), 2),     # Disc = -4
    ((2, (1, 0), -2), 3),    # a, c even, Disc = 5
    ((2, (1, 1), 2), 6),     # Disc = -2, remainder 6 mod 8
    ((2, (1, 1), 0), 2),     # Disc = 2
    ((2, (1, 1), -2), 6),    # Disc = 6
])
def test_iota_table(f, want):
    a, b, c = f
    assert iota_f(hermitian(-4, a, b, c)) == want


def test_posdef_to_point():
    z, h = posdef_to_point(hermitian(-4, 1, 0, 1))
    assert z == 0 and h == 1
    z, h = posdef_to_point(hermitian(-4, 2, 0, 1))
    assert math.isclose(h, 1 / math.sqrt(2))


@settings(max_examples=50)
@given(gauss)
def test_posdef_point_equivariance(t):
    f = hermitian(-4, 3, (1, 1), 2)
    z, h = posdef_to_point(f)
    # translation by t moves the point by -t
    z2, h2 = posdef_to_point(form_compose(f, ((1, t), (0, 1))))
    assert cmath.isclose(z2, z - t.to_complex(), abs_tol=1e-12) and math.isclose(h2, h)
    # the inversion acts as (z, h) -> (-conj z, h) / (|z|^2 + h^2)
    z3, h3 = posdef_to_point(form_compose(f, ((0, -1), (1, 0))))
    n = abs(z) ** 2 + h * h
    assert cmath.isclose(z3, -z.conjugate() / n, abs_tol=1e-12) and math.isclose(h3, h / n)


@pytest.mark.parametrize("Q", [(1, 0, 1), (2, 1, 3), (1, 1, 1)])
def test_posdef_quadratic_against_box(Q):
    f = quadratic(*Q)
    s = 150
    want = sum(1 for u in range(-40, 41) for v in range(-40, 41)
               if math.gcd(u, v) == 1 and form_eval(f, u, v) <= s)
    assert posdef_count(f, s=s) == want


def test_posdef_hermitian_against_box():
    D = -4
    f = hermitian(D, 2, (1, 0), 3)
    s = 12
    want = 0
    rng = range(-5, 6)
    for ux in rng:
        for uy in rng:
            for vx in rng:
                for vy in rng:
                    u, v = QuadInt(D, ux, uy), QuadInt(D, vx, vy)
                    if (u or v) and form_eval(f, u, v) <= s and quad_xgcd(u, v)[0].norm() == 1:
                        want += 1
    assert posdef_count(f, s=s) == want


def test_posdef_hamiltonian_against_lattice_oracle():
    f = hamiltonian(1, 0, 1)
    s = 3
    elts = [Quaternion(0)] + [Quaternion.from_doubled(d) for d in hurwitz_elements_doubled(s)]
    want = sum(1 for u in elts for v in elts
               if (u or v) and form_eval(f, u, v) <= s and pair_is_unimodular(u, v))
    assert posdef_count(f, s=s) == want


def test_gauss_growth():
    n = posdef_count(quadratic(1, 0, 1), s=100)
    assert abs(n / (6 / math.pi * 100) - 1) < 0.05


@pytest.mark.parametrize("Q", [(1, -1, -1), (1, 0, -2), (2, 1, -2), (1, 0, -3)])
@pytest.mark.parametrize("s", [1, 4, 10])
def test_indef_census_against_fundamental_domain(Q, s):
    assert indef_bqf_orbit_count(Q, s) == indef_bqf_orbit_count_bruteforce(Q, s)


def test_indef_monotone():
    counts = [indef_bqf_orbit_count((1, -1, -1), s) for s in (5, 20, 80, 200)]
    assert counts == sorted(counts)


def test_herm_bfs_basic():
    f = hermitian(-4, 1, (1, 0), -1)
    census = herm_orbit_bfs(-4, f, "full", 12)
    assert census.saturated
    keys = {g.key() for g in census.forms}
    assert herm_reduce(f).key() in keys
    assert {form_disc(g) for g in census.forms} == {form_disc(f)}
    for g in census.forms:
        x, y = herm_point(g)
        assert -Fraction(1, 2) <= x < Fraction(1, 2) and -Fraction(1, 2) <= y < Fraction(1, 2)


@pytest.fixture(scope="module")
def census_20():
    return herm_orbit_bfs(-4, hermitian(-4, 1, (1, 0), -1), "full", 20)


@settings(max_examples=20, deadline=None)
@given(st.lists(gauss, min_size=1, max_size=4))
def test_herm_bfs_contains_images(census_20, ts):
    f = hermitian(-4, 1, (1, 0), -1)
    keys = {g.key() for g in census_20.forms}
    h = herm_reduce(form_compose(f, _sl2_gauss(ts)))
    if 0 < abs(h.a) <= 20:
        assert h.key() in keys
