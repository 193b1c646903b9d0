import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from arithequi.core_arith import (
    automorph,
    dirichlet_L,
    euler_phi,
    hnf_rows,
    kronecker,
    mat_inv,
    mat_mul,
    pell_bruteforce,
    pell_fundamental,
    phi_summatory,
    regulator,
    riemann_zeta,
    xgcd,
    zeta_K2,
)


def _legendre_by_squares(p, a):
    squares = {x * x % p for x in range(1, p)}
    return 0 if a % p == 0 else (1 if a % p in squares else -1)


@pytest.mark.parametrize("D,n,want", [(-4, 3, -1), (-4, 2, 0), (-3, 4, 1), (5, 1, 1)])
def test_kronecker_examples(D, n, want):
    assert kronecker(D, n) == want


@pytest.mark.parametrize("D", [-3, -4, -7, -8, 5, 8, 12, 13])
def test_kronecker_against_residues_at_odd_primes(D):
    for p in (3, 5, 7, 11, 13, 17, 19, 23):
        if D % p:
            assert kronecker(D, p) == _legendre_by_squares(p, D)


@given(st.integers(1, 400), st.integers(1, 400))
def test_kronecker_multiplicative(m, n):
    for D in (-4, -20, 5, 8):
        assert kronecker(D, m * n) == kronecker(D, m) * kronecker(D, n)


def test_euler_phi_small():
    assert euler_phi(1) == 1
    assert phi_summatory(10) == 32
    assert [euler_phi(n) for n in range(1, 11)] == [1, 1, 2, 2, 4, 2, 6, 4, 6, 4]


@given(st.integers(1, 2000))
def test_euler_phi_against_gcd_count(n):
    assert euler_phi(n) == sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def test_phi_summatory_density():
    assert abs(phi_summatory(1000) / (3 / math.pi ** 2 * 1e6) - 1) <= 0.01


def test_zeta_values():
    assert abs(riemann_zeta(2, 1e-9).value - math.pi ** 2 / 6) < 1e-9
    catalan = dirichlet_L(-4, 2, 1e-9).value
    assert abs(catalan - 0.915965594177219) < 1e-9
    assert abs(zeta_K2(-4, 1e-8).value - 1.506703) < 1e-6
    # zeta_K(2) factors as zeta(2) L(chi_D, 2)
    for D in (-3, -7, -8, -20):
        prod = riemann_zeta(2, 1e-9).value * dirichlet_L(D, 2, 1e-9).value
        assert abs(zeta_K2(D, 1e-9).value - prod) < 1e-8


def test_L_value_against_direct_partial_sum():
    # alternating series with explicit tail bound
    N = 200000
    direct = sum(kronecker(-3, n) / n ** 2 for n in range(1, N))
    assert abs(dirichlet_L(-3, 2, 1e-10).value - direct) < 2 / N


def test_pell_examples():
    p = pell_fundamental(5)
    assert (p.t, p.u) == (3, 1)
    assert abs(p.R - 0.962424) < 1e-6
    assert abs(regulator(5) - 2 * math.log((1 + math.sqrt(5)) / 2)) < 1e-12
    assert (pell_fundamental(8).t, pell_fundamental(8).u) == (6, 2)


@pytest.mark.parametrize("D", [5, 8, 12, 13, 21, 28, 33, 41, 60, 61])
def test_pell_continued_fraction_matches_bruteforce(D):
    p = pell_fundamental(D)
    assert (p.t, p.u) == pell_bruteforce(D)


@pytest.mark.parametrize("D", [97, 109, 421])
def test_pell_large_solutions_solve_the_equation(D):
    p = pell_fundamental(D)
    assert p.t * p.t - D * p.u * p.u == 4
    assert pell_bruteforce(D, u_max=min(p.u - 1, 10 ** 5)) is None


def test_pell_rejects_squares_and_bad_residues():
    with pytest.raises(ValueError):
        pell_fundamental(9)
    with pytest.raises(ValueError):
        pell_fundamental(7)
    with pytest.raises(ValueError):
        pell_fundamental(-4)


def _apply_form(Q, M):
    a, b, c = Q
    (p, q), (r, s) = M
    return (a * p * p + b * p * r + c * r * r,
            2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            a * q * q + b * q * s + c * s * s)


def test_automorph_examples():
    assert automorph(1, -1, -1) == ((2, 1), (1, 1))
    assert automorph(1, 0, -2) == ((3, 4), (2, 3))


forms_st = st.tuples(st.integers(-12, 12), st.integers(-12, 12), st.integers(-12, 12)).filter(
    lambda f: f[1] ** 2 - 4 * f[0] * f[2] > 0
    and math.isqrt(f[1] ** 2 - 4 * f[0] * f[2]) ** 2 != f[1] ** 2 - 4 * f[0] * f[2]
    and math.gcd(*f) == 1
)


@given(forms_st)
def test_automorph_preserves_form(Q):
    M = automorph(*Q)
    assert M[0][0] * M[1][1] - M[0][1] * M[1][0] == 1
    assert _apply_form(Q, M) == Q


@given(st.integers(-10 ** 6, 10 ** 6), st.integers(-10 ** 6, 10 ** 6))
def test_xgcd_bezout(a, b):
    g, x, y = xgcd(a, b)
    assert g == math.gcd(a, b)
    assert a * x + b * y == g


def test_hnf_determinant_is_lattice_index():
    rows = [[4, 2], [2, 6], [6, 8]]
    h = hnf_rows(rows, 2)
    # the index of the row lattice is the gcd of the 2x2 minors
    minors = [abs(r[0] * s[1] - r[1] * s[0]) for i, r in enumerate(rows) for s in rows[i + 1:]]
    assert h[0][0] * h[1][1] == math.gcd(*minors)


def test_mat_inv_roundtrip():
    g = ((2, 1), (1, 1))
    assert mat_mul(g, mat_inv(g)) == ((1, 0), (0, 1))
