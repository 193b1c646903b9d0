"""Elementary number theory shared by the other modules."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def hnf_rows(rows, n: int) -> list[list[int]]:
    """Row Hermite normal form of the full-rank lattice spanned by `rows` in Z^n.

    The result is upper triangular with positive diagonal and entries above
    each pivot reduced into [0, pivot).
    """
    rows = [list(r) for r in rows if any(r)]
    basis = []
    for col in range(n):
        pivot = None
        rest = []
        for r in rows:
            if r[col] == 0:
                rest.append(r)
            elif pivot is None:
                pivot = r
            else:
                g, x, y = xgcd(pivot[col], r[col])
                p, q = pivot[col] // g, r[col] // g
                new_pivot = [x * s + y * t for s, t in zip(pivot, r)]
                other = [p * t - q * s for s, t in zip(pivot, r)]
                pivot = new_pivot
                if any(other):
                    rest.append(other)
        if pivot is None:
            raise ValueError("lattice is not of full rank")
        if pivot[col] < 0:
            pivot = [-t for t in pivot]
        basis.append(pivot)
        rows = []
        for r in rest:
            if any(r):
                rows.append(r)
    for i in range(n):
        d = basis[i][i]
        for j in range(i):
            q = basis[j][i] // d
            if q:
                basis[j] = [s - q * t for s, t in zip(basis[j], basis[i])]
    return basis


def hnf_solve(basis: list[list[int]], vec) -> list[int] | None:
    """Integer coordinates of `vec` in an upper triangular row basis, or None."""
    n = len(basis)
    vec = list(vec)
    coords = []
    for i in range(n):
        q, r = divmod(vec[i], basis[i][i])
        if r:
            return None
        coords.append(q)
        if q:
            vec = [s - q * t for s, t in zip(vec, basis[i])]
    return coords if not any(vec) else None


def box_residues(basis: list[list[int]]):
    """Coset representatives of Z^n modulo the lattice of an upper triangular basis."""
    n = len(basis)
    out = [[0] * n]
    for i in range(n):
        out = [r[:i] + [k] + r[i + 1:] for r in out for k in range(basis[i][i])]
    return out


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D/n)."""
    if n == 0:
        return 1 if D in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if D < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if D % 2 == 0:
            return 0
        if v % 2 and D % 8 in (3, 5):
            result = -result
    # Jacobi symbol (D/n) for odd n > 0
    a = D % n if n > 1 else 0
    if n == 1:
        return result
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_fundamental_discriminant(D: int) -> bool:
    if D in (0, 1):
        return D == 1
    if D % 4 == 1:
        return _squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def _squarefree(n: int) -> bool:
    n = abs(n)
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


def factorize(n: int) -> dict[int, int]:
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    result = n
    for p in factorize(n):
        result = result // p * (p - 1)
    return result


@lru_cache(maxsize=None)
def _phi_table(n: int) -> tuple[int, ...]:
    phi = list(range(n + 1))
    for p in range(2, n + 1):
        if phi[p] == p:
            for k in range(p, n + 1, p):
                phi[k] -= phi[k] // p
    return tuple(phi)


def phi_summatory(n: int) -> int:
    """Sum of euler_phi(k) for 1 <= k <= n."""
    if n < 1:
        return 0
    return sum(_phi_table(n)[1:])


@dataclass(frozen=True)
class LValue:
    D: int
    s: int
    value: float
    tol: float


@lru_cache(maxsize=None)
def riemann_zeta(s: int, tol: float = 1e-12) -> LValue:
    """zeta(s) for s in {2, 3} by a truncated sum with an integral tail enclosure."""
    if s not in (2, 3):
        raise ValueError("only s = 2 or 3 is supported")
    # tail in [(N+1)^(1-s), N^(1-s)] / (s-1); half its width is below N^-s / 2
    N = max(10, math.ceil((1.0 / tol) ** (1.0 / s)))
    head = math.fsum(1.0 / k ** s for k in range(N, 0, -1))
    lo = (N + 1) ** (1 - s) / (s - 1)
    hi = N ** (1 - s) / (s - 1)
    err = (hi - lo) / 2 + 4e-16 * N
    return LValue(1, s, head + (lo + hi) / 2, err)


@lru_cache(maxsize=None)
def dirichlet_L(D: int, s: int, tol: float = 1e-12) -> LValue:
    """L(s, chi_D) for a fundamental discriminant D via blocks of full periods."""
    if s not in (2, 3):
        raise ValueError("only s = 2 or 3 is supported")
    if D == 1:
        z = riemann_zeta(s, tol)
        return LValue(1, s, z.value, z.tol)
    q = abs(D)
    chi = [kronecker(D, k) for k in range(q)]
    # with N a multiple of q the partial character sums are bounded by q/2,
    # and Abel summation bounds the tail by (q/2) (N+1)^-s
    N = q * max(1, math.ceil(((q / 2) / (tol / 2)) ** (1.0 / s) / q))
    head = math.fsum(chi[k % q] / k ** s for k in range(N, 0, -1))
    err = (q / 2) * (N + 1) ** (-s) + 4e-16 * N
    return LValue(D, s, head, err)


@lru_cache(maxsize=None)
def zeta_K2(D_K: int, tol: float = 1e-12) -> LValue:
    """Dedekind zeta value at 2 of the quadratic field of discriminant D_K."""
    z = riemann_zeta(2, tol / 4)
    L = dirichlet_L(D_K, 2, tol / 4)
    value = z.value * L.value
    err = z.tol * abs(L.value) + L.tol * abs(z.value) + z.tol * L.tol
    return LValue(D_K, 2, value, err)


@dataclass(frozen=True)
class PellSolution:
    D: int
    t: int
    u: int
    R: float


def _pell_one(d: int) -> tuple[int, int]:
    """Fundamental solution of x^2 - d y^2 = 1 by the continued fraction of sqrt(d)."""
    a0 = math.isqrt(d)
    m, q, a = 0, 1, a0
    p_prev, p = 1, a0
    q_prev, qq = 0, 1
    while p * p - d * qq * qq != 1:
        m = q * a - m
        q = (d - m * m) // q
        a = (a0 + m) // q
        p_prev, p = p, a * p + p_prev
        q_prev, qq = qq, a * qq + q_prev
    return p, qq


def _icbrt_root(T: int) -> int | None:
    """Integer t >= 2 with t^3 - 3t = T, if one exists."""
    t = round(T ** (1.0 / 3.0)) if T < 10 ** 300 else _int_cbrt(T)
    for cand in range(max(2, t - 3), t + 4):
        if cand ** 3 - 3 * cand == T:
            return cand
    return None


def _int_cbrt(n: int) -> int:
    x = 1 << ((n.bit_length() + 2) // 3)
    while True:
        y = (2 * x + n // (x * x)) // 3
        if y >= x:
            return x
        x = y


def _pell_cf(D: int) -> tuple[int, int]:
    if D % 4 == 0:
        x, y = _pell_one(D // 4)
        return 2 * x, y
    x, y = _pell_one(D)
    t1, u1 = 2 * x, 2 * y
    # for D = 1 mod 4 the unit (t + u sqrt D)/2 may have odd coordinates; then its cube
    # is the solution found above and t^3 - 3t = t1
    t = _icbrt_root(t1)
    if t is not None:
        u2 = (t * t - 4) // D
        u = math.isqrt(u2)
        if (t * t - 4) % D == 0 and u * u == u2 and u > 0:
            return t, u
    return t1, u1


def pell_bruteforce(D: int, u_max: int = 10 ** 6) -> tuple[int, int] | None:
    """Smallest u >= 1 (with t) such that t^2 - D u^2 = 4, scanning u upward."""
    for u in range(1, u_max + 1):
        t2 = D * u * u + 4
        t = math.isqrt(t2)
        if t * t == t2:
            return t, u
    return None


@lru_cache(maxsize=None)
def pell_fundamental(D: int) -> PellSolution:
    if D <= 0:
        raise ValueError("D must be positive")
    r = math.isqrt(D)
    if r * r == D:
        raise ValueError("D must not be a square")
    if D % 4 not in (0, 1):
        raise ValueError("D must be 0 or 1 mod 4")
    t, u = _pell_cf(D)
    if t * t - D * u * u != 4:
        found = pell_bruteforce(D)
        if found is None:
            raise ArithmeticError(f"no Pell solution found for D={D}")
        t, u = found
    return PellSolution(D, t, u, math.acosh(t / 2))


def regulator(D: int) -> float:
    return pell_fundamental(D).R


def automorph(a: int, b: int, c: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Fundamental proper automorph of the primitive indefinite form a x^2 + b xy + c y^2."""
    D = b * b - 4 * a * c
    if D <= 0 or math.isqrt(D) ** 2 == D:
        raise ValueError("form must be indefinite with non-square discriminant")
    if math.gcd(math.gcd(a, b), c) != 1:
        raise ValueError("form must be primitive")
    p = pell_fundamental(D)
    t, u = p.t, p.u
    return ((t - b * u) // 2, -c * u), (a * u, (t + b * u) // 2)


def primitive_form_of(tr: Fraction, nm: Fraction) -> tuple[int, int, int]:
    """Primitive integral form proportional to x^2 - tr xy + nm y^2 with positive lead."""
    tr, nm = Fraction(tr), Fraction(nm)
    q = math.lcm(tr.denominator, nm.denominator)
    a, b, c = q, -int(tr * q), int(nm * q)
    g = math.gcd(math.gcd(a, b), c)
    return a // g, b // g, c // g


def mat_mul(m, n):
    (a, b), (c, d) = m
    (e, f), (g, h) = n
    return (a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h)


def mat_inv(m):
    """Inverse of a determinant-one 2x2 matrix."""
    (a, b), (c, d) = m
    return (d, -b), (-c, a)


def mat_pow(m, k: int):
    if k < 0:
        return mat_pow(mat_inv(m), -k)
    result = ((1, 0), (0, 1))
    while k:
        if k & 1:
            result = mat_mul(result, m)
        m = mat_mul(m, m)
        k >>= 1
    return result
