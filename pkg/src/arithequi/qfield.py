"""Arithmetic in the ring of integers of an imaginary quadratic field."""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .core_arith import box_residues, hnf_rows, hnf_solve, is_fundamental_discriminant

EUCLIDEAN_DISCRIMINANTS = (-3, -4, -7, -8, -11)


@lru_cache(maxsize=None)
def omega_data(D: int) -> tuple[int, int]:
    """(e, f) with omega^2 = e + f*omega for the standard integral basis {1, omega}."""
    if D >= 0 or not is_fundamental_discriminant(D):
        raise ValueError(f"{D} is not a negative fundamental discriminant")
    if D % 4 == 0:
        return D // 4, 0
    return (D - 1) // 4, 1


class QuadInt:
    """The element x + y*omega of O_K, where K has discriminant D."""

    __slots__ = ("D", "x", "y")

    def __init__(self, D: int, x: int, y: int = 0):
        self.D = D
        self.x = x
        self.y = y

    def _coerce(self, other):
        if isinstance(other, QuadInt):
            if other.D != self.D:
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, int):
            return QuadInt(self.D, other, 0)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadInt(self.D, self.x + other.x, self.y + other.y)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadInt(self.D, self.x - other.x, self.y - other.y)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return QuadInt(self.D, -self.x, -self.y)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        e, f = omega_data(self.D)
        yy = self.y * other.y
        return QuadInt(self.D, self.x * other.x + e * yy,
                       self.x * other.y + self.y * other.x + f * yy)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            return self.x == other and self.y == 0
        return isinstance(other, QuadInt) and (self.D, self.x, self.y) == (other.D, other.x, other.y)

    def __hash__(self):
        return hash((self.D, self.x, self.y))

    def __repr__(self):
        return f"QuadInt({self.D}, {self.x}, {self.y})"

    def __bool__(self):
        return bool(self.x or self.y)

    def conj(self) -> QuadInt:
        f = omega_data(self.D)[1]
        return QuadInt(self.D, self.x + f * self.y, -self.y)

    def norm(self) -> int:
        e, f = omega_data(self.D)
        return self.x * self.x + f * self.x * self.y - e * self.y * self.y

    def trace(self) -> int:
        return 2 * self.x + omega_data(self.D)[1] * self.y

    def real2(self) -> int:
        """Twice the real part (an integer)."""
        return self.trace()

    def to_complex(self) -> complex:
        f = omega_data(self.D)[1]
        im = math.sqrt(-self.D) / 2
        return complex(self.x + f * self.y / 2, self.y * im)

    def is_unit(self) -> bool:
        return self.norm() == 1

    def times_omega(self) -> QuadInt:
        return self * QuadInt(self.D, 0, 1)

    def divround(self, other: QuadInt) -> QuadInt:
        """An element q of O_K minimising norm(self - q*other)."""
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero")
        num = self * other.conj()
        qx0 = _round_div(num.x, n)
        qy0 = _round_div(num.y, n)
        best = None
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                q = QuadInt(self.D, qx0 + dx, qy0 + dy)
                r = (self - q * other).norm()
                if best is None or r < best[0]:
                    best = (r, q)
        return best[1]


def _round_div(a: int, b: int) -> int:
    return (2 * a + b) // (2 * b)


def units(D: int) -> list[QuadInt]:
    return [z for z in elements_of_norm_up_to(OK(D), 1) if z.norm() == 1]


def unit_count(D: int) -> int:
    return {-4: 4, -3: 6}.get(D, 2)


def quad_gcd(a: QuadInt, b: QuadInt) -> QuadInt:
    """A gcd in a norm-Euclidean O_K."""
    if a.D not in EUCLIDEAN_DISCRIMINANTS:
        raise ValueError("gcd by division needs a Euclidean field")
    while b:
        a, b = b, a - a.divround(b) * b
    return a


def quad_xgcd(a: QuadInt, b: QuadInt) -> tuple[QuadInt, QuadInt, QuadInt]:
    """(g, x, y) with a*x + b*y = g in a norm-Euclidean O_K."""
    if a.D not in EUCLIDEAN_DISCRIMINANTS:
        raise ValueError("extended gcd needs a Euclidean field")
    D = a.D
    x0, y0, x1, y1 = QuadInt(D, 1), QuadInt(D, 0), QuadInt(D, 0), QuadInt(D, 1)
    while b:
        q = a.divround(b)
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


class QIdeal:
    """Fractional ideal (1/den) * L with L an integral lattice in HNF over {1, omega}."""

    __slots__ = ("D", "den", "basis")

    def __init__(self, D: int, den: int, basis):
        g = math.gcd(den, *[v for row in basis for v in row])
        self.D = D
        self.den = den // g
        self.basis = tuple(tuple(v // g for v in row) for row in basis)

    def __eq__(self, other):
        return isinstance(other, QIdeal) and (self.D, self.den, self.basis) == (other.D, other.den, other.basis)

    def __hash__(self):
        return hash((self.D, self.den, self.basis))

    def __repr__(self):
        return f"QIdeal(D={self.D}, den={self.den}, basis={self.basis})"

    def __mul__(self, other):
        return ideal_product(self, other)

    def __add__(self, other):
        return ideal_sum(self, other)

    @property
    def is_integral(self) -> bool:
        return self.den == 1

    def lattice_det(self) -> int:
        return self.basis[0][0] * self.basis[1][1]

    def norm(self) -> Fraction:
        return Fraction(self.lattice_det(), self.den * self.den)

    def generators(self) -> list[QuadInt]:
        """Z-basis of the lattice L (so the ideal is these divided by den)."""
        return [QuadInt(self.D, *row) for row in self.basis]

    def integral_multiple(self) -> QIdeal:
        return QIdeal(self.D, 1, self.basis)

    def min_integer(self) -> int:
        """Positive generator of L intersected with Z (for an integral ideal)."""
        (a, b), (_, d) = self.basis
        return a * d // math.gcd(b, d)


def ideal_from_gens(gens, den: int = 1, D: int | None = None) -> QIdeal:
    gens = [g for g in gens if g]
    if not gens:
        raise ValueError("at least one nonzero generator is required")
    D = gens[0].D if D is None else D
    rows = []
    for g in gens:
        rows.append((g.x, g.y))
        w = g.times_omega()
        rows.append((w.x, w.y))
    return QIdeal(D, den, hnf_rows(rows, 2))


def OK(D: int) -> QIdeal:
    return QIdeal(D, 1, ((1, 0), (0, 1)))


def principal_ideal(z: QuadInt) -> QIdeal:
    return ideal_from_gens([z])


def _common_den(a: QIdeal, b: QIdeal):
    if a.D != b.D:
        raise ValueError("ideals of different fields")
    den = math.lcm(a.den, b.den)
    ka, kb = den // a.den, den // b.den
    ga = [g * ka for g in a.generators()]
    gb = [g * kb for g in b.generators()]
    return den, ga, gb


def ideal_sum(a: QIdeal, b: QIdeal) -> QIdeal:
    den, ga, gb = _common_den(a, b)
    return ideal_from_gens(ga + gb, den, a.D)


def ideal_product(a: QIdeal, b: QIdeal) -> QIdeal:
    if a.D != b.D:
        raise ValueError("ideals of different fields")
    gens = [x * y for x in a.generators() for y in b.generators()]
    return ideal_from_gens(gens, a.den * b.den, a.D)


def ideal_conj(a: QIdeal) -> QIdeal:
    return ideal_from_gens([g.conj() for g in a.generators()], a.den, a.D)


def ideal_norm(a: QIdeal) -> Fraction:
    return a.norm()


def ideal_contains(a: QIdeal, z, den: int = 1) -> bool:
    """Whether z/den lies in the ideal."""
    if isinstance(z, int):
        z = QuadInt(a.D, z)
    # z/den in L/a.den  <=>  z*a.den in den*L
    zz = z * a.den
    return hnf_solve([[den * v for v in row] for row in a.basis], (zz.x, zz.y)) is not None


def ideal_equal(a: QIdeal, b: QIdeal) -> bool:
    return a == b


def ideal_is_subset(sub: QIdeal, m: QIdeal) -> bool:
    return ideal_sum(sub, m) == m


class InconclusiveSearch(Exception):
    """Raised when a bounded search stops before covering the certifying region."""


def ideal_generator(a: QIdeal, search_bound: int | None = None) -> QuadInt | None:
    """A generator g with a = (g/den), or None when the ideal is not principal.

    The scan covers elements of norm up to norm(L); that ball is finite, so a
    full scan certifies non-principality. A smaller `search_bound` raises
    InconclusiveSearch when nothing is found.
    """
    L = a.integral_multiple()
    target = L.lattice_det()
    bound = target if search_bound is None else min(search_bound, target)
    for z in elements_of_norm_up_to(L, bound):
        if z.norm() == target:
            return z
    if bound < target:
        raise InconclusiveSearch(f"norm ball up to {target} not fully scanned")
    return None


def ideal_is_principal(a: QIdeal, search_bound: int | None = None) -> bool:
    return ideal_generator(a, search_bound) is not None


def ideal_class_equal(a: QIdeal, b: QIdeal, search_bound: int | None = None) -> bool:
    """Whether a and b lie in the same ideal class (a * conj(b) principal)."""
    return ideal_is_principal(ideal_product(a, ideal_conj(b)), search_bound)


def _relative_basis(m: QIdeal, sub: QIdeal):
    """Coordinates of the basis of sub in terms of the basis of m, as an HNF."""
    den = math.lcm(m.den, sub.den)
    bm = [[v * (den // m.den) for v in row] for row in m.basis]
    bs = [[v * (den // sub.den) for v in row] for row in sub.basis]
    rows = []
    for row in bs:
        c = hnf_solve(bm, row)
        if c is None:
            raise ValueError("sub is not contained in m")
        rows.append(c)
    return hnf_rows(rows, 2), bm, den


def ideal_residues(m: QIdeal, sub: QIdeal) -> list[QuadInt]:
    """Coset representatives of m / sub.

    For integral m the representatives are returned as elements of O_K; for
    fractional m they are the numerators over the common denominator.
    """
    rel, bm, _ = _relative_basis(m, sub)
    out = []
    for k in box_residues(rel):
        x = k[0] * bm[0][0] + k[1] * bm[1][0]
        y = k[0] * bm[0][1] + k[1] * bm[1][1]
        out.append(QuadInt(m.D, x, y))
    return out


def coprime_to(u: QuadInt, a: QIdeal) -> bool:
    """Whether u*O_K + a = O_K for an integral ideal a."""
    n = a.lattice_det()
    if math.gcd(u.norm(), n) == 1:
        return True
    w = u.times_omega()
    basis = hnf_rows([(u.x, u.y), (w.x, w.y), *a.basis], 2)
    return basis[0][0] * basis[1][1] == 1


def euler_phi_K(a: QIdeal) -> int:
    if not a.is_integral:
        raise ValueError("ideal must be integral")
    return _phi_K_cached(a)


@lru_cache(maxsize=100000)
def _phi_K_cached(a: QIdeal) -> int:
    return sum(1 for u in ideal_residues(OK(a.D), a) if coprime_to(u, a))


def fib_index_kc(c: QIdeal) -> int:
    """Least k >= 1 with the Fibonacci number F_{2k} in the integral ideal c."""
    if not c.is_integral:
        raise ValueError("ideal must be integral")
    n0 = c.min_integer()
    cap = 6 * c.lattice_det() ** 2
    f_prev, f = 0, 1  # F_0, F_1 reduced modulo c ∩ Z
    for step in range(1, 2 * cap + 2):
        f_prev, f = f, (f_prev + f) % n0
        if step % 2 == 0 and f_prev == 0:
            return step // 2
    raise RuntimeError("Fibonacci iteration cap exceeded")


def elements_of_norm_up_to(m: QIdeal, bound) -> list[QuadInt]:
    """All z in the integral ideal m with norm(z) <= bound, sorted by norm then descending (x, y)."""
    if not m.is_integral:
        raise ValueError("enumerate elements of the integral ideal den*m instead")
    if bound < 0:
        return []
    D = m.D
    e, f = omega_data(D)
    (a, b), (_, d) = m.basis
    absD = -D
    out = []
    # norm = (x + f y/2)^2 + |D| y^2 / 4
    ymax = math.isqrt(int(4 * bound // absD) + 1) + 1
    xmax = math.isqrt(int(bound) + 1) + ymax + 1
    kmax = xmax // a + 1
    for k1 in range(-kmax, kmax + 1):
        x = k1 * a
        # y = k1*b + k2*d must satisfy |D| y^2/4 + (x + f y/2)^2 <= bound
        # solve as quadratic in y: (|D|/4 + f^2/4) y^2 + f x y + x^2 - bound <= 0
        A = (absD + f * f) / 4.0
        B = f * x
        C = x * x - float(bound)
        disc = B * B - 4 * A * C
        if disc < 0:
            continue
        r = math.sqrt(disc)
        ylo = (-B - r) / (2 * A)
        yhi = (-B + r) / (2 * A)
        k2lo = math.floor((ylo - k1 * b) / d) - 1
        k2hi = math.ceil((yhi - k1 * b) / d) + 1
        for k2 in range(k2lo, k2hi + 1):
            y = k1 * b + k2 * d
            nrm = x * x + f * x * y - e * y * y
            if nrm <= bound:
                out.append(QuadInt(D, x, y))
    out.sort(key=lambda z: (z.norm(), -z.x, -z.y))
    return out


class KElt:
    """An element x + y*omega of K with rational coordinates."""

    __slots__ = ("D", "x", "y")

    def __init__(self, D: int, x=0, y=0):
        self.D = D
        self.x = Fraction(x)
        self.y = Fraction(y)

    @classmethod
    def of(cls, D: int, v) -> KElt:
        if isinstance(v, KElt):
            return v
        if isinstance(v, QuadInt):
            return cls(D, v.x, v.y)
        if isinstance(v, tuple):
            return cls(D, *v)
        return cls(D, v)

    def _c(self, o):
        return KElt.of(self.D, o)

    def __add__(self, o):
        o = self._c(o)
        return KElt(self.D, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._c(o)
        return KElt(self.D, self.x - o.x, self.y - o.y)

    def __rsub__(self, o):
        return self._c(o) - self

    def __neg__(self):
        return KElt(self.D, -self.x, -self.y)

    def __mul__(self, o):
        o = self._c(o)
        e, f = omega_data(self.D)
        yy = self.y * o.y
        return KElt(self.D, self.x * o.x + e * yy, self.x * o.y + self.y * o.x + f * yy)

    __rmul__ = __mul__

    def conj(self) -> KElt:
        f = omega_data(self.D)[1]
        return KElt(self.D, self.x + f * self.y, -self.y)

    def norm(self) -> Fraction:
        e, f = omega_data(self.D)
        return self.x * self.x + f * self.x * self.y - e * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x + omega_data(self.D)[1] * self.y

    def inv(self) -> KElt:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero has no inverse")
        c = self.conj()
        return KElt(self.D, c.x / n, c.y / n)

    def __truediv__(self, o):
        return self * self._c(o).inv()

    def __rtruediv__(self, o):
        return self._c(o) * self.inv()

    def __eq__(self, o):
        if isinstance(o, (int, Fraction, QuadInt, KElt)):
            o = self._c(o)
            return (self.x, self.y) == (o.x, o.y)
        return NotImplemented

    def __hash__(self):
        return hash((self.D, self.x, self.y))

    def __bool__(self):
        return bool(self.x or self.y)

    def __repr__(self):
        return f"KElt({self.D}, {self.x}, {self.y})"

    def to_complex(self) -> complex:
        f = omega_data(self.D)[1]
        return complex(float(self.x) + f * float(self.y) / 2, float(self.y) * math.sqrt(-self.D) / 2)

    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def to_quadint(self) -> QuadInt:
        if not self.is_integral():
            raise ValueError("not an algebraic integer")
        return QuadInt(self.D, int(self.x), int(self.y))

    def coords(self) -> tuple[Fraction, Fraction]:
        return self.x, self.y
