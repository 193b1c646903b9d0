"""Hamilton quaternions over Q and the Hurwitz order."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core_arith import box_residues, hnf_rows

# the Hamilton algebra (-1,-1 | Q) has reduced discriminant 2
D_A = 2
RAMIFIED_PRIMES = (2,)


def _qmul(a, b):
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return (a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0)


class Quaternion:
    """w + x i + y j + z k with rational coordinates."""

    __slots__ = ("c",)

    def __init__(self, w=0, x=0, y=0, z=0):
        self.c = (Fraction(w), Fraction(x), Fraction(y), Fraction(z))

    @classmethod
    def from_doubled(cls, d) -> Quaternion:
        return cls(*(Fraction(v, 2) for v in d))

    @classmethod
    def from_hurwitz(cls, h) -> Quaternion:
        c0, c1, c2, c3 = h
        half = Fraction(c3, 2)
        return cls(c0 + half, c1 + half, c2 + half, half)

    @staticmethod
    def _coerce(other):
        if isinstance(other, Quaternion):
            return other
        if isinstance(other, (int, Fraction)):
            return Quaternion(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Quaternion(*(a + b for a, b in zip(self.c, other.c)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Quaternion(*(a - b for a, b in zip(self.c, other.c)))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Quaternion(*(-a for a in self.c))

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Quaternion(*_qmul(self.c, other.c))

    def __rmul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __bool__(self):
        return any(self.c)

    def __repr__(self):
        return "Quaternion(" + ", ".join(str(v) for v in self.c) + ")"

    def conj(self) -> Quaternion:
        w, x, y, z = self.c
        return Quaternion(w, -x, -y, -z)

    def norm(self) -> Fraction:
        return sum(v * v for v in self.c)

    def trace(self) -> Fraction:
        return 2 * self.c[0]

    def inv(self) -> Quaternion:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return Quaternion(*(v / n for v in self.conj().c))

    def doubled(self) -> tuple[int, int, int, int]:
        d = tuple(2 * v for v in self.c)
        if any(v.denominator != 1 for v in d):
            raise ValueError("not a half-integral quaternion")
        return tuple(int(v) for v in d)

    def is_hurwitz(self) -> bool:
        try:
            d = self.doubled()
        except ValueError:
            return False
        return len({v % 2 for v in d}) == 1

    def hurwitz_coords(self) -> tuple[int, int, int, int]:
        """Coordinates over the basis {1, i, j, rho}, rho = (1+i+j+k)/2."""
        if not self.is_hurwitz():
            raise ValueError("not in the Hurwitz order")
        return _doubled_to_hurwitz(self.doubled())


ONE = Quaternion(1)
I = Quaternion(0, 1)
J = Quaternion(0, 0, 1)
K = Quaternion(0, 0, 0, 1)
RHO = Quaternion(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))
HURWITZ_BASIS = (ONE, I, J, RHO)

# the same basis in doubled coordinates
_BASIS_D = ((2, 0, 0, 0), (0, 2, 0, 0), (0, 0, 2, 0), (1, 1, 1, 1))


def _doubled_to_hurwitz(d):
    W, X, Y, Z = d
    return ((W - Z) // 2, (X - Z) // 2, (Y - Z) // 2, Z)


def _hurwitz_to_doubled(h):
    c0, c1, c2, c3 = h
    return (2 * c0 + c3, 2 * c1 + c3, 2 * c2 + c3, c3)


def dmul(a, b):
    """Product of Hurwitz elements given and returned in doubled coordinates."""
    p = _qmul(a, b)
    return (p[0] // 2, p[1] // 2, p[2] // 2, p[3] // 2)


def dnorm(a) -> int:
    return (a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3]) // 4


def dconj(a):
    return (a[0], -a[1], -a[2], -a[3])


@lru_cache(maxsize=1)
def hurwitz_units() -> list[Quaternion]:
    return [Quaternion.from_doubled(d) for d in hurwitz_elements_doubled(1) if dnorm(d) == 1]


def hurwitz_elements_doubled(bound: int) -> list[tuple[int, int, int, int]]:
    """Doubled coordinates of all Hurwitz elements with 0 < N <= bound, sorted by norm."""
    lim = 4 * bound
    r = math.isqrt(lim)
    out = []
    for W in range(-r, r + 1):
        rw = lim - W * W
        rx = math.isqrt(rw)
        for X in range(-rx, rx + 1):
            if (X - W) % 2:
                continue
            ry2 = rw - X * X
            ry = math.isqrt(ry2)
            for Y in range(-ry, ry + 1):
                if (Y - W) % 2:
                    continue
                rz2 = ry2 - Y * Y
                rz = math.isqrt(rz2)
                for Z in range(-rz, rz + 1):
                    if (Z - W) % 2 == 0 and (W or X or Y or Z):
                        out.append((W, X, Y, Z))
    out.sort(key=lambda d: (dnorm(d), tuple(-v for v in d)))
    return out


@dataclass(frozen=True)
class QuatLattice:
    """A full-rank sublattice of the Hurwitz order, as a row HNF over {1, i, j, rho}."""

    basis: tuple[tuple[int, ...], ...]

    def index(self) -> int:
        return math.prod(self.basis[i][i] for i in range(4))

    def is_identity(self) -> bool:
        return self.index() == 1


def _lattice_from_doubled(vectors) -> QuatLattice:
    rows = [_doubled_to_hurwitz(v) for v in vectors]
    return QuatLattice(tuple(tuple(r) for r in hnf_rows(rows, 4)))


def left_ideal_of(v: Quaternion) -> QuatLattice:
    """The left ideal O v."""
    if not v:
        raise ValueError("v must be nonzero")
    return _left_ideal_d(v.doubled())


def _left_ideal_d(vd) -> QuatLattice:
    return _lattice_from_doubled([dmul(e, vd) for e in _BASIS_D])


def residues_mod(v: Quaternion) -> list[Quaternion]:
    """Coset representatives of O / O v."""
    lat = left_ideal_of(v)
    return [Quaternion.from_hurwitz(h) for h in box_residues([list(r) for r in lat.basis])]


def pair_is_unimodular(u: Quaternion, v: Quaternion) -> bool:
    """Whether O u + O v = O, decided by the HNF of the stacked 8x4 matrix."""
    if not u and not v:
        raise ValueError("pair must be nonzero")
    vecs = [dmul(e, x.doubled()) for x in (u, v) if x for e in _BASIS_D]
    return _lattice_from_doubled(vecs).is_identity()


def _nearest_hurwitz_d(num, den: int):
    """Doubled coordinates of a Hurwitz element nearest to num/den (num quaternion with integer coords)."""
    # integer candidate
    a = tuple((2 * n + den) // (2 * den) for n in num)
    # half-integer candidate
    b = tuple(n // den for n in num)
    ca = tuple(2 * t for t in a)
    cb = tuple(2 * t + 1 for t in b)

    def dist(c):
        # |num/den - c/2|^2 scaled by (2 den)^2
        return sum((2 * n - t * den) ** 2 for n, t in zip(num, c))

    return ca if dist(ca) <= dist(cb) else cb


def right_gcd_d(u, v):
    """Doubled coordinates of g with O u + O v = O g, by Euclid's algorithm in O."""
    while any(v):
        # u v^-1 = u conj(v) / N(v); in doubled coords u*conj(v) is 4 u conj(v)
        p = _qmul(u, dconj(v))
        n = 4 * dnorm(v)
        q = _nearest_hurwitz_d(p, n)
        r = tuple(a - b for a, b in zip(u, dmul(q, v)))
        u, v = v, r
    return u


def pair_is_unimodular_euclid(u: Quaternion, v: Quaternion) -> bool:
    if not u and not v:
        raise ValueError("pair must be nonzero")
    return dnorm(right_gcd_d(u.doubled(), v.doubled())) == 1


@dataclass(frozen=True)
class QuatMat2:
    a: Quaternion
    b: Quaternion
    c: Quaternion
    d: Quaternion

    @classmethod
    def of(cls, a, b, c, d) -> QuatMat2:
        return cls(*(x if isinstance(x, Quaternion) else Quaternion(x) for x in (a, b, c, d)))

    def __mul__(self, o: QuatMat2) -> QuatMat2:
        return QuatMat2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                        self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)


def dieudonne_det(g: QuatMat2) -> Fraction:
    a, b, c, d = g.a, g.b, g.c, g.d
    return (a * d).norm() + (b * c).norm() - (a * c.conj() * d * b.conj()).trace()


def x_gamma_cubic(g: QuatMat2) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Coefficients (leading first) of the cubic whose largest real root is X_gamma."""
    if dieudonne_det(g) != 1:
        raise ValueError("Dieudonne determinant must be 1")
    a, b, c, d = g.a, g.b, g.c, g.d
    c1 = (a + d).norm() + (a * d - b * c).trace()
    c2 = (a + d).trace() / 2
    c3 = ((a * d - b * c) * a.conj() + (d * a - c * b) * d.conj()).trace() / 2
    return Fraction(2), -c1, 2 * (c2 * c3 - 1), c1 - c2 * c2 - c3 * c3


def largest_real_root(coeffs, tol: float = 1e-12) -> float:
    """Largest real root of a cubic with positive leading coefficient."""
    a, b, c, d = coeffs

    a_f, b_f, c_f, d_f = (float(t) for t in coeffs)

    def ff(x):
        return ((a_f * x + b_f) * x + c_f) * x + d_f

    bound = 1.0 + max(abs(b_f), abs(c_f), abs(d_f)) / a_f
    # critical points split the line into monotone pieces
    disc = 4 * b * b - 12 * a * c
    crit = []
    if disc >= 0:
        r = math.sqrt(float(disc))
        crit = sorted(((-2 * b_f - r) / (6 * a_f), (-2 * b_f + r) / (6 * a_f)))
    points = [-bound] + crit + [bound]
    roots = []
    for lo, hi in zip(points, points[1:]):
        flo, fhi = ff(lo), ff(hi)
        if flo == 0:
            roots.append(lo)
        if flo * fhi < 0:
            for _ in range(200):
                mid = (lo + hi) / 2
                fm = ff(mid)
                if fm == 0 or hi - lo < tol * max(1.0, abs(mid)) / 4:
                    break
                if (fm < 0) == (flo < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            x = (lo + hi) / 2
            for _ in range(3):
                df = (3 * a_f * x + 2 * b_f) * x + c_f
                if df == 0:
                    break
                step = ff(x) / df
                if not lo <= x - step <= hi:
                    break
                x -= step
            roots.append(x)
    # a double root sits at a critical point where the cubic only touches zero
    for x in crit:
        scale = max(1.0, abs(a_f * x ** 3), abs(b_f * x * x), abs(c_f * x), abs(d_f))
        if abs(ff(x)) <= 1e-9 * scale:
            roots.append(x)
    if not roots:
        raise ArithmeticError("no real root located")
    return max(roots)


def x_gamma(g: QuatMat2) -> float:
    return largest_real_root(x_gamma_cubic(g))


def translation_length_H5(g: QuatMat2) -> float:
    X = x_gamma(g)
    return abs(math.log(abs(X + math.sqrt(max(X * X - 1.0, 0.0)))))
