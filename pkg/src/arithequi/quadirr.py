"""Quadratic irrationals, their modular orbits and relative heights."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .core_arith import (
    automorph,
    factorize,
    mat_inv,
    primitive_form_of,
    xgcd,
)
from .forms import orbit_census
from .qfield import (
    EUCLIDEAN_DISCRIMINANTS,
    KElt,
    OK,
    QIdeal,
    QuadInt,
    euler_phi_K,
    ideal_from_gens,
    ideal_is_subset,
    ideal_norm,
    ideal_residues,
    omega_data,
    principal_ideal,
    quad_xgcd,
    units,
)

INF = math.inf


class GeodesicsIntersect(ValueError):
    """The two geodesics cross, so the perpendicular feet are undefined."""


# ---------------------------------------------------------------------------
# quadratic irrationals


@dataclass(frozen=True)
class QuadIrr:
    """A root of x^2 - tr x + nm, irreducible over Q (K is None) or over K.

    `root` picks (tr + sqrt(tr^2 - 4 nm)) / 2 for "plus" and the other sign
    for "minus"; over K the square root is the principal complex one.
    """

    tr: object
    nm: object
    root: str = "plus"
    K: int | None = None

    def __post_init__(self):
        if self.root not in ("plus", "minus"):
            raise ValueError("root must be 'plus' or 'minus'")
        if self.K is None:
            tr, nm = Fraction(self.tr), Fraction(self.nm)
            object.__setattr__(self, "tr", tr)
            object.__setattr__(self, "nm", nm)
            d = tr * tr - 4 * nm
            if d >= 0 and _is_rational_square(d):
                raise ValueError("polynomial is reducible over Q")
        else:
            tr, nm = KElt.of(self.K, self.tr), KElt.of(self.K, self.nm)
            object.__setattr__(self, "tr", tr)
            object.__setattr__(self, "nm", nm)
            if _k_sqrt(tr * tr - 4 * nm) is not None:
                raise ValueError("polynomial is reducible over K")

    @classmethod
    def rational(cls, tr, nm, root: str = "plus") -> QuadIrr:
        return cls(Fraction(tr), Fraction(nm), root)

    @classmethod
    def over_k(cls, D: int, tr, nm, root: str = "plus") -> QuadIrr:
        return cls(KElt.of(D, tr), KElt.of(D, nm), root, D)

    @property
    def base(self):
        return "rational" if self.K is None else ("quadratic", self.K)

    def disc(self):
        return self.tr * self.tr - 4 * self.nm

    def conj(self) -> QuadIrr:
        return QuadIrr(self.tr, self.nm, "minus" if self.root == "plus" else "plus", self.K)

    def value(self):
        """Float value (complex over K)."""
        sign = 1 if self.root == "plus" else -1
        if self.K is None:
            return (float(self.tr) + sign * math.sqrt(float(self.disc()))) / 2
        return (self.tr.to_complex() + sign * cmath.sqrt(self.disc().to_complex())) / 2

    def mp_value(self, dps: int = 50):
        with mpmath.workdps(dps):
            sign = 1 if self.root == "plus" else -1
            if self.K is None:
                return (_mpq(self.tr) + sign * mpmath.sqrt(_mpq(self.disc()))) / 2
            return (_mpk(self.tr) + sign * mpmath.sqrt(_mpk(self.disc()))) / 2

    def is_integral(self) -> bool:
        if self.K is None:
            return self.tr.denominator == 1 and self.nm.denominator == 1
        return self.tr.is_integral() and self.nm.is_integral()

    def __repr__(self):
        base = "" if self.K is None else f", K={self.K}"
        return f"QuadIrr(tr={self.tr}, nm={self.nm}, {self.root}{base})"


def _is_rational_square(q: Fraction) -> bool:
    if q < 0:
        return False
    n, d = q.numerator, q.denominator
    return math.isqrt(n) ** 2 == n and math.isqrt(d) ** 2 == d


def _mpq(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def _mpk(z: KElt):
    f = omega_data(z.D)[1]
    re = _mpq(z.x) + f * _mpq(z.y) / 2
    im = _mpq(z.y) * mpmath.sqrt(-z.D) / 2
    return mpmath.mpc(re, im)


def _k_sqrt(z: KElt) -> KElt | None:
    """A square root of z inside K, or None."""
    if not z:
        return z
    w = cmath.sqrt(z.to_complex())
    im_scale = math.sqrt(-z.D) / 2
    f = omega_data(z.D)[1]
    y = Fraction(w.imag / im_scale).limit_denominator(10 ** 6)
    x = Fraction(w.real - f * float(y) / 2).limit_denominator(10 ** 6)
    r = KElt(z.D, x, y)
    return r if r * r == z else None


def h_complexity(alpha: QuadIrr) -> float:
    """2 / |alpha - alpha^sigma|."""
    d = alpha.disc()
    if alpha.K is None:
        return 2 / math.sqrt(float(d))
    return 2 / float(d.norm()) ** 0.25


def q_bottom(alpha: QuadIrr, c, d):
    """nm c^2 + tr c d + d^2, so that h(g alpha) = h(alpha) |q_bottom|."""
    return alpha.nm * c * c + alpha.tr * c * d + d * d


def mobius_apply(g, alpha: QuadIrr) -> QuadIrr:
    """g . alpha for g = ((a, b), (c, d)) of determinant one (entries in O_K over K)."""
    (a, b), (c, d) = g
    if alpha.K is not None:
        a, b, c, d = (KElt.of(alpha.K, t) for t in (a, b, c, d))
    qb = q_bottom(alpha, c, d)
    tr = (2 * a * c * alpha.nm + (a * d + b * c) * alpha.tr + 2 * b * d) / qb
    nm = (a * a * alpha.nm + a * b * alpha.tr + b * b) / qb
    if alpha.K is None:
        det = a * d - b * c
        if det != 1:
            raise ValueError("matrix must have determinant one")
        flip = (qb < 0) != (alpha.root == "minus")
        return QuadIrr(tr, nm, "minus" if flip else "plus")
    if a * d - b * c != 1:
        raise ValueError("matrix must have determinant one")
    x = alpha.value()
    den = c.to_complex() * x + d.to_complex()
    y = (a.to_complex() * x + b.to_complex()) / den
    plus = QuadIrr(tr, nm, "plus", alpha.K)
    minus = plus.conj()
    return plus if abs(plus.value() - y) <= abs(minus.value() - y) else minus


# ---------------------------------------------------------------------------
# stabilisers and subgroups


@dataclass(frozen=True)
class HeckeSubgroup:
    """Gamma_0(level): determinant-one matrices whose lower-left entry lies in the level ideal.

    Over Q the level is a positive integer; over K it is an integral QIdeal
    (or a generator of one) and `K` is the discriminant.
    """

    level: object
    K: int | None = None

    def level_ideal(self) -> QIdeal:
        if isinstance(self.level, QIdeal):
            return self.level
        if isinstance(self.level, QuadInt):
            return principal_ideal(self.level)
        return principal_ideal(QuadInt(self.K, int(self.level)))

    def contains(self, g) -> bool:
        c = g[1][0]
        if self.K is None:
            return int(c) % int(self.level) == 0
        c = c if isinstance(c, QuadInt) else KElt.of(self.K, c).to_quadint()
        if not c:
            return True
        return ideal_is_subset(principal_ideal(c), self.level_ideal())

    def index(self) -> int:
        if self.K is None:
            return hecke_index(int(self.level))
        return hecke_index(self.level_ideal(), ("quadratic", self.K))


def hecke(level, base="rational") -> HeckeSubgroup:
    if base == "rational":
        if int(level) < 1:
            raise ValueError("level must be a positive integer")
        return HeckeSubgroup(int(level))
    return HeckeSubgroup(level, base[1])


def _prime_ideals_above(D: int, p: int) -> list[QIdeal]:
    e, f = omega_data(D)
    omega = QuadInt(D, 0, 1)
    roots = [r for r in range(p) if (r * r - f * r - e) % p == 0]
    if not roots:
        return [principal_ideal(QuadInt(D, p))]
    return [ideal_from_gens([QuadInt(D, p), omega - r]) for r in roots]


def hecke_index(level, base="rational") -> int:
    """Index of Gamma_0(level) in the full modular group: n(c) prod (1 + 1/n(p))."""
    if base == "rational":
        N = int(level)
        if N < 1:
            raise ValueError("level must be a positive integer")
        out = Fraction(N)
        for p in factorize(N):
            out *= 1 + Fraction(1, p)
        return int(out)
    D = base[1]
    c = level if isinstance(level, QIdeal) else principal_ideal(level)
    n = int(ideal_norm(c))
    out = Fraction(n)
    for p in factorize(n):
        for P in _prime_ideals_above(D, p):
            if ideal_is_subset(c, P):
                out *= 1 + Fraction(1, int(ideal_norm(P)))
    return int(out)


def hecke_index_enumerated(level: QIdeal) -> int:
    """|P^1(O_K / c)|: unimodular residue pairs divided by the residue units."""
    D = level.D
    one = OK(D)
    res = ideal_residues(one, level)
    pairs = sum(
        1 for x in res for y in res
        if ideal_from_gens([g for g in (x, y) if g] + level.generators(), 1, D) == one
    )
    return pairs // euler_phi_K(level)


@dataclass
class StabResult:
    automorph: tuple | None
    translation_length: float
    m_point: int
    reciprocal: bool
    reciprocator: tuple | None
    bound: int
    elliptic: list = field(default_factory=list)


def _ring(alpha: QuadIrr):
    if alpha.K is None:
        return lambda n: range(-n, n + 1), lambda z: abs(z), (lambda t: t)
    D = alpha.K

    def elems(n):
        return [QuadInt(D, x, y) for x in range(-n, n + 1) for y in range(-n, n + 1)]

    return elems, (lambda z: max(abs(z.x), abs(z.y))), (lambda t: t.to_complex())


def _as_ring(alpha: QuadIrr, z):
    """z as an element of Z or O_K, or None if it is not integral."""
    if alpha.K is None:
        z = Fraction(z)
        return int(z) if z.denominator == 1 else None
    z = KElt.of(alpha.K, z)
    return z.to_quadint() if z.is_integral() else None


def _trace_key(alpha: QuadIrr, g):
    t = g[0][0] + g[1][1]
    if alpha.K is None:
        return (t > 0, 0)
    z = t.to_complex()
    return (z.real > 1e-12 or (abs(z.real) <= 1e-12 and z.imag > 1e-12), 0)


def _c_positive(alpha: QuadIrr, c) -> bool:
    if alpha.K is None:
        return c > 0
    return (c.x, c.y) > (0, 0)


def translation_length(alpha: QuadIrr, g) -> float:
    """Hyperbolic translation length 2 |log|lambda|| of a loxodromic g."""
    t = g[0][0] + g[1][1]
    tc = complex(t) if alpha.K is None else t.to_complex()
    lam = (tc + cmath.sqrt(tc * tc - 4)) / 2
    return 2 * abs(math.log(abs(lam)))


def stab_search(alpha: QuadIrr, entry_bound: int = 6) -> StabResult:
    """Fixers and reciprocators of alpha with entries of height <= entry_bound.

    A fixer of alpha has the shape ((a, -c nm), (c, a - c tr)); a reciprocator
    (sending alpha to its conjugate) has the shape ((a, c nm - a tr), (c, -a)).
    The primitive fixer is the loxodromic one of least translation length,
    normalised to a trace with positive real part and a "positive" c.
    """
    elems, height, _ = _ring(alpha)
    box = elems(entry_bound)
    fixers = []
    recips = []
    for a in box:
        for c in box:
            if not c:
                continue
            b = _as_ring(alpha, -c * alpha.nm)
            d = _as_ring(alpha, a - c * alpha.tr)
            if b is not None and d is not None and height(b) <= entry_bound and height(d) <= entry_bound:
                if a * d - b * c == 1:
                    fixers.append(((a, b), (c, d)))
            b2 = _as_ring(alpha, c * alpha.nm - a * alpha.tr)
            if b2 is not None and height(b2) <= entry_bound and -a * a - b2 * c == 1:
                recips.append(((a, b2), (c, -a)))
    elliptic = []
    lox = []
    for g in fixers:
        t = g[0][0] + g[1][1]
        tc = complex(t) if alpha.K is None else t.to_complex()
        if abs(tc.imag) < 1e-12 and abs(tc.real) < 2 - 1e-12:
            elliptic.append(g)
        else:
            lox.append(g)
    # +-I fix everything; elliptic fixers come in +- pairs
    m_point = 1 + len(elliptic) // 2
    best = None
    if lox:
        ell = min(translation_length(alpha, g) for g in lox)
        cands = [g for g in lox if abs(translation_length(alpha, g) - ell) < 1e-9]
        cands = [g for g in cands if _trace_key(alpha, g)[0]] or cands
        pos = [g for g in cands if _c_positive(alpha, g[1][0])]
        best = (pos or cands)[0]
    tl = translation_length(alpha, best) if best else math.nan
    recips.sort(key=lambda g: max(height(t) for row in g for t in row))
    return StabResult(best, tl, m_point, bool(recips), recips[0] if recips else None, entry_bound, elliptic)


def rational_automorph(alpha: QuadIrr):
    """The primitive fixer of a real quadratic irrational via the Pell equation."""
    if alpha.K is not None:
        raise ValueError("only for real quadratic irrationals")
    a, b, c = primitive_form_of(alpha.tr, alpha.nm)
    (p, q), (r, s) = automorph(a, b, c)
    # automorph(a, b, c) fixes the roots of a x^2 + b x + c acting by Moebius maps
    g = ((p, q), (r, s))
    return g if r > 0 else mat_inv(g)


@dataclass
class OrbitSpec:
    alpha0: QuadIrr
    subgroup: object = "full"
    automorph: tuple | None = None
    m_point: int = 1
    reciprocal: bool = False
    elliptic: list = field(default_factory=list)

    @classmethod
    def make(cls, alpha0: QuadIrr, subgroup="full", entry_bound: int = 6) -> OrbitSpec:
        if alpha0.K is None:
            g = rational_automorph(alpha0)
            st = stab_search(alpha0, entry_bound)
            return cls(alpha0, subgroup, g, 1, st.reciprocal)
        st = stab_search(alpha0, entry_bound)
        if st.automorph is None:
            raise ValueError("no loxodromic fixer found within the entry bound")
        return cls(alpha0, subgroup, st.automorph, st.m_point, st.reciprocal, st.elliptic)

    def group_generator(self):
        """The least power of the automorph lying in the subgroup."""
        if self.subgroup == "full":
            return self.automorph, 1
        g = self.automorph
        r = 1
        while not self.subgroup.contains(g):
            g = _mat_mul_any(g, self.automorph)
            r += 1
            if r > 10000:
                raise ArithmeticError("no power of the automorph lies in the subgroup")
        return g, r


def _mat_mul_any(m, n):
    (a, b), (c, d) = m
    (e, f), (g, h) = n
    return (a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h)


# ---------------------------------------------------------------------------
# orbit representatives by complexity


@dataclass
class OrbitRep:
    row: tuple
    matrix: tuple
    point: QuadIrr
    h: float


def _complete_row(c: int, d: int):
    g, x, y = xgcd(d, c)
    # d x + c y = 1  ->  a = x, b = -y
    return (x, -y), (c, d)


def orbit_reps_by_h(spec: OrbitSpec, s) -> list[OrbitRep]:
    """Points of G.alpha0 modulo translations with h <= s (rational base).

    Each point is g alpha0 for a bottom row (c, d); h(g alpha0) equals
    h(alpha0) |q_bottom(c, d)|, and rows are identified modulo +-1 and right
    multiplication by the G-stabiliser of alpha0.
    """
    alpha = spec.alpha0
    if alpha.K is not None:
        raise ValueError("use bianchi_orbit over an imaginary quadratic field")
    h0 = h_complexity(alpha)
    census = _rational_census(spec, s / h0)
    out = []
    for c, d in census.reps:
        g = _complete_row(c, d)
        pt = mobius_apply(g, alpha)
        out.append(OrbitRep((c, d), g, pt, h0 * abs(float(q_bottom(alpha, c, d)))))
    return out


def _rational_census(spec: OrbitSpec, X):
    alpha = spec.alpha0
    if not alpha.is_integral():
        raise ValueError("alpha0 must be an algebraic integer")
    gen, _ = spec.group_generator()
    (a, b), (c, d) = gen
    genT = ((a, c), (b, d))  # rows act on the right
    accept = (lambda p: True) if spec.subgroup == "full" else (lambda p: p[0] % spec.subgroup.level == 0)
    X = Fraction(X).limit_denominator(10 ** 12) if isinstance(X, float) else Fraction(X)
    form = (alpha.nm, alpha.tr, 1)
    return orbit_census(form, X, genT, accept)


def traces_in_window(spec: OrbitSpec, eps, window) -> list[Fraction]:
    """Traces alpha + alpha^sigma of points of G.alpha0 + Z with |alpha - alpha^sigma| >= eps.

    Returned sorted with multiplicity; translations by k add 2k to the trace.
    """
    alpha = spec.alpha0
    if alpha.K is not None:
        raise ValueError("rational base only")
    lo, hi = (Fraction(t) for t in window)
    eps = float(eps)
    X = 2 / (eps * h_complexity(alpha)) * (1 + 1e-9)
    census = _rational_census(spec, X)
    out = []
    for c, d in census.reps:
        pt = mobius_apply(_complete_row(c, d), alpha)
        # |alpha - alpha^sigma| >= eps tested exactly: disc >= eps^2
        if float(pt.disc()) < eps * eps * (1 - 1e-12):
            continue
        t0 = pt.tr
        kmin = math.ceil((lo - t0) / 2)
        kmax = math.floor((hi - t0) / 2)
        out.extend(t0 + 2 * k for k in range(kmin, kmax + 1))
    return sorted(out)


# ---------------------------------------------------------------------------
# Bianchi orbits over an imaginary quadratic field


def _vmul(e, f, x1, y1, x2, y2):
    yy = y1 * y2
    return x1 * x2 + e * yy, x1 * y2 + y1 * x2 + f * yy


def _vnorm(e, f, x, y):
    return x * x + f * x * y - e * y * y


def _tup(z: QuadInt | KElt) -> tuple[int, int]:
    return int(z.x), int(z.y)


def _row_mul(e, f, p, g):
    """Row (c, d) times the 2x2 matrix g, everything as integer coordinate pairs."""
    (cx, cy, dx, dy) = p
    (a, b), (c, d) = g
    n1 = _vmul(e, f, cx, cy, *a)
    n2 = _vmul(e, f, dx, dy, *c)
    m1 = _vmul(e, f, cx, cy, *b)
    m2 = _vmul(e, f, dx, dy, *d)
    return (n1[0] + n2[0], n1[1] + n2[1], m1[0] + m2[0], m1[1] + m2[1])


def _row_norm(e, f, p):
    return _vnorm(e, f, p[0], p[1]) + _vnorm(e, f, p[2], p[3])


def _sign_norm4(p):
    q = tuple(-t for t in p)
    return p if p > q else q


def _canonical_row(e, f, p, gen, gen_inv, extra):
    """Least-norm row in the orbit of p under +-1, the elliptic fixers and <gen>.

    The row norm along k -> p gen^k is a sum of two exponentials plus a
    bounded oscillating term, so it need not be convex; each direction is
    walked until the norm is far above the best value seen.
    """
    best_n = None
    best = []
    for start in [p] + [_row_mul(e, f, p, g) for g in extra]:
        n0 = _row_norm(e, f, start)
        local = [(n0, start)]
        for step in (gen, gen_inv):
            q = start
            lo = n0
            for _ in range(200):
                q = _row_mul(e, f, q, step)
                n = _row_norm(e, f, q)
                local.append((n, q))
                lo = min(lo, n)
                if n > 64 * lo + 64:
                    break
        for n, q in local:
            if best_n is None or n < best_n:
                best_n, best = n, [q]
            elif n == best_n:
                best.append(q)
    return max(_sign_norm4(q) for q in best)


def _gcd_is_unit(D: int, p) -> bool:
    c = QuadInt(D, p[0], p[1])
    d = QuadInt(D, p[2], p[3])
    while d:
        c, d = d, c - c.divround(d) * d
    return c.norm() == 1


@dataclass
class BianchiCensus:
    spec: OrbitSpec
    s: object
    reps: list
    saturated: bool
    box: float

    def count(self) -> int:
        return len(self.reps)

    def points(self) -> list[QuadIrr]:
        D = self.spec.alpha0.K
        out = []
        for p in self.reps:
            c, d = QuadInt(D, p[0], p[1]), QuadInt(D, p[2], p[3])
            g, x, y = quad_xgcd(d, c)
            # d x + c y = g with g a unit; a = x / g, b = -y / g
            ginv = g.conj()  # g is a unit, so its inverse is its conjugate
            out.append(mobius_apply(((x * ginv, -(y * ginv)), (c, d)), self.spec.alpha0))
        return out


def _lattice_xy(D, z):
    f = omega_data(D)[1]
    y = z.imag / (math.sqrt(-D) / 2)
    return z.real - f * y / 2, y


def _bianchi_candidates(spec: OrbitSpec, X: float, B: float):
    """Candidate rows (c, d), c != 0 with |c| <= B, as an int64 array of shape (n, 4)."""
    alpha = spec.alpha0
    D = alpha.K
    e, f = omega_data(D)
    im = math.sqrt(-D) / 2
    a1 = alpha.value()
    a2 = alpha.conj().value()
    delta = abs(a1 - a2)
    ymax = math.ceil(B / im)
    cs = []
    for cy in range(-ymax, ymax + 1):
        xr = math.ceil(B + abs(f * cy) / 2) + 1
        for cx in range(-xr, xr + 1):
            z = complex(cx + f * cy / 2, cy * im)
            if 0 < abs(z) <= B:
                cs.append((cx, cy, z))
    groups: dict[int, list] = {}
    for cx, cy, z in cs:
        r = min(math.sqrt(X), 2 * X / (abs(z) * delta)) + 1e-9
        R = math.ceil(r * (1 + 1 / im)) + 1
        groups.setdefault(R, []).append((cx, cy, z))
    chunks = []
    for R, items in groups.items():
        sx, sy = np.meshgrid(np.arange(-R, R + 1), np.arange(-R, R + 1))
        sx, sy = sx.ravel(), sy.ravel()
        cxy = np.array([(cx, cy) for cx, cy, _ in items], dtype=np.int64)
        for root in (a1, a2):
            centers = [_lattice_xy(D, -z * root) for _, _, z in items]
            ctr = np.rint(np.array(centers)).astype(np.int64)
            dx = (ctr[:, 0:1] + sx[None, :]).ravel()
            dy = (ctr[:, 1:2] + sy[None, :]).ravel()
            cc = np.repeat(cxy, sx.size, axis=0)
            chunks.append(np.column_stack([cc, dx, dy]))
    if not chunks:
        return np.zeros((0, 4), dtype=np.int64)
    return np.concatenate(chunks)


def _vrow_mul(e, f, P, g):
    (a, b), (c, d) = g
    n1 = _vmul(e, f, P[:, 0], P[:, 1], *a)
    n2 = _vmul(e, f, P[:, 2], P[:, 3], *c)
    m1 = _vmul(e, f, P[:, 0], P[:, 1], *b)
    m2 = _vmul(e, f, P[:, 2], P[:, 3], *d)
    return np.column_stack([n1[0] + n2[0], n1[1] + n2[1], m1[0] + m2[0], m1[1] + m2[1]])


def _vrow_norm(e, f, P):
    return _vnorm(e, f, P[:, 0], P[:, 1]) + _vnorm(e, f, P[:, 2], P[:, 3])


def _mat_tuples(g):
    return tuple(tuple(_tup(KElt.of(t.D, t) if isinstance(t, QuadInt) else t) for t in row) for row in g)


def _bianchi_reps(spec: OrbitSpec, s, B: float) -> set:
    alpha = spec.alpha0
    D = alpha.K
    e, f = omega_data(D)
    disc_norm = alpha.disc().norm()
    s = Fraction(s)
    # h(g alpha0) <= s  <=>  16 N(q_bottom)^2 <= s^4 N(disc)
    bound4 = s ** 4 * disc_norm
    X = float(s) / h_complexity(alpha)
    gen, _ = spec.group_generator()
    gen_t = _mat_tuples(gen)
    (a, b), (c, d) = gen
    gen_inv_t = _mat_tuples(((d, -b), (-c, a)))
    extra = [_mat_tuples(g) for g in spec.elliptic]
    P = _bianchi_candidates(spec, X, B)
    tr, nm = _tup(alpha.tr), _tup(alpha.nm)
    c2 = _vmul(e, f, P[:, 0], P[:, 1], P[:, 0], P[:, 1])
    cd = _vmul(e, f, P[:, 0], P[:, 1], P[:, 2], P[:, 3])
    d2 = _vmul(e, f, P[:, 2], P[:, 3], P[:, 2], P[:, 3])
    t1 = _vmul(e, f, *nm, c2[0], c2[1])
    t2 = _vmul(e, f, *tr, cd[0], cd[1])
    q = (t1[0] + t2[0] + d2[0], t1[1] + t2[1] + d2[1])
    qn = _vnorm(e, f, q[0], q[1])
    ok = 16 * qn * qn <= math.floor(bound4)
    ok &= (P[:, 0] > 0) | ((P[:, 0] == 0) & (P[:, 1] > 0))
    P = P[ok]
    n0 = _vrow_norm(e, f, P)
    keep = np.ones(len(P), dtype=bool)
    for g in [gen_t, gen_inv_t] + extra:
        keep &= n0 <= _vrow_norm(e, f, _vrow_mul(e, f, P, g))
    reps = set()
    for row in set(map(tuple, P[keep].tolist())):
        if _canonical_row(e, f, row, gen_t, gen_inv_t, extra) == row and _gcd_is_unit(D, row):
            reps.add(row)
    # c = 0: rows (0, u) for units u, present when h(alpha0) <= s
    if 16 <= bound4:
        for u in units(D):
            row = (0, 0, u.x, u.y)
            reps.add(_canonical_row(e, f, row, gen_t, gen_inv_t, extra))
    return reps


def bianchi_orbit(spec: OrbitSpec, s, B0: float = 4.0, max_box: float = 4096.0) -> BianchiCensus:
    """Points of G.alpha0 + O_K with h <= s, alpha0 over an imaginary quadratic field.

    Points correspond to bottom rows (c, d) modulo +-1 and the right action of
    the stabiliser of alpha0. The search box |c| <= B doubles until two
    consecutive doublings leave the set of representatives unchanged.
    """
    alpha = spec.alpha0
    if alpha.K is None:
        raise ValueError("use orbit_reps_by_h over Q")
    if alpha.K not in EUCLIDEAN_DISCRIMINANTS:
        raise NotImplementedError("coprimality of rows is tested by the Euclidean algorithm")
    if not alpha.is_integral():
        raise ValueError("alpha0 must be an algebraic integer")
    if spec.subgroup != "full":
        raise NotImplementedError("only the full group is supported over K")
    B = B0
    prev = None
    stable = 0
    reps: set = set()
    while B <= max_box:
        reps = _bianchi_reps(spec, s, B)
        if prev is not None and reps == prev:
            stable += 1
            if stable >= 2:
                return BianchiCensus(spec, s, sorted(reps), True, B)
        else:
            stable = 0
        prev = reps
        B *= 2
    return BianchiCensus(spec, s, sorted(reps), False, B / 2)


# ---------------------------------------------------------------------------
# crossratios, relative heights and common perpendiculars


def _is_inf(z) -> bool:
    return isinstance(z, float) and math.isinf(z)


def _exactish(z, dps):
    if isinstance(z, QuadIrr):
        return z.mp_value(dps)
    if isinstance(z, KElt):
        return _mpk(z)
    return z


def crossratio(a, b, c, d, dps: int = 50):
    """[a, b, c, d] = (c - a)(d - b) / ((c - b)(d - a)), with INF allowed once.

    Rational (int / Fraction) arguments give an exact Fraction; quadratic
    irrationals are evaluated with mpmath at `dps` digits.
    """
    pts = [a, b, c, d]
    if sum(_is_inf(p) for p in pts) > 1:
        raise ValueError("at most one point may be infinite")
    with mpmath.workdps(dps):
        vals = [_exactish(p, dps) for p in pts]
        finite = [v for v in vals if not _is_inf(v)]
        for i in range(len(finite)):
            for j in range(i):
                if finite[i] == finite[j]:
                    raise ValueError("points must be pairwise distinct")
        a, b, c, d = vals

        def diff(x, y):
            return None if _is_inf(x) or _is_inf(y) else x - y

        num = [diff(c, a), diff(d, b)]
        den = [diff(c, b), diff(d, a)]
        out = 1
        for t in num:
            if t is not None:
                out = out * t
        for t in den:
            if t is not None:
                exact = isinstance(t, (int, Fraction)) and isinstance(out, (int, Fraction))
                out = Fraction(out) / t if exact else out / t
        return out if isinstance(out, (int, Fraction)) else (
            complex(out) if isinstance(out, mpmath.mpc) else float(out))


def abs_crossratio(a, b, c, d, dps: int = 50) -> float:
    return float(abs(crossratio(a, b, c, d, dps)))


def rel_height(alpha: QuadIrr, beta: QuadIrr, dps: int = 50) -> float:
    """min(|b - a||b' - a'|, |b - a'||b' - a|) / |b - b'| with primes the conjugates."""
    with mpmath.workdps(dps):
        a, a2 = alpha.mp_value(dps), alpha.conj().mp_value(dps)
        b, b2 = beta.mp_value(dps), beta.conj().mp_value(dps)
        p1 = abs(b - a) * abs(b2 - a2)
        p2 = abs(b - a2) * abs(b2 - a)
        return float(min(p1, p2) / abs(b - b2))


def rel_height_crossratio(alpha: QuadIrr, beta: QuadIrr, dps: int = 50) -> float:
    """The same height as |a - a'| / max of two absolute crossratios."""
    if beta in (alpha, alpha.conj()):
        return 0.0
    a, a2, b, b2 = alpha, alpha.conj(), beta, beta.conj()
    m = max(abs_crossratio(a, b, a2, b2, dps), abs_crossratio(a, b2, a2, b, dps))
    return float(abs(alpha.mp_value(dps) - a2.mp_value(dps)) / m)


@dataclass(frozen=True)
class VerticalFoot:
    """Common perpendicular is a vertical line over x (the other foot is infinity)."""

    x: object


def x_pm(alpha: QuadIrr, beta: QuadIrr):
    """Feet (x-, x+) of the common perpendicular of the axes of alpha and beta.

    Exact Fractions when the radicand is a rational square; floats (complex
    over K) otherwise. Raises GeodesicsIntersect when the real axes cross.
    """
    if alpha.K != beta.K:
        raise ValueError("alpha and beta live over different fields")
    if beta in (alpha, alpha.conj()):
        raise ValueError("beta must differ from alpha and its conjugate")
    ta, na, tb, nb = alpha.tr, alpha.nm, beta.tr, beta.nm
    if ta == tb:
        return VerticalFoot(ta / 2)
    rad = (na - nb) * (na - nb) + (tb - ta) * (tb * na - ta * nb)
    den = tb - ta
    if alpha.K is None:
        if rad < 0:
            raise GeodesicsIntersect(f"radicand {rad} is negative")
        if _is_rational_square(rad):
            r = Fraction(math.isqrt(rad.numerator), math.isqrt(rad.denominator))
            return (nb - na - r) / den, (nb - na + r) / den
        r = math.sqrt(rad)
        return float(nb - na - r) / float(den), float(nb - na + r) / float(den)
    rt = _k_sqrt(rad)
    if rt is not None:
        return (nb - na - rt) / den, (nb - na + rt) / den
    r = cmath.sqrt(rad.to_complex())
    dc, nd = den.to_complex(), (nb - na).to_complex()
    return (nd - r) / dc, (nd + r) / dc


# ---------------------------------------------------------------------------
# relative orbit enumeration over Q


def signed_form(beta: QuadIrr) -> tuple[int, int, int]:
    """The primitive (A, B, C) with beta = (-B + sqrt(B^2 - 4AC)) / (2A)."""
    if beta.K is not None:
        raise ValueError("rational base only")
    a, b, c = primitive_form_of(beta.tr, beta.nm)
    return (a, b, c) if beta.root == "plus" else (-a, -b, -c)


def form_point(F) -> QuadIrr:
    A, B, C = F
    q = QuadIrr(Fraction(-B, A), Fraction(C, A), "plus" if A > 0 else "minus")
    return q


def _lt_sqrt(k: int, D: int) -> bool:
    """k < sqrt(D) for a non-square D > 0."""
    return k < 0 or k * k < D


def _is_reduced(F, D: int) -> bool:
    a, b, c = F
    return _lt_sqrt(b, D) and b > 0 and _lt_sqrt(2 * abs(a) - b, D) and not _lt_sqrt(2 * abs(a) + b, D)


def _rho(F, D: int):
    a, b, c = F
    m = 2 * abs(c)
    if _lt_sqrt(abs(c), D):
        s = math.isqrt(D)
        r = s - ((s + b) % m)
    else:
        r = (-b) % m
        if r > abs(c):
            r -= m
    return (c, r, (r * r - D) // (4 * c))


@lru_cache(maxsize=1 << 18)
def proper_class_key(F) -> tuple[int, int, int]:
    """Least reduced form in the reduction cycle of an indefinite form.

    Two forms are properly equivalent exactly when their keys agree.
    """
    a, b, c = F
    D = b * b - 4 * a * c
    G = F
    for _ in range(10000):
        if _is_reduced(G, D):
            break
        G = _rho(G, D)
    else:
        raise ArithmeticError("reduction did not terminate")
    start = G
    best = G
    G = _rho(G, D)
    while G != start:
        best = min(best, G)
        G = _rho(G, D)
    return best


@dataclass
class RelHeightRecord:
    beta: QuadIrr
    h_rel: float
    feet: tuple | VerticalFoot | None
    flags: dict = field(default_factory=dict)


@dataclass
class RelOrbitResult:
    alpha0: QuadIrr
    beta0: QuadIrr
    s: float
    records: list
    saturated: bool
    box: int
    kappa: float

    def count(self, include_flagged: bool = True) -> int:
        if include_flagged:
            return len(self.records)
        return sum(1 for r in self.records if r.feet is not None)

    def feet_window_mass(self, window) -> int:
        """Number of feet x-(beta), x+(beta) in `window`, over every beta of the orbit with h <= s.

        Each representative stands for its images under powers of the
        automorph, whose feet are the images of its feet.
        """
        return _feet_mass(self, window)


def _t_coord(alpha, x, dps=50):
    with mpmath.workdps(dps):
        a, a2 = alpha.mp_value(dps), alpha.conj().mp_value(dps)
        if _is_inf(x):
            return mpmath.mpf(1)
        x = _exactish(x, dps)
        if isinstance(x, Fraction):
            x = _mpq(x)
        return (x - a) / (x - a2)


def _feet_mass(res: RelOrbitResult, window) -> int:
    alpha = res.alpha0
    lo, hi = (Fraction(t) for t in window)
    Q = lambda x: x * x - alpha.tr * x + alpha.nm  # noqa: E731
    if Q(lo) * Q(hi) <= 0 or (Q(lo) > 0 and lo < alpha.tr / 2 < hi):
        raise ValueError("window touches a fixed point of the automorph; the mass is infinite")
    with mpmath.workdps(50):
        t1, t2 = _t_coord(alpha, lo), _t_coord(alpha, hi)
        sign = mpmath.sign(t1)
        l1, l2 = sorted((mpmath.log(abs(t1)), mpmath.log(abs(t2))))
        L = mpmath.log(res.kappa) if res.kappa > 1 else -mpmath.log(res.kappa)
        total = 0
        for rec in res.records:
            feet = rec.feet
            if feet is None:
                continue
            pts = (feet.x, INF) if isinstance(feet, VerticalFoot) else feet
            for x in pts:
                t = _t_coord(alpha, x)
                if mpmath.sign(t) != sign:
                    continue
                u = mpmath.log(abs(t))
                kmin = int(mpmath.ceil((l1 - u) / L))
                kmax = int(mpmath.floor((l2 - u) / L))
                total += max(0, kmax - kmin + 1)
    return total


def _kappa(alpha: QuadIrr, M) -> float:
    with mpmath.workdps(50):
        x0 = mpmath.mpf(0)
        (a, b), (c, d) = M
        y = (a * x0 + b) / (c * x0 + d)
        return float(_t_coord(alpha, y) / _t_coord(alpha, x0))


def _rel_candidates(alpha_form, D2: int, s: float, Amax: int):
    """Signed forms (A, B, C) of discriminant D2 with relative height <= s (plus a margin)."""
    a, b, c = alpha_form
    D1 = b * b - 4 * a * c
    root = math.sqrt(D1 * D2)
    span = 2 * a * math.sqrt(D2) * s * (1 + 1e-9) + 1e-9
    dmax = math.floor(root + span)
    A = np.arange(-Amax, Amax + 1, dtype=np.int64)
    A = A[A != 0]
    out = []
    for delta in range(-dmax, dmax + 1):
        if abs(abs(delta) - root) > span:
            continue
        R = D1 * A * A - 2 * a * delta * A + a * a * D2
        ok = R >= 0
        r = np.zeros_like(R)
        r[ok] = np.rint(np.sqrt(R[ok].astype(np.float64))).astype(np.int64)
        ok &= r * r == R
        if not ok.any():
            continue
        Ak, rk = A[ok], r[ok]
        for sgn in (1, -1):
            num = Ak * b + sgn * rk
            m = num % a == 0
            B = num[m] // a
            Am = Ak[m]
            cn = b * B - 2 * c * Am - delta
            m2 = cn % (2 * a) == 0
            for AA, BB, CC in zip(Am[m2].tolist(), B[m2].tolist(), (cn[m2] // (2 * a)).tolist()):
                out.append((AA, BB, CC, delta))
    return out


def rel_orbit_enumerate(alpha0: QuadIrr, beta0: QuadIrr, subgroup="full", s=1.0,
                        A0: int = 64, cap: int = 1 << 15) -> RelOrbitResult:
    """Classes of Gamma_alpha0 \\ Gamma.beta0 with relative height <= s (rational base).

    A point beta is encoded by its signed primitive form (A, B, C); with
    Delta = b B - 2 a C - 2 c A for the form (a, b, c) of alpha0, the height is
    | |Delta| - sqrt(D1 D2) | / (2 a sqrt(D2)). For every admissible Delta the
    leading coefficient A is scanned in [-Amax, Amax]; Amax doubles until two
    doublings add nothing. Each class is represented by the beta whose
    coordinate t = (beta - alpha0) / (beta - alpha0^sigma) lies in the
    fundamental band mu^(-1/2) <= |t| < mu^(1/2) of the automorph.
    Classes whose axes cross that of alpha0 are kept, with feet None and the
    flag "crossing".
    """
    if alpha0.K is not None or beta0.K is not None:
        raise NotImplementedError("relative orbits are enumerated over Q only")
    if subgroup != "full":
        raise NotImplementedError("only the full modular group is supported")
    fa = signed_form(alpha0)
    if fa[0] < 0:
        fa = (-fa[0], -fa[1], -fa[2])
    a, b, c = fa
    D1 = b * b - 4 * a * c
    F0 = signed_form(beta0)
    D2 = F0[1] ** 2 - 4 * F0[0] * F0[2]
    key0 = proper_class_key(F0)
    M = rational_automorph(alpha0)
    kappa = _kappa(alpha0, M)
    half = abs(math.log(kappa)) / 2
    s = float(s)

    def collect(Amax):
        found = {}
        for A, B, C, delta in _rel_candidates(fa, D2, s, Amax):
            F = (A, B, C)
            if math.gcd(math.gcd(A, B), C) != 1:
                continue
            h = abs(abs(delta) - math.sqrt(D1 * D2)) / (2 * a * math.sqrt(D2))
            if h > s * (1 + 1e-9):
                continue
            beta = form_point(F)
            if beta in (alpha0, alpha0.conj()):
                continue
            t = _t_coord(alpha0, beta, 30)
            lt = float(mpmath.log(abs(t)))
            if not (-half - 1e-9 <= lt < half + 1e-9):
                continue
            with mpmath.workdps(60):
                lt_mp = mpmath.log(abs(_t_coord(alpha0, beta, 60)))
                hb = mpmath.log(kappa if kappa > 1 else 1 / kappa) / 2
                if not (-hb <= lt_mp < hb):
                    continue
                near = min(abs(lt_mp + hb), abs(lt_mp - hb)) < mpmath.mpf(10) ** -25
            if proper_class_key(F) != key0:
                continue
            found[F] = (beta, delta, near)
        return found

    Amax = A0
    prev = None
    stable = 0
    found = {}
    saturated = False
    while Amax <= cap:
        found = collect(Amax)
        if prev is not None and found.keys() == prev:
            stable += 1
            if stable >= 2:
                saturated = True
                break
        else:
            stable = 0
        prev = set(found)
        Amax *= 2
    records = []
    for F, (beta, delta, near) in sorted(found.items()):
        flags = {}
        if near:
            flags["band_boundary"] = True
        crossing = delta * delta < D1 * D2
        if crossing:
            flags["crossing"] = True
            feet = None
        else:
            feet = x_pm(alpha0, beta)
        records.append(RelHeightRecord(beta, rel_height(alpha0, beta), feet, flags))
    # alpha0 and its conjugate are fixed by the automorph and have height 0
    for z in (alpha0, alpha0.conj()):
        if D1 == D2 and proper_class_key(signed_form(z)) == key0:
            records.append(RelHeightRecord(z, 0.0, None, {"h_zero": True}))
    return RelOrbitResult(alpha0, beta0, s, records, saturated, Amax, kappa)


# ---------------------------------------------------------------------------
# norm-form representations in a window


def _window_touches_roots(alpha: QuadIrr, lo: Fraction, hi: Fraction) -> bool:
    Q = lambda x: x * x - alpha.tr * x + alpha.nm  # noqa: E731
    ql, qh = Q(lo), Q(hi)
    return ql * qh <= 0 or (ql > 0 and lo < alpha.tr / 2 < hi)


def normform_window(alpha0: QuadIrr, s, window, base="rational") -> list[tuple]:
    """Primitive (u, v), both signs, with |u^2 - tr uv + nm v^2| <= s and u/v in the window.

    Over Q the window is an interval; over K it is a box in the coordinates of
    {1, omega} and u, v run over O_K with uO_K + vO_K = O_K. Since
    |N(u, v)| >= |v|^2 min_window |Q|, the search over v is finite.
    """
    s = Fraction(s)
    if base == "rational":
        if alpha0.K is not None:
            raise ValueError("alpha0 is not rational-based")
        lo, hi = (Fraction(t) for t in window)
        if lo > hi:
            return []
        if _window_touches_roots(alpha0, lo, hi):
            raise ValueError("window touches a root of Q_alpha; the count is infinite")
        Q = lambda x: x * x - alpha0.tr * x + alpha0.nm  # noqa: E731
        qmin = min(abs(Q(lo)), abs(Q(hi)))
        vmax = math.isqrt(math.floor(s / qmin))
        out = []
        for v in range(1, vmax + 1):
            for u in range(math.ceil(lo * v), math.floor(hi * v) + 1):
                if math.gcd(u, v) != 1:
                    continue
                n = u * u - alpha0.tr * u * v + alpha0.nm * v * v
                if abs(n) <= s:
                    out.append((u, v))
                    out.append((-u, -v))
        return out
    return _normform_window_k(alpha0, s, window)


def _normform_window_k(alpha0: QuadIrr, s: Fraction, window) -> list[tuple]:
    D = alpha0.K
    if D not in EUCLIDEAN_DISCRIMINANTS:
        raise NotImplementedError("coprimality is tested by the Euclidean algorithm")
    (x0, x1), (y0, y1) = ((Fraction(a), Fraction(b)) for a, b in window)
    if x0 > x1 or y0 > y1:
        return []
    f = omega_data(D)[1]
    im = math.sqrt(-D) / 2
    corners = [complex(float(x) + f * float(y) / 2, float(y) * im) for x in (x0, x1) for y in (y0, y1)]
    roots = [alpha0.value(), alpha0.conj().value()]

    def dist_to_box(z):
        # distance from z to the parallelogram, by its coordinates
        yz = z.imag / im
        xz = z.real - f * yz / 2
        inside = float(x0) <= xz <= float(x1) and float(y0) <= yz <= float(y1)
        if inside:
            return 0.0
        best = math.inf
        for i in range(4):
            p, q = corners[[0, 1, 3, 2][i]], corners[[1, 3, 2, 0][i]]
            seg = q - p
            u = max(0.0, min(1.0, ((z - p) * seg.conjugate()).real / abs(seg) ** 2))
            best = min(best, abs(z - (p + u * seg)))
        return best

    d1, d2 = (dist_to_box(z) for z in roots)
    if min(d1, d2) <= 0:
        raise ValueError("window touches a root of Q_alpha; the count is infinite")
    qmin = d1 * d2
    vmax2 = float(s) / qmin
    rad = max(abs(z) for z in corners)
    out = []
    for v in _k_elements_in_disc(D, 0j, math.sqrt(vmax2)):
        if not v:
            continue
        vc = v.to_complex()
        for u in _k_elements_in_disc(D, 0j, rad * abs(vc) + 1):
            q = KElt.of(D, u) / KElt.of(D, v)
            if not (x0 <= q.x <= x1 and y0 <= q.y <= y1):
                continue
            n = u * u - alpha0.tr * u * v + alpha0.nm * v * v
            if n.norm() > s * s:
                continue
            if _gcd_is_unit(D, (u.x, u.y, v.x, v.y)):
                out.append((u, v))
    return out


def _k_elements_in_disc(D: int, center: complex, r: float) -> list[QuadInt]:
    f = omega_data(D)[1]
    im = math.sqrt(-D) / 2
    out = []
    for y in range(math.floor((center.imag - r) / im), math.ceil((center.imag + r) / im) + 1):
        off = f * y / 2
        for x in range(math.floor(center.real - r - off), math.ceil(center.real + r - off) + 1):
            if abs(complex(x + off, y * im) - center) <= r:
                out.append(QuadInt(D, x, y))
    return out
