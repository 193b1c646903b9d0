"""Binary quadratic, Hermitian and Hamiltonian forms."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .core_arith import automorph, mat_inv
from .qfield import (
    EUCLIDEAN_DISCRIMINANTS,
    OK,
    QIdeal,
    QuadInt,
    ideal_from_gens,
    omega_data,
)
from .quat import Quaternion, dnorm, hurwitz_elements_doubled, right_gcd_d


@dataclass(frozen=True)
class BinForm:
    """a*N(u) + <b-term> + c*N(v) over Z, O_K or the Hurwitz order.

    kind is "quadratic", "hermitian" or "hamiltonian"; D is the field
    discriminant for the Hermitian kind.
    """

    kind: str
    a: int
    b: object
    c: int
    D: int | None = None

    def __post_init__(self):
        if self.kind == "quadratic":
            if not isinstance(self.b, int):
                raise TypeError("quadratic forms need an integer b")
        elif self.kind == "hermitian":
            if not isinstance(self.b, QuadInt) or self.b.D != self.D:
                raise TypeError("Hermitian forms need b in O_K for the given D")
        elif self.kind == "hamiltonian":
            if not isinstance(self.b, Quaternion) or not self.b.is_hurwitz():
                raise TypeError("Hamiltonian forms need b in the Hurwitz order")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    def key(self):
        b = self.b
        if isinstance(b, QuadInt):
            b = (b.x, b.y)
        elif isinstance(b, Quaternion):
            b = b.doubled()
        return (self.a, b, self.c)


def quadratic(a: int, b: int, c: int) -> BinForm:
    return BinForm("quadratic", a, b, c)


def hermitian(D: int, a: int, b, c: int) -> BinForm:
    if isinstance(b, int):
        b = QuadInt(D, b)
    elif isinstance(b, tuple):
        b = QuadInt(D, *b)
    return BinForm("hermitian", a, b, c, D)


def hamiltonian(a: int, b, c: int) -> BinForm:
    if not isinstance(b, Quaternion):
        b = Quaternion(b)
    return BinForm("hamiltonian", a, b, c)


def form_eval(f: BinForm, u, v):
    if f.kind == "quadratic":
        return f.a * u * u + f.b * u * v + f.c * v * v
    if f.kind == "hermitian":
        return f.a * u.norm() + (f.b * u.conj() * v).trace() + f.c * v.norm()
    return f.a * u.norm() + (u.conj() * f.b * v).trace() + f.c * v.norm()


def form_disc(f: BinForm):
    if f.kind == "quadratic":
        return f.b * f.b - 4 * f.a * f.c
    return f.b.norm() - f.a * f.c


def form_compose(f: BinForm, g) -> BinForm:
    """f o g for the column action (u, v) -> (g11 u + g12 v, g21 u + g22 v)."""
    (p, q), (r, t) = g
    if f.kind == "quadratic":
        a = form_eval(f, p, r)
        c = form_eval(f, q, t)
        b = 2 * f.a * p * q + f.b * (p * t + q * r) + 2 * f.c * r * t
        return BinForm("quadratic", a, b, c)
    if f.kind == "hermitian":
        D = f.D
        p, q, r, t = (x if isinstance(x, QuadInt) else QuadInt(D, x) for x in (p, q, r, t))
        a = form_eval(f, p, r)
        c = form_eval(f, q, t)
        b = p.conj() * (f.a * q + f.b * t) + r.conj() * (f.b.conj() * q + f.c * t)
        return BinForm("hermitian", a, b, c, D)
    p, q, r, t = (x if isinstance(x, Quaternion) else Quaternion(x) for x in (p, q, r, t))
    a = form_eval(f, p, r)
    c = form_eval(f, q, t)
    b = p.conj() * (f.a * q + f.b * t) + r.conj() * (f.b.conj() * q + f.c * t)
    return BinForm("hamiltonian", int(a), b, int(c))


def iota_f(f: BinForm) -> int:
    """The constant iota(f) in {1, 2, 3, 6} for an integral Hermitian form over Z[i]."""
    if f.kind != "hermitian" or f.D != -4:
        raise ValueError("defined for Hermitian forms over Z[i]")
    disc = form_disc(f)
    if disc % 4 == 0:
        return 2
    if f.a % 2 == 0 and f.c % 2 == 0:
        if disc % 4 == 1:
            return 3
        if disc % 4 == 2:
            return disc % 8
    return 1


def posdef_to_point(f: BinForm):
    """(-b/a, sqrt(-Disc)/a) in upper half-space; the first entry is complex or a Quaternion."""
    disc = form_disc(f)
    if disc >= 0 or f.a <= 0:
        raise ValueError("form must be positive definite")
    height = math.sqrt(-disc) / f.a
    if f.kind == "quadratic":
        raise ValueError("use a Hermitian or Hamiltonian form")
    if f.kind == "hermitian":
        return -f.b.to_complex() / f.a, height
    return Quaternion(*(-x / f.a for x in f.b.c)), height


def _require_posdef(f: BinForm):
    disc = form_disc(f)
    if f.a <= 0 or disc >= 0:
        raise ValueError("form must be positive definite")
    return disc


def _gauss_gcd_is_one(D: int, u: QuadInt, v: QuadInt) -> bool:
    if math.gcd(u.norm(), v.norm()) == 1:
        return True
    if D in EUCLIDEAN_DISCRIMINANTS:
        while v:
            u, v = v, u - u.divround(v) * v
        return u.norm() == 1
    return ideal_from_gens([u, v]) == OK(D)


def _disc_points(D: int, L: QIdeal, center: complex, r2: float):
    """Elements z of the integral ideal L with |z - center|^2 <= r2 (plus a small margin)."""
    e, f = omega_data(D)
    (a, b), (_, d) = L.basis
    im_w = math.sqrt(-D) / 2
    r = math.sqrt(max(r2, 0.0)) + 1e-9
    # z = x + y w with x + f y / 2 = Re, y * im_w = Im
    ymin = (center.imag - r) / im_w
    ymax = (center.imag + r) / im_w
    out = []
    # y = k1 b + k2 d ; x = k1 a
    k1lo = math.floor((center.real - r - abs(f) * max(abs(ymin), abs(ymax)) / 2) / a) - 1
    k1hi = math.ceil((center.real + r + abs(f) * max(abs(ymin), abs(ymax)) / 2) / a) + 1
    for k1 in range(k1lo, k1hi + 1):
        x = k1 * a
        for k2 in range(math.floor((ymin - k1 * b) / d), math.ceil((ymax - k1 * b) / d) + 1):
            y = k1 * b + k2 * d
            re = x + f * y / 2 - center.real
            imv = y * im_w - center.imag
            if re * re + imv * imv <= r2 + 1e-9:
                out.append(QuadInt(D, x, y))
    return out


def posdef_count(f: BinForm, m=None, s=0) -> int:
    """Primitive pairs (u, v) with f(u, v) <= s * n(m).

    Quadratic forms count coprime pairs in Z^2. Hermitian forms count pairs in
    m x m with uO_K + vO_K = m (m defaults to O_K). Hamiltonian forms count
    pairs of Hurwitz elements with Ou + Ov = O.
    """
    s = Fraction(s)
    disc = _require_posdef(f)
    if f.kind == "quadratic":
        # f = a (u + b v / 2a)^2 + (-disc / 4a) v^2
        k = Fraction(-disc, 4 * f.a)
        vmax = math.isqrt(math.floor(s / k)) + 1
        total = 0
        for v in range(-vmax, vmax + 1):
            rest = s - k * v * v
            if rest < 0:
                continue
            cen = Fraction(-f.b * v, 2 * f.a)
            r = math.sqrt(float(rest / f.a)) + 1
            for u in range(math.floor(cen - r), math.ceil(cen + r) + 1):
                if form_eval(f, u, v) <= s and math.gcd(u, v) == 1:
                    total += 1
        return total
    if f.kind == "hermitian":
        D = f.D
        L = OK(D) if m is None else QIdeal(D, 1, m.basis)
        bound = s * L.lattice_det()
        k = Fraction(-disc, f.a)  # f = a|u + (b/a) v|^2 + k |v|^2
        vs = _disc_points(D, L, 0j, float(bound / k))
        full = L.lattice_det() == 1
        bc = f.b.to_complex()
        total = 0
        for v in vs:
            rest = bound - k * v.norm()
            if rest < 0:
                continue
            cen = -bc * v.to_complex() / f.a
            for u in _disc_points(D, L, cen, float(rest / f.a)):
                if not u and not v:
                    continue
                if form_eval(f, u, v) > bound:
                    continue
                if full:
                    ok = _gauss_gcd_is_one(D, u, v) if (u and v) else (u or v).norm() == 1
                else:
                    ok = ideal_from_gens([u, v], 1, D) == L
                total += ok
        return total
    return _hamiltonian_posdef_count(f, s)


def _hamiltonian_posdef_count(f: BinForm, s: Fraction) -> int:
    disc = form_disc(f)
    k = Fraction(-disc, f.a)  # f = a N(u + (b/a) v) + k N(v)
    total = 0
    vlist = [(0, 0, 0, 0)] + hurwitz_elements_doubled(math.floor(s / k))
    b = f.b
    for vd in vlist:
        nv = dnorm(vd)
        rest = s - k * nv
        if rest < 0:
            continue
        v = Quaternion.from_doubled(vd)
        cen = (b * v) * Fraction(-1, f.a)
        # nearest Hurwitz point h to the centre, then u = h + e
        hd = tuple(round(2 * x) for x in cen.c)
        if len({t % 2 for t in hd}) != 1:
            hd = tuple(2 * round(x) for x in cen.c)
        h = Quaternion.from_doubled(hd)
        off = math.sqrt(float((cen - h).norm()))
        rad = math.sqrt(float(rest / f.a)) + off
        for ed in [(0, 0, 0, 0)] + hurwitz_elements_doubled(math.floor(rad * rad) + 1):
            ud = tuple(x + y for x, y in zip(hd, ed))
            if not any(ud) and not any(vd):
                continue
            u = Quaternion.from_doubled(ud)
            if form_eval(f, u, v) > s:
                continue
            total += dnorm(right_gcd_d(ud, vd)) == 1
    return total


# --- indefinite binary quadratic forms over Z -------------------------------

def pairs_with_small_value(form, X, V: int):
    """Integer pairs (u, v) != (0, 0) with |v| <= V and |a u^2 + b uv + c v^2| <= X.

    The form coefficients may be rationals; a must be nonzero.
    """
    a, b, c = (Fraction(t) for t in form)
    if a == 0:
        raise ValueError("leading coefficient must be nonzero")
    X = Fraction(X)
    out = []
    af = float(a)
    for v in range(-V, V + 1):
        intervals = []
        for T in (X, -X):
            # a u^2 + b v u + c v^2 - T = 0
            dsc = float(b * b * v * v - 4 * a * (c * v * v - T))
            if dsc < 0:
                continue
            r = math.sqrt(dsc)
            r1 = (-float(b) * v - r) / (2 * af)
            r2 = (-float(b) * v + r) / (2 * af)
            intervals.append((min(r1, r2), max(r1, r2)))
        if not intervals:
            continue
        lo = min(i[0] for i in intervals)
        hi = max(i[1] for i in intervals)
        inner = intervals[1] if len(intervals) == 2 else None
        for u in _candidate_range(lo, hi, inner):
            if u == 0 and v == 0:
                continue
            val = a * u * u + b * u * v + c * v * v
            if -X <= val <= X:
                out.append((u, v))
    return out


def _candidate_range(lo, hi, hole):
    """Integers in [lo, hi] outside the open interval hole (with unit margins)."""
    L, H = math.floor(lo) - 1, math.ceil(hi) + 1
    if hole is None or hole[1] - hole[0] < 4:
        return range(L, H + 1)
    h0, h1 = math.ceil(hole[0]) + 1, math.floor(hole[1]) - 1
    return list(range(L, h0)) + list(range(h1 + 1, H + 1))


def _apply(M, p):
    (a, b), (c, d) = M
    return (a * p[0] + b * p[1], c * p[0] + d * p[1])


def _sign_normal(p):
    return p if p > tuple(-x for x in p) else tuple(-x for x in p)


def canonical_pair(p, M):
    """Canonical representative of p modulo +-<M> (M hyperbolic, acting on columns).

    Walks the orbit in the direction that decreases u^2 + v^2 until it stops
    decreasing; the squared norm along the orbit is convex in the exponent, so
    this reaches the minimum. Ties are broken lexicographically after sign
    normalisation.
    """
    Minv = mat_inv(M)

    def n2(q):
        return q[0] * q[0] + q[1] * q[1]

    cur = p
    for step in (M, Minv):
        while True:
            nxt = _apply(step, cur)
            if n2(nxt) < n2(cur):
                cur = nxt
            else:
                break
    cands = [cur]
    for step in (M, Minv):
        q = _apply(step, cur)
        if n2(q) == n2(cur):
            cands.append(q)
    return max(_sign_normal(q) for q in cands)


@dataclass
class OrbitCensus:
    reps: list
    saturated: bool
    box: int


def orbit_census(form, X, M, accept=lambda p: True, V0: int = 8, cap: int = 1 << 16) -> OrbitCensus:
    """Classes mod +-<M> of primitive pairs with |form| <= X, box-saturated.

    The box |v| <= V is doubled until two consecutive doublings add nothing.
    """
    V = V0
    prev = None
    stable = 0
    reps: set = set()
    while V <= cap:
        reps = set()
        for p in pairs_with_small_value(form, X, V):
            if math.gcd(*p) == 1 and accept(p):
                reps.add(canonical_pair(p, M))
        if prev is not None and reps == prev:
            stable += 1
            if stable >= 2:
                return OrbitCensus(sorted(reps), True, V)
        else:
            stable = 0
        prev = reps
        V *= 2
    return OrbitCensus(sorted(reps), False, V // 2)


def indef_bqf_orbit_census(Q, s, cap: int = 1 << 16) -> OrbitCensus:
    if isinstance(Q, BinForm):
        Q = (Q.a, Q.b, Q.c)
    a, b, c = Q
    D = b * b - 4 * a * c
    if D <= 0 or math.isqrt(D) ** 2 == D:
        raise ValueError("discriminant must be positive and non-square")
    M = automorph(a, b, c)
    return orbit_census((a, b, c), s, M, cap=cap)


def indef_bqf_orbit_count(Q, s, cap: int = 1 << 16) -> int:
    """Classes mod SO_Q(Z) (and +-1) of coprime (u, v) with |Q(u, v)| <= s."""
    census = indef_bqf_orbit_census(Q, s, cap)
    if not census.saturated:
        raise RuntimeError("enumeration box did not saturate")
    return len(census.reps)


def _sign_surd(p: Fraction, q: Fraction, D: int) -> int:
    """Sign of p + q sqrt(D), exactly."""
    sp = (p > 0) - (p < 0)
    sq = (q > 0) - (q < 0)
    if sp == sq or sq == 0:
        return sp
    if sp == 0:
        return sq
    # opposite signs: compare p^2 with q^2 D
    d = p * p - q * q * D
    return sp if d > 0 else (sq if d < 0 else 0)


def _surd_mul(x, y, D):
    return (x[0] * y[0] + x[1] * y[1] * D, x[0] * y[1] + x[1] * y[0])


def indef_bqf_orbit_count_bruteforce(Q, s) -> int:
    """Independent count using a fundamental domain of the automorph group.

    With Q = a(u - alpha v)(u - alpha' v), set X = u - alpha v and Y = u - alpha' v.
    The automorph scales (X, Y) by (eps, 1/eps) up to sign, so each class has
    exactly one member with X > 0 and 1 <= |X/Y| < eps^2. All comparisons are
    exact in Q(sqrt D).
    """
    a, b, c = Q
    D = b * b - 4 * a * c
    M = automorph(a, b, c)
    t = M[0][0] + M[1][1]
    uu = Fraction(M[1][0], a)
    eps = (Fraction(t, 2), uu / 2)  # (t + u sqrt D) / 2
    eps2 = _surd_mul(eps, eps, D)
    eps4 = _surd_mul(eps2, eps2, D)
    # |X| <= sqrt(s e2 / |a|) and |Y| <= |X| bound the search box
    e2f = float(eps2[0]) + float(eps2[1]) * math.sqrt(D)
    xmax = math.sqrt(s * e2f / abs(a)) + 1
    sq = math.sqrt(D)
    vmax = math.ceil(2 * xmax * abs(a) / sq) + 1
    count = 0
    for v in range(-vmax, vmax + 1):
        cen = -b * v / (2 * a)
        spread = abs(v) * sq / (2 * abs(a)) + xmax + 1
        for u in range(math.floor(cen - spread), math.ceil(cen + spread) + 1):
            if (u, v) == (0, 0) or math.gcd(u, v) != 1:
                continue
            if abs(a * u * u + b * u * v + c * v * v) > s:
                continue
            p0 = Fraction(u) + Fraction(b * v, 2 * a)
            q0 = Fraction(v, 2 * a)
            X = (p0, -q0)
            Y = (p0, q0)
            if _sign_surd(X[0], X[1], D) <= 0:
                continue
            X2 = _surd_mul(X, X, D)
            Y2 = _surd_mul(Y, Y, D)
            if _sign_surd(X2[0] - Y2[0], X2[1] - Y2[1], D) < 0:
                continue
            E = _surd_mul(eps4, Y2, D)
            if _sign_surd(E[0] - X2[0], E[1] - X2[1], D) > 0:
                count += 1
    return count


# --- indefinite Hermitian forms: orbit census -------------------------------

def _lambda_reduce(D: int, a: int, b: QuadInt, disc: int):
    """Reduce b modulo a O_K into the centred half-open box; returns (a, b, c)."""
    e, f = omega_data(D)
    if a == 0:
        # translations change c by Tr(b conj(lam)); reduce c modulo their gcd
        g = math.gcd(b.trace(), (b * QuadInt(D, 0, 1).conj()).trace())
        return a, b, None if g == 0 else g
    # coordinates of b / a in the basis {1, omega}
    q = b * 1
    bx, by = Fraction(q.x, a), Fraction(q.y, a)
    ky = math.floor(by + Fraction(1, 2))
    kx = math.floor(bx + Fraction(1, 2))
    b2 = QuadInt(D, b.x - kx * a, b.y - ky * a)
    c = Fraction(b2.norm() - disc, a)
    if c.denominator != 1:
        raise ArithmeticError("non-integral coefficient after reduction")
    return a, b2, int(c)


def herm_reduce(f: BinForm) -> BinForm:
    """Canonical member of f's class under the translations [1, lam; 0, 1]."""
    disc = form_disc(f)
    if f.a == 0:
        _, b, g = _lambda_reduce(f.D, 0, f.b, disc)
        return BinForm("hermitian", 0, f.b, f.c % g if g else f.c, f.D)
    a, b, c = _lambda_reduce(f.D, f.a, f.b, disc)
    return BinForm("hermitian", a, b, c, f.D)


def _herm_neighbours(f: BinForm, cap: int):
    """Classes of f o [1, lam; 0, 1] o S with |a| <= cap, S = [0, -1; 1, 0]."""
    D = f.D
    a, b, c = f.a, f.b, f.c
    out = []
    if a == 0:
        g = math.gcd(b.trace(), (b * QuadInt(D, 0, 1).conj()).trace())
        nb = -b.conj()
        for val in range(-cap, cap + 1):
            if (val - c) % g == 0:
                out.append(BinForm("hermitian", val, nb, 0, D))
        return out
    disc = form_disc(f)
    # f(lam, 1) = a |lam + b/a|^2 - disc/a ; keep |f(lam, 1)| <= cap
    r2 = (disc + cap * abs(a)) / (a * a)
    cen = -b.to_complex() / a
    for lam in _disc_points(D, OK(D), cen, r2):
        val = form_eval(f, lam, QuadInt(D, 1))
        if abs(val) <= cap:
            nb = -(b + a * lam).conj()
            out.append(BinForm("hermitian", val, nb, a, D))
    return out


@dataclass
class HermCensus:
    forms: list
    saturated: bool
    explored: int
    cap: int


def herm_orbit_bfs(D: int, f: BinForm, subgroup="full", s=10, max_cap: int | None = None) -> HermCensus:
    """Census of the classes in O_K backslash SL2(O_K) . f with 0 < |a| <= s.

    Breadth-first search over the graph whose edges are f -> f o T_lam o S,
    restricted to classes with |a| <= cap. The cap starts at s and doubles
    until the census is unchanged by two consecutive doublings.
    """
    if D not in EUCLIDEAN_DISCRIMINANTS:
        raise ValueError("only Euclidean imaginary quadratic fields are supported")
    if subgroup != "full":
        raise NotImplementedError("only the full group SL2(O_K) is supported")
    if f.kind != "hermitian" or f.D != D:
        raise ValueError("need a Hermitian form over the given field")
    disc = form_disc(f)
    if disc <= 0:
        raise ValueError("form must be indefinite")
    s = int(s)
    max_cap = max_cap or 16 * s
    cap = s
    prev = None
    stable = 0
    census: list = []
    explored = 0
    while cap <= max_cap:
        seen = {herm_reduce(f).key(): herm_reduce(f)}
        queue = deque(seen.values())
        while queue:
            g = queue.popleft()
            for h in _herm_neighbours(g, cap):
                h = herm_reduce(h)
                k = h.key()
                if k not in seen:
                    seen[k] = h
                    queue.append(h)
        explored = len(seen)
        census = sorted((g for g in seen.values() if 0 < abs(g.a) <= s), key=lambda g: g.key())
        keys = [g.key() for g in census]
        if prev is not None and keys == prev:
            stable += 1
            if stable >= 2:
                return HermCensus(census, True, explored, cap)
        else:
            stable = 0
        prev = keys
        cap *= 2
    return HermCensus(census, False, explored, cap // 2)


def herm_point(f: BinForm) -> tuple[Fraction, Fraction]:
    """b/a in coordinates of the basis {1, omega}."""
    return Fraction(f.b.x, f.a), Fraction(f.b.y, f.a)
