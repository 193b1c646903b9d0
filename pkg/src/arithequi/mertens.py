"""Mertens-type counts of primitive pairs and the Farey-type points they define."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .core_arith import box_residues
from .qfield import (
    QIdeal,
    QuadInt,
    coprime_to,
    elements_of_norm_up_to,
    euler_phi_K,
    ideal_conj,
    ideal_from_gens,
    ideal_is_principal,
    ideal_product,
    ideal_residues,
    principal_ideal,
    unit_count,
)
from .quat import (
    _hurwitz_to_doubled,
    _left_ideal_d,
    _qmul,
    dconj,
    dnorm,
    hurwitz_elements_doubled,
    right_gcd_d,
)


@dataclass
class MertensCount:
    s: Fraction
    count: int
    breakdown: dict[int, int] = field(default_factory=dict)
    convention_flags: dict[str, object] = field(default_factory=dict)

    def count_without_v0(self) -> int:
        return self.count - self.breakdown.get(0, 0)


def psi_rational(s: int) -> int:
    """Shear classes of coprime (u, v) with |v| <= s, by direct enumeration."""
    if s < 1:
        raise ValueError("s must be at least 1")
    total = 2  # (1, 0) and (-1, 0)
    for v in range(1, s + 1):
        # u runs over a full residue system mod v; both signs of v
        total += 2 * _coprime_residue_count(v)
    return total


@lru_cache(maxsize=None)
def _coprime_residue_count(v: int) -> int:
    return sum(1 for u in range(v) if math.gcd(u, v) == 1)


def _integral_rep(m: QIdeal) -> QIdeal:
    return QIdeal(m.D, 1, m.basis)


def _cofactor_ideal(v: QuadInt, m: QIdeal) -> QIdeal:
    """The integral ideal v * m^-1 for v in the integral ideal m."""
    prod = ideal_product(principal_ideal(v), ideal_conj(m))
    return QIdeal(m.D, m.lattice_det(), prod.basis)


def psi_quadratic(D: int, m: QIdeal, s) -> MertensCount:
    """Classes of pairs (u, v) in m x m with uO + vO = m and n(v) <= n(m) s.

    Pairs are taken modulo the shear k.(u, v) = (u + kv, v), k in O_K. For a
    fractional m the scaled integral ideal is used; the count only depends on
    the ideal class.
    """
    if m.D != D:
        raise ValueError("ideal belongs to another field")
    s = Fraction(s)
    L = _integral_rep(m)
    nL = L.lattice_det()
    bound = nL * s
    breakdown: Counter[int] = Counter()
    for v in elements_of_norm_up_to(L, math.floor(bound)):
        n = v.norm()
        if n == 0:
            continue
        # u in m / vO_K with uO + vO = m  <->  units of O_K / v m^-1
        breakdown[n] += euler_phi_K(_cofactor_ideal(v, L))
    principal = ideal_is_principal(L)
    v0 = unit_count(D) if principal else 0
    if v0:
        breakdown[0] = v0
    flags = {"v0_included": True, "v0_classes": v0, "m_principal": principal}
    return MertensCount(s, sum(breakdown.values()), dict(sorted(breakdown.items())), flags)


def coprime_residues_direct(m: QIdeal, v: QuadInt) -> list[QuadInt]:
    """Residues u of m / vO_K with uO_K + vO_K = m, by testing ideal sums."""
    L = _integral_rep(m)
    pv = principal_ideal(v)
    out = []
    for u in ideal_residues(L, pv):
        gens = [v] if not u else [u, v]
        if ideal_from_gens(gens, 1, L.D) == L:
            out.append(u)
    return out


def psi_quadratic_direct(D: int, m: QIdeal, s) -> int:
    """The same count as psi_quadratic, by residue enumeration with ideal-sum tests."""
    s = Fraction(s)
    L = _integral_rep(m)
    total = 0
    for v in elements_of_norm_up_to(L, math.floor(L.lattice_det() * s)):
        if v:
            total += len(coprime_residues_direct(L, v))
    if ideal_is_principal(L):
        total += unit_count(D)
    return total


@lru_cache(maxsize=100000)
def _hurwitz_coprime_residues(ideal_key) -> tuple[tuple[int, int, int, int], ...]:
    """Doubled coords of residues u of O / Ov with Ou + Ov = O; Ov given by its HNF."""
    basis, vd = ideal_key
    out = []
    for h in box_residues([list(r) for r in basis]):
        ud = _hurwitz_to_doubled(h)
        if dnorm(right_gcd_d(ud, vd)) == 1:
            out.append(ud)
    return tuple(out)


def _hurwitz_residues_for(vd):
    lat = _left_ideal_d(vd)
    # any generator of the same left ideal gives the same residue set; the
    # first generator seen is stored alongside the key
    key = lat.basis
    rep = _HURWITZ_REP.setdefault(key, vd)
    return _hurwitz_coprime_residues((key, rep))


_HURWITZ_REP: dict = {}


def psi_hurwitz(s) -> MertensCount:
    """Classes of pairs (u, v) in O x O with Ou + Ov = O and N(v) <= s, modulo left shears."""
    s = Fraction(s)
    breakdown: Counter[int] = Counter()
    for vd in hurwitz_elements_doubled(math.floor(s)):
        breakdown[dnorm(vd)] += len(_hurwitz_residues_for(vd))
    breakdown[0] = 24
    flags = {"v0_included": True, "v0_classes": 24}
    return MertensCount(s, sum(breakdown.values()), dict(sorted(breakdown.items())), flags)


def _box_shifts(p, window, half_open: bool):
    """Integer vectors k with p + k inside the box `window` (list of (lo, hi))."""
    ranges = []
    for x, (lo, hi) in zip(p, window):
        kmin = math.ceil(lo - x)
        kmax = math.ceil(hi - x) - 1 if half_open else math.floor(hi - x)
        if kmax < kmin:
            return []
        ranges.append(range(kmin, kmax + 1))
    out = [()]
    for r in ranges:
        out = [k + (t,) for k in out for t in r]
    return out


def farey_points(base, s, window, half_open: bool = False) -> list[tuple[object, int]]:
    """Quotients u/v (or u v^-1) of primitive pairs that land in `window`.

    `base` is "rational", ("quadratic", D, m) or "hurwitz". Rational windows
    are intervals (lo, hi). Quadratic windows are boxes in the coordinates of
    the basis {1, omega}; Hurwitz windows are boxes over {1, i, j, rho}. Every
    pair contributes weight 1, so each point carries the number of pairs with
    that quotient. Points are returned sorted.
    """
    s = Fraction(s)
    acc: Counter = Counter()
    if base == "rational":
        lo, hi = (Fraction(t) for t in window)
        for v in range(1, math.floor(s) + 1):
            for u in range(math.ceil(lo * v), math.floor(hi * v) + 1):
                if half_open and Fraction(u, v) >= hi:
                    continue
                if math.gcd(u, v) == 1:
                    acc[Fraction(u, v)] += 2  # (u, v) and (-u, -v)
        return sorted(acc.items())
    if base == "hurwitz":
        win = [(Fraction(a), Fraction(b)) for a, b in window]
        for vd in hurwitz_elements_doubled(math.floor(s)):
            n4 = 4 * dnorm(vd)
            for ud in _hurwitz_residues_for(vd):
                # u v^-1 = u conj(v) / N(v), doubled product is 4 u conj(v)
                p = _qmul(ud, dconj(vd))
                # Hurwitz coordinates of the rational quaternion p / n4
                c3 = Fraction(2 * p[3], n4)
                h = (Fraction(p[0], n4) - c3 / 2, Fraction(p[1], n4) - c3 / 2,
                     Fraction(p[2], n4) - c3 / 2, c3)
                for k in _box_shifts(h, win, half_open):
                    acc[tuple(a + b for a, b in zip(h, k))] += 1
        return sorted(acc.items())
    kind, D, m = base
    if kind != "quadratic":
        raise ValueError(f"unknown base {base!r}")
    L = _integral_rep(m)
    win = [(Fraction(a), Fraction(b)) for a, b in window]
    for v in elements_of_norm_up_to(L, math.floor(L.lattice_det() * s)):
        if not v:
            continue
        n = v.norm()
        vbar = v.conj()
        for u in _quad_coprime_residues(L, v):
            q = u * vbar
            p = (Fraction(q.x, n), Fraction(q.y, n))
            for k in _box_shifts(p, win, half_open):
                acc[(p[0] + k[0], p[1] + k[1])] += 1
    return sorted(acc.items())


_QUAD_RES: dict = {}


def _quad_coprime_residues(L: QIdeal, v: QuadInt) -> list[QuadInt]:
    key = (L, principal_ideal(v))
    hit = _QUAD_RES.get(key)
    if hit is None:
        if L.lattice_det() == 1:
            hit = [u for u in ideal_residues(L, key[1]) if coprime_to(u, key[1])]
        else:
            hit = coprime_residues_direct(L, v)
        _QUAD_RES[key] = hit
    return hit


def fundamental_domain_report(D: int, m: QIdeal, s) -> dict:
    """Reconcile Farey window mass over one shear fundamental domain with psi_quadratic."""
    pts = farey_points(("quadratic", D, m), s, [(0, 1), (0, 1)], half_open=True)
    mass = sum(w for _, w in pts)
    psi = psi_quadratic(D, m, s)
    v0 = psi.breakdown.get(0, 0)
    return {
        "window_mass": mass,
        "psi": psi.count,
        "v0_classes": v0,
        "difference": psi.count - mass,
        "reconciled": psi.count - mass == v0,
    }


def hurwitz_fundamental_domain_report(s) -> dict:
    pts = farey_points("hurwitz", s, [(0, 1)] * 4, half_open=True)
    mass = sum(w for _, w in pts)
    psi = psi_hurwitz(s)
    return {
        "window_mass": mass,
        "psi": psi.count,
        "v0_classes": 24,
        "difference": psi.count - mass,
        "reconciled": psi.count - mass == 24,
    }
