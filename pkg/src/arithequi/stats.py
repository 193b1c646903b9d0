"""Empirical measures, limit densities, discrepancies, power-law fits and theoretical constants."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate

from .core_arith import factorize, kronecker, regulator, riemann_zeta, zeta_K2
from .qfield import unit_count
from .quadirr import QuadIrr


@dataclass
class EmpiricalMeasure:
    """Weighted points on the line (floats) or the plane (pairs)."""

    points: list = field(default_factory=list)
    ambient: str = "line"

    def __post_init__(self):
        if self.ambient not in ("line", "plane"):
            raise ValueError("ambient must be 'line' or 'plane'")

    @classmethod
    def from_points(cls, pts, ambient: str = "line") -> EmpiricalMeasure:
        """Build from bare locations (weight 1) or (location, weight) pairs."""
        out = []
        for p in pts:
            if ambient == "line" and not isinstance(p, tuple):
                out.append((p, 1))
            elif ambient == "plane" and len(p) == 2 and not isinstance(p[0], tuple):
                out.append((p, 1))
            else:
                out.append(p)
        return cls(out, ambient)

    def total_mass(self):
        return sum(w for _, w in self.points)


def _in_interval(x, lo, hi, closed: bool) -> bool:
    return lo <= x <= hi if closed else lo <= x < hi


def window_mass(emp: EmpiricalMeasure, window, closed: bool = False):
    """Mass of the half-open window [lo, hi) (or box), or the closed one."""
    if emp.ambient == "line":
        lo, hi = window
        return sum(w for x, w in emp.points if _in_interval(x, lo, hi, closed))
    (x0, x1), (y0, y1) = window
    return sum(
        w for (x, y), w in emp.points
        if _in_interval(x, x0, x1, closed) and _in_interval(y, y0, y1, closed)
    )


def interval_grid(lo, hi, n: int) -> list[tuple]:
    lo, hi = Fraction(lo), Fraction(hi)
    step = (hi - lo) / n
    return [(lo + k * step, lo + (k + 1) * step) for k in range(n)]


def box_grid(xr, yr, nx: int, ny: int) -> list[tuple]:
    return [(cx, cy) for cx in interval_grid(*xr, nx) for cy in interval_grid(*yr, ny)]


@dataclass
class Discrepancy:
    value: float
    cells: list  # (window, normalised empirical mass, target mass, relative deviation)


def grid_table(emp: EmpiricalMeasure, target_mass_fn, grid, normalizer) -> Discrepancy:
    cells = []
    worst = 0.0
    for win in grid:
        target = float(target_mass_fn(win))
        if target <= 0:
            raise ValueError(f"cell {win} has zero target mass")
        got = float(normalizer) * float(window_mass(emp, win))
        dev = abs(got - target) / target
        worst = max(worst, dev)
        cells.append((win, got, target, dev))
    return Discrepancy(worst, cells)


def grid_discrepancy(emp: EmpiricalMeasure, target_mass_fn, grid, normalizer) -> float:
    """Largest relative deviation |normalizer * mass - target| / target over the cells."""
    return grid_table(emp, target_mass_fn, grid, normalizer).value


def lebesgue_mass(win) -> float:
    if isinstance(win[0], tuple):
        (x0, x1), (y0, y1) = win
        return float((x1 - x0) * (y1 - y0))
    return float(win[1] - win[0])


# ---------------------------------------------------------------------------
# limit densities


def _roots(alpha: QuadIrr):
    if alpha.K is not None:
        raise ValueError("real quadratic irrational expected")
    a1, a2 = alpha.value(), alpha.conj().value()
    return max(a1, a2), min(a1, a2)


def _check_interval(alpha: QuadIrr, p, q):
    hi_root, lo_root = _roots(alpha)
    for r in (lo_root, hi_root):
        if min(p, q) <= r <= max(p, q):
            raise ValueError("interval contains a root of Q_alpha")


def target_mass_invQ_real(alpha: QuadIrr, interval) -> float:
    """Integral of dt / |Q_alpha(t)| over [p, q], in closed form."""
    p, q = (float(t) for t in interval)
    if p == q:
        return 0.0
    _check_interval(alpha, p, q)
    a, b = _roots(alpha)

    def F(t):
        return math.log(abs((t - a) / (t - b)))

    return abs(F(q) - F(p)) / (a - b)


def target_mass_invQ_real_quad(alpha: QuadIrr, interval) -> float:
    """The same integral by adaptive quadrature."""
    p, q = (float(t) for t in interval)
    if p == q:
        return 0.0
    _check_interval(alpha, p, q)
    tr, nm = float(alpha.tr), float(alpha.nm)
    val, _ = integrate.quad(lambda t: 1.0 / abs(t * t - tr * t + nm), min(p, q), max(p, q),
                            epsabs=1e-13, epsrel=1e-12)
    return val


def target_mass_invQ2_complex(alpha: QuadIrr, box, tol: float = 1e-6) -> float:
    """Integral of dLeb(z) / |Q_alpha(z)|^2 over a box ((x0, x1), (y0, y1)) of the plane."""
    (x0, x1), (y0, y1) = ((float(a), float(b)) for a, b in box)
    if x0 == x1 or y0 == y1:
        return 0.0
    r1 = complex(alpha.value())
    r2 = complex(alpha.conj().value())
    for r in (r1, r2):
        if x0 <= r.real <= x1 and y0 <= r.imag <= y1:
            raise ValueError("box contains a root of Q_alpha")

    def g(y, x):
        z = complex(x, y)
        return 1.0 / abs((z - r1) * (z - r2)) ** 2

    val, _ = integrate.dblquad(g, x0, x1, y0, y1, epsabs=0, epsrel=tol)
    return val


# ---------------------------------------------------------------------------
# power laws


@dataclass
class AsymptoticFit:
    samples: list
    C_hat: float
    beta_hat: float
    residual: float


def fit_power_law(samples) -> AsymptoticFit:
    """Least-squares fit of log count = log C + beta log s."""
    samples = sorted((float(s), float(c)) for s, c in samples)
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    if any(c <= 0 or s <= 0 for s, c in samples):
        raise ValueError("counts and thresholds must be positive")
    xs = np.log([s for s, _ in samples])
    ys = np.log([c for _, c in samples])
    beta, logc = np.polyfit(xs, ys, 1)
    C = math.exp(logc)
    resid = max(abs(C * s ** beta / c - 1) for s, c in samples)
    if resid < 1e-12:
        resid = 0.0
    return AsymptoticFit(samples, C, float(beta), resid)


# ---------------------------------------------------------------------------
# theoretical constants


def _need(params: dict, *keys):
    missing = [k for k in keys if k not in params]
    if missing:
        raise KeyError(f"missing parameters: {', '.join(missing)}")
    return [params[k] for k in keys]


def _prod_p3(D_A: int) -> int:
    out = 1
    for p in factorize(D_A):
        out *= p ** 3 - 1
    return out


def _lox_log(tr: complex) -> float:
    """|log|(tr + sqrt(tr^2 - 4)) / 2||, half the translation length."""
    lam = (tr + cmath.sqrt(tr * tr - 4)) / 2
    return abs(math.log(abs(lam)))


def _c_mertens_rational(p):
    return 6 / math.pi ** 2


def _c_mertens_K(p):
    (D,) = _need(p, "D")
    return math.pi / (zeta_K2(D).value * math.sqrt(abs(D)))


def _c_mertens_hurwitz(p):
    D_A = p.get("D_A", 2)
    return 90 * D_A ** 2 / (math.pi ** 2 * riemann_zeta(3).value * _prod_p3(D_A))


def _c_farey_K(p):
    """Normaliser turning Farey point counts into Lebesgue mass (depends on s)."""
    D, s = _need(p, "D", "s")
    return abs(D) * zeta_K2(D).value / (2 * math.pi * float(s) ** 2)


def _c_farey_Q(p):
    """Normaliser for rational Farey fractions counted with both signs."""
    (s,) = _need(p, "s")
    return math.pi ** 2 / (6 * float(s) ** 2)


def _c_traces_Q(p):
    """Expected number of traces per unit length."""
    R, eps = _need(p, "R", "eps")
    idx = p.get("index", 1)
    stab = p.get("stab_index", 1)
    return 6 * stab * R / (math.pi ** 2 * idx * float(eps))


def _c_orbit_Q(p):
    (R,) = _need(p, "R")
    return 6 * p.get("cusp_index", 1) * p.get("stab_index", 1) * R / (math.pi ** 2 * p.get("index", 1))


def _c_traces_hecke_K(p):
    """Expected number of traces per unit area for Gamma_0(c) . phi."""
    D, eps, k_c, idx = _need(p, "D", "eps", "k_c", "index")
    return 4 * math.pi ** 2 * k_c * math.log((1 + math.sqrt(5)) / 2) / (
        abs(D) ** 1.5 * zeta_K2(D).value * idx * float(eps) ** 2)


def _c_relheight_Q(p):
    R_a, R_b, delta = _need(p, "R_alpha", "R_beta", "root_gap")
    return 48 * R_a * R_b / (math.pi ** 2 * delta)


def _c_relheight_feet_Q(p):
    """Feet mass per unit s and unit target mass."""
    (R_b,) = _need(p, "R_beta")
    return 24 * R_b / math.pi ** 2


def _c_relheight_K(p):
    D, tr_a, tr_b, h_a = _need(p, "D", "tr_alpha_hat", "tr_beta_hat", "h_alpha")
    m_a, m_b = p.get("m_alpha", 1), p.get("m_beta", 1)
    return 8 * math.pi ** 3 * _lox_log(complex(tr_a)) * _lox_log(complex(tr_b)) * h_a ** 2 / (
        m_a * m_b * abs(D) ** 1.5 * zeta_K2(D).value)


def _c_normform_Q(p):
    return 12 / math.pi ** 2


def _c_normform_K(p):
    """Count per s^2 and unit target mass for the dLeb / |Q|^2 limit."""
    (D,) = _need(p, "D")
    return 8 * math.pi ** 2 / (abs(D) * zeta_K2(D).value * unit_count(D))


def _c_gauss_posdef(p):
    (disc,) = _need(p, "Disc")
    return 12 / (math.pi * math.sqrt(-disc))


def _c_indef(p):
    (disc,) = _need(p, "Disc")
    return 12 * regulator(disc) / (math.pi ** 2 * math.sqrt(disc))


def _c_herm_posdef(p):
    D, disc = _need(p, "D", "Disc")
    return math.pi ** 2 / (abs(D) * zeta_K2(D).value * abs(disc))


def _c_ham_posdef(p):
    (disc,) = _need(p, "Disc")
    D_A = p.get("D_A", 2)
    return 60 * D_A / (riemann_zeta(3).value * disc ** 2 * _prod_p3(D_A))


def _c_herm_indef_gaussian(p):
    iota, disc = _need(p, "iota", "Disc")
    out = math.pi ** 2 / (8 * iota * zeta_K2(-4).value)
    for q in factorize(abs(disc)):
        if q % 2:
            out *= 1 + kronecker(-4, q) / q
    return out


def _c_bianchi(p):
    D, tr = _need(p, "D", "tr_automorph")
    m = p.get("m_point", 1)
    lattice_index = p.get("lattice_index", 1)
    stab = p.get("stab_index", 1)
    idx = p.get("index", 1)
    return math.pi ** 2 * lattice_index * stab * _lox_log(complex(tr)) / (m * idx * abs(D) * zeta_K2(D).value)


THEORY_CONSTANTS = {
    "mertens_rational": _c_mertens_rational,
    "mertens_K": _c_mertens_K,
    "mertens_hurwitz": _c_mertens_hurwitz,
    "farey_K": _c_farey_K,
    "farey_Q": _c_farey_Q,
    "traces_Q": _c_traces_Q,
    "orbit_Q": _c_orbit_Q,
    "traces_hecke_K": _c_traces_hecke_K,
    "relheight_Q": _c_relheight_Q,
    "relheight_feet_Q": _c_relheight_feet_Q,
    "relheight_K": _c_relheight_K,
    "normform_Q": _c_normform_Q,
    "normform_K": _c_normform_K,
    "gauss_posdef": _c_gauss_posdef,
    "indef": _c_indef,
    "herm_posdef": _c_herm_posdef,
    "ham_posdef": _c_ham_posdef,
    "herm_indef_gaussian": _c_herm_indef_gaussian,
    "bianchi": _c_bianchi,
}


def theory_constant(experiment_id: str, params: dict | None = None) -> float:
    if experiment_id not in THEORY_CONSTANTS:
        raise KeyError(f"unknown experiment id {experiment_id!r}")
    return THEORY_CONSTANTS[experiment_id](params or {})
