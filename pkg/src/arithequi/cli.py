"""Batch runner: JSON config in, CSV and JSON report out."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import forms, mertens, quadirr, stats
from .core_arith import regulator
from .qfield import OK, QuadInt, ideal_from_gens

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_INCOMPLETE = 0, 1, 2, 3

# experiment id -> (verified statement, required params)
EXPERIMENTS = {
    "mertens_rational": ("classical Mertens", []),
    "mertens_K": ("Thm 3.1", ["D"]),
    "mertens_hurwitz": ("Thm 3.2", []),
    "farey_K": ("Thm 1.1", ["D"]),
    "traces_Q": ("Thm 1.3", ["alpha"]),
    "orbit_Q": ("Thm 4.1", ["alpha"]),
    "relheight_Q": ("Thm 1.5", ["alpha", "beta"]),
    "normform_Q": ("Thm 1.6", ["alpha", "window"]),
    "indef": ("indefinite binary quadratic forms", ["form"]),
    "gauss_posdef": ("Gauss, positive definite forms", ["form"]),
    "herm_posdef": ("positive definite Hermitian forms", ["D", "form"]),
    "ham_posdef": ("positive definite Hamiltonian forms", ["form"]),
    "herm_bfs": ("Thm 1.7", ["D", "form"]),
    "bianchi": ("Thm 4.2", ["D", "alpha"]),
}


class ConfigError(ValueError):
    pass


def list_experiments() -> list[tuple[str, str]]:
    return [(k, v[0]) for k, v in EXPERIMENTS.items()]


def validate_config(cfg) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    exp = cfg.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}")
    sched = cfg.get("s_schedule")
    if not isinstance(sched, list) or not sched:
        raise ConfigError("s_schedule must be a non-empty list")
    for s in sched:
        if isinstance(s, bool) or not isinstance(s, (int, float)) or s <= 0:
            raise ConfigError(f"bad threshold {s!r}")
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    for key in EXPERIMENTS[exp][1]:
        if key not in params:
            raise ConfigError(f"experiment {exp} needs params.{key}")
    tol = cfg.get("tolerances", {})
    if not isinstance(tol, dict) or any(not isinstance(v, (int, float)) for v in tol.values()):
        raise ConfigError("tolerances must map names to numbers")
    cap = cfg.get("saturation_cap")
    if cap is not None and (isinstance(cap, bool) or not isinstance(cap, int) or cap <= 0):
        raise ConfigError("saturation_cap must be a positive integer")
    grid = cfg.get("grid")
    if grid is not None and (not isinstance(grid, list) or not all(isinstance(g, int) and g > 0 for g in grid)):
        raise ConfigError("grid must be a list of positive integers")
    return cfg


# ---------------------------------------------------------------------------
# one threshold of one experiment


def _irr(spec, D=None) -> quadirr.QuadIrr:
    tr, nm = spec[0], spec[1]
    root = spec[2] if len(spec) > 2 else "plus"
    if D is None:
        return quadirr.QuadIrr.rational(Fraction(str(tr)), Fraction(str(nm)), root)
    return quadirr.QuadIrr.over_k(D, tuple(tr) if isinstance(tr, list) else tr,
                                  tuple(nm) if isinstance(nm, list) else nm, root)


def _row(count, const, theory, flags=None, extra=None):
    return {
        "count": count,
        "theory_constant": const,
        "theory_value": theory,
        "ratio": (count / theory) if theory else None,
        "flags": flags or {},
        "extra": extra or {},
    }


def _grid(cfg, default):
    return cfg.get("grid") or default


def _point(exp: str, cfg: dict, s):
    p = cfg.get("params", {})
    if exp == "mertens_rational":
        c = stats.theory_constant("mertens_rational")
        return _row(mertens.psi_rational(int(s)), c, c * s * s)
    if exp == "mertens_K":
        D = p["D"]
        m = ideal_from_gens([QuadInt(D, *g) for g in p["ideal"]]) if "ideal" in p else OK(D)
        res = mertens.psi_quadratic(D, m, s)
        c = stats.theory_constant("mertens_K", {"D": D})
        return _row(res.count, c, c * s * s, {k: v for k, v in res.convention_flags.items()})
    if exp == "mertens_hurwitz":
        res = mertens.psi_hurwitz(s)
        c = stats.theory_constant("mertens_hurwitz")
        return _row(res.count, c, c * s ** 4, dict(res.convention_flags))
    if exp == "farey_K":
        D = p["D"]
        m = ideal_from_gens([QuadInt(D, *g) for g in p["ideal"]]) if "ideal" in p else OK(D)
        pts = mertens.farey_points(("quadratic", D, m), s, [(0, 1), (0, 1)], half_open=True)
        emp = stats.EmpiricalMeasure([((float(x), float(y)), w) for (x, y), w in pts], "plane")
        norm = stats.theory_constant("farey_K", {"D": D, "s": s})
        area = math.sqrt(abs(D)) / 2  # Lebesgue area of the coordinate unit square
        nx, ny = _grid(cfg, [4, 4])
        grid = stats.box_grid((0, 1), (0, 1), nx, ny)
        table = stats.grid_table(emp, lambda w: stats.lebesgue_mass(w) * area, grid, norm)
        count = emp.total_mass()
        return _row(count, norm, area / norm, {}, _disc_json(table))
    if exp == "traces_Q":
        alpha = _irr(p["alpha"])
        eps = 1 / s  # thresholds are read as 1/eps
        lo, hi = p.get("window", [0, 10])
        spec = quadirr.OrbitSpec.make(alpha)
        tr = [float(t) for t in quadirr.traces_in_window(spec, eps, (lo, hi))]
        R = regulator(_disc_of(alpha))
        dens = stats.theory_constant("traces_Q", {"R": R, "eps": eps})
        emp = stats.EmpiricalMeasure([(t, 1) for t in tr], "line")
        grid = stats.interval_grid(lo, hi, _grid(cfg, [10])[0])
        table = stats.grid_table(emp, stats.lebesgue_mass, grid, 1 / dens)
        return _row(len(tr), dens, dens * (hi - lo), {}, _disc_json(table))
    if exp == "orbit_Q":
        alpha = _irr(p["alpha"])
        spec = quadirr.OrbitSpec.make(alpha)
        reps = quadirr.orbit_reps_by_h(spec, s)
        c = stats.theory_constant("orbit_Q", {"R": regulator(_disc_of(alpha))})
        return _row(len(reps), c, c * s)
    if exp == "relheight_Q":
        a, b = _irr(p["alpha"]), _irr(p["beta"])
        cap = cfg.get("saturation_cap")
        res = quadirr.rel_orbit_enumerate(a, b, "full", s, cap=cap) if cap else quadirr.rel_orbit_enumerate(a, b, "full", s)
        Ra, Rb = regulator(_disc_of(a)), regulator(_disc_of(b))
        gap = abs(a.value() - a.conj().value())
        c = stats.theory_constant("relheight_Q", {"R_alpha": Ra, "R_beta": Rb, "root_gap": gap})
        flags = {"saturation_incomplete": not res.saturated,
                 "flagged_classes": res.count() - res.count(False)}
        extra = {"count_without_flagged": res.count(False), "feet_windows": []}
        feet_c = stats.theory_constant("relheight_feet_Q", {"R_beta": Rb})
        for lo, hi in p.get("windows", []):
            entry = {"window": [lo, hi]}
            try:
                mass = res.feet_window_mass((Fraction(str(lo)), Fraction(str(hi))))
                pred = feet_c * s * stats.target_mass_invQ_real(a, (lo, hi))
                entry.update(mass=mass, predicted=pred, ratio=mass / pred)
            except ValueError as exc:
                entry.update(error=str(exc))
            extra["feet_windows"].append(entry)
        return _row(res.count(), c, c * s, flags, extra)
    if exp == "normform_Q":
        alpha = _irr(p["alpha"])
        lo, hi = p["window"]
        pts = quadirr.normform_window(alpha, s, (Fraction(str(lo)), Fraction(str(hi))))
        mass = stats.target_mass_invQ_real(alpha, (lo, hi))
        c = stats.theory_constant("normform_Q")
        return _row(len(pts), c, c * s * mass, {}, {"target_mass": mass})
    if exp == "indef":
        Q = tuple(p["form"])
        census = forms.indef_bqf_orbit_census(Q, s)
        D = Q[1] ** 2 - 4 * Q[0] * Q[2]
        c = stats.theory_constant("indef", {"Disc": D})
        return _row(len(census.reps), c, c * s, {"saturation_incomplete": not census.saturated})
    if exp == "gauss_posdef":
        a, b, cc = p["form"]
        n = forms.posdef_count(forms.quadratic(a, b, cc), s=s)
        c = stats.theory_constant("gauss_posdef", {"Disc": b * b - 4 * a * cc})
        return _row(n, c, c * s)
    if exp == "herm_posdef":
        D = p["D"]
        a, b, cc = p["form"]
        f = forms.hermitian(D, a, tuple(b) if isinstance(b, list) else b, cc)
        n = forms.posdef_count(f, s=s)
        c = stats.theory_constant("herm_posdef", {"D": D, "Disc": forms.form_disc(f)})
        return _row(n, c, c * s * s)
    if exp == "ham_posdef":
        a, b, cc = p["form"]
        f = forms.hamiltonian(a, b, cc)
        n = forms.posdef_count(f, s=s)
        c = stats.theory_constant("ham_posdef", {"Disc": forms.form_disc(f)})
        return _row(n, c, c * s ** 4)
    if exp == "herm_bfs":
        D = p["D"]
        a, b, cc = p["form"]
        f = forms.hermitian(D, a, tuple(b) if isinstance(b, list) else b, cc)
        census = forms.herm_orbit_bfs(D, f, "full", int(s), cfg.get("saturation_cap"))
        discs = sorted({str(forms.form_disc(g)) for g in census.forms})
        pts = [tuple(float(t) for t in forms.herm_point(g)) for g in census.forms]
        emp = stats.EmpiricalMeasure([(q, 1) for q in pts], "plane")
        nx, ny = _grid(cfg, [4, 4])
        grid = stats.box_grid((Fraction(-1, 2), Fraction(1, 2)), (Fraction(-1, 2), Fraction(1, 2)), nx, ny)
        table = stats.grid_table(emp, stats.lebesgue_mass, grid, 1 / max(1, len(pts)))
        extra = _disc_json(table)
        extra["discriminants"] = discs
        return _row(len(census.forms), None, None,
                    {"saturation_incomplete": not census.saturated}, extra)
    if exp == "bianchi":
        D = p["D"]
        alpha = _irr(p["alpha"], D)
        spec = quadirr.OrbitSpec.make(alpha, entry_bound=p.get("entry_bound", 4))
        cap = cfg.get("saturation_cap")
        census = quadirr.bianchi_orbit(spec, s, max_box=cap) if cap else quadirr.bianchi_orbit(spec, s)
        g = spec.automorph
        tr = (g[0][0] + g[1][1]).to_complex()
        c = stats.theory_constant("bianchi", {"D": D, "tr_automorph": tr, "m_point": spec.m_point})
        return _row(census.count(), c, c * s * s,
                    {"saturation_incomplete": not census.saturated, "m_point": spec.m_point})
    raise ConfigError(f"unknown experiment {exp!r}")


def _disc_of(alpha: quadirr.QuadIrr) -> int:
    a, b, c = quadirr.signed_form(alpha)
    return b * b - 4 * a * c


def _disc_json(table) -> dict:
    cells = []
    for win, got, target, dev in table.cells:
        w = [[float(x) for x in side] for side in win] if isinstance(win[0], tuple) else [float(x) for x in win]
        cells.append({"window": w, "normalised_mass": got, "target": target, "deviation": dev})
    return {"discrepancy": table.value, "cells": cells}


def _run_one(args):
    exp, cfg, s = args
    return _point(exp, cfg, s)


# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def run(cfg: dict, out_dir: Path, threads: int = 1, allow_incomplete: bool = False) -> int:
    exp = cfg["experiment"]
    sched = cfg["s_schedule"]
    jobs = [(exp, cfg, s) for s in sched]
    if threads == 1 or len(jobs) == 1:
        rows = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads or os.cpu_count()) as pool:
            rows = list(pool.map(_run_one, jobs))

    tol = cfg.get("tolerances", {})
    failures = []
    scope = cfg.get("tolerance_scope", "last")
    checked = range(len(rows)) if scope == "all" else [len(rows) - 1]
    for i in checked:
        r = rows[i]
        if "ratio" in tol and r["ratio"] is not None and abs(r["ratio"] - 1) > tol["ratio"]:
            failures.append({"s": sched[i], "check": "ratio", "value": r["ratio"]})
        d = r["extra"].get("discrepancy")
        if "discrepancy" in tol and d is not None and d > tol["discrepancy"]:
            failures.append({"s": sched[i], "check": "discrepancy", "value": d})
        for fw in r["extra"].get("feet_windows", []):
            if "feet_ratio" in tol and ("error" in fw or abs(fw["ratio"] - 1) > tol["feet_ratio"]):
                failures.append({"s": sched[i], "check": "feet_ratio", "value": fw.get("ratio")})
    fit = None
    if len(rows) >= 2 and all(r["count"] > 0 for r in rows):
        f = stats.fit_power_law([(s, r["count"]) for s, r in zip(sched, rows)])
        fit = {"C_hat": f.C_hat, "beta_hat": f.beta_hat, "residual": f.residual}
        if "beta" in tol and "beta_expected" in cfg:
            if abs(f.beta_hat - cfg["beta_expected"]) > tol["beta"]:
                failures.append({"check": "beta", "value": f.beta_hat})
    incomplete = any(r["flags"].get("saturation_incomplete") for r in rows)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["experiment", "s", "count", "theory_constant", "theory_value", "ratio", "flags"])
    for s, r in zip(sched, rows):
        flags = ";".join(f"{k}={v}" for k, v in sorted(r["flags"].items()))
        w.writerow([exp, _fmt(s), _fmt(r["count"]), _fmt(r["theory_constant"]),
                    _fmt(r["theory_value"]), _fmt(r["ratio"]), flags])
    report = {
        "header": {"generated": time.strftime("%Y-%m-%dT%H:%M:%S")},
        "config": cfg,
        "rows": [dict(s=s, **r) for s, r in zip(sched, rows)],
        "fit": fit,
        "failures": failures,
        "saturation_incomplete": incomplete,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{exp}.csv").write_text(buf.getvalue(), encoding="utf-8", newline="")
    (out_dir / f"{exp}.json").write_text(json.dumps(report, indent=2, default=str) + "\n", encoding="utf-8")

    if incomplete and not allow_incomplete:
        return EXIT_INCOMPLETE
    return EXIT_TOLERANCE if failures else EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="arithequi", description=__doc__)
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--threads", type=int, default=1, help="worker processes (0 = one per CPU)")
    ap.add_argument("--allow-incomplete", action="store_true")
    ap.add_argument("--list", action="store_true", help="list experiment ids and exit")
    args = ap.parse_args(argv)
    if args.list:
        for k, v in list_experiments():
            print(f"{k}\t{v}")
        return EXIT_OK
    if args.config is None:
        ap.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = validate_config(json.loads(args.config.read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg, args.out, args.threads, args.allow_incomplete)
    except (KeyError, TypeError, ValueError) as exc:
        # parameters that pass the schema but are rejected by the maths
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
