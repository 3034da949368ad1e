"""Acceptance suites: each runs one group of checks and returns CSV reports.

Suites are deterministic for a fixed seed.  Timings are returned next to
the reports but never written into CSV files.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import testbeds as tb
from .curves import CircleCurve, EllipseCurve
from .mappings import intersection_stability_bound, selection, selection_modulus, transfer_point
from .moduli import check_cavern_bounds, check_sigma_laws
from .projection import (check_projection_stability, connect_by_midpoint_iteration,
                         convex_hull_cached, loglog_slope, retract)
from .reports import MODULI_COLUMNS, PROJECTION_COLUMNS, Report
from .roots import ConditionSolver
from .sets import Ball, hausdorff_distance
from .space import DEFAULT_DENSITY, BallModulus, PNormSpace, check_day_nordlander, space_modulus_delta
from .surfaces import (SmoothCurve2D, check_surface_gamma_bound, curvature_radius, epsilon0,
                       estimate_alpha, normal_field_continuity)

DEFAULT_SEED = 42


@dataclass
class Context:
    seed: int = DEFAULT_SEED
    density: int = DEFAULT_DENSITY
    tol: float | None = None
    threads: int = 1

    def rng(self, stream):
        """Independent generator per suite, derived from the seed."""
        return np.random.default_rng([self.seed, stream])

    def tol_or(self, default):
        return default if self.tol is None else self.tol


@dataclass
class Check:
    label: str
    passed: bool
    margin: float | None = None


@dataclass
class SuiteResult:
    name: str
    criterion: int
    checks: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    seconds: float = 0.0
    limit: float = 0.0

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def worst_margin(self):
        m = [c.margin for c in self.checks if c.margin is not None]
        return min(m) if m else None

    def check(self, label, passed, margin=None):
        self.checks.append(Check(label, bool(passed), None if margin is None else float(margin)))

    def report(self, report, columns=None):
        self.reports.append((report, columns))
        return report

    def write(self, out_dir):
        paths = []
        for report, columns in self.reports:
            paths.append(report.write_csv(Path(out_dir) / self.name / f"{report.name}.csv", columns))
        return paths


# ---------------------------------------------------------------- suites


def suite_space_modulus(ctx, res):
    tol = ctx.tol_or(1e-3)
    sp = PNormSpace(2, 2)
    rows = []
    for e in (0.2, 0.6, 1.0, 1.4, 1.8):
        est = space_modulus_delta(sp, e, density=ctx.density, method="sampled")
        exact = tb.hilbert_gamma(e)
        rows.append({"eps": e, "value": est, "bound_lower": exact - tol, "bound_upper": exact + tol,
                     "pass": abs(est - exact) <= tol})
    rep = res.report(Report("space_modulus", rows, all(r["pass"] for r in rows)), MODULI_COLUMNS)
    err = max(abs(r["value"] - tb.hilbert_gamma(r["eps"])) for r in rows)
    res.check("sampled delta matches the closed form", rep.passed, tol - err)


def suite_day_nordlander(ctx, res):
    tol = ctx.tol_or(1e-3)
    for p in (1.5, 2.0, 3.0):
        rep = check_day_nordlander(PNormSpace(2, p), np.linspace(0.2, 1.8, 9), tol=tol,
                                   density=ctx.density, method="sampled")
        rep.name = f"day_nordlander_p{p:g}"
        res.report(rep, MODULI_COLUMNS)
        margin = min(r["bound_upper"] + tol - r["value"] for r in rep.rows)
        res.check(f"delta <= eps^2/4 for p={p:g}", rep.passed, margin)


def suite_cavern(ctx, res):
    tol = ctx.tol_or(1e-3)
    sp = tb.plane()
    grid = [0.25, 0.5, 0.75, 1.0, 1.5]
    rep = check_cavern_bounds(Ball(sp, [0, 0], 1.0), Ball(sp, [0, 0], 3.0), 1.0, 1.0, grid,
                              tol=tol, eq_tol=ctx.tol_or(2e-3))
    res.report(rep, list(MODULI_COLUMNS[:4]) + ["sigma", "banas", "hilbert", "pass_lower",
                                               "pass_sigma", "pass_banas", "pass"])
    row = rep.rows[grid.index(1.0)]
    res.check("gamma(1) = 0.1340", abs(row["value"] - 0.1340) <= tol, tol - abs(row["value"] - 0.1340))
    res.check("cavern lower bound 0.125 at eps=1", row["value"] >= 0.125 - tol, row["value"] - 0.125)
    res.check("gamma equals sigma on the grid", all(r["pass_sigma"] for r in rep.rows),
              min(ctx.tol_or(2e-3) - abs(r["value"] - r["sigma"]) for r in rep.rows))
    res.check("Banas dual inequality", all(r["pass_banas"] for r in rep.rows),
              min(r["banas"] - r["hilbert"] for r in rep.rows))
    res.check("lower bound on the grid", all(r["pass_lower"] for r in rep.rows),
              min(r["value"] - r["bound_lower"] for r in rep.rows))


def suite_sigma_laws(ctx, res):
    tol = ctx.tol_or(2e-3)
    sp = tb.plane()
    rep = check_sigma_laws(Ball(sp, [0, 0], 1.0), tb.ellipse_region(1.5, 1.0),
                           tb.ellipse_region(2.0, 1.0), 0.5, tol=tol)
    res.report(rep, ["law", "kind", "lhs", "rhs", "pass"])
    for r in rep.rows:
        margin = tol - abs(r["lhs"] - r["rhs"]) if r["kind"] == "eq" else r["lhs"] - r["rhs"] + tol
        res.check(r["law"], r["pass"], margin)


def suite_roots(ctx, res):
    tol = ctx.tol_or(1e-9)
    solver = ConditionSolver(BallModulus(PNormSpace(2, 2), 1.0), tb.zero_modulus)
    s_vals = np.geomspace(1e-4, 1e-2, 9)
    t = np.array([solver.t_of_s(s) for s in s_vals])
    exact = s_vals + np.sqrt(4 * s_vals - s_vals ** 2)
    rows = [{"eps": float(s), "value": float(v), "bound_lower": float(e - tol),
             "bound_upper": float(e + tol), "pass": bool(abs(v - e) <= tol)}
            for s, v, e in zip(s_vals, t, exact)]
    res.report(Report("t_E_closed_form", rows, all(r["pass"] for r in rows)), MODULI_COLUMNS)
    err = float(np.max(np.abs(t - exact)))
    res.check("t_E matches s + sqrt(4s - s^2)", err <= tol, tol - err)
    slope = loglog_slope(s_vals, t)
    res.check("log-log slope of t_E in [0.45, 0.55]", 0.45 <= slope <= 0.55,
              min(slope - 0.45, 0.55 - slope))


def suite_projection_stability(ctx, res):
    rep = check_projection_stability(tb.arc(), tb.arc_tube(), trials=500, seed=ctx.seed,
                                     s_values=(1e-3, 1e-2), tol=ctx.tol_or(1e-6))
    res.report(rep, ["trial", "check", "input", "output", "bound", "pass"])
    pairs = [r for r in rep.rows if r["check"] == "pair"]
    enl = [r for r in rep.rows if r["check"] != "pair"]
    res.check("500 tube pairs within t_E", all(r["pass"] for r in pairs),
              min(r["bound"] - r["output"] for r in pairs))
    res.check("enlarged projections inside B_t_E(s) for s in {1e-3, 1e-2}",
              all(r["pass"] for r in enl), min(r["bound"] - r["output"] for r in enl))
    slope = rep.info["t_E_slope"]
    res.check("t_E slope in [0.45, 0.55]", 0.45 <= slope <= 0.55, min(slope - 0.45, 0.55 - slope))


def suite_connectivity(ctx, res):
    L = tb.lens()
    rep = connect_by_midpoint_iteration(L["A"], L["B"], L["a0"], L["b0"], L["gamma"],
                                        delta_B=L["delta_B"], d=L["d"])
    rep.name = "lens_chain"
    res.report(rep, ["k", "gap"])
    rate = rep.info["rate"]
    res.check("lens chain converges", rep.passed)
    res.check("late-stage rate <= 0.85", rate <= 0.85, 0.85 - rate)
    C = tb.convex_control()
    ctl = connect_by_midpoint_iteration(C["A"], C["B"], C["a0"], C["b0"], C["gamma"])
    ctl.name = "convex_control_chain"
    res.report(ctl, ["k", "gap"])
    g = ctl.column("gap")
    dev = float(np.max(np.abs(g[1:] - 0.5 * g[:-1])))
    tol = ctx.tol_or(1e-12)
    res.check("convex control halves every gap", dev <= tol, tol - dev)


def suite_retraction(ctx, res):
    A, tube = tb.arc(), tb.arc_tube()
    rng = ctx.rng(8)
    hull = convex_hull_cached(A)
    c = A.curves()[0]
    P = c.point(c.t0 + c.period * rng.random(100))
    rows, worst_fix = [], 0.0
    for k, a in enumerate(P):
        z = retract(A, a, tube, hull)
        dft = float(np.linalg.norm(z - a))
        worst_fix = max(worst_fix, dft)
        rows.append({"trial": k, "input": a, "output": z, "bound": 1e-9, "pass": dft <= 1e-9})
    res.report(Report("retraction_fixes_A", rows, worst_fix <= 1e-9), PROJECTION_COLUMNS)
    X = rng.uniform(-2.0, 2.0, size=(100, 2))
    rows, worst_idem = [], 0.0
    for k, x in enumerate(X):
        z = retract(A, x, tube, hull)
        dft = float(np.linalg.norm(retract(A, z, tube, hull) - z))
        worst_idem = max(worst_idem, dft)
        rows.append({"trial": k, "input": x, "output": z, "bound": 2e-9, "pass": dft <= 2e-9})
    res.report(Report("retraction_idempotent", rows, worst_idem <= 2e-9), PROJECTION_COLUMNS)
    res.check("retract fixes 100 points of A", worst_fix <= 1e-9, 1e-9 - worst_fix)
    res.check("retract is idempotent on 100 points", worst_idem <= 2e-9, 2e-9 - worst_idem)


def _stability_pairs(rng, lo, hi, gap, n_each):
    pairs = []
    for _ in range(n_each):
        d = rng.uniform(0.0, 0.9 * gap)
        t1 = rng.uniform(lo, hi - d)
        pairs.append((t1, t1 + d))
    for _ in range(n_each):
        d = rng.uniform(gap, hi - lo)
        t1 = rng.uniform(lo, hi - d)
        pairs.append((t1, t1 + d))
    return pairs


def suite_intersection_stability(ctx, res):
    fam = tb.disk_cavern_family()
    rng = ctx.rng(9)
    lo, hi = fam.domain
    pairs = _stability_pairs(rng, lo, hi, 2 * fam.s0, 25)
    rows, trows = [], []
    branches = set()
    member_tol = 1e-6
    for k, (t1, t2) in enumerate(pairs):
        if rng.random() < 0.5:
            t1, t2 = t2, t1
        rep = intersection_stability_bound(fam.F1, fam.F2, t1, t2, family=fam, tol=0.0)
        row = dict(rep.rows[0], trial=k)
        rows.append(row)
        branches.add(row["branch"])
        S = fam(t1).boundary_samples(256)
        c1 = S[rng.integers(len(S))]
        tr = transfer_point(c1, fam, t1, t2, member_tol=member_tol)
        trows.append({"trial": k, "input": c1, "output": tr.point, "bound": tr.bound,
                      "distance": tr.distance, "defect_F1": tr.defects[0],
                      "defect_F2": tr.defects[1], "case": tr.case, "pass": tr.passed})
    rep = Report("intersection_stability", rows, all(r["pass"] for r in rows), {"s0": fam.s0})
    res.report(rep, ["trial", "t1", "t2", "omega1", "omega2", "branch", "measured", "bound", "pass"])
    trep = Report("transfer_point", trows, all(r["pass"] for r in trows))
    res.report(trep, ["trial", "input", "output", "distance", "bound", "defect_F1", "defect_F2",
                      "case", "pass"])
    res.check("measured Hausdorff <= bound on 50 pairs", rep.passed,
              min(r["bound"] - r["measured"] for r in rows))
    res.check("both branches exercised", branches == {1, 2})
    defect = max(max(r["defect_F1"], r["defect_F2"]) for r in trows)
    res.check("transfer outputs in both sets within 1e-6", defect <= member_tol, member_tol - defect)
    res.check("transfer distance <= bound", all(r["distance"] <= r["bound"] + member_tol for r in trows),
              min(r["bound"] - r["distance"] for r in trows))


def suite_selection_split(ctx, res):
    tube = tb.arc_tube()
    rng = ctx.rng(10)
    member_tol = 1e-6
    r1, R = 0.9, 1.0
    _, r = tb.arc().enclosing_ball()
    base = np.sort(rng.uniform(0.0, 2 * np.pi, 25))
    near = base + 10.0 ** rng.uniform(-5, -3, 25)
    angles = np.concatenate([base, near])
    H = [tb.arc(th) for th in angles]
    S = [selection(h, tube, r1) for h in H]
    srows, defect = [], 0.0
    for k, (h, s) in enumerate(zip(H, S)):
        dk = float(h.distance(s[None])[0])
        defect = max(defect, dk)
        srows.append({"trial": k, "input": float(angles[k]), "output": s, "bound": member_tol,
                      "pass": dk <= member_tol})
    res.report(Report("selection_membership", srows, defect <= member_tol), PROJECTION_COLUMNS)
    idx = [(i, i + 25) for i in range(25)] + [(i, i + 1) for i in range(24)]
    prows = []
    for k, (i, j) in enumerate(idx):
        h = hausdorff_distance(H[i], H[j])
        disp = float(np.linalg.norm(S[i] - S[j]))
        bound = selection_modulus(h, tube, R, r1, r)
        prows.append({"trial": k, "input": h, "output": disp, "bound": bound, "pass": disp <= bound})
    prep = Report("selection_continuity", prows, all(p["pass"] for p in prows))
    res.report(prep, PROJECTION_COLUMNS)
    res.check("s(H) in H within 1e-6 on 50 arcs", defect <= member_tol, member_tol - defect)
    res.check("selection displacement <= composed modulus", prep.passed,
              min(p["bound"] - p["output"] for p in prows))

    splitter = tb.split_scene()
    A, B = splitter.A, splitter.B
    c = A.curves()[0]
    a = c.point(c.t0 + c.period * rng.random(100))
    rad = 0.095 * np.sqrt(rng.random(100))
    ang = rng.uniform(0, 2 * np.pi, 100)
    b = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    # dyadic inputs, so that an exact floating-point split exists
    C = np.round((a + b) * 2.0 ** 40) / 2.0 ** 40
    rows, worst_res, worst_mem = [], 0.0, 0.0
    for k, ck in enumerate(C):
        sr = splitter(ck)
        mem = max(sr.membership_defects)
        worst_res, worst_mem = max(worst_res, sr.residual), max(worst_mem, mem)
        rows.append({"trial": k, "c": ck, "a": sr.a, "b": sr.b, "residual": sr.residual,
                     "defect_A": sr.membership_defects[0], "defect_B": sr.membership_defects[1],
                     "pass": sr.residual == 0.0 and mem <= member_tol})
    res.report(Report("split", rows, all(r["pass"] for r in rows)),
               ["trial", "c", "a", "b", "residual", "defect_A", "defect_B", "pass"])
    res.check("split residual exactly 0 on 100 points", worst_res == 0.0, 0.0 - worst_res)
    res.check("split memberships within 1e-6", worst_mem <= member_tol, member_tol - worst_mem)


def suite_surfaces(ctx, res):
    tol = ctx.tol_or(1e-6)
    E = SmoothCurve2D(EllipseCurve(2.0, 1.0))
    Cc = SmoothCurve2D(CircleCurve(1.0))
    radii = [(0.0, 0.5), (np.pi / 2, 4.0)]
    rows = []
    for s, expect in radii:
        got = curvature_radius(E, s)
        rows.append({"eps": s, "value": got, "bound_lower": expect - tol, "bound_upper": expect + tol,
                     "pass": abs(got - expect) <= tol})
    res.report(Report("ellipse_curvature_radius", rows, all(r["pass"] for r in rows)), MODULI_COLUMNS)
    err = max(abs(r["value"] - e) for r, (_, e) in zip(rows, radii))
    res.check("ellipse curvature radii 0.5 and 4", err <= tol, tol - err)

    alpha_grid = np.linspace(0.0, 1.0, 501)[1:]
    aC = estimate_alpha(Cc, alpha_grid)
    e0 = epsilon0(aC)
    res.report(Report("alpha_circle", [{"eps": t, "value": float(aC(t)), "bound_lower": None,
                                        "bound_upper": None, "pass": True} for t in alpha_grid[::10]]),
               MODULI_COLUMNS)
    res.check("circle epsilon0 = 2/3 within 1e-2", abs(e0 - 2 / 3) <= 1e-2, 1e-2 - abs(e0 - 2 / 3))
    aE = estimate_alpha(E, alpha_grid)
    for name, curve, alpha, grid in (("circle", Cc, aC, np.linspace(0.05, 0.6, 10)),
                                     ("ellipse", E, aE, np.linspace(0.03, 0.3, 10))):
        rep = check_surface_gamma_bound(curve, grid, alpha=alpha)
        rep.name = f"surface_gamma_bound_{name}"
        res.report(rep, MODULI_COLUMNS)
        res.check(f"gamma bound on 10 grid points ({name})", rep.passed,
                  min(min(r["bound_upper"] - r["value"], r["value"] - r["bound_lower"]) for r in rep.rows))
    for name, curve in (("circle", Cc), ("ellipse", E)):
        rep = normal_field_continuity(curve, n_samples=200)
        rep.name = f"normal_emptiness_{name}"
        res.report(rep, ["side", "t", "clearance", "r"])
        mod = rep.info["modulus"]
        res.report(Report(f"normal_modulus_{name}",
                          [{"eps": e, "value": v, "bound_lower": None, "bound_upper": None, "pass": True}
                           for e, v in zip(mod.eps[1:], mod.values[1:])]), MODULI_COLUMNS)
        res.check(f"proximal-normal emptiness at r = R_min/2 ({name})", rep.passed,
                  0.0 - rep.info["violations"])


# name -> (criterion, function, time limit in seconds, description)
SUITES = {
    "space-modulus": (1, suite_space_modulus, 5, "sampled space modulus vs closed form"),
    "day-nordlander": (2, suite_day_nordlander, 30, "space modulus below eps^2/4"),
    "cavern": (3, suite_cavern, 60, "unit-disk cavern moduli and bounds"),
    "sigma-laws": (4, suite_sigma_laws, 30, "sigma modulus scaling and monotonicity"),
    "roots": (5, suite_roots, 5, "t_E closed form and square-root scaling"),
    "projection-stability": (6, suite_projection_stability, 60, "projection stability on the arc tube"),
    "connectivity": (7, suite_connectivity, 10, "midpoint chains on the lens and a convex control"),
    "retraction": (8, suite_retraction, 10, "retraction fixes A and is idempotent"),
    "intersection-stability": (9, suite_intersection_stability, 120,
                               "intersection Hausdorff bound and point transfer"),
    "selection-split": (10, suite_selection_split, 60, "selection on rotated arcs and Minkowski splitting"),
    "surfaces": (11, suite_surfaces, 60, "curvature, epsilon0, gamma bound and normal emptiness"),
}


def suite_names():
    return list(SUITES)


def run_suite(name, ctx=None):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    ctx = ctx or Context()
    criterion, fn, limit, _ = SUITES[name]
    res = SuiteResult(name, criterion, limit=limit)
    t0 = time.perf_counter()
    fn(ctx, res)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(names=None, ctx=None, out_dir=None):
    results = []
    for name in names or suite_names():
        res = run_suite(name, ctx)
        if out_dir is not None:
            res.write(out_dir)
        results.append(res)
    return results
