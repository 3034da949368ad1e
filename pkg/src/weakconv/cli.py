"""Command-line driver: ``weakconv run | verify | list-ops``.

Exit codes: 0 when every pass flag is true, 1 on a failed check or an
operation error, 2 on usage, config or scene errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import suites
from .errors import SceneError, WeakConvError
from .mappings import estimate_continuity_modulus, load_map_scene
from .moduli import certify_weak_convexity, check_cavern_bounds, modulus_convexity, modulus_nonconvexity
from .projection import check_projection_stability, make_tube, project_in_tube, retract
from .reports import MODULI_COLUMNS, PROJECTION_COLUMNS, Report
from .sets import Cavern, CurveRegion2D, load_scene
from .space import BallModulus, check_day_nordlander, space_modulus_delta
from .surfaces import check_surface_gamma_bound, curvature_radius

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MAX_SEED = 2 ** 64 - 1


class ConfigError(WeakConvError, ValueError):
    """Malformed experiment configuration."""


# ---------------------------------------------------------------- parameter helpers


def _grid(params, key="eps", required=True):
    """A grid given as a list or as ``{"start", "stop", "num"}``."""
    if key not in params:
        if required:
            raise ConfigError(f"params: missing field '{key}'")
        return None
    g = params[key]
    if isinstance(g, dict):
        extra = set(g) - {"start", "stop", "num"}
        if extra or not {"start", "stop", "num"} <= set(g):
            raise ConfigError(f"params.{key}: expected fields start, stop, num")
        return np.linspace(float(g["start"]), float(g["stop"]), int(g["num"]))
    if isinstance(g, (int, float)):
        return np.array([float(g)])
    try:
        return np.asarray(g, dtype=float).ravel()
    except (TypeError, ValueError):
        raise ConfigError(f"params.{key}: expected a list of numbers") from None


def _points(params, dim, key="points"):
    if key not in params:
        raise ConfigError(f"params: missing field '{key}'")
    try:
        P = np.asarray(params[key], dtype=float).reshape(-1, dim)
    except (TypeError, ValueError):
        raise ConfigError(f"params.{key}: expected a list of {dim}-vectors") from None
    return P


def _number(params, key, default=None):
    if key not in params:
        if default is None:
            raise ConfigError(f"params: missing field '{key}'")
        return default
    try:
        return float(params[key])
    except (TypeError, ValueError):
        raise ConfigError(f"params.{key}: expected a number") from None


def _empty(name, columns):
    return Report(name, [], True), columns


def _curve_of(A):
    if not isinstance(A, CurveRegion2D):
        raise ConfigError("operation needs a curve2d scene")
    return A.curve


# ---------------------------------------------------------------- operations
# Each operation takes (scene, params, ctx) and returns (report, columns).


def op_gamma(scene, params, ctx):
    """Modulus of nonconvexity of the scene set on an eps grid."""
    _, A = scene
    grid = _grid(params)
    rows = [{"eps": e, "value": modulus_nonconvexity(A, e, seed=ctx.seed), "bound_lower": None,
             "bound_upper": None, "pass": True} for e in grid]
    return Report("gamma", rows, True), MODULI_COLUMNS


def op_delta(scene, params, ctx):
    """Modulus of convexity of a convex scene set on an eps grid."""
    _, A = scene
    grid = _grid(params)
    rows = [{"eps": e, "value": modulus_convexity(A, e, seed=ctx.seed), "bound_lower": None,
             "bound_upper": None, "pass": True} for e in grid]
    return Report("delta", rows, True), MODULI_COLUMNS


def op_space_delta(scene, params, ctx):
    """Sampled space modulus; compared with the closed form when p = 2."""
    space = scene[0]
    tol = ctx.tol_or(1e-3)
    rows = []
    for e in _grid(params):
        v = space_modulus_delta(space, e, density=ctx.density, method="sampled")
        if space.closed_form_modulus:
            q = 0.25 * e * e
            exact = q / (1.0 + np.sqrt(max(1.0 - q, 0.0)))
            rows.append({"eps": e, "value": v, "bound_lower": exact - tol, "bound_upper": exact + tol,
                         "pass": abs(v - exact) <= tol})
        else:
            rows.append({"eps": e, "value": v, "bound_lower": None, "bound_upper": None, "pass": True})
    return Report("space_delta", rows, all(r["pass"] for r in rows)), MODULI_COLUMNS


def op_day_nordlander(scene, params, ctx):
    grid = _grid(params)
    if len(grid) == 0:
        return _empty("day_nordlander", MODULI_COLUMNS)
    return check_day_nordlander(scene[0], grid, tol=ctx.tol_or(1e-3), density=ctx.density,
                                method=params.get("method", "sampled")), MODULI_COLUMNS


def op_cavern_bounds(scene, params, ctx):
    _, A = scene
    if not isinstance(A, Cavern):
        raise ConfigError("cavern-bounds needs a cavern scene")
    grid = _grid(params)
    columns = list(MODULI_COLUMNS[:4]) + ["sigma", "banas", "hilbert", "pass"]
    if len(grid) == 0:
        return _empty("cavern_bounds", columns)
    return check_cavern_bounds(A.body, A.clip, _number(params, "r"), _number(params, "R"), grid,
                               tol=ctx.tol_or(1e-3)), columns


def op_certify(scene, params, ctx):
    """Weak-convexity certificate: margin ``d delta(eps/d) - gamma(eps)`` on its grid."""
    _, A = scene
    cert = certify_weak_convexity(A, _number(params, "d"))
    rows = [{"eps": e, "value": g, "bound_lower": None, "bound_upper": g + m, "pass": m >= 0}
            for e, g, m in zip(cert.eps_grid, cert.gamma_values, cert.margin)]
    return Report("certificate", rows, bool(cert.valid), {"d": cert.d}), MODULI_COLUMNS


def op_project(scene, params, ctx):
    """Projection of the given points in the tube of radius ``d``."""
    _, A = scene
    P = _points(params, A.dim)
    if len(P) == 0:
        return _empty("project", PROJECTION_COLUMNS)
    tube = make_tube(A, _number(params, "d"))
    rows = []
    for k, x in enumerate(P):
        p = project_in_tube(A, x, tube)
        rows.append({"trial": k, "input": x, "output": p, "bound": tube.d,
                     "pass": float(A.space.norm(p - x)) < tube.d})
    return Report("project", rows, all(r["pass"] for r in rows)), PROJECTION_COLUMNS


def op_projection_stability(scene, params, ctx):
    _, A = scene
    trials = int(_number(params, "trials", 500))
    if trials == 0:
        return _empty("projection_stability", ["trial", "check", "input", "output", "bound", "pass"])
    tube = make_tube(A, _number(params, "d"))
    rep = check_projection_stability(A, tube, trials=trials, seed=ctx.seed, tol=ctx.tol_or(1e-6))
    return rep, ["trial", "check", "input", "output", "bound", "pass"]


def op_retract(scene, params, ctx):
    """Retraction of the given points; ``bound`` is the idempotence defect limit."""
    _, A = scene
    P = _points(params, A.dim)
    if len(P) == 0:
        return _empty("retract", PROJECTION_COLUMNS)
    tube = make_tube(A, _number(params, "d"))
    tol = ctx.tol_or(2e-9)
    rows = []
    for k, x in enumerate(P):
        z = retract(A, x, tube)
        dft = float(A.space.norm(retract(A, z, tube) - z))
        rows.append({"trial": k, "input": x, "output": z, "bound": tol, "pass": dft <= tol})
    return Report("retract", rows, all(r["pass"] for r in rows)), PROJECTION_COLUMNS


def op_curvature(scene, params, ctx):
    """Curvature radius of a curve2d scene at parameters ``s``."""
    curve = _curve_of(scene[1])
    s = _grid(params, "s")
    rows = [{"eps": float(t), "value": float(curvature_radius(curve, t)), "bound_lower": None,
             "bound_upper": None, "pass": True} for t in s]
    return Report("curvature", rows, True), MODULI_COLUMNS


def op_surface_gamma(scene, params, ctx):
    curve = _curve_of(scene[1])
    grid = _grid(params)
    if len(grid) == 0:
        return _empty("surface_gamma", MODULI_COLUMNS)
    side = params.get("side", "boundary")
    r = params.get("r")
    return check_surface_gamma_bound(curve, grid, side=side, r=r, tol=ctx.tol_or(1e-3)), MODULI_COLUMNS


def op_continuity_modulus(scene, params, ctx):
    """Continuity modulus of a set-valued map scene on a ``t`` grid."""
    F = scene[1]
    mod = estimate_continuity_modulus(F, _grid(params, "t"), tol=ctx.tol_or(1e-4))
    rows = [{"eps": e, "value": v, "bound_lower": None, "bound_upper": None, "pass": True}
            for e, v in zip(mod.eps, mod.values) if e > 0]
    return Report("continuity_modulus", rows, True), MODULI_COLUMNS


def op_ball_modulus(scene, params, ctx):
    """Modulus of convexity of a ball of radius ``radius`` in the scene space."""
    bm = BallModulus(scene[0], _number(params, "radius"))
    rows = [{"eps": e, "value": float(bm(e)), "bound_lower": None, "bound_upper": None, "pass": True}
            for e in _grid(params)]
    return Report("ball_modulus", rows, True), MODULI_COLUMNS


# name -> (function, scene kind, description)
OPERATIONS = {
    "gamma": (op_gamma, "set", "modulus of nonconvexity on an eps grid"),
    "delta": (op_delta, "set", "modulus of convexity of a convex set on an eps grid"),
    "space-delta": (op_space_delta, "set", "sampled modulus of convexity of the space"),
    "ball-modulus": (op_ball_modulus, "set", "modulus of convexity of a ball of given radius"),
    "day-nordlander": (op_day_nordlander, "set", "space modulus against eps^2/4"),
    "cavern-bounds": (op_cavern_bounds, "set", "cavern modulus with sigma, Banas and lower bounds"),
    "certify": (op_certify, "set", "weak-convexity certificate for a tube radius d"),
    "project": (op_project, "set", "projection of points in a certified tube"),
    "projection-stability": (op_projection_stability, "set", "Monte-Carlo projection stability"),
    "retract": (op_retract, "set", "retraction of points and its idempotence"),
    "curvature": (op_curvature, "set", "curvature radius of a planar curve"),
    "surface-gamma": (op_surface_gamma, "set", "nonconvexity bound for a smooth planar curve"),
    "continuity-modulus": (op_continuity_modulus, "map", "Hausdorff continuity modulus of a map"),
}


# ---------------------------------------------------------------- config


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _seed(value):
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= MAX_SEED:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {value!r}")
    return value


def build_context(config, args):
    """Defaults, then config values, then command-line flags."""
    ctx = suites.Context()
    for key in ("seed", "density", "tol", "threads"):
        if key in config:
            setattr(ctx, key, config[key])
        flag = getattr(args, key, None)
        if flag is not None:
            setattr(ctx, key, flag)
    ctx.seed = _seed(ctx.seed)
    if not isinstance(ctx.density, int) or ctx.density < 16:
        raise ConfigError(f"density must be an integer >= 16, got {ctx.density!r}")
    if ctx.tol is not None and not (isinstance(ctx.tol, (int, float)) and ctx.tol > 0):
        raise ConfigError(f"tol must be positive, got {ctx.tol!r}")
    if not isinstance(ctx.threads, int) or ctx.threads < 1:
        raise ConfigError(f"threads must be a positive integer, got {ctx.threads!r}")
    return ctx


def load_config(path):
    cfg = _read_json(path)
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    allowed = {"operation", "scene", "params", "output", "seed", "density", "tol", "threads"}
    extra = sorted(set(cfg) - allowed)
    if extra:
        raise ConfigError(f"{path}: unknown field(s) {', '.join(extra)}")
    if "operation" not in cfg:
        raise ConfigError(f"{path}: missing field 'operation'")
    if cfg["operation"] not in OPERATIONS:
        raise ConfigError(f"unknown operation {cfg['operation']!r}")
    if not isinstance(cfg.get("params", {}), dict):
        raise ConfigError(f"{path}: params must be an object")
    base = Path(path).parent
    if "scene" in cfg:
        scene = Path(cfg["scene"])
        scene = scene if scene.is_absolute() else base / scene
        if not scene.exists():
            raise ConfigError(f"{path}: scene file {cfg['scene']} does not exist")
        cfg["scene"] = scene
    if "output" in cfg:
        out = Path(cfg["output"])
        cfg["output"] = out if out.is_absolute() else base / out
    return cfg


def run_config(cfg, ctx, out_dir=None):
    """Execute one configured operation; returns the report and the CSV path (or None)."""
    fn, kind, _ = OPERATIONS[cfg["operation"]]
    if "scene" not in cfg:
        raise ConfigError(f"operation {cfg['operation']!r} needs a scene")
    scene = load_map_scene(cfg["scene"]) if kind == "map" else load_scene(cfg["scene"])
    report, columns = fn(scene, cfg.get("params", {}), ctx)
    if out_dir is not None:
        path = Path(out_dir) / f"{cfg['operation']}.csv"
    else:
        path = cfg.get("output")
    if path is not None:
        report.write_csv(path, columns)
    return report, columns, path


# ---------------------------------------------------------------- commands


def cmd_run(args):
    cfg = load_config(args.config)
    ctx = build_context(cfg, args)
    report, columns, path = run_config(cfg, ctx, args.out)
    if path is None:
        sys.stdout.write(report.to_csv(columns))
    status = "pass" if report.passed else "FAIL"
    print(f"{cfg['operation']}: {status} ({len(report.rows)} rows)", file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_verify(args):
    names = args.suites or ["all"]
    if "all" in names:
        names = suites.suite_names()
    unknown = [n for n in names if n not in suites.SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s): {', '.join(unknown)}")
    ctx = build_context({}, args)
    ok = True
    for name in names:
        res = suites.run_suite(name, ctx)
        if args.out is not None:
            res.write(args.out)
        for c in res.checks:
            margin = "" if c.margin is None else f"  margin {c.margin:.3g}"
            print(f"  [{'pass' if c.passed else 'FAIL'}] {c.label}{margin}")
        worst = res.worst_margin
        worst = "n/a" if worst is None else f"{worst:.3g}"
        timing = "" if res.seconds <= res.limit else f"  (over the {res.limit:g} s budget)"
        print(f"{'PASS' if res.passed else 'FAIL'} {res.criterion:2d} {name}: "
              f"worst margin {worst}, {res.seconds:.1f} s{timing}", flush=True)
        ok &= res.passed
    print("all suites passed" if ok else "some suites FAILED")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_list_ops(args):
    print("operations:")
    for name, (_, kind, desc) in OPERATIONS.items():
        print(f"  {name:22s} [{kind} scene] {desc}")
    print("suites:")
    for name, (crit, _, limit, desc) in suites.SUITES.items():
        print(f"  {name:22s} criterion {crit:2d}, budget {limit:g} s: {desc}")
    return EXIT_PASS


def _add_common(p):
    p.add_argument("--seed", type=int, default=None, help="random seed (unsigned 64-bit)")
    p.add_argument("--density", type=int, default=None, help="direction samples for space moduli")
    p.add_argument("--tol", type=float, default=None, help="override the check tolerance")
    p.add_argument("--out", type=Path, default=None, help="output directory for CSV reports")
    p.add_argument("--threads", type=int, default=None,
                   help="worker count; results do not depend on it")


def build_parser():
    parser = argparse.ArgumentParser(prog="weakconv", description="Weak-convexity numerical checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one operation from a JSON config")
    p.add_argument("config", type=Path)
    _add_common(p)
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("verify", help="run acceptance suites ('all' or suite names)")
    p.add_argument("suites", nargs="*")
    _add_common(p)
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("list-ops", help="list operations and suites")
    p.set_defaults(func=cmd_list_ops)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        return args.func(args)
    except (ConfigError, SceneError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WeakConvError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
