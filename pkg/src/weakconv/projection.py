"""Metric projection near weakly convex sets and the constructions built on it."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, HypothesisViolation, PreconditionError, TubeError
from .moduli import WeakConvexityCertificate, certify_weak_convexity
from .reports import Report
from .roots import ConditionSolver
from .sets import GEOM_TOL, closed_convex_hull
from .space import BallModulus


@dataclass
class TubeSpec:
    """A certified tube ``U_d(A)`` with the root function ``t_E``."""

    certificate: WeakConvexityCertificate
    d: float
    solver: ConditionSolver

    @property
    def s0(self):
        return self.solver.s0

    @property
    def gamma(self):
        return self.certificate.gamma

    def t_E(self, s):
        """Radius of the ball around ``P_A x`` containing ``P_A(x, s)``."""
        s = np.asarray(s, dtype=float)
        out = np.array([self.solver.t_of_s(v) for v in s.ravel()]).reshape(s.shape)
        return float(out) if out.ndim == 0 else out

    @property
    def roots(self):
        return self.solver.t_curve()


def make_tube(A, d, space=None, certificate=None, **kwargs):
    """Certify ``A`` for tube radius ``d`` and prepare the root solver."""
    space = space or A.space
    cert = certificate or certify_weak_convexity(A, d, space, **kwargs)
    if not cert.valid:
        raise TubeError(f"certificate invalid for d={d}: dominance fails at eps={cert.first_failure}")
    return TubeSpec(cert, float(d), ConditionSolver(BallModulus(space, d), cert.gamma))


@dataclass
class Projection:
    point: np.ndarray
    distance: float
    multiplicity: int = 1
    spread: float = 0.0
    flagged: bool = False


def project_in_tube(A, x, tube=None, strict=True, tol=GEOM_TOL, with_info=False):
    """Unique nearest point of ``A`` to ``x`` inside the tube.

    All near-optimal candidates are collected; a spread above ``10 tol``
    means the nearest point is not unique.  Candidates agreeing within that
    spread are resolved to the lexicographically smallest one.
    """
    x = np.asarray(x, dtype=float).ravel()
    rho = float(A.distance(x[None])[0])
    if strict and tube is not None and rho >= tube.d:
        raise TubeError(f"point at distance {rho:.6g} lies outside the tube of radius {tube.d}")
    if rho <= tol:
        res = Projection(x.copy(), rho)
        return res if with_info else res.point
    C = np.atleast_2d(A.candidates(x[None]))
    dc = A.space.norm(C - x)
    best = min(dc.min(), rho)
    C = C[dc <= best + tol]
    if len(C) == 0:
        C = A.project(x[None])
    spread = float(A.space.norm(C[:, None, :] - C[None]).max()) if len(C) > 1 else 0.0
    if spread > 10 * tol:
        raise HypothesisViolation(
            f"nearest point not unique: {len(C)} candidates spread over {spread:.3g}"
        )
    order = np.lexsort(C.T[::-1])
    res = Projection(C[order[0]].copy(), rho, len(C), spread, len(C) > 1)
    return res if with_info else res.point


def enlarged_projection(A, x, s, tube=None, n=256, strict=True, n_dense=8192):
    """Representative points of ``{a in A : ||x - a|| <= rho(x, A) + s}``.

    Planar curve boundaries are swept densely and the exact crossing points
    of the level ``rho + s`` are included; every returned point is verified.
    """
    if s <= 0:
        raise DomainError("s must be positive")
    x = np.asarray(x, dtype=float).ravel()
    rho = float(A.distance(x[None])[0])
    if strict and tube is not None and rho >= tube.d:
        raise TubeError("point outside the tube")
    level = rho + s
    sp = A.space
    pts = []
    curves = A.curves()
    if curves:
        for c in curves:
            tt = c.params(n_dense)
            P = c.point(tt)
            ok = (sp.norm(P - x) <= level) & A.contains(P)
            pts.append(P[ok])
            nxt = np.roll(ok, -1) if c.closed else np.concatenate([ok[1:], [ok[-1]]])
            h = c.period / (n_dense if c.closed else n_dense - 1)
            for k in np.nonzero(ok & ~nxt)[0]:
                lo, hi = tt[k], tt[k] + h
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    if sp.norm(c.point(c.wrap(mid)) - x) <= level:
                        lo = mid
                    else:
                        hi = mid
                pts.append(c.point(np.array([c.wrap(lo)])))
            for k in np.nonzero(~ok & nxt)[0]:
                lo, hi = tt[k], tt[k] + h
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    if sp.norm(c.point(c.wrap(mid)) - x) <= level:
                        hi = mid
                    else:
                        lo = mid
                pts.append(c.point(np.array([c.wrap(hi)])))
    rng = np.random.default_rng(0)
    S = A.samples(4 * n, rng)
    pts.append(S[(sp.norm(S - x) <= level) & A.contains(S)])
    pts.append(project_in_tube(A, x, tube, strict=strict)[None])
    P = np.vstack(pts)
    P = P[sp.norm(P - x) <= level + GEOM_TOL]
    if len(P) > n:
        keep = np.unique(np.linspace(0, len(P) - 1, n).round().astype(int))
        P = P[keep]
    return P


def _tube_points(A, tube, n, rng, margin=0.95):
    """Random points with ``rho(x, A) < margin * d``."""
    out, got = [], 0
    while got < n:
        base = A.samples(4 * n, rng)
        u = rng.standard_normal(base.shape)
        u /= A.space.norm(u)[:, None]
        r = margin * tube.d * rng.random(len(base))
        X = base + r[:, None] * u
        X = X[A.distance(X) < margin * tube.d]
        out.append(X)
        got += len(X)
    return np.vstack(out)[:n]


def loglog_slope(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0)
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0]) if ok.sum() >= 2 else float("nan")


def check_projection_stability(A, tube, trials=500, seed=0, s_values=(1e-3, 1e-2),
                               n_enlarged=25, tol=1e-6):
    """Monte-Carlo check of projection continuity in the tube.

    (a) enlarged projections stay inside ``B_{t_E(s)}(P_A x)``; (b) random
    pairs satisfy ``||P x1 - P x2|| <= t_E(||x1 - x2||)``; (c) log-log slopes
    of ``t_E`` and of the observed displacements are reported.
    """
    rng = np.random.default_rng(seed)
    s0 = tube.s0
    X1 = _tube_points(A, tube, trials, rng)
    rows = []
    ins, outs = [], []
    for k, x1 in enumerate(X1):
        for _ in range(100):
            s = float(np.exp(rng.uniform(np.log(1e-5), np.log(0.5 * s0))))
            u = rng.standard_normal(A.dim)
            x2 = x1 + s * u / A.space.norm(u)
            if A.distance(x2[None])[0] < tube.d:
                break
        p1 = project_in_tube(A, x1, tube)
        p2 = project_in_tube(A, x2, tube)
        dx = float(A.space.norm(x1 - x2))
        dp = float(A.space.norm(p1 - p2))
        bound = tube.t_E(dx)
        rows.append({"trial": k, "check": "pair", "input": dx, "output": dp, "bound": bound,
                     "pass": dp <= bound + tol})
        ins.append(dx)
        outs.append(dp)
    for s in s_values:
        te = tube.t_E(s)
        for k, x in enumerate(X1[:n_enlarged]):
            p = project_in_tube(A, x, tube)
            P = enlarged_projection(A, x, s, tube)
            worst = float(A.space.norm(P - p).max())
            rows.append({"trial": k, "check": f"enlarged s={s:g}", "input": s, "output": worst,
                         "bound": te, "pass": worst <= te + tol})
    s_grid = np.geomspace(1e-4, 1e-2, 9)
    te_slope = loglog_slope(s_grid, tube.t_E(s_grid))
    disp_slope = loglog_slope(ins, outs)
    info = {"s0": s0, "t_E_slope": te_slope, "displacement_slope": disp_slope,
            "violations": sum(not r["pass"] for r in rows)}
    passed = info["violations"] == 0 and 0.45 <= te_slope <= 0.55 and disp_slope >= 0.45
    return Report("projection_stability", rows, passed, info)


@dataclass
class PathPolyline:
    points: np.ndarray
    max_gap: float
    max_set_violation: float
    params: np.ndarray = field(default=None)


def path_via_projection(A, x, y, tube, steps=64, tol=GEOM_TOL):
    """Curve in ``A`` joining ``x`` and ``y``: projections of the segment points."""
    x, y = np.asarray(x, float).ravel(), np.asarray(y, float).ravel()
    if np.all(x == y):
        return PathPolyline(x[None].copy(), 0.0, float(A.distance(x[None])[0]), np.zeros(1))
    if A.space.norm(x - y) >= 2 * tube.d:
        raise PreconditionError("endpoints must be closer than 2d")
    ts = np.linspace(0.0, 1.0, steps + 1)
    Z = (1 - ts)[:, None] * x + ts[:, None] * y
    rho = A.distance(Z)
    bad = np.nonzero(rho >= tube.d)[0]
    if len(bad):
        raise TubeError(f"segment leaves the tube at t={ts[bad[0]]:.6g}")
    P = np.array([project_in_tube(A, z, tube, tol=tol) for z in Z])
    P[0], P[-1] = x, y
    gaps = A.space.norm(np.diff(P, axis=0))
    return PathPolyline(P, float(gaps.max()), float(A.distance(P).max()), ts)


def connect_by_midpoint_iteration(A, B, a0, b0, gamma, delta_B=None, d=None, max_iters=200,
                                  tol=1e-12, check_grid=64):
    """Chain inside ``A ∩ B`` built by repeated near-midpoint points.

    At step ``k`` a point ``w`` of the intersection within
    ``gamma(l_k) + alpha_k`` of the midpoint replaces the endpoint nearer to
    it (``a`` on ties), with ``alpha_k = min(1/k, (l_k/2 - gamma(l_k))/2)``.
    """
    from .sets import Intersection

    a, b = np.asarray(a0, float).ravel(), np.asarray(b0, float).ravel()
    H = Intersection([A, B])
    sp = A.space
    for p, name in ((a, "a0"), (b, "b0")):
        if not H.contains(p[None], 1e-9)[0]:
            raise PreconditionError(f"{name} is not in the intersection")
    if delta_B is not None:
        diam_B = B.diameter()
        if d is not None and diam_B >= d:
            raise PreconditionError("diam B must be below d")
        grid = diam_B * np.arange(1, check_grid + 1) / (check_grid + 1)
        if np.any(np.asarray(delta_B(grid)) <= np.asarray(gamma(grid))):
            raise PreconditionError("delta_B must dominate gamma_A on the shared range")
    gaps = [float(sp.norm(a - b))]
    chain = [(a.copy(), b.copy())]
    k = 1
    while gaps[-1] > tol and k <= max_iters:
        ell = gaps[-1]
        g = float(gamma(ell))
        slack = 0.5 * ell - g
        if slack <= 0:
            raise HypothesisViolation(f"weak convexity violated at scale l={ell:.6g}")
        alpha = min(1.0 / k, 0.5 * slack)
        m = 0.5 * (a + b)
        w = H.project(m[None])[0]
        if sp.norm(w - m) > g + alpha:
            raise HypothesisViolation(f"weak convexity violated at scale l={ell:.6g}")
        if sp.norm(w - a) <= sp.norm(w - b):
            a = w
        else:
            b = w
        gaps.append(float(sp.norm(a - b)))
        chain.append((a.copy(), b.copy()))
        k += 1
    gaps = np.array(gaps)
    ks = np.arange(len(gaps))
    live = gaps > max(tol, 1e-300)
    tail = ks[live][len(ks[live]) // 2:]
    if len(tail) >= 2:
        slope, icpt = np.polyfit(tail, np.log(gaps[tail]), 1)
        rate, c_rate = float(np.exp(slope)), float(np.exp(icpt))
    else:
        rate, c_rate = 0.0, float(gaps[0])
    decreasing = bool(np.all(np.diff(gaps[live]) < 0)) if live.sum() > 1 else True
    rows = [{"k": int(i), "gap": float(gv)} for i, gv in enumerate(gaps)]
    info = {"rate": rate, "c_rate": c_rate, "iterations": len(gaps) - 1, "limit": a,
            "decreasing": decreasing, "chain": chain}
    return Report("midpoint_chain", rows, bool(gaps[-1] <= tol and decreasing), info)


_HULLS = {}


def convex_hull_cached(A):
    key = id(A)
    if key not in _HULLS or _HULLS[key][0] is not A:
        _HULLS[key] = (A, closed_convex_hull(A))
    return _HULLS[key][1]


def retract(A, x, tube, hull=None, tol=GEOM_TOL):
    """Continuous retraction onto ``A``: project onto the hull, then onto ``A``."""
    _, r = A.enclosing_ball()
    if 2 * r >= tube.d:
        raise PreconditionError(f"enclosing radius {r:.6g} violates 2r < d={tube.d}")
    x = np.asarray(x, float).ravel()
    if A.distance(x[None])[0] <= tol:
        return project_in_tube(A, x, tube, tol=tol)
    hull = hull or convex_hull_cached(A)
    y = hull.project(x[None])[0]
    return project_in_tube(A, y, tube, tol=tol)


def distance_gradient_probe(A, x, tube=None, h=1e-4, strict=True, tol=1e-3):
    """Central-difference gradient of the distance function at ``x``.

    In a tube the gradient has unit norm and points along ``x - P_A x``.
    """
    x = np.asarray(x, float).ravel()
    rho = float(A.distance(x[None])[0])
    if rho <= 0:
        raise PreconditionError("x must lie outside A")
    if strict:
        if tube is None:
            raise PreconditionError("a tube is required in strict mode")
        if rho + h >= tube.d or h >= 0.5 * rho:
            raise PreconditionError("step too large relative to the tube margin")
    E = np.eye(A.dim) * h
    grad = (A.distance(x + E) - A.distance(x - E)) / (2 * h)
    gnorm = float(np.linalg.norm(grad)) if A.space.p == 2 else float(A.space.dual_norm(grad[None])[0])
    row = {"x": x, "gradient": grad, "norm": gnorm, "norm_ok": abs(gnorm - 1) <= tol}
    try:
        p = project_in_tube(A, x, tube, strict=False)
        v = x - p
        if A.space.p == 2:
            direction = v / np.linalg.norm(v)
        else:
            direction = A.space.norm_gradient(v[None])[0]
        row["direction_error"] = float(np.linalg.norm(grad - direction))
        row["direction_ok"] = row["direction_error"] <= tol
    except HypothesisViolation:
        row["direction_error"] = float("nan")
        row["direction_ok"] = False
    row["pass"] = bool(row["norm_ok"] and row["direction_ok"])
    return Report("distance_gradient", [row], row["pass"], {"rho": rho, "h": h})
