"""Smooth closed planar curves: curvature, smoothness function, normals.

Only the Euclidean plane is supported.  The set ``A`` is the region enclosed
by the curve; ``side`` selects which set a modulus refers to: the curve
itself (``"boundary"``), the region (``"inside"``) or the closure of its
complement clipped to a large ball (``"outside"``).
"""

from __future__ import annotations

import warnings

import numpy as np

from .curves import CURVE_SAMPLES, Curve, EllipseCurve, PolylineCurve, SampledCurve
from .errors import DomainError, SceneError
from .moduli import modulus_nonconvexity
from .reports import Report
from .sets import Ball, Cavern, CurveRegion2D, Polytope
from .space import GEOM_TOL, ModulusCurve, PNormSpace

SIDES = ("boundary", "inside", "outside")


class SmoothCurve2D:
    """Closed, regular planar curve with the derivative data used below.

    Parameters
    ----------
    curve : Curve
        A closed parametric curve (analytic kinds or :class:`SampledCurve`).
    simplicity_radius : float, optional
        Parameter of simplicity ``r``; probed on demand when omitted.
    n : int
        Sample count for the construction checks.
    """

    def __init__(self, curve: Curve, simplicity_radius=None, n=2048):
        if not curve.closed:
            raise SceneError("a smooth closed curve is required")
        ends = curve.point(np.array([curve.t0, curve.t1]))
        if np.linalg.norm(ends[0] - ends[1]) > 1e-9:
            raise SceneError("curve endpoints do not match")
        t = curve.params(n)
        d1, d2 = curve.derivatives(t)
        speed = np.linalg.norm(d1, axis=1)
        if np.any(speed <= 1e-12):
            raise SceneError("curve speed vanishes")
        if isinstance(curve, EllipseCurve):
            h = 1e-5
            P = curve.point(curve.wrap(t + h)), curve.point(curve.wrap(t - h))
            fd = (P[0] - P[1]) / (2 * h)
            if np.max(np.abs(fd - d1)) > 1e-6:
                raise SceneError("derivatives disagree with finite differences")
        self.curve = curve
        self.space = PNormSpace(2, 2)
        self._r = simplicity_radius

    @classmethod
    def from_points(cls, points, gap_ratio=20.0, **kwargs):
        """Spline through samples of one closed curve; gaps reveal several pieces."""
        P = np.asarray(points, dtype=float)
        if P.ndim != 2 or P.shape[1] != 2 or len(P) < 4:
            raise SceneError("samples must be at least 4 planar points")
        seg = np.linalg.norm(P - np.roll(P, -1, axis=0), axis=1)
        if seg.max() > gap_ratio * np.median(seg):
            raise SceneError("samples do not form a single closed curve")
        return cls(SampledCurve(P), **kwargs)

    @property
    def orientation(self):
        return self.curve.orientation

    def params(self, n):
        return self.curve.params(n)

    def normals(self, t):
        """Outward unit normals of the enclosed region."""
        return self.curve.normal(t)

    def curvature_radius(self, t):
        return curvature_radius(self, t)

    def region(self, side="inside", clip_factor=3.0):
        if side not in SIDES:
            raise DomainError(f"side must be one of {SIDES}")
        if side == "boundary":
            return CurveRegion2D(self.space, self.curve, "boundary")
        body = _body(self.space, self.curve)
        if side == "inside":
            return body
        P = self.curve.sample(1024)
        c = P.mean(axis=0)
        radius = clip_factor * float(np.linalg.norm(P - c, axis=1).max())
        return Cavern(body, Ball(self.space, c, radius))

    @property
    def simplicity_radius(self):
        if self._r is None:
            span = np.ptp(self.curve.sample(1024), axis=0).max()
            self._r = simplicity_parameter_probe(self, np.linspace(0.0, 2 * span, 201)[1:])
        return self._r


def _body(space, curve):
    """Enclosed region; a convex polygon becomes a :class:`Polytope`."""
    if isinstance(curve, PolylineCurve):
        poly = Polytope(space, curve.vertices)
        if len(poly.vertices) != len(curve.vertices):
            raise SceneError("only convex polygons are supported")
        return poly
    return CurveRegion2D(space, curve, "inside")


def _curve(c):
    return c.curve if isinstance(c, SmoothCurve2D) else c


def curvature_radius(curve, s):
    """``(x'^2 + y'^2)^{3/2} / |x'' y' - y'' x'|``; ``inf`` where the curve is straight."""
    c = _curve(curve)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    d1, d2 = c.derivatives(s_arr)
    num = np.hypot(d1[:, 0], d1[:, 1]) ** 3
    den = np.abs(d2[:, 0] * d1[:, 1] - d2[:, 1] * d1[:, 0])
    out = np.full(len(s_arr), np.inf)
    ok = den > 1e-12
    out[ok] = num[ok] / den[ok]
    return float(out[0]) if np.ndim(s) == 0 else out


def signed_curvature(curve, s):
    """Curvature with sign: positive where the enclosed region is locally convex."""
    c = _curve(curve)
    d1, d2 = c.derivatives(np.atleast_1d(np.asarray(s, dtype=float)))
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    return c.orientation * cross / np.hypot(d1[:, 0], d1[:, 1]) ** 3


def _unit_normals(c, t):
    """Normals and a mask of samples where they are defined."""
    d1, _ = c.derivatives(t)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    ok = speed > 1e-12
    N = np.zeros_like(d1)
    N[ok] = c.normal(t[ok])
    return N, ok


def estimate_alpha(curve, t_grid, n=2048, n_partner=256):
    """Smoothness function estimate on ``t_grid``.

    ``alpha(t)`` is the largest ``|(p(x), x - a)| / |x - a|`` over curve points
    ``x, a`` with ``|x - a| <= t`` and ``p(x)`` the unit normal at ``x``; the
    absolute value covers the region and its complement together.  Dense
    sample pairs are combined with the exact partners at distance ``t`` of
    ``n_partner`` base points.
    """
    c = _curve(curve)
    grid = np.asarray(t_grid, dtype=float).ravel()
    if np.any(grid < 0):
        raise DomainError("t_grid must be nonnegative")
    sp = PNormSpace(2, 2)
    tt = c.params(n)
    X = c.point(tt)
    N, ok = _unit_normals(c, tt)
    if (~ok).any():
        warnings.warn(f"{int((~ok).sum())} samples without a normal were excluded")
    X, N, tt = X[ok], N[ok], tt[ok]
    D = X[:, None, :] - X[None, :, :]
    dist = np.linalg.norm(D, axis=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.abs(np.einsum("ik,ijk->ij", N, D)) / dist
    mask = dist > 0
    dv, rv = dist[mask], ratio[mask]
    order = np.argsort(dv)
    dv, env = dv[order], np.maximum.accumulate(rv[order])
    step = max(len(tt) // n_partner, 1)
    Xp, Np, tp = X[::step], N[::step], tt[::step]
    vals = []
    for t in grid:
        k = np.searchsorted(dv, t, side="right")
        v = float(env[k - 1]) if k > 0 else 0.0
        if t > 0:
            for part in c.partners(tp, t, sp, n=128):
                good = ~np.isnan(part)
                if good.any():
                    Z = Xp[good] - c.point(part[good])
                    r = np.abs(np.einsum("ik,ik->i", Np[good], Z)) / np.linalg.norm(Z, axis=1)
                    v = max(v, float(r.max()))
        vals.append(v)
    return ModulusCurve(grid, vals)


def epsilon0(alpha, t_max=None, n=4096):
    """``sup{t > 0 : alpha(tau) + alpha(tau/2) < 1/2 for all tau in (0, t)}``.

    ``alpha`` is nondecreasing, so the first grid crossing of ``1/2`` is
    refined by bisection.  Returns ``t_max`` when no crossing occurs.
    """
    if t_max is None:
        t_max = getattr(alpha, "eps_max", None)
        if t_max is None:
            raise DomainError("t_max is required for a plain callable")
    t_max = float(t_max)

    def f(tau):
        tau = np.asarray(tau, dtype=float)
        return np.asarray(alpha(tau)) + np.asarray(alpha(0.5 * tau))

    grid = t_max * np.arange(1, n + 1) / n
    bad = np.nonzero(f(grid) >= 0.5)[0]
    if len(bad) == 0:
        return t_max
    k = int(bad[0])
    if k == 0 and f(np.array([1e-300]))[0] >= 0.5:
        return 0.0
    lo, hi = (grid[k - 1] if k > 0 else 0.0), grid[k]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(np.array([mid]))[0] >= 0.5:
            hi = mid
        else:
            lo = mid
    return float(lo)


def _lower_bound_samples(sc, side, n=2048):
    """Curvature radii at samples where the chosen set is not locally convex."""
    t = sc.params(n)
    k = signed_curvature(sc, t)
    if side == "boundary":
        sel = np.abs(k) > 1e-12
    elif side == "inside":
        sel = k < -1e-12
    else:
        sel = k > 1e-12
    return 1.0 / np.abs(k[sel])


def check_surface_gamma_bound(curve, eps_grid, side="boundary", r=None, tol=1e-3,
                              alpha=None, n_base=512):
    """Check ``lower <= gamma(eps) <= eps (alpha(eps) + alpha(eps/2))`` on a grid.

    ``lower`` is ``min R - sqrt(R^2 - eps^2/4)`` over samples where the set
    is not locally convex (0 when there are none).  The grid must lie in
    ``(0, min(r, eps0))``.
    """
    sc = curve if isinstance(curve, SmoothCurve2D) else SmoothCurve2D(curve)
    grid = np.asarray(eps_grid, dtype=float).ravel()
    r = sc.simplicity_radius if r is None else float(r)
    needed = np.unique(np.concatenate([grid, 0.5 * grid]))
    if alpha is None:
        top = max(min(r, 2.0 * float(np.ptp(sc.curve.sample(512), axis=0).max())), needed.max())
        alpha_grid = np.unique(np.concatenate([needed, np.linspace(0.0, top, 401)[1:]]))
        alpha = estimate_alpha(sc, alpha_grid)
    e0 = epsilon0(alpha)
    top = min(r, e0)
    if np.any(grid <= 0) or np.any(grid >= top):
        raise DomainError(f"grid must lie in (0, {top:.6g})")
    A = sc.region(side)
    radii = _lower_bound_samples(sc, side)
    rows = []
    for e in grid:
        g = modulus_nonconvexity(A, e, n_base=n_base)
        upper = e * (float(alpha(e)) + float(alpha(0.5 * e)))
        if len(radii):
            R = radii[radii >= 0.5 * e]
            lower = float(np.min(R - np.sqrt(R ** 2 - 0.25 * e ** 2))) if len(R) else 0.0
        else:
            lower = 0.0
        rows.append({"eps": float(e), "value": g, "bound_lower": lower, "bound_upper": upper,
                     "pass": lower - tol <= g <= upper + tol})
    return Report("surface_gamma_bound", rows, all(x["pass"] for x in rows),
                  {"epsilon0": e0, "r": r, "side": side})


def simplicity_parameter_probe(curve, r_candidates, n=1024):
    """Largest candidate ``r`` for which every ``B_r(x) ∩ curve`` is one open arc.

    A ball covering the whole curve does not count as an arc.  Candidates
    are scanned in increasing order and the scan stops at the first failure.
    """
    c = _curve(curve)
    P = c.point(c.params(n))
    D = np.linalg.norm(P[:, None, :] - P[None, :, :], axis=2)
    best = 0.0
    for r in np.sort(np.asarray(r_candidates, dtype=float)):
        M = D < r
        runs = np.count_nonzero(M & ~np.roll(M, 1, axis=1), axis=1)
        if np.any(runs != 1):
            break
        best = float(r)
    return best


def _arc_lengths(c, n):
    t = c.params(n)
    P = c.point(t)
    seg = np.linalg.norm(np.roll(P, -1, axis=0) - P, axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
    return t, P, s, float(seg.sum())


def normal_modulus(curve, arc_grid, n=2048):
    """Largest ``|p(x) - p(y)|`` over sample pairs with arc distance ``<= rho``."""
    c = _curve(curve)
    t, P, s, L = _arc_lengths(c, n)
    N, ok = _unit_normals(c, t)
    N, s = N[ok], s[ok]
    ds = np.abs(s[:, None] - s[None, :])
    ds = np.minimum(ds, L - ds)
    dn = np.linalg.norm(N[:, None, :] - N[None, :, :], axis=2)
    order = np.argsort(ds, axis=None)
    dv, env = ds.ravel()[order], np.maximum.accumulate(dn.ravel()[order])
    grid = np.asarray(arc_grid, dtype=float).ravel()
    k = np.searchsorted(dv, grid, side="right")
    vals = np.where(k > 0, env[np.maximum(k - 1, 0)], 0.0)
    return ModulusCurve(grid, vals)


def normal_field_continuity(curve, arc_grid=None, r=None, n_samples=200, n_dense=CURVE_SAMPLES,
                            tol=GEOM_TOL):
    """Proximal-normal emptiness at ``n_samples`` points and the normal modulus.

    For each sampled ``x`` with outward normal ``n`` the open balls
    ``B_r(x + r n)`` (against the region) and ``B_r(x - r n)`` (against the
    complement) must miss the curve and have their centers on the correct
    side.  ``r`` defaults to half the smallest curvature radius.
    """
    sc = curve if isinstance(curve, SmoothCurve2D) else SmoothCurve2D(curve)
    c = sc.curve
    if r is None:
        r = 0.5 * float(np.min(curvature_radius(sc, c.params(n_dense))))
    t = c.params(n_samples)
    X = c.point(t)
    N = sc.normals(t)
    dense = c.point(c.params(n_dense))
    rows, violations = [], 0
    for sign, name in ((1.0, "region"), (-1.0, "complement")):
        C = X + sign * r * N
        d = np.linalg.norm(C[:, None, :] - dense[None], axis=2).min(axis=1)
        inside = c.inside(C)
        side_ok = ~inside if sign > 0 else inside
        bad = (d < r * (1 - 1e-6) - tol) | ~side_ok
        violations += int(bad.sum())
        for k in np.nonzero(bad)[0]:
            rows.append({"side": name, "t": float(t[k]), "clearance": float(d[k]), "r": r})
    if arc_grid is None:
        arc_grid = np.linspace(0.0, 0.5, 51)[1:]
    mod = normal_modulus(sc, arc_grid)
    return Report("normal_field_continuity", rows, violations == 0,
                  {"r": r, "violations": violations, "samples": n_samples, "modulus": mod})


def conjecture_probe(curve, eps_grid, n_base=256):
    """Side-by-side data: ``gamma(eps)/eps`` for the region and its complement and
    the normal modulus at arc distance ``eps``.  Nothing is asserted."""
    sc = curve if isinstance(curve, SmoothCurve2D) else _LooseCurve(curve)
    grid = np.asarray(eps_grid, dtype=float).ravel()
    inside, outside = sc.region("inside"), sc.region("outside")
    mod = normal_modulus(sc, grid)
    rows = []
    for e in grid:
        rows.append({
            "eps": float(e),
            "gamma_inside_ratio": modulus_nonconvexity(inside, e, n_base=n_base) / e,
            "gamma_outside_ratio": modulus_nonconvexity(outside, e, n_base=n_base) / e,
            "normal_modulus": float(mod(e)),
        })
    return Report("conjecture_probe", rows, True, {"asserted": False})


class _LooseCurve(SmoothCurve2D):
    """Closed curve that may have corners (for the data-only probe)."""

    def __init__(self, curve):
        if not curve.closed:
            raise SceneError("a closed curve is required")
        self.curve = curve
        self.space = PNormSpace(2, 2)
        self._r = None
