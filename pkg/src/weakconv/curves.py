"""Planar parametric curves with nearest-point queries.

Curves are geometric objects in the plane; distances are measured in the
norm of the :class:`~weakconv.space.PNormSpace` passed to each query.
Nearest points come from a KD-tree over dense samples followed by a
golden-section refinement in the parameter.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from ._numerics import bisect_predicate, golden_min
from .errors import DomainError, SceneError

CURVE_SAMPLES = 4096


class Curve:
    """Base class: ``point(t)`` on ``[t0, t1]``; periodic when ``closed``."""

    t0 = 0.0
    t1 = 2.0 * np.pi
    closed = True

    def point(self, t):
        raise NotImplementedError

    def derivatives(self, t):
        """First and second derivatives, each of shape ``(len(t), 2)``."""
        raise NotImplementedError

    @property
    def period(self):
        return self.t1 - self.t0

    def wrap(self, t):
        t = np.asarray(t, dtype=float)
        if self.closed:
            return self.t0 + np.mod(t - self.t0, self.period)
        return np.clip(t, self.t0, self.t1)

    def params(self, n):
        if self.closed:
            return self.t0 + self.period * np.arange(n) / n
        return np.linspace(self.t0, self.t1, n)

    def sample(self, n=CURVE_SAMPLES):
        return self.point(self.params(n))

    def _tree(self, space):
        cache = self.__dict__.setdefault("_trees", {})
        key = space.p
        if key not in cache:
            tt = self.params(CURVE_SAMPLES)
            cache[key] = (tt, cKDTree(self.point(tt)))
        return cache[key]

    def nearest(self, x, space):
        """Nearest curve parameter, point and distance for each row of ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        tt, tree = self._tree(space)
        _, idx = tree.query(x, p=space.p)
        h = self.period / (CURVE_SAMPLES if self.closed else CURVE_SAMPLES - 1)
        lo, hi = tt[idx] - h, tt[idx] + h
        if not self.closed:
            lo, hi = np.maximum(lo, self.t0), np.minimum(hi, self.t1)
        t = golden_min(lambda u: space.norm(self.point(self.wrap(u)) - x), lo, hi)
        t = self.wrap(t)
        pts = self.point(t)
        return t, pts, space.norm(pts - x)

    def local_minima(self, x, space, n=CURVE_SAMPLES):
        """All refined local minimizers of the distance from the single point ``x``."""
        x = np.asarray(x, dtype=float).ravel()
        tt = self.params(n)
        dd = space.norm(self.point(tt) - x)
        if self.closed:
            prev, nxt = np.roll(dd, 1), np.roll(dd, -1)
        else:
            prev = np.concatenate([[np.inf], dd[:-1]])
            nxt = np.concatenate([dd[1:], [np.inf]])
        idx = np.nonzero((dd <= prev) & (dd <= nxt))[0]
        h = self.period / (n if self.closed else n - 1)
        lo, hi = tt[idx] - h, tt[idx] + h
        if not self.closed:
            lo, hi = np.maximum(lo, self.t0), np.minimum(hi, self.t1)
        t = self.wrap(golden_min(lambda u: space.norm(self.point(self.wrap(u)) - x), lo, hi))
        d = space.norm(self.point(t) - x)
        # adjacent tied samples refine to one minimizer; keep one copy per basin
        keep = []
        for k in np.argsort(d, kind="stable"):
            gap = np.abs(t[keep] - t[k])
            if self.closed:
                gap = np.minimum(gap, self.period - gap)
            if not np.any(gap <= 2 * h):
                keep.append(k)
        t = t[np.sort(keep)]
        pts = self.point(t)
        return t, pts, space.norm(pts - x)

    def signed_area(self, n=CURVE_SAMPLES):
        P = self.sample(n)
        Q = np.roll(P, -1, axis=0)
        return 0.5 * float(np.sum(P[:, 0] * Q[:, 1] - P[:, 1] * Q[:, 0]))

    @property
    def orientation(self):
        """+1 for counter-clockwise closed curves, -1 otherwise."""
        if "_orient" not in self.__dict__:
            self._orient = 1.0 if (not self.closed or self.signed_area() >= 0) else -1.0
        return self._orient

    def normal(self, t):
        """Unit Euclidean normal pointing to the right of a counter-clockwise traversal."""
        d1, _ = self.derivatives(np.atleast_1d(t))
        n = np.column_stack([d1[:, 1], -d1[:, 0]]) * self.orientation
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def inside(self, x):
        """Even-odd test against a dense polygon (closed curves only)."""
        if not self.closed:
            raise DomainError("inside() needs a closed curve")
        x = np.atleast_2d(np.asarray(x, dtype=float))
        P = self.sample(CURVE_SAMPLES)
        Q = np.roll(P, -1, axis=0)
        px, py = x[:, 0:1], x[:, 1:2]
        cond = (P[None, :, 1] > py) != (Q[None, :, 1] > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = P[:, 0] + (py - P[:, 1]) * (Q[:, 0] - P[:, 0]) / (Q[:, 1] - P[:, 1])
        return np.count_nonzero(cond & (px < xint), axis=1) % 2 == 1

    def partner_spans(self, t, eps, space, sign=1.0, n=512):
        """Parameter offset to the first point at distance ``eps`` from ``point(t)``.

        Walks in direction ``sign`` along the curve; NaN where no point of the
        curve in that direction is that far away.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        base = self.point(t)
        if self.closed:
            span = np.broadcast_to(self.period * np.arange(1, n + 1) / (n + 1), (len(t), n))
        else:
            limit = (self.t1 - t) if sign > 0 else (t - self.t0)
            span = limit[:, None] * np.linspace(0.0, 1.0, n + 1)[None, 1:]
        dd = space.norm(self.point(self.wrap(t[:, None] + sign * span)) - base[:, None, :])
        hit = dd >= eps
        has = hit.any(axis=1)
        k = np.argmax(hit, axis=1)
        rows = np.arange(len(t))
        hi = span[rows, k]
        lo = np.where(k > 0, span[rows, np.maximum(k - 1, 0)], 0.0)
        out = self._bisect_span(t, base, lo, hi, eps, space, sign)
        return np.where(has, out, np.nan)

    def _bisect_span(self, t, base, lo, hi, eps, space, sign, iters=60):
        def pred(u):
            return space.norm(self.point(self.wrap(t + sign * u)) - base) >= eps

        return bisect_predicate(pred, lo, hi, iters=iters)[1]

    def partner_spans_near(self, t, guess, width, eps, space, sign=1.0):
        """Re-solve partner offsets inside ``[guess - width, guess + width]``."""
        t = np.asarray(t, dtype=float)
        base = self.point(t)
        lo = np.maximum(guess - width, 0.0)
        hi = guess + width
        if not self.closed:
            hi = np.minimum(hi, (self.t1 - t) if sign > 0 else (t - self.t0))
        d_lo = space.norm(self.point(self.wrap(t + sign * lo)) - base)
        d_hi = space.norm(self.point(self.wrap(t + sign * hi)) - base)
        ok = (d_lo < eps) & (d_hi >= eps) & (hi > lo)
        out = self._bisect_span(t, base, lo, np.where(ok, hi, lo), eps, space, sign)
        return np.where(ok, out, np.nan)

    def partners(self, t, eps, space, n=512):
        """Forward and backward partner parameters at exact distance ``eps``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        f = self.partner_spans(t, eps, space, 1.0, n)
        b = self.partner_spans(t, eps, space, -1.0, n)
        fwd = np.where(np.isnan(f), np.nan, self.wrap(t + np.nan_to_num(f)))
        bwd = np.where(np.isnan(b), np.nan, self.wrap(t - np.nan_to_num(b)))
        return fwd, bwd


class EllipseCurve(Curve):
    """Axis-aligned ellipse ``center + (a cos s, b sin s)``; a circle when ``a == b``."""

    def __init__(self, a, b, center=(0.0, 0.0)):
        if a <= 0 or b <= 0:
            raise SceneError("ellipse semi-axes must be positive")
        self.a, self.b = float(a), float(b)
        self.center = np.asarray(center, dtype=float)

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return self.center + np.stack([self.a * np.cos(t), self.b * np.sin(t)], axis=-1)

    def derivatives(self, t):
        t = np.asarray(t, dtype=float)
        d1 = np.stack([-self.a * np.sin(t), self.b * np.cos(t)], axis=-1)
        d2 = np.stack([-self.a * np.cos(t), -self.b * np.sin(t)], axis=-1)
        return d1, d2

    @property
    def orientation(self):
        return 1.0

    def inside(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float)) - self.center
        return (x[:, 0] / self.a) ** 2 + (x[:, 1] / self.b) ** 2 <= 1.0


class CircleCurve(EllipseCurve):
    def __init__(self, radius=1.0, center=(0.0, 0.0)):
        super().__init__(radius, radius, center)
        self.radius = float(radius)

    def nearest(self, x, space):
        if space.p != 2:
            return super().nearest(x, space)
        x = np.atleast_2d(np.asarray(x, dtype=float))
        v = x - self.center
        t = np.mod(np.arctan2(v[:, 1], v[:, 0]), 2.0 * np.pi)
        pts = self.point(t)
        return t, pts, np.abs(np.linalg.norm(v, axis=1) - self.radius)


class ArcCurve(Curve):
    """Circular arc around ``mid_angle`` with the given half-angle (radians)."""

    closed = False

    def __init__(self, radius=1.0, center=(0.0, 0.0), mid_angle=0.0, half_angle=np.pi / 18):
        if not 0 < half_angle < np.pi:
            raise SceneError("arc half-angle must lie in (0, pi)")
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)
        self.mid_angle = float(mid_angle)
        self.half_angle = float(half_angle)
        self.t0, self.t1 = -self.half_angle, self.half_angle

    def point(self, t):
        th = self.mid_angle + np.asarray(t, dtype=float)
        return self.center + self.radius * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def derivatives(self, t):
        th = self.mid_angle + np.asarray(t, dtype=float)
        r = self.radius
        d1 = r * np.stack([-np.sin(th), np.cos(th)], axis=-1)
        d2 = r * np.stack([-np.cos(th), -np.sin(th)], axis=-1)
        return d1, d2

    @property
    def orientation(self):
        return 1.0

    def nearest(self, x, space):
        if space.p != 2:
            return super().nearest(x, space)
        x = np.atleast_2d(np.asarray(x, dtype=float))
        v = x - self.center
        ang = np.arctan2(v[:, 1], v[:, 0]) - self.mid_angle
        ang = np.mod(ang + np.pi, 2 * np.pi) - np.pi
        t = np.clip(ang, self.t0, self.t1)
        # past the far side both endpoints compete
        ends = np.array([self.t0, self.t1])
        pe = self.point(ends)
        de = np.linalg.norm(x[:, None, :] - pe[None], axis=2)
        pts = self.point(t)
        dd = np.linalg.norm(pts - x, axis=1)
        better = de.min(axis=1) < dd
        t = np.where(better, ends[np.argmin(de, axis=1)], t)
        pts = self.point(t)
        return t, pts, np.linalg.norm(pts - x, axis=1)

    @property
    def chord(self):
        return 2.0 * self.radius * np.sin(self.half_angle)


class SampledCurve(Curve):
    """Closed curve through sample points, interpolated by a periodic cubic spline."""

    def __init__(self, points):
        P = np.asarray(points, dtype=float)
        if P.ndim != 2 or P.shape[1] != 2 or len(P) < 4:
            raise SceneError("samples must be at least 4 planar points")
        if np.linalg.norm(P[0] - P[-1]) > 1e-12:
            P = np.vstack([P, P[:1]])
        seg = np.linalg.norm(np.diff(P, axis=0), axis=1)
        if np.any(seg <= 0):
            raise SceneError("repeated consecutive sample points")
        u = np.concatenate([[0.0], np.cumsum(seg)])
        self.t0, self.t1 = 0.0, float(u[-1])
        self._spline = CubicSpline(u, P, bc_type="periodic")

    def point(self, t):
        return self._spline(self.wrap(t))

    def derivatives(self, t):
        t = self.wrap(t)
        return self._spline(t, 1), self._spline(t, 2)


class PSphereCurve(Curve):
    """Sphere of a planar p-norm: ``center + r u(t) / ||u(t)||_p``."""

    def __init__(self, space, radius=1.0, center=(0.0, 0.0)):
        self.space = space
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)

    def point(self, t):
        t = np.asarray(t, dtype=float)
        u = np.stack([np.cos(t), np.sin(t)], axis=-1)
        return self.center + self.radius * u / self.space.norm(u)[..., None]

    def derivatives(self, t, h=1e-5):
        t = np.asarray(t, dtype=float)
        f0, fp, fm = self.point(t), self.point(t + h), self.point(t - h)
        return (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / (h * h)

    @property
    def orientation(self):
        return 1.0


class PolylineCurve(Curve):
    """Closed polygon parametrized by arc length."""

    def __init__(self, vertices):
        V = np.asarray(vertices, dtype=float)
        self.vertices = V
        W = np.vstack([V, V[:1]])
        seg = np.linalg.norm(np.diff(W, axis=0), axis=1)
        self._u = np.concatenate([[0.0], np.cumsum(seg)])
        self._W = W
        self.t0, self.t1 = 0.0, float(self._u[-1])

    def point(self, t):
        t = self.wrap(t)
        return np.stack([np.interp(t, self._u, self._W[:, k]) for k in range(2)], axis=-1)

    def derivatives(self, t):
        t = self.wrap(np.atleast_1d(t))
        k = np.clip(np.searchsorted(self._u, t, side="right") - 1, 0, len(self._W) - 2)
        d = (self._W[k + 1] - self._W[k]) / (self._u[k + 1] - self._u[k])[:, None]
        return d, np.zeros_like(d)


class MappedCurve(Curve):
    """Image of a curve under ``x -> scale * x + shift`` (``scale`` a nonzero scalar)."""

    def __init__(self, base, scale=1.0, shift=(0.0, 0.0)):
        self.base = base
        self.scale = float(scale)
        self.shift = np.asarray(shift, dtype=float)
        self.t0, self.t1, self.closed = base.t0, base.t1, base.closed

    def point(self, t):
        return self.scale * self.base.point(t) + self.shift

    def derivatives(self, t):
        d1, d2 = self.base.derivatives(t)
        return self.scale * d1, self.scale * d2

    @property
    def orientation(self):
        # a planar point reflection is a rotation by pi
        return self.base.orientation

    def _pull(self, x):
        return (np.asarray(x, dtype=float) - self.shift) / self.scale

    def nearest(self, x, space):
        t, _, d = self.base.nearest(self._pull(np.atleast_2d(x)), space)
        return t, self.point(t), abs(self.scale) * d

    def local_minima(self, x, space, n=CURVE_SAMPLES):
        t, _, d = self.base.local_minima(self._pull(x), space, n)
        return t, self.point(t), abs(self.scale) * d

    def inside(self, x):
        return self.base.inside(self._pull(np.atleast_2d(x)))


_CURVE_FIELDS = {
    "circle": ({"radius", "center"}, set()),
    "ellipse": ({"a", "b", "center"}, {"a", "b"}),
    "arc": ({"radius", "center", "mid_angle_deg", "half_angle_deg"}, set()),
    "samples": ({"points"}, {"points"}),
}


def curve_from_spec(spec):
    """Build a curve from a ``curve2d`` scene entry."""
    kind = spec.get("kind")
    if kind not in _CURVE_FIELDS:
        raise SceneError(f"curve2d: unknown kind {kind!r}")
    p = dict(spec.get("params", {}))
    allowed, required = _CURVE_FIELDS[kind]
    if set(p) - allowed:
        raise SceneError(f"curve2d/{kind}: unknown fields {sorted(set(p) - allowed)}")
    if required - set(p):
        raise SceneError(f"curve2d/{kind}: missing fields {sorted(required - set(p))}")
    center = p.get("center", (0.0, 0.0))
    if kind == "circle":
        return CircleCurve(p.get("radius", 1.0), center)
    if kind == "ellipse":
        return EllipseCurve(p["a"], p["b"], center)
    if kind == "arc":
        return ArcCurve(p.get("radius", 1.0), center,
                        np.deg2rad(p.get("mid_angle_deg", 0.0)),
                        np.deg2rad(p.get("half_angle_deg", 10.0)))
    return SampledCurve(p["points"])
