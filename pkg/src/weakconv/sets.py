"""Compact sets exposed through membership, distance and sampling oracles.

Every oracle is immutable and vectorized: ``distance``, ``contains``,
``project`` and ``depth`` take an ``(n, dim)`` array (a single point is
promoted).  Boundary samples are deterministic; interior samples draw from
the generator passed in.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull, QhullError, cKDTree

from ._numerics import bisect_predicate, golden_min
from .curves import (
    CURVE_SAMPLES,
    CircleCurve,
    EllipseCurve,
    MappedCurve,
    PolylineCurve,
    PSphereCurve,
    curve_from_spec,
)
from .errors import DomainError, EmptySetError, PreconditionError, SceneError, UnboundedSetError
from .reports import Report
from .space import GEOM_TOL, PNormSpace


def _pts(x, dim=None):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if dim is not None and x.shape[1] != dim:
        raise DomainError(f"expected points of dimension {dim}, got {x.shape[1]}")
    return x


class SetOracle:
    """Base oracle; subclasses provide at least ``distance`` and ``project``."""

    convex = False
    bounded = True

    def __init__(self, space):
        self.space = space

    @property
    def dim(self):
        return self.space.dim

    def distance(self, x):
        raise NotImplementedError

    def project(self, x):
        """A nearest point of the set for every row of ``x``."""
        raise NotImplementedError

    def contains(self, x, tol=GEOM_TOL):
        return self.distance(x) <= tol

    def depth(self, x):
        """Distance to the complement (0 outside and on the boundary)."""
        return np.zeros(len(_pts(x)))

    def candidates(self, x):
        """Near-optimal points for the single query ``x`` (for multiplicity tests)."""
        return self.project(x)

    def curves(self):
        """Planar boundary curves, when the set has a parametric boundary."""
        return None

    def closed_gauge(self, x):
        """Closed-form Minkowski gauge, or None when unavailable."""
        return None

    def boundary_samples(self, n):
        raise NotImplementedError

    def bounds(self):
        P = self.boundary_samples(2048)
        return P.min(axis=0), P.max(axis=0)

    def interior_samples(self, n, rng):
        """Points of the set by rejection from the bounding box."""
        lo, hi = self.bounds()
        out, total = [], 0
        for _ in range(200):
            X = lo + (hi - lo) * rng.random((max(4 * n, 64), self.dim))
            X = X[self.contains(X)]
            out.append(X)
            total += len(X)
            if total >= n:
                break
        X = np.vstack(out)[:n]
        if len(X) < n:
            # thin set: fall back to boundary points
            B = self.boundary_samples(max(n, 16))
            X = np.vstack([X, B[rng.integers(0, len(B), n - len(X))]])
        return X

    def samples(self, n, rng, boundary_fraction=0.9):
        nb = int(round(boundary_fraction * n))
        parts = [self.boundary_samples(nb)] if nb else []
        if n - nb > 0:
            parts.append(self.interior_samples(n - nb, rng))
        return np.vstack(parts)

    def diameter(self, n=1024):
        P = self.boundary_samples(n)
        if len(P) > 2 and self.dim <= 3:
            try:
                P = P[ConvexHull(P).vertices]
            except (QhullError, ValueError):
                pass
        return float(max(self.space.norm(P[:, None, :] - P[None, :, :]).max(), 0.0))

    def enclosing_ball(self, n=4096):
        """A small ball containing the boundary samples (center, radius).

        Oracles are immutable, so the result is cached per ``n``.
        """
        cache = self.__dict__.setdefault("_enclosing_cache", {})
        if n not in cache:
            cache[n] = self._enclosing_ball(n)
        c, r = cache[n]
        return c.copy(), r

    def _enclosing_ball(self, n):
        P = self.boundary_samples(n)
        c = P.mean(axis=0)
        for k in range(1, 2001):
            far = P[np.argmax(self.space.norm(P - c))]
            c = c + (far - c) / (k + 1)
        res = minimize(lambda z: self.space.norm(P - z).max(), c, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-12, "maxiter": 4000})
        c = res.x if res.fun <= self.space.norm(P - c).max() else c
        return c, float(self.space.norm(P - c).max())


class Ball(SetOracle):
    convex = True

    def __init__(self, space, center, radius):
        super().__init__(space)
        self.center = np.asarray(center, dtype=float).ravel()
        if len(self.center) != space.dim:
            raise SceneError("ball center has the wrong dimension")
        if radius <= 0:
            raise SceneError("ball radius must be positive")
        self.radius = float(radius)

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"

    def distance(self, x):
        return np.maximum(self.space.norm(_pts(x) - self.center) - self.radius, 0.0)

    def depth(self, x):
        return np.maximum(self.radius - self.space.norm(_pts(x) - self.center), 0.0)

    def project(self, x):
        x = _pts(x)
        v = x - self.center
        n = self.space.norm(v)
        out = x.copy()
        far = n > self.radius
        out[far] = self.center + self.radius * v[far] / n[far, None]
        return out

    def closed_gauge(self, x):
        if np.any(self.center != 0):
            return None
        return self.space.norm(_pts(x)) / self.radius

    def boundary_project(self, x):
        """Nearest boundary point (radial, exact in every p-norm)."""
        x = _pts(x)
        v = x - self.center
        n = self.space.norm(v)
        e = np.zeros(self.dim)
        e[0] = 1.0
        v = np.where(n[:, None] > 0, v, e)
        return self.center + self.radius * v / self.space.norm(v)[:, None]

    def candidates(self, x):
        x = _pts(x)
        if self.space.norm(x - self.center)[0] <= GEOM_TOL:
            return self.boundary_samples(256)
        return self.project(x)

    def curves(self):
        if self.dim != 2:
            return None
        if self.space.p == 2:
            return [CircleCurve(self.radius, self.center)]
        return [PSphereCurve(self.space, self.radius, self.center)]

    def boundary_samples(self, n):
        return self.center + self.radius * self.space.sphere_directions(n)

    def bounds(self):
        return self.center - self.radius, self.center + self.radius

    def interior_samples(self, n, rng):
        if self.dim == 2:
            th = rng.random(n) * 2 * np.pi
            U = np.column_stack([np.cos(th), np.sin(th)])
            U = U / self.space.norm(U)[:, None]
        else:
            G = rng.standard_normal((n, self.dim))
            U = G / self.space.norm(G)[:, None]
        r = self.radius * rng.random(n) ** (1.0 / self.dim)
        return self.center + r[:, None] * U

    def diameter(self, n=None):
        return 2.0 * self.radius

    def enclosing_ball(self, n=None):
        return self.center.copy(), self.radius


class Polytope(SetOracle):
    """Convex hull of finitely many points (dimension at most 3).

    Degenerate hulls (points, segments, planar sets in 3D) are supported
    through a generic simplex-weight projection.
    """

    convex = True

    def __init__(self, space, vertices):
        super().__init__(space)
        V = _pts(vertices, space.dim)
        if space.dim > 3:
            raise DomainError("polytopes are supported in dimension at most 3")
        self.points = V
        self.full = False
        self.A = self.b = None
        try:
            hull = ConvexHull(V)
            self.vertices = V[hull.vertices]
            eq = hull.equations
            self.A, self.b = eq[:, :-1], -eq[:, -1]
            self.full = True
        except (QhullError, ValueError):
            self.vertices = _degenerate_extremes(V)
        if self.full and space.dim == 2:
            self._curve = PolylineCurve(self.vertices)
        else:
            self._curve = None

    def __repr__(self):
        return f"Polytope(n_vertices={len(self.vertices)})"

    def _edges(self):
        if self.full and self.dim == 2:
            V = self.vertices
            return V, np.roll(V, -1, axis=0)
        if len(self.vertices) == 2:
            return self.vertices[:1], self.vertices[1:]
        return None

    def contains(self, x, tol=GEOM_TOL):
        x = _pts(x)
        if self.full:
            return np.all(x @ self.A.T - self.b <= tol, axis=1)
        return self.distance(x) <= tol

    def depth(self, x):
        if not self.full:
            return np.zeros(len(_pts(x)))
        x = _pts(x)
        w = self.space.dual_norm(self.A)
        return np.maximum(np.min((self.b - x @ self.A.T) / w, axis=1), 0.0)

    def project(self, x):
        x = _pts(x)
        out = x.copy()
        inside = self.contains(x, 0.0) if self.full else np.zeros(len(x), bool)
        todo = np.nonzero(~inside)[0]
        if len(todo) == 0:
            return out
        edges = self._edges()
        if len(self.vertices) == 1:
            out[todo] = self.vertices[0]
        elif edges is not None:
            out[todo] = _project_segments(self.space, x[todo], *edges)
        else:
            for i in todo:
                out[i] = _project_hull_generic(self.space, self.vertices, x[i])
        return out

    def distance(self, x):
        x = _pts(x)
        d = self.space.norm(x - self.project(x))
        if self.full:
            d = np.where(self.contains(x, 0.0), 0.0, d)
        return d

    def boundary_project(self, x):
        x = _pts(x)
        if self.space.p == 2 and self.full:
            nrm = np.linalg.norm(self.A, axis=1)
            slack = (self.b - x @ self.A.T) / nrm
            k = np.argmin(slack, axis=1)
            return x + slack[np.arange(len(x)), k][:, None] * self.A[k] / nrm[k, None]
        return self._curve.nearest(x, self.space)[1] if self._curve else self.project(x)

    def curves(self):
        return [self._curve] if self._curve is not None else None

    def boundary_samples(self, n):
        if self._curve is not None:
            return np.vstack([self.vertices, self._curve.sample(max(n - len(self.vertices), 1))])[:max(n, len(self.vertices))]
        if not self.full:
            if len(self.vertices) == 1:
                return np.repeat(self.vertices, max(n, 1), axis=0)
            lam = np.linspace(0, 1, max(n, 2))[:, None]
            return (1 - lam) * self.vertices[0] + lam * self.vertices[1]
        c = self.vertices.mean(axis=0)
        U = self.space.sphere_directions(n)
        with np.errstate(divide="ignore"):
            rate = U @ self.A.T
            t = np.where(rate > 0, (self.b - c @ self.A.T) / rate, np.inf).min(axis=1)
        return np.vstack([self.vertices, c + t[:, None] * U])

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def interior_samples(self, n, rng):
        w = rng.dirichlet(np.ones(len(self.vertices)) * 0.5, size=n)
        return w @ self.vertices


def _degenerate_extremes(V):
    c = V.mean(axis=0)
    W = V - c
    if np.allclose(W, 0.0):
        return V[:1]
    _, _, vt = np.linalg.svd(W, full_matrices=False)
    proj = W @ vt[0]
    extremes = V[[np.argmin(proj), np.argmax(proj)]]
    resid = W - np.outer(proj, vt[0])
    if np.max(np.linalg.norm(resid, axis=1)) > 1e-12 * max(1.0, np.abs(proj).max()):
        # planar subset of a 3D space: keep every point
        return V
    return extremes


def _project_segments(space, x, P, Q):
    """Nearest points on a union of segments ``[P_k, Q_k]`` for each row of ``x``."""
    D = Q - P
    if space.p == 2:
        L2 = np.maximum(np.sum(D * D, axis=1), 1e-300)
        lam = np.clip(np.einsum("nkd,kd->nk", x[:, None, :] - P[None], D) / L2, 0.0, 1.0)
    else:
        def f(u):
            return space.norm(P[None] + u[..., None] * D[None] - x[:, None, :])

        lam = golden_min(f, np.zeros((len(x), len(P))), np.ones((len(x), len(P))), iters=80)
    pts = P[None] + lam[..., None] * D[None]
    d = space.norm(pts - x[:, None, :])
    k = np.argmin(d, axis=1)
    return pts[np.arange(len(x)), k]


def _project_hull_generic(space, V, x):
    m = len(V)
    res = minimize(
        lambda w: space.norm(w @ V - x)[()] ** 2,
        np.full(m, 1.0 / m),
        method="SLSQP",
        bounds=[(0.0, 1.0)] * m,
        constraints=[{"type": "eq", "fun": lambda w: np.sum(w) - 1.0}],
        options={"ftol": 1e-15, "maxiter": 500},
    )
    w = np.clip(res.x, 0, None)
    return (w / w.sum()) @ V


class PointCloud(SetOracle):
    def __init__(self, space, points):
        super().__init__(space)
        self.points = _pts(points, space.dim)
        if len(self.points) == 0:
            raise EmptySetError("empty point cloud")
        self._tree = cKDTree(self.points)
        self.convex = len(np.unique(self.points, axis=0)) == 1

    def __repr__(self):
        return f"PointCloud(n={len(self.points)})"

    def distance(self, x):
        return self._tree.query(_pts(x), p=self.space.p)[0]

    def project(self, x):
        return self.points[self._tree.query(_pts(x), p=self.space.p)[1]]

    def candidates(self, x):
        x = _pts(x)
        d = self.space.norm(self.points - x)
        return self.points[d <= d.min() + GEOM_TOL]

    def boundary_samples(self, n):
        return self.points

    def interior_samples(self, n, rng):
        return self.points[rng.integers(0, len(self.points), n)]

    def bounds(self):
        return self.points.min(axis=0), self.points.max(axis=0)


class CurveRegion2D(SetOracle):
    """A planar curve (``side="boundary"``) or the region it encloses (``"inside"``)."""

    def __init__(self, space, curve, side="inside"):
        if space.dim != 2:
            raise SceneError("curve regions live in the plane")
        if side not in ("inside", "boundary"):
            raise SceneError(f"unknown side {side!r}")
        if side == "inside" and not curve.closed:
            raise SceneError("an open curve encloses no region")
        super().__init__(space)
        self.curve = curve
        self.side = side
        self.convex = side == "inside" and isinstance(curve, EllipseCurve)

    def __repr__(self):
        return f"CurveRegion2D({type(self.curve).__name__}, side={self.side})"

    def _inside(self, x):
        return self.curve.inside(x) if self.side == "inside" else np.zeros(len(x), bool)

    def distance(self, x):
        x = _pts(x, 2)
        d = self.curve.nearest(x, self.space)[2]
        return np.where(self._inside(x), 0.0, d)

    def project(self, x):
        x = _pts(x, 2)
        p = self.curve.nearest(x, self.space)[1]
        return np.where(self._inside(x)[:, None], x, p)

    def boundary_project(self, x):
        return self.curve.nearest(_pts(x, 2), self.space)[1]

    def closed_gauge(self, x):
        c = self.curve
        if self.side != "inside" or not isinstance(c, EllipseCurve) or np.any(c.center != 0):
            return None
        x = _pts(x, 2)
        return np.hypot(x[:, 0] / c.a, x[:, 1] / c.b)

    def depth(self, x):
        x = _pts(x, 2)
        d = self.curve.nearest(x, self.space)[2]
        return np.where(self._inside(x), d, 0.0)

    def candidates(self, x):
        x = _pts(x, 2)
        if self._inside(x)[0]:
            return x
        _, P, d = self.curve.local_minima(x[0], self.space)
        return P[d <= d.min() + GEOM_TOL]

    def curves(self):
        return [self.curve]

    def boundary_samples(self, n):
        return self.curve.sample(n)

    def interior_samples(self, n, rng):
        if self.side == "boundary":
            return self.curve.point(self.curve.t0 + self.curve.period * rng.random(n))
        return super().interior_samples(n, rng)


class Cavern(SetOracle):
    """``cl(E \\ body) ∩ clip`` for a convex body strictly inside a clip body."""

    def __init__(self, body, clip):
        if not body.convex:
            raise SceneError("cavern body must be convex")
        super().__init__(body.space)
        self.body, self.clip = body, clip
        if not np.all(clip.depth(body.boundary_samples(512)) > 0):
            raise SceneError("cavern body must lie inside the clip body")

    def __repr__(self):
        return f"Cavern(body={self.body!r}, clip={self.clip!r})"

    def contains(self, x, tol=GEOM_TOL):
        x = _pts(x)
        return (self.body.depth(x) <= tol) & self.clip.contains(x, tol)

    def distance(self, x):
        x = _pts(x)
        return np.where(self.clip.contains(x, 0.0), self.body.depth(x), self.clip.distance(x))

    def depth(self, x):
        x = _pts(x)
        return np.where(self.contains(x, 0.0), np.minimum(self.body.distance(x), self.clip.depth(x)), 0.0)

    def project(self, x):
        x = _pts(x)
        out = x.copy()
        inner = self.body.depth(x) > 0
        outer = ~self.clip.contains(x, 0.0)
        if inner.any():
            out[inner] = self.body.boundary_project(x[inner])
        if outer.any():
            out[outer] = self.clip.project(x[outer])
        return out

    def candidates(self, x):
        x = _pts(x)
        if self.body.depth(x)[0] > 0:
            if isinstance(self.body, Ball):
                return self.body.candidates(x)
            if isinstance(self.body, CurveRegion2D):
                _, P, d = self.body.curve.local_minima(x[0], self.space)
                return P[d <= d.min() + GEOM_TOL]
        return self.project(x)

    def curves(self):
        a, b = self.body.curves(), self.clip.curves()
        return None if a is None or b is None else a + b

    def boundary_samples(self, n):
        return np.vstack([self.body.boundary_samples(n - n // 4), self.clip.boundary_samples(n // 4)])

    def bounds(self):
        return self.clip.bounds()


class Union(SetOracle):
    def __init__(self, parts):
        if not parts:
            raise EmptySetError("empty union")
        super().__init__(parts[0].space)
        self.parts = list(parts)

    def _all(self, fn, x):
        return np.stack([fn(p, x) for p in self.parts])

    def distance(self, x):
        return self._all(lambda p, x: p.distance(x), _pts(x)).min(axis=0)

    def contains(self, x, tol=GEOM_TOL):
        return self._all(lambda p, x: p.contains(x, tol), _pts(x)).any(axis=0)

    def project(self, x):
        x = _pts(x)
        D = self._all(lambda p, x: p.distance(x), x)
        P = np.stack([p.project(x) for p in self.parts])
        return P[np.argmin(D, axis=0), np.arange(len(x))]

    def candidates(self, x):
        D = np.array([p.distance(x)[0] for p in self.parts])
        return np.vstack([p.candidates(x) for p, d in zip(self.parts, D) if d <= D.min() + GEOM_TOL])

    def depth(self, x):
        return self._all(lambda p, x: p.depth(x), _pts(x)).max(axis=0)

    def curves(self):
        cs = [p.curves() for p in self.parts]
        return None if any(c is None for c in cs) else sum(cs, [])

    def boundary_samples(self, n):
        k = max(n // len(self.parts), 1)
        return np.vstack([p.boundary_samples(k) for p in self.parts])


class Intersection(SetOracle):
    """Intersection of oracles.

    In the plane, when every part has parametric boundary curves, the
    boundary is represented by the feasible portions of those curves plus
    their exact crossing points; nearest points are refined on it.
    """

    def __init__(self, parts, n_curve=CURVE_SAMPLES):
        if not parts:
            raise SceneError("intersection needs parts")
        super().__init__(parts[0].space)
        self.parts = list(parts)
        self.convex = all(p.convex for p in self.parts)
        self.n_curve = n_curve
        self._cache = None

    def __repr__(self):
        return f"Intersection({self.parts!r})"

    def contains(self, x, tol=GEOM_TOL):
        x = _pts(x)
        return np.all(np.stack([p.contains(x, tol) for p in self.parts]), axis=0)

    def depth(self, x):
        x = _pts(x)
        return np.min(np.stack([p.depth(x) for p in self.parts]), axis=0)

    def curves(self):
        cs = [p.curves() for p in self.parts]
        return None if any(c is None for c in cs) else sum(cs, [])

    def _feasible(self):
        """Feasible boundary samples: (points, curve index, params, spacing) and corners."""
        if self._cache is not None:
            return self._cache
        curves = self.curves()
        pts, cid, par, hs, corners = [], [], [], [], []
        if curves is None:
            B = np.vstack([p.boundary_samples(self.n_curve) for p in self.parts])
            ok = self.contains(B)
            self._cache = (B[ok], None, None, None, np.zeros((0, self.dim)), None)
            return self._cache
        for i, c in enumerate(curves):
            tt = c.params(self.n_curve)
            P = c.point(tt)
            ok = self.contains(P)
            h = c.period / (self.n_curve if c.closed else self.n_curve - 1)
            pts.append(P[ok])
            cid.append(np.full(ok.sum(), i))
            par.append(tt[ok])
            hs.append(np.full(ok.sum(), h))
            nxt = np.roll(ok, -1) if c.closed else np.concatenate([ok[1:], [ok[-1]]])
            flips = np.nonzero(ok != nxt)[0]
            for k in flips:
                a, b = tt[k], tt[k] + h
                if ok[k]:
                    # feasible at a: move b (infeasible) toward a
                    _, u = bisect_predicate(lambda v: self.contains(c.point(c.wrap(b - v))), 0.0, h, iters=80)
                    corners.append(c.point(c.wrap(b - u)))
                else:
                    _, u = bisect_predicate(lambda v: self.contains(c.point(c.wrap(a + v))), 0.0, h, iters=80)
                    corners.append(c.point(c.wrap(a + u)))
            if not c.closed:
                for end in (c.t0, c.t1):
                    e = c.point(np.array([end]))
                    if self.contains(e)[0]:
                        corners.append(e)
        corners = np.vstack(corners) if corners else np.zeros((0, self.dim))
        self._cache = (np.vstack(pts), np.concatenate(cid), np.concatenate(par),
                       np.concatenate(hs), corners.reshape(-1, self.dim), curves)
        return self._cache

    def is_empty(self):
        P, _, _, _, C, _ = self._feasible()
        return len(P) == 0 and len(C) == 0

    def _nearest_boundary(self, x, k=8):
        """Refined nearest feasible boundary points: (points, distances), each ``(n, m)``."""
        P, cid, par, hs, C, curves = self._feasible()
        if len(P) == 0 and len(C) == 0:
            raise EmptySetError("intersection is empty")
        cands, dists = [], []
        if len(P):
            k = min(k, len(P))
            _, idx = cKDTree(P).query(x, k=k, p=self.space.p)
            idx = idx.reshape(len(x), k)
            Q = P[idx]
            cands.append(Q)
            if curves is not None:
                R = Q.copy()
                for i, c in enumerate(curves):
                    m = cid[idx] == i
                    if not m.any():
                        continue
                    rows, cols = np.nonzero(m)
                    t = par[idx[rows, cols]]
                    h = hs[idx[rows, cols]]
                    xr = x[rows]
                    lo, hi = t - h, t + h
                    if not c.closed:
                        lo, hi = np.maximum(lo, c.t0), np.minimum(hi, c.t1)
                    u = golden_min(lambda v: self.space.norm(c.point(c.wrap(v)) - xr), lo, hi)
                    pr = c.point(c.wrap(u))
                    good = self.contains(pr)
                    R[rows[good], cols[good]] = pr[good]
                cands.append(R)
        if len(C):
            cands.append(np.broadcast_to(C[None], (len(x),) + C.shape))
        Z = np.concatenate(cands, axis=1)
        return Z, self.space.norm(Z - x[:, None, :])

    def distance(self, x):
        x = _pts(x)
        inside = self.contains(x, 0.0)
        out = np.zeros(len(x))
        if (~inside).any():
            _, D = self._nearest_boundary(x[~inside])
            out[~inside] = D.min(axis=1)
        return out

    def project(self, x):
        x = _pts(x)
        out = x.copy()
        inside = self.contains(x, 0.0)
        if (~inside).any():
            Z, D = self._nearest_boundary(x[~inside])
            out[~inside] = Z[np.arange(len(Z)), np.argmin(D, axis=1)]
        return out

    def candidates(self, x):
        x = _pts(x)
        if self.contains(x, 0.0)[0]:
            return x
        Z, D = self._nearest_boundary(x, k=64)
        Z, D = Z[0], D[0]
        return Z[D <= D.min() + GEOM_TOL]

    def boundary_samples(self, n):
        P, _, _, _, C, _ = self._feasible()
        if len(P) == 0:
            return C
        idx = np.unique(np.linspace(0, len(P) - 1, max(n, 1)).round().astype(int))
        return np.vstack([P[idx], C])

    def bounds(self):
        boxes = [p.bounds() for p in self.parts if p.bounded]
        return np.max([b[0] for b in boxes], axis=0), np.min([b[1] for b in boxes], axis=0)


class Affine(SetOracle):
    """Image ``scale * base + shift`` with a nonzero scalar ``scale`` (e.g. ``c - A``)."""

    def __init__(self, base, scale=1.0, shift=None):
        if scale == 0:
            raise SceneError("scale must be nonzero")
        super().__init__(base.space)
        self.base = base
        self.scale = float(scale)
        self.shift = np.zeros(base.dim) if shift is None else np.asarray(shift, dtype=float)
        self.convex = base.convex

    def __repr__(self):
        return f"Affine({self.base!r}, scale={self.scale}, shift={self.shift.tolist()})"

    def _pull(self, x):
        return (_pts(x) - self.shift) / self.scale

    def _push(self, y):
        return self.scale * y + self.shift

    def contains(self, x, tol=GEOM_TOL):
        return self.base.contains(self._pull(x), tol / abs(self.scale))

    def distance(self, x):
        return abs(self.scale) * self.base.distance(self._pull(x))

    def depth(self, x):
        return abs(self.scale) * self.base.depth(self._pull(x))

    def project(self, x):
        return self._push(self.base.project(self._pull(x)))

    def boundary_project(self, x):
        return self._push(self.base.boundary_project(self._pull(x)))

    def closed_gauge(self, x):
        if self.scale <= 0 or np.any(self.shift != 0):
            return None
        g = self.base.closed_gauge(_pts(x) / self.scale)
        return g

    def candidates(self, x):
        return self._push(self.base.candidates(self._pull(x)))

    def curves(self):
        cs = self.base.curves()
        return None if cs is None else [MappedCurve(c, self.scale, self.shift) for c in cs]

    def boundary_samples(self, n):
        return self._push(self.base.boundary_samples(n))

    def interior_samples(self, n, rng):
        return self._push(self.base.interior_samples(n, rng))

    def bounds(self):
        lo, hi = self.base.bounds()
        a, b = self._push(lo), self._push(hi)
        return np.minimum(a, b), np.maximum(a, b)


class MinkowskiSum(SetOracle):
    """``A + B``; exact when one summand is a ball, sample-based otherwise."""

    def __init__(self, a, b, n=256):
        super().__init__(a.space)
        if isinstance(a, Ball) and not isinstance(b, Ball):
            a, b = b, a
        self.a, self.b = a, b
        self.convex = a.convex and b.convex
        self._ball = isinstance(b, Ball)
        if not self._ball:
            PA, PB = a.boundary_samples(n), b.boundary_samples(n)
            self._cloud = PointCloud(self.space, (PA[:, None, :] + PB[None]).reshape(-1, self.dim))

    def distance(self, x):
        x = _pts(x)
        if self._ball:
            return np.maximum(self.a.distance(x - self.b.center) - self.b.radius, 0.0)
        return self._cloud.distance(x)

    def project(self, x):
        x = _pts(x)
        if not self._ball:
            return self._cloud.project(x)
        y = x - self.b.center
        p = self.a.project(y)
        v = y - p
        n = self.space.norm(v)
        out = x.copy()
        far = n > self.b.radius
        out[far] = p[far] + self.b.center + self.b.radius * v[far] / n[far, None]
        return out

    def boundary_samples(self, n):
        if self._ball:
            P = self.a.boundary_samples(max(n // 16, 8))
            U = self.b.boundary_samples(16)
            S = (P[:, None, :] + U[None]).reshape(-1, self.dim)
            return S[self.distance(S) <= GEOM_TOL]
        return self._cloud.points


# ---------------------------------------------------------------- metric helpers


def distance_to(A, x):
    """Distance from each row of ``x`` to ``A``; raises on an empty intersection."""
    if isinstance(A, Intersection) and A.is_empty():
        raise EmptySetError("distance to an empty set")
    d = A.distance(x)
    return float(d[0]) if np.ndim(x) == 1 else d


def _directed(A_pts, B, tol):
    return float(B.distance(A_pts).max()) if len(A_pts) else 0.0


def hausdorff_distance(A, B, tol=1e-4, n0=256, n_max=16384, seed=0):
    """Hausdorff distance from boundary plus interior samples, doubling density.

    The sample count doubles until two successive estimates differ by less
    than ``tol``.
    """
    for S in (A, B):
        if not S.bounded:
            raise UnboundedSetError("Hausdorff distance needs bounded sets")
        if isinstance(S, Intersection) and S.is_empty():
            raise EmptySetError("Hausdorff distance to an empty set")
    prev, n = None, n0
    while True:
        rng = np.random.default_rng(seed)
        h = 0.0
        for X, Y in ((A, B), (B, A)):
            P = np.vstack([X.boundary_samples(n), X.interior_samples(max(n // 8, 8), rng)])
            h = max(h, _directed(P, Y, tol))
        if prev is not None and abs(h - prev) < tol or n >= n_max:
            return max(h, prev or 0.0)
        prev, n = h, 2 * n


def minkowski_gauge(B, x, tol=1e-13):
    """``mu_B(x) = inf{t > 0 : x in tB}`` by bisection on membership."""
    x = _pts(x)
    if not B.convex or not B.bounded:
        raise PreconditionError("the gauge needs a convex bounded body")
    if B.depth(np.zeros((1, B.dim)))[0] <= 0:
        raise PreconditionError("0 must be an interior point of B")
    g = B.closed_gauge(x)
    if g is not None:
        return g
    hi = np.ones(len(x))
    for _ in range(200):
        out = ~B.contains(x / hi[:, None], 0.0)
        if not out.any():
            break
        hi = np.where(out, 2 * hi, hi)
    _, hi = bisect_predicate(lambda t: B.contains(x / np.maximum(t, 1e-300)[:, None], 0.0),
                             np.zeros(len(x)), hi, iters=200, tol=tol)
    return hi


def b_diameter(B, C, n=512):
    """``diam_B C``: largest gauge of differences over boundary samples of ``C``."""
    P = C.boundary_samples(n)
    D = (P[:, None, :] - P[None]).reshape(-1, C.dim)
    return float(minkowski_gauge(B, D).max())


def closed_convex_hull(S, n=4096):
    """Convex hull as an oracle (identity on convex inputs)."""
    if S.convex:
        return S
    if S.dim > 3:
        raise DomainError("hulls are supported in dimension at most 3")
    if not S.bounded:
        raise UnboundedSetError("hull of an unbounded set")
    if isinstance(S, (PointCloud, Polytope)):
        return Polytope(S.space, S.points)
    return Polytope(S.space, S.boundary_samples(n))


def is_convex_sampled(S, n=512, seed=0, tol=1e-6):
    rng = np.random.default_rng(seed)
    X = S.samples(n, rng)
    i, j = rng.integers(0, len(X), (2, 4 * n))
    return bool(np.all(S.contains(0.5 * (X[i] + X[j]), tol)))


def strongly_convex_segment_contains(space, d, x0, x1, x, tol=GEOM_TOL, n=4096, restarts=64):
    """Whether ``x`` lies in every radius-``d`` ball containing ``x0`` and ``x1``."""
    x0, x1, x = (np.asarray(v, dtype=float).ravel() for v in (x0, x1, x))
    if space.norm(x1 - x0) > 2 * d * (1 + 1e-12):
        raise PreconditionError("the endpoints are farther apart than 2d")
    return _segment_worst_center(space, d, x0, x1, x, n, restarts) <= d + tol


def _segment_worst_center(space, d, x0, x1, x, n=4096, restarts=64):
    """Max of ``||x - a||`` over centers ``a`` with both endpoints in ``B_d(a)``.

    The maximum of a convex function over the convex center set sits on its
    boundary, made of sphere pieces around each endpoint.
    """
    U = space.sphere_directions(n)
    best, seeds = -np.inf, []
    for e, other in ((x0, x1), (x1, x0)):
        A = e + d * U
        ok = space.norm(A - other) <= d * (1 + 1e-12)
        if not ok.any():
            continue
        vals = space.norm(A[ok] - x)
        best = max(best, float(vals.max()))
        order = np.argsort(-vals, kind="stable")[:restarts]
        seeds += [(e, other, U[ok][k]) for k in order]
    if space.dim == 2:
        step = 2 * np.pi / n
        for e, other, u in seeds:
            th0 = np.arctan2(u[1], u[0])

            def f(th):
                v = np.stack([np.cos(th), np.sin(th)], axis=-1)
                a = e + d * v / space.norm(v)[..., None]
                pen = np.maximum(space.norm(a - other) - d, 0.0)
                return -(space.norm(a - x) - 1e6 * pen)

            th = golden_min(f, np.array([th0 - step]), np.array([th0 + step]))
            best = max(best, -float(f(th)[0]))
    return best


def vial_lens_contains(space, R, x0, x1, X, tol=GEOM_TOL):
    """Membership of rows of ``X`` in ``D_R(x0, x1)``; closed form for p = 2 in the plane."""
    X = _pts(X)
    if space.p == 2 and space.dim == 2:
        m = 0.5 * (x0 + x1)
        v = x1 - x0
        ell = np.linalg.norm(v)
        n = np.array([-v[1], v[0]]) / ell
        h = np.sqrt(max(R * R - 0.25 * ell * ell, 0.0))
        c1, c2 = m + h * n, m - h * n
        return (np.linalg.norm(X - c1, axis=1) <= R + tol) & (np.linalg.norm(X - c2, axis=1) <= R + tol)
    return np.array([_segment_worst_center(space, R, x0, x1, y, 1024, 8) <= R + tol for y in X])


def vial_weakly_convex_check(S, R, pair_samples=200, seed=0, tol=GEOM_TOL, n_search=4096):
    """Check that ``S`` meets the open strongly convex segment of every sampled pair."""
    if R <= 0:
        raise PreconditionError("R must be positive")
    sp = S.space
    rng = np.random.default_rng(seed)
    X = S.samples(2 * pair_samples, rng)
    i, j = X[:pair_samples], X[pair_samples:2 * pair_samples]
    search = np.vstack([S.boundary_samples(n_search), S.interior_samples(n_search // 8, rng)])
    rep = Report("vial_weak_convexity", info={"R": R, "admissible_pairs": 0})
    for x0, x1 in zip(i, j):
        ell = float(sp.norm(x1 - x0))
        if not 0 < ell < 2 * R:
            continue
        rep.info["admissible_pairs"] += 1
        mid = 0.5 * (x0 + x1)
        near = search[sp.norm(search - mid) <= 0.5 * ell + tol]
        cand = np.vstack([S.project(mid), near])
        away = (sp.norm(cand - x0) > tol) & (sp.norm(cand - x1) > tol)
        hit = bool(np.any(vial_lens_contains(sp, R, x0, x1, cand[away], tol))) if away.any() else False
        rep.rows.append({"x0": x0, "x1": x1, "chord": ell, "found": hit, "pass": hit})
    if rep.info["admissible_pairs"] == 0:
        rep.info["note"] = "no admissible pairs"
    rep.passed = all(r["pass"] for r in rep.rows)
    return rep


# ---------------------------------------------------------------- scenes


def _fields(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise SceneError(f"{where}: expected an object")
    extra = set(obj) - set(allowed)
    if extra:
        raise SceneError(f"{where}: unknown fields {sorted(extra)}")
    missing = set(required) - set(obj)
    if missing:
        raise SceneError(f"{where}: missing fields {sorted(missing)}")


def parse_space(obj):
    _fields(obj, {"dim", "p"}, {"dim", "p"}, "space")
    try:
        return PNormSpace(int(obj["dim"]), float(obj["p"]))
    except DomainError as exc:
        raise SceneError(f"space: {exc}") from None


def parse_set(obj, space, base_dir=Path("."), where="set"):
    """Build an oracle from a scene ``set`` entry."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise SceneError(f"{where}: expected an object with a 'type' field")
    kind = obj["type"]
    if kind == "ball":
        _fields(obj, {"type", "center", "radius"}, {"type", "center", "radius"}, where)
        return Ball(space, obj["center"], obj["radius"])
    if kind == "polytope":
        _fields(obj, {"type", "vertices"}, {"type", "vertices"}, where)
        return Polytope(space, obj["vertices"])
    if kind == "cavern":
        _fields(obj, {"type", "body", "clip"}, {"type", "body", "clip"}, where)
        return Cavern(parse_set(obj["body"], space, base_dir, where + ".body"),
                      parse_set(obj["clip"], space, base_dir, where + ".clip"))
    if kind == "points":
        _fields(obj, {"type", "points", "csv"}, {"type"}, where)
        if ("points" in obj) == ("csv" in obj):
            raise SceneError(f"{where}: give exactly one of 'points' or 'csv'")
        if "csv" in obj:
            path = base_dir / obj["csv"]
            if not path.exists():
                raise SceneError(f"{where}.csv: file not found: {path}")
            pts = np.loadtxt(path, delimiter=",", ndmin=2)
        else:
            pts = obj["points"]
        return PointCloud(space, pts)
    if kind == "curve2d":
        _fields(obj, {"type", "kind", "params", "side"}, {"type", "kind"}, where)
        return CurveRegion2D(space, curve_from_spec(obj), obj.get("side", "inside"))
    if kind in ("union", "intersection"):
        _fields(obj, {"type", "parts"}, {"type", "parts"}, where)
        parts = [parse_set(p, space, base_dir, f"{where}.parts[{k}]") for k, p in enumerate(obj["parts"])]
        return Union(parts) if kind == "union" else Intersection(parts)
    if kind == "minkowski_sum":
        _fields(obj, {"type", "a", "b"}, {"type", "a", "b"}, where)
        return MinkowskiSum(parse_set(obj["a"], space, base_dir, where + ".a"),
                            parse_set(obj["b"], space, base_dir, where + ".b"))
    raise SceneError(f"{where}: unknown set type {kind!r}")


def load_scene(source):
    """Parse a scene from a path, a JSON string or a dict: returns ``(space, set)``."""
    base_dir = Path(".")
    if isinstance(source, (str, Path)) and Path(source).exists():
        base_dir = Path(source).parent
        text = Path(source).read_text()
    elif isinstance(source, str):
        text = source
    else:
        text = None
    if text is not None:
        try:
            source = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SceneError(f"scene JSON error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _fields(source, {"space", "set"}, {"space", "set"}, "scene")
    space = parse_space(source["space"])
    return space, parse_set(source["set"], space, base_dir)
