"""Finite-dimensional p-norm spaces, the modulus of convexity of their unit
ball, and sampled modulus curves.

For ``p = 2`` the modulus of the unit ball is ``1 - sqrt(1 - eps**2 / 4)``.
For other exponents it is estimated from unit-sphere pairs at distance
``eps``: each pair is produced by walking along a planar section of the
sphere, and the worst pair is refined locally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.interpolate import PchipInterpolator
from scipy.stats import norm as _gauss
from scipy.stats import qmc

from ._numerics import bisect_predicate
from .errors import DomainError, PreconditionError
from .reports import Report

GEOM_TOL = 1e-9
MODULUS_TOL = 1e-3
ROOT_TOL = 1e-12
DEFAULT_DENSITY = 10_000


@dataclass(frozen=True)
class PNormSpace:
    """``R^dim`` with the norm ``||x||_p``, ``1 < p < inf``."""

    dim: int = 2
    p: float = 2.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.dim}")
        if not (1.0 < float(self.p) < math.inf):
            raise DomainError(f"exponent p must lie in (1, inf), got {self.p}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", float(self.p))

    @property
    def closed_form_modulus(self):
        return self.p == 2.0

    @property
    def q(self):
        """Dual exponent."""
        return self.p / (self.p - 1.0)

    def norm(self, x):
        x = np.asarray(x, dtype=float)
        if self.p == 2.0:
            return np.sqrt(np.sum(x * x, axis=-1))
        return np.sum(np.abs(x) ** self.p, axis=-1) ** (1.0 / self.p)

    def dual_norm(self, x):
        x = np.asarray(x, dtype=float)
        q = self.q
        if q == 2.0:
            return np.sqrt(np.sum(x * x, axis=-1))
        return np.sum(np.abs(x) ** q, axis=-1) ** (1.0 / q)

    def dist(self, x, y):
        return self.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))

    def normalize(self, x):
        x = np.asarray(x, dtype=float)
        n = self.norm(x)
        return x / np.expand_dims(n, -1)

    def norm_gradient(self, v):
        """Gradient of the norm at ``v != 0`` (a unit vector of the dual norm)."""
        v = np.asarray(v, dtype=float)
        n = self.norm(v)
        if self.p == 2.0:
            return v / np.expand_dims(n, -1)
        return np.sign(v) * (np.abs(v) / np.expand_dims(n, -1)) ** (self.p - 1.0)

    def sphere_directions(self, n):
        """Deterministic, roughly uniform unit vectors (p-normalized)."""
        return self.normalize(euclidean_directions(self.dim, n))

    def delta(self, eps, density=DEFAULT_DENSITY):
        return space_modulus_delta(self, eps, density=density)

    def delta_fn(self, density=DEFAULT_DENSITY):
        """Vectorized ``eps -> delta_E(eps)`` on ``[0, 2]``.

        Exact for ``p = 2``; otherwise a monotone interpolant of sampled
        estimates on a fixed grid.
        """
        if self.closed_form_modulus:
            return _hilbert_delta
        key = (self.dim, self.p, density)
        fn = _INTERP_CACHE.get(key)
        if fn is None:
            grid = np.linspace(0.0, 2.0, 257)
            vals = np.array([space_modulus_delta(self, e, density=density) for e in grid])
            vals = np.maximum.accumulate(vals)
            fn = PchipInterpolator(grid, vals, extrapolate=False)
            _INTERP_CACHE[key] = fn
        return lambda e: np.asarray(fn(np.clip(e, 0.0, 2.0)), dtype=float)


_INTERP_CACHE = {}
_DELTA_CACHE = {}


def euclidean_directions(dim, n):
    """``n`` Euclidean unit vectors in ``R^dim``, deterministic."""
    if dim == 1:
        return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)[:, None]
    if dim == 2:
        th = 2.0 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(th), np.sin(th)])
    u = qmc.Halton(d=dim, scramble=False).random(n + 1)[1:]
    g = _gauss.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _hilbert_delta(eps):
    # cancellation-free form of 1 - sqrt(1 - eps^2/4)
    eps = np.asarray(eps, dtype=float)
    q = eps * eps / 4.0
    return q / (1.0 + np.sqrt(np.clip(1.0 - q, 0.0, None)))


def _section_pairs(space, X, W, eps, iters=64):
    """Midpoint defects of sphere pairs at distance ``eps``.

    ``X`` and ``W`` are Euclidean-orthonormal frames; the partner walks from
    ``x`` toward ``-x`` in the plane they span.
    """
    x = space.normalize(X)

    def partner(phi):
        return space.normalize(np.cos(phi)[:, None] * X + np.sin(phi)[:, None] * W)

    lo = np.zeros(len(X))
    hi = np.full(len(X), np.pi)
    _, hi = bisect_predicate(lambda ph: space.norm(x - partner(ph)) >= eps, lo, hi, iters)
    y = partner(hi)
    return 1.0 - space.norm(0.5 * (x + y))


def _frames(dim, n):
    if dim == 2:
        th = 2.0 * np.pi * np.arange(n) / n
        X = np.column_stack([np.cos(th), np.sin(th)])
        W = np.column_stack([-np.sin(th), np.cos(th)])
        return X, W
    u = qmc.Halton(d=2 * dim, scramble=False).random(n + 1)[1:]
    g = _gauss.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    X = g[:, :dim]
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    W = g[:, dim:]
    W -= np.sum(W * X, axis=1, keepdims=True) * X
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    return X, W


def space_modulus_delta(space, eps, density=DEFAULT_DENSITY, method="auto", refine=True):
    """Modulus of convexity ``delta_E(eps)`` of the unit ball of ``space``.

    ``method="auto"`` uses the closed form when ``p = 2``; ``"sampled"``
    forces the pair sweep (``density`` planar sections, then a bounded
    local refinement of the worst one).  The estimate converges from above.
    """
    eps = float(eps)
    if not (0.0 <= eps <= 2.0):
        raise DomainError(f"eps must lie in [0, 2], got {eps}")
    if eps == 0.0:
        return 0.0
    if method not in ("auto", "sampled"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and space.closed_form_modulus:
        return float(_hilbert_delta(eps))
    if eps == 2.0 or space.dim == 1:
        # antipodal pairs have midpoint 0
        return 1.0 if eps == 2.0 else 0.0

    key = (space.dim, space.p, eps, int(density), bool(refine))
    if key in _DELTA_CACHE:
        return _DELTA_CACHE[key]

    X, W = _frames(space.dim, int(density))
    vals = _section_pairs(space, X, W, eps)
    best = float(np.min(vals))
    if refine and space.dim == 2:
        i = int(np.argmin(vals))
        step = 2.0 * np.pi / len(vals)
        th0 = 2.0 * np.pi * i / len(vals)

        def f(th):
            X1 = np.array([[np.cos(th), np.sin(th)]])
            W1 = np.array([[-np.sin(th), np.cos(th)]])
            return float(_section_pairs(space, X1, W1, eps)[0])

        res = optimize.minimize_scalar(
            f, bounds=(th0 - step, th0 + step), method="bounded", options={"xatol": 1e-12}
        )
        best = min(best, float(res.fun))
    best = float(np.clip(best, 0.0, eps / 2.0))
    _DELTA_CACHE[key] = best
    return best


class BallModulus:
    """Modulus of convexity of a ball of radius ``radius``: ``r * delta_E(eps / r)``.

    Callable and vectorized; ``eps_max`` is the diameter ``2 r``.
    """

    def __init__(self, space, radius, density=DEFAULT_DENSITY):
        if radius <= 0:
            raise DomainError("radius must be positive")
        self.space = space
        self.radius = float(radius)
        self.eps_max = 2.0 * self.radius
        self._unit = space.delta_fn(density)

    def __call__(self, eps):
        eps = np.asarray(eps, dtype=float)
        if np.any(eps > self.eps_max * (1 + 1e-9) + 1e-12):
            raise DomainError(f"argument exceeds ball diameter {self.eps_max}")
        out = self.radius * self._unit(np.clip(eps, 0.0, self.eps_max) / self.radius)
        return float(out) if out.ndim == 0 else out

    def inverse(self, value, tol=ROOT_TOL):
        """Smallest ``eps`` with ``self(eps) >= value`` (bisection)."""
        if value <= 0:
            return 0.0
        if value > self(self.eps_max):
            raise DomainError("value above the modulus range")
        lo, hi = bisect_predicate(
            lambda e: np.asarray(self(e)) >= value, 0.0, self.eps_max, iters=200, tol=tol
        )
        return float(hi)

    def __repr__(self):
        return f"BallModulus(p={self.space.p}, radius={self.radius})"


class ModulusCurve:
    """Sampled nondecreasing function ``eps -> value`` with ``value(0) = 0``.

    Between samples the right neighbour's value is used; beyond the last
    sample the last value is held.
    """

    def __init__(self, eps, values, monotonize=True):
        eps = np.asarray(eps, dtype=float).ravel()
        values = np.asarray(values, dtype=float).ravel()
        if eps.shape != values.shape:
            raise ValueError("eps and values must have the same length")
        if np.any(eps < 0) or np.any(values < -GEOM_TOL):
            raise DomainError("modulus samples must be nonnegative")
        order = np.argsort(eps, kind="stable")
        eps, values = eps[order], np.maximum(values[order], 0.0)
        keep = eps > 0
        eps = np.concatenate([[0.0], eps[keep]])
        values = np.concatenate([[0.0], values[keep]])
        if monotonize:
            values = np.maximum.accumulate(values)
        elif np.any(np.diff(values) < -GEOM_TOL):
            raise DomainError("modulus samples must be nondecreasing")
        self.eps = eps
        self.values = values

    @classmethod
    def zero(cls, eps_max=2.0):
        return cls([eps_max], [0.0])

    @classmethod
    def from_function(cls, fn, eps_grid):
        eps_grid = np.asarray(eps_grid, dtype=float)
        return cls(eps_grid, np.asarray(fn(eps_grid), dtype=float))

    @property
    def eps_max(self):
        return float(self.eps[-1])

    def __call__(self, e):
        e = np.asarray(e, dtype=float)
        idx = np.searchsorted(self.eps, e, side="left")
        idx = np.clip(idx, 0, len(self.eps) - 1)
        out = np.where(e <= 0.0, 0.0, self.values[idx])
        return float(out) if out.ndim == 0 else out

    def __len__(self):
        return len(self.eps)

    def __repr__(self):
        return f"ModulusCurve(n={len(self.eps)}, eps_max={self.eps_max:.4g})"


def check_day_nordlander(space, eps_grid, tol=MODULUS_TOL, density=DEFAULT_DENSITY,
                         method="auto"):
    """Check ``delta_E(eps) <= eps**2 / 4`` on a grid inside ``(0, 2)``."""
    rows = []
    for eps in np.asarray(eps_grid, dtype=float):
        if not (0.0 < eps < 2.0):
            raise DomainError(f"grid point {eps} outside (0, 2)")
        d = space_modulus_delta(space, eps, density=density, method=method)
        bound = eps * eps / 4.0
        rows.append({"eps": float(eps), "value": d, "bound_lower": None,
                     "bound_upper": bound, "pass": bool(d <= bound + tol)})
    return Report("day-nordlander", rows, all(r["pass"] for r in rows),
                  {"p": space.p, "dim": space.dim, "density": density})


def check_ball_inclusion_lemma(space, x, y, beta, n=2048, tol=GEOM_TOL):
    """Sample the sphere of ``B_{2 beta delta_E(eps)}((1-beta) x + beta y)`` and
    check that it stays in the closed unit ball."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if space.norm(x) > 1 + 1e-12 or space.norm(y) > 1 + 1e-12:
        raise PreconditionError("x and y must lie in the closed unit ball")
    if not (0.0 < beta <= 0.5):
        raise PreconditionError("beta must lie in (0, 1/2]")
    eps = float(space.norm(x - y))
    if eps <= 0:
        raise PreconditionError("x and y must be distinct")
    radius = 2.0 * beta * space_modulus_delta(space, min(eps, 2.0))
    center = (1.0 - beta) * x + beta * y
    pts = center + radius * space.sphere_directions(n)
    worst = float(np.max(space.norm(pts)))
    margin = 1.0 - worst
    row = {"eps": eps, "beta": float(beta), "radius": radius, "worst_norm": worst,
           "margin": margin, "pass": bool(margin >= -tol)}
    return Report("ball-inclusion", [row], row["pass"], {"samples": n})


def slope_radius(space, eps):
    """``r(eps) = (eps / 2 - delta_E(eps)) / 4``."""
    return 0.25 * (0.5 * eps - space_modulus_delta(space, eps))


def check_slope_inequality(space, eps, eta, tol=GEOM_TOL):
    """Check ``delta(eta)/eta <= delta(eps)/eps - 2 (eps-eta)/(eps eta) delta(r(eps))``."""
    if not (0.0 < eps / 2.0 < eta < eps < 2.0):
        raise PreconditionError("need 0 < eps/2 < eta < eps < 2")
    r = slope_radius(space, eps)
    lhs = space_modulus_delta(space, eta) / eta
    rhs = (space_modulus_delta(space, eps) / eps
           - 2.0 * (eps - eta) / (eps * eta) * space_modulus_delta(space, r))
    row = {"eps": eps, "eta": eta, "lhs": lhs, "rhs": rhs, "r": r,
           "pass": bool(lhs <= rhs + tol and r > 0)}
    return Report("slope-inequality", [row], row["pass"])
