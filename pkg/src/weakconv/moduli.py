"""Estimators for the moduli of convexity and nonconvexity and the sigma moduli.

All estimators sweep pairs of points of a set.  Pairs on planar boundary
curves are generated at an exact prescribed distance (partner search along
the curve) and refined on shrinking local grids of base points;
a sample-pair sweep covers pairs at smaller distances and interior points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._numerics import golden_min
from .errors import DomainError, PreconditionError
from .reports import Report
from .sets import GEOM_TOL, Ball, Cavern, is_convex_sampled, minkowski_gauge
from .space import MODULUS_TOL, BallModulus, ModulusCurve


class _GaugeMetric:
    """Adapter exposing a Minkowski gauge through a ``norm`` method."""

    def __init__(self, B):
        self.B = B

    def norm(self, v):
        v = np.asarray(v, dtype=float)
        flat = v.reshape(-1, v.shape[-1])
        return np.asarray(minkowski_gauge(self.B, flat)).reshape(v.shape[:-1])


def _curve_pairs(curve, metric, eps, objective, n_base, reduce, top_k=8, rounds=3, zoom=16):
    """Best objective over pairs on one curve at metric distance exactly ``eps``.

    A coarse sweep over base points is followed by ``rounds`` of local grid
    refinement around the best ``top_k`` base points, each shrinking the
    spacing by ``zoom``.
    """
    sign_r = 1.0 if reduce == "max" else -1.0
    best = -np.inf
    tt = curve.params(n_base)
    h0 = curve.period / (n_base if curve.closed else n_base - 1)
    for sign in (1.0, -1.0):
        spans = curve.partner_spans(tt, eps, metric, sign)
        ok = ~np.isnan(spans)
        if not ok.any():
            continue
        base, span = tt[ok], spans[ok]
        vals = sign_r * objective(0.5 * (curve.point(base) + curve.point(curve.wrap(base + sign * span))))
        best = max(best, vals.max())
        order = np.argsort(-vals, kind="stable")[:top_k]
        base, span, h = base[order], span[order], h0
        for _ in range(rounds):
            offs = h * np.linspace(-1.0, 1.0, zoom + 1)
            U = curve.wrap(base[:, None] + offs[None]) if curve.closed else np.clip(
                base[:, None] + offs[None], curve.t0, curve.t1)
            S0 = np.repeat(span[:, None], len(offs), axis=1)
            S = curve.partner_spans_near(U.ravel(), S0.ravel(), 4 * h + 1e-12, eps, metric, sign)
            good = ~np.isnan(S)
            V = np.full(S.shape, -np.inf)
            if good.any():
                Ug, Sg = U.ravel()[good], S[good]
                V[good] = sign_r * objective(0.5 * (curve.point(Ug) + curve.point(curve.wrap(Ug + sign * Sg))))
            V = V.reshape(U.shape)
            k = np.argmax(V, axis=1)
            rows = np.arange(len(base))
            keep = np.isfinite(V[rows, k])
            best = max(best, V.max())
            base = np.where(keep, U[rows, k], base)
            span = np.where(keep, S.reshape(U.shape)[rows, k], span)
            h = h / zoom * 2
    if not np.isfinite(best):
        return np.nan
    return sign_r * best


def _sweep_pairs(P, metric, eps, objective):
    """Max objective over sample pairs at metric distance at most ``eps``."""
    best = 0.0
    for start in range(0, len(P), 256):
        X = P[start:start + 256]
        D = metric.norm(X[:, None, :] - P[None])
        i, j = np.nonzero(D <= eps)
        if len(i):
            best = max(best, float(objective(0.5 * (X[i] + P[j])).max()))
    return best


def modulus_convexity(A, eps, n_base=512, n_interior=128, seed=0, check_convex=True):
    """Modulus of convexity: smallest midpoint depth over pairs at distance ``eps``."""
    if eps == 0:
        return 0.0
    diam = A.diameter()
    if not 0 <= eps < diam:
        raise DomainError(f"eps must lie in [0, diam A) = [0, {diam:.6g})")
    if check_convex and not (A.convex or is_convex_sampled(A)):
        raise PreconditionError("the modulus of convexity needs a convex set")
    sp = A.space
    best = np.inf
    curves = A.curves()
    if curves:
        for c in curves:
            v = _curve_pairs(c, sp, eps, A.depth, n_base, "min")
            best = best if np.isnan(v) else min(best, v)
    else:
        P = A.boundary_samples(n_base)
        U = sp.sphere_directions(64)
        Y = (P[:, None, :] + eps * U[None]).reshape(-1, A.dim)
        X = np.repeat(P, len(U), axis=0)
        ok = A.contains(Y)
        if ok.any():
            best = float(A.depth(0.5 * (X[ok] + Y[ok])).min())
    # interior base points with partners on the exact sphere of radius eps
    rng = np.random.default_rng(seed)
    X = A.interior_samples(n_interior, rng)
    U = sp.sphere_directions(64)
    Y = (X[:, None, :] + eps * U[None]).reshape(-1, A.dim)
    Xr = np.repeat(X, len(U), axis=0)
    ok = A.contains(Y, 0.0)
    if ok.any():
        best = min(best, float(A.depth(0.5 * (Xr[ok] + Y[ok])).min()))
    return float(max(best, 0.0)) if np.isfinite(best) else 0.0


def modulus_nonconvexity(A, eps, n_base=512, n_sweep=512, seed=0):
    """Modulus of nonconvexity: largest midpoint distance to ``A`` over pairs within ``eps``."""
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    if eps == 0:
        return 0.0
    sp = A.space
    best = 0.0
    curves = A.curves()
    if curves:
        for c in curves:
            best = np.nanmax([best, _curve_pairs(c, sp, eps, A.distance, n_base, "max")])
    rng = np.random.default_rng(seed)
    best = max(best, _sweep_pairs(A.samples(n_sweep, rng), sp, eps, A.distance))
    return float(max(best, 0.0))


def gamma_curve(A, eps_grid, **kwargs):
    """Nonconvexity estimates on a grid, assembled as a :class:`ModulusCurve`."""
    eps_grid = np.asarray(eps_grid, dtype=float)
    return ModulusCurve(eps_grid, [modulus_nonconvexity(A, e, **kwargs) for e in eps_grid])


@dataclass
class WeakConvexityCertificate:
    """Evidence that ``d * delta_E(eps / d)`` dominates the nonconvexity modulus.

    ``margin`` holds ``d delta_E(eps/d) - gamma(eps)`` on ``eps_grid``; it may be
    negative, so it is stored as a plain array rather than a modulus curve.
    """

    gamma: ModulusCurve
    d: float
    eps_grid: np.ndarray
    gamma_values: np.ndarray
    margin: np.ndarray
    valid: bool
    first_failure: float | None = None
    info: dict = field(default_factory=dict)

    def margin_at(self, eps):
        return np.interp(eps, self.eps_grid, self.margin)


def certificate_grid(top, n_geo=48, n_lin=16, decades=3):
    """Geometric grid (dense near zero, where small-scale roots live) plus a linear one."""
    g = top * np.geomspace(10.0 ** -decades, 1.0, n_geo)
    lin = top * np.arange(1, n_lin + 1) / n_lin
    return np.unique(np.concatenate([g, lin]))


def certify_weak_convexity(A, d, space=None, margin_tol=GEOM_TOL, grid=None, **kwargs):
    """Build the nonconvexity curve on ``(0, min(2d, diam A)]`` and test dominance.

    The curve takes the right neighbour's value between grid points, so it
    overestimates; a geometric grid keeps that overestimate a bounded factor.
    """
    space = space or A.space
    if d <= 0:
        raise DomainError("d must be positive")
    top = min(2 * d, A.diameter())
    grid = certificate_grid(top) if grid is None else np.asarray(grid, dtype=float)
    gvals = np.array([modulus_nonconvexity(A, e, **kwargs) for e in grid])
    gamma = ModulusCurve(grid, gvals)
    gmono = gamma(grid)
    dom = BallModulus(space, d)(grid)
    margin = dom - gmono
    half = (grid >= d) | (gmono < 0.5 * grid)
    ok = half & (margin > margin_tol)
    first = None if ok.all() else float(grid[np.argmin(ok)])
    return WeakConvexityCertificate(gamma, float(d), grid, gmono, margin, bool(ok.all()), first)


# ---------------------------------------------------------------- sigma moduli


def _dilation_to_exit(A, C, M, n=512):
    """Smallest ``sigma`` with ``(sigma A + m)`` meeting the complement of ``int C``.

    Equals ``min over z on the boundary of C of mu_A(z - m)``; zero when ``m``
    is not interior to ``C``.
    """
    M = np.atleast_2d(M)
    curves = C.curves()
    metric = _GaugeMetric(A)
    inside = C.depth(M) > 0
    out = np.zeros(len(M))
    if not inside.any():
        return out
    Mi = M[inside]
    if curves:
        vals = np.full(len(Mi), np.inf)
        for c in curves:
            tt = c.params(n)
            Z = c.point(tt)
            G = metric.norm(Z[None] - Mi[:, None, :])
            k = np.argmin(G, axis=1)
            h = c.period / n
            u = golden_min(lambda v: metric.norm(c.point(c.wrap(v)) - Mi), tt[k] - h, tt[k] + h, iters=50)
            vals = np.minimum(vals, np.minimum(G[np.arange(len(Mi)), k], metric.norm(c.point(c.wrap(u)) - Mi)))
    else:
        Z = C.boundary_samples(n)
        vals = metric.norm(Z[None] - Mi[:, None, :]).min(axis=1)
    out[inside] = vals
    return out


def sigma_modulus(A, B, C, eps, n_base=384, n_sweep=128):
    """Sigma modulus of ``C`` with dilation body ``A`` and pair gauge ``B``.

    Pairs run over the boundary of ``C`` with ``mu_B(x - y) <= eps``; the value
    is the largest minimal dilation of ``A`` about the midpoint that reaches
    the complement of ``int C``.
    """
    for S, name in ((A, "A"), (B, "B"), (C, "C")):
        if not S.convex:
            raise PreconditionError(f"{name} must be a convex body")
    for S in (A, B):
        minkowski_gauge(S, np.zeros((1, S.dim)))
    if eps == 0:
        return 0.0
    metric = _GaugeMetric(B)

    def objective(M):
        return _dilation_to_exit(A, C, M)

    best = 0.0
    curves = C.curves()
    if curves:
        for c in curves:
            best = np.nanmax([best, _curve_pairs(c, metric, eps, objective, n_base, "max", top_k=4)])
    best = max(best, _sweep_pairs(C.boundary_samples(n_sweep), metric, eps, objective))
    return float(best)


def banas_sigma(B, eps, n_base=512, n_sweep=256):
    """``sup{1 - mu_B((x + y) / 2) : x, y on the boundary of B, mu_B(x - y) <= eps}``."""
    metric = _GaugeMetric(B)
    if eps == 0:
        return 0.0

    def objective(M):
        return 1.0 - metric.norm(M)

    best = 0.0
    curves = B.curves()
    if curves:
        for c in curves:
            best = np.nanmax([best, _curve_pairs(c, metric, eps, objective, n_base, "max")])
    best = max(best, _sweep_pairs(B.boundary_samples(n_sweep), metric, eps, objective))
    return float(best)


def check_sigma_laws(A, B, C, eps, t=2.0, A_small=None, B_small=None, tol=2e-3):
    """Scaling identities and inclusion monotonicity of the sigma modulus.

    ``A_small`` and ``B_small`` must be subsets of ``A`` and ``B``; they
    default to the bodies scaled by one half.
    """
    from .sets import Affine

    A_small = A_small or Affine(A, 0.5)
    B_small = B_small or Affine(B, 0.5)
    base = sigma_modulus(A, B, C, eps)
    rows = []

    def row(name, lhs, rhs, kind):
        ok = abs(lhs - rhs) <= tol if kind == "eq" else lhs >= rhs - tol
        rows.append({"law": name, "lhs": lhs, "rhs": rhs, "kind": kind, "pass": bool(ok)})

    row("dilation body scaling", sigma_modulus(Affine(A, t), B, C, eps), base / t, "eq")
    row("pair gauge scaling", sigma_modulus(A, Affine(B, t), C, eps / t), base, "eq")
    row("set scaling", sigma_modulus(A, B, Affine(C, t), eps), t * sigma_modulus(A, B, C, eps / t), "eq")
    row("smaller dilation body", sigma_modulus(A_small, B, C, eps), base, "ge")
    row("smaller pair gauge", base, sigma_modulus(A, B_small, C, eps), "ge")
    return Report("sigma_laws", rows, all(r["pass"] for r in rows), {"eps": eps, "t": t})


def check_cavern_bounds(B, clip, r, R, eps_grid, tol=MODULUS_TOL, eq_tol=2e-3, n_check=512):
    """Lower bound, sigma identity and the Banas inequality for a cavern.

    The cavern is ``cl(E \\ B)`` clipped to ``clip``; ``B_r(0) ⊂ B ⊂ B_R(0)``
    is checked on samples first.
    """
    sp = B.space
    inner = r * sp.sphere_directions(n_check)
    if not np.all(B.contains(inner, GEOM_TOL)):
        raise PreconditionError(f"B does not contain the ball of radius {r}")
    if np.any(sp.norm(B.boundary_samples(n_check)) > R + GEOM_TOL):
        raise PreconditionError(f"B is not inside the ball of radius {R}")
    eps_grid = np.asarray(eps_grid, dtype=float)
    if np.any(eps_grid <= 0) or np.any(eps_grid >= 2 * r):
        raise DomainError("eps grid must lie in (0, 2r)")
    cav = Cavern(B, clip)
    unit = Ball(sp, np.zeros(sp.dim), 1.0)
    rows = []
    for e in eps_grid:
        g = modulus_nonconvexity(cav, e)
        s = sigma_modulus(unit, unit, B, e)
        b = banas_sigma(B, e)
        low = e * e * r / (8 * R * R)
        hil = 1.0 - np.sqrt(1.0 - e * e / 4.0)
        ok_low = g >= low - tol
        ok_eq = abs(g - s) <= eq_tol
        ok_banas = b >= hil - tol
        rows.append({
            "eps": float(e), "value": g, "bound_lower": low, "bound_upper": None,
            "sigma": s, "banas": b, "hilbert": hil,
            "pass_lower": ok_low, "pass_sigma": ok_eq, "pass_banas": ok_banas,
            "pass": bool(ok_low and ok_eq and ok_banas),
        })
    return Report("cavern_bounds", rows, all(r["pass"] for r in rows), {"r": r, "R": R})
