"""Set-valued mappings, intersection stability, selection and Minkowski splitting."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (ConditionNotSatisfied, DomainError, EmptySetError, HypothesisViolation,
                     PreconditionError, SceneError)
from .projection import TubeSpec, convex_hull_cached, project_in_tube
from .reports import Report
from .roots import ConditionSolver
from .sets import (GEOM_TOL, Affine, Ball, Intersection, MinkowskiSum, _fields,
                   hausdorff_distance, parse_set, parse_space)
from .space import BallModulus, ModulusCurve

UNIFORMLY_CONVEX = "uniformly_convex"
UNIFORMLY_WEAKLY_CONVEX = "uniformly_weakly_convex"


class LinearModulus:
    """``omega(rho) = slope * rho``."""

    def __init__(self, slope):
        if slope < 0:
            raise DomainError("slope must be nonnegative")
        self.slope = float(slope)

    def __call__(self, rho):
        out = self.slope * np.asarray(rho, dtype=float)
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        return f"LinearModulus({self.slope})"


class SetValuedMap:
    """``t -> F(t)`` on a real interval, with continuity and convexity data.

    Parameters
    ----------
    evaluate : callable
        ``t -> SetOracle``.
    domain : tuple of float
        Closed parameter interval ``(lo, hi)``.
    omega : callable, optional
        Continuity modulus: ``h(F(t1), F(t2)) <= omega(|t1 - t2|)``.
    convexity : str, optional
        ``"uniformly_convex"`` or ``"uniformly_weakly_convex"``.
    modulus : callable, optional
        The shared ``delta`` (uniformly convex) or ``gamma`` (weakly convex).
    """

    def __init__(self, evaluate, domain, omega=None, convexity=None, modulus=None, name="map"):
        lo, hi = (float(v) for v in domain)
        if not lo <= hi:
            raise DomainError("domain must satisfy lo <= hi")
        if convexity not in (None, UNIFORMLY_CONVEX, UNIFORMLY_WEAKLY_CONVEX):
            raise DomainError(f"unknown convexity class {convexity!r}")
        self._evaluate = evaluate
        self.domain = (lo, hi)
        self.omega = omega
        self.convexity = convexity
        self.modulus = modulus
        self.name = name
        self._cache = {}

    def __repr__(self):
        return f"SetValuedMap({self.name}, domain={self.domain})"

    def __call__(self, t):
        t = float(t)
        lo, hi = self.domain
        if not lo - 1e-12 <= t <= hi + 1e-12:
            raise DomainError(f"t={t} outside the domain {self.domain}")
        if t not in self._cache:
            self._cache[t] = self._evaluate(t)
        return self._cache[t]

    @classmethod
    def constant(cls, base, domain=(0.0, 1.0), **kwargs):
        return cls(lambda t: base, domain, omega=LinearModulus(0.0), name="constant", **kwargs)

    @classmethod
    def translate(cls, base, direction, domain=(0.0, 1.0), **kwargs):
        """``F(t) = base + t * direction``; exact modulus ``|direction| rho``."""
        v = np.asarray(direction, dtype=float)
        slope = float(base.space.norm(v[None])[0])
        return cls(lambda t: Affine(base, 1.0, t * v), domain, omega=LinearModulus(slope),
                   name="translate", **kwargs)

    @classmethod
    def inflate(cls, base, rate=1.0, domain=(0.0, 1.0), **kwargs):
        """``F(t) = base + B_{rate t}(0)``; a ball keeps its type."""
        if domain[0] < 0 or rate < 0:
            raise DomainError("inflate needs t >= 0 and rate >= 0")
        space = base.space

        def evaluate(t):
            r = rate * t
            if isinstance(base, Ball):
                return Ball(space, base.center, base.radius + r)
            if r == 0:
                return base
            return MinkowskiSum(base, Ball(space, np.zeros(space.dim), r))

        return cls(evaluate, domain, omega=LinearModulus(rate), name="inflate", **kwargs)

    @classmethod
    def custom_grid(cls, t_values, sets, **kwargs):
        """Piecewise constant map: ``F(t)`` is the set at the largest grid node ``<= t``."""
        ts = np.asarray(t_values, dtype=float)
        if len(ts) != len(sets) or len(ts) == 0:
            raise SceneError("custom_grid needs one set per grid node")
        if np.any(np.diff(ts) <= 0):
            raise SceneError("custom_grid nodes must be increasing")
        sets = list(sets)

        def evaluate(t):
            return sets[max(int(np.searchsorted(ts, t, side="right")) - 1, 0)]

        return cls(evaluate, (ts[0], ts[-1]), name="custom_grid", **kwargs)


def estimate_continuity_modulus(F, t_grid, tol=1e-4):
    """Upper envelope of ``h(F(t_i), F(t_j))`` against ``|t_i - t_j|``, monotonized."""
    ts = np.asarray(t_grid, dtype=float).ravel()
    lo, hi = F.domain
    if np.any(ts < lo - 1e-12) or np.any(ts > hi + 1e-12):
        raise DomainError("grid leaves the domain")
    if len(ts) < 2:
        return ModulusCurve.zero(max(hi - lo, 1.0))
    rho, h = [], []
    for i in range(len(ts)):
        for j in range(i + 1, len(ts)):
            rho.append(abs(ts[i] - ts[j]))
            h.append(hausdorff_distance(F(ts[i]), F(ts[j]), tol=tol))
    rho, h = np.array(rho), np.array(h)
    keys = np.unique(rho)
    env = np.array([h[rho == k].max() for k in keys])
    return ModulusCurve(keys, env)


# ---------------------------------------------------------------- intersection stability


def intersection_hausdorff_bound(omega1, omega2, solver, M, s0=None):
    """Right side of the intersection bound and its branch (1 or 2).

    Branch 1, ``(w1 + w2) / 2 < s0``: ``2 w1 + 3 w2 + t((w1 + w2) / 2)``.
    Branch 2 otherwise: ``(w1 + w2) M / s0``.
    """
    s0 = solver.s0 if s0 is None else float(s0)
    half = 0.5 * (omega1 + omega2)
    if half < s0:
        return 2 * omega1 + 3 * omega2 + solver.t_of_s(half), 1
    if s0 <= 0:
        raise ConditionNotSatisfied("s0 is zero", s0)
    return (omega1 + omega2) * M / s0, 2


def _intersection(F1, F2, t):
    H = Intersection([F1(t), F2(t)])
    if H.is_empty():
        raise HypothesisViolation(f"empty intersection at t={t:.6g}")
    return H


def _radius_about_origin(H, n=512):
    return float(H.space.norm(H.boundary_samples(n)).max())


class IntersectionFamily:
    """``H(t) = F1(t) ∩ F2(t)`` with ``F1`` weakly convex and ``F2`` uniformly convex.

    The root solver is built from ``(F2.modulus, F1.modulus)``; ``M`` bounds
    every ``H(t)`` about the origin and is measured on a grid when omitted.
    """

    def __init__(self, F1, F2, M=None, s0=None, n_grid=9, solver=None):
        for F, kind in ((F1, UNIFORMLY_WEAKLY_CONVEX), (F2, UNIFORMLY_CONVEX)):
            if F.convexity != kind or F.modulus is None or F.omega is None:
                raise PreconditionError(f"{F.name} needs convexity {kind}, a modulus and omega")
        self.F1, self.F2 = F1, F2
        self.solver = solver or ConditionSolver(F2.modulus, F1.modulus)
        if s0 is not None and s0 > self.solver.s0:
            raise PreconditionError(f"s0={s0} exceeds the admissible level {self.solver.s0:.6g}")
        self.s0 = self.solver.s0 if s0 is None else float(s0)
        lo = max(F1.domain[0], F2.domain[0])
        hi = min(F1.domain[1], F2.domain[1])
        self.domain = (lo, hi)
        grid = np.linspace(lo, hi, n_grid)
        measured = max(_radius_about_origin(self(t)) for t in grid)
        if M is not None and measured > M + GEOM_TOL:
            raise HypothesisViolation(f"H(t) leaves B_M(0): radius {measured:.6g} > M={M}")
        self.M = float(measured if M is None else M)

    def __call__(self, t):
        return _intersection(self.F1, self.F2, t)

    def omegas(self, t1, t2):
        rho = abs(float(t1) - float(t2))
        return float(self.F1.omega(rho)), float(self.F2.omega(rho))

    def bound(self, t1, t2):
        w1, w2 = self.omegas(t1, t2)
        return intersection_hausdorff_bound(w1, w2, self.solver, self.M, self.s0)


def intersection_stability_bound(F1, F2, t1, t2, s0=None, M=None, family=None, n_check=5,
                                 tol=1e-3, hausdorff_tol=1e-4):
    """Compare the measured ``h(H(t1), H(t2))`` with the intersection bound.

    Returns a one-row :class:`Report` with the branch that applied.
    """
    fam = family or IntersectionFamily(F1, F2, M=M, s0=s0)
    for t in np.linspace(t1, t2, n_check):
        fam(t)
    w1, w2 = fam.omegas(t1, t2)
    bound, branch = intersection_hausdorff_bound(w1, w2, fam.solver, fam.M, fam.s0)
    measured = 0.0 if t1 == t2 else hausdorff_distance(fam(t1), fam(t2), tol=hausdorff_tol)
    ok = measured <= bound + tol
    row = {"t1": float(t1), "t2": float(t2), "omega1": w1, "omega2": w2, "branch": branch,
           "measured": measured, "bound": bound, "pass": ok}
    return Report("intersection_stability", [row], ok,
                  {"s0": fam.s0, "M": fam.M, "branch": branch})


# ---------------------------------------------------------------- point transfer


@dataclass
class TransferResult:
    point: np.ndarray
    case: str
    iterations: int
    trail: np.ndarray
    distance: float
    bound: float
    defects: tuple
    passed: bool
    info: dict = field(default_factory=dict)

    def trail_report(self):
        rows = [{"n": k, **{f"x{i}": float(v) for i, v in enumerate(p)}}
                for k, p in enumerate(self.trail)]
        return Report("transfer_trail", rows, self.passed, {"case": self.case})


def _nearest_on_segment(H, b, d, n=256):
    """Point of ``[d, b] ∩ H`` nearest to ``b`` (``d`` must lie in ``H``)."""
    u = np.linspace(0.0, 1.0, n + 1)
    P = b + u[:, None] * (d - b)
    ok = H.contains(P)
    ok[-1] = True
    j = int(np.argmax(ok))
    if j == 0:
        return b.copy()
    lo, hi = u[j - 1], u[j]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if H.contains((b + mid * (d - b))[None])[0]:
            hi = mid
        else:
            lo = mid
    return b + hi * (d - b)


def transfer_point(c1, family, t1, t2, max_iters=500, tol=1e-12, member_tol=1e-6):
    """Move ``c1 in H(t1)`` to a point of ``H(t2)`` by the case (1)/(2) iteration.

    ``b`` is the projection of ``c1`` onto ``F2(t2)``, ``b_pi`` the projection
    of ``b`` onto ``F1(t2)``, and ``a`` starts at the point of ``[d, b] ∩ H(t2)``
    nearest to ``b`` with ``d = P_{H(t2)} b``.  While case (1) holds, ``a`` is
    replaced by a point of ``F1(t2)`` near the midpoint of ``a`` and ``b_pi``.
    """
    F1, F2 = family.F1, family.F2
    delta, gamma = F2.modulus, F1.modulus
    sp = F1(t2).space
    c1 = np.asarray(c1, dtype=float).ravel()
    H1 = family(t1)
    if not H1.contains(c1[None], member_tol)[0]:
        raise PreconditionError("c1 is not in H(t1)")
    A1, A2 = F1(t2), F2(t2)
    H2 = family(t2)
    b = A2.project(c1[None])[0]
    b_pi = A1.project(b[None])[0]
    d = H2.project(b[None])[0]
    a = _nearest_on_segment(H2, b, d)
    trail = [a.copy()]
    bb = float(sp.norm(b - b_pi))
    case = None
    for n in range(1, max_iters + 1):
        l_pi = float(sp.norm(a - b_pi))
        if l_pi <= tol:
            case = "limit"
            break
        l_b = min(float(sp.norm(a - b)), getattr(delta, "eps_max", np.inf))
        g = float(gamma(l_pi))
        lhs = float(delta(l_b))
        if lhs <= g + 0.5 * bb:
            case = "2"
            break
        alpha = min(1.0 / n, 0.5 * (lhs - g - 0.5 * bb), 0.5 * (0.5 * l_pi - g))
        if alpha <= 0:
            raise HypothesisViolation(f"weak convexity slack vanished at l={l_pi:.6g}")
        m = 0.5 * (a + b_pi)
        w = A1.project(m[None])[0]
        if sp.norm(w - m) > g + alpha:
            raise HypothesisViolation(f"no point of F1 near the midpoint at l={l_pi:.6g}")
        a = w
        trail.append(a.copy())
    if case is None:
        raise HypothesisViolation(
            f"transfer stalled after {max_iters} steps: |a - b_pi| = {sp.norm(a - b_pi):.3g}, "
            f"|b - b_pi| = {bb:.3g}"
        )
    defects = (float(A1.distance(a[None])[0]), float(A2.distance(a[None])[0]))
    dist = float(sp.norm(a - c1))
    bound, branch = family.bound(t1, t2)
    ok = max(defects) <= member_tol and dist <= bound + member_tol
    return TransferResult(a, case, len(trail) - 1, np.array(trail), dist, bound, defects, ok,
                          {"b": b, "b_pi": b_pi, "branch": branch})


# ---------------------------------------------------------------- selection


def f_E(t, space, R, r1):
    """``delta^{-1}(t/2)`` below ``2 Delta_E``, else ``R t / Delta_E``.

    Here ``delta(eps) = R delta_E(eps / R)`` and ``Delta_E = delta(2 r1)``.
    """
    delta = BallModulus(space, R)
    Delta = float(delta(min(2 * r1, delta.eps_max)))
    t = float(t)
    if t < 2 * Delta:
        return delta.inverse(0.5 * t)
    return R * t / Delta


def selection(H, tube, r1, anchor=None, R=None, tol=GEOM_TOL):
    """Selection point ``P_H(P_{cl co H} anchor)``.

    Requires ``rho(anchor, cl co H) >= r1 > 0``, ``H`` inside ``B_R(anchor)``
    when ``R`` is given, and ``2 r < d`` for the enclosing ball of ``H``.
    """
    if r1 <= 0:
        raise DomainError("r1 must be positive")
    anchor = np.zeros(H.dim) if anchor is None else np.asarray(anchor, dtype=float).ravel()
    _, r = H.enclosing_ball()
    if 2 * r >= tube.d:
        raise PreconditionError(f"enclosing radius {r:.6g} violates 2r < d={tube.d}")
    if R is not None:
        far = float(H.space.norm(H.boundary_samples(512) - anchor).max())
        if far > R + tol:
            raise HypothesisViolation(f"H leaves B_R(anchor): {far:.6g} > R={R}")
    hull = convex_hull_cached(H)
    y = hull.project(anchor[None])[0]
    gap = float(H.space.norm(y - anchor))
    if gap < r1 - tol:
        raise HypothesisViolation(f"anchor is {gap:.6g} from the hull, below r1={r1}")
    return project_in_tube(H, y, tube, tol=tol)


def selection_modulus(h, tube, R, r1, r):
    """Composed continuity bound for the selection at Hausdorff distance ``h``.

    ``dy = 2h + f_E(h)`` bounds the hull-projection displacement; the
    intersection bound is then applied with ``w1 = h`` and
    ``w2 = 2 dy + h + t_E(dy)``.  Any result is capped at ``2R``.
    """
    h = float(h)
    if h <= 0:
        return 0.0
    space = tube.solver.delta.space
    cap = 2.0 * R
    dy = 2 * h + f_E(h, space, R, r1)
    if dy >= 0.5 * (tube.d - 2 * r):
        return cap
    try:
        w2 = 2 * dy + h + tube.t_E(dy)
        bound, _ = intersection_hausdorff_bound(h, w2, tube.solver, R)
    except ConditionNotSatisfied:
        return cap
    return min(bound, cap)


# ---------------------------------------------------------------- Minkowski splitting


@dataclass
class SplitResult:
    a: np.ndarray
    b: np.ndarray
    residual: float
    membership_defects: tuple


def _exact_split(c, b):
    """Shift ``b`` by at most one ulp per coordinate so that ``a + b == c`` exactly.

    With ``q`` a power of two just above the ulp of the largest magnitude
    involved, ``b`` is rounded to a multiple of ``q``; when ``c`` is also a
    multiple of ``q`` the difference ``a = c - b`` is then exact.  Otherwise
    ``c`` carries bits no nearby pair can reproduce and the rounded
    difference is kept.
    """
    a, b = c - b, b.copy()
    for i in range(len(c)):
        if a[i] + b[i] == c[i]:
            continue
        m = max(abs(c[i]), abs(b[i]), abs(a[i]))
        q = np.ldexp(1.0, int(np.frexp(m)[1]) - 52)
        if np.fmod(c[i], q) == 0.0:
            b[i] = np.round(b[i] / q) * q
            a[i] = c[i] - b[i]
    return a, b


class Splitter:
    """Uniformly continuous ``c -> (a(c), b(c))`` with ``a + b = c``.

    ``b(c)`` is the selection of ``H(c) = B ∩ (c - A)`` and ``a = c - b``.
    ``tube`` certifies ``A`` for the radius ``d``; ``B`` is a ball unless
    ``delta_B`` is supplied.  The anchor defaults to
    ``center_B - (r_B + r1) e_1`` so that every ``H(c)`` keeps its hull at
    least ``r1`` away from it.
    """

    def __init__(self, A, B, tube: TubeSpec, r1=None, anchor=None, delta_B=None):
        self.A, self.B, self.tube = A, B, tube
        space = A.space
        if delta_B is None:
            if not isinstance(B, Ball):
                raise PreconditionError("delta_B is required unless B is a ball")
            delta_B = BallModulus(space, B.radius)
        self.delta_B = delta_B
        diam_B = B.diameter()
        if 2 * diam_B >= tube.d:
            raise PreconditionError(f"2 diam B = {2 * diam_B:.6g} must be below d={tube.d}")
        solver_B = ConditionSolver(delta_B, tube.gamma)
        if solver_B.s0 <= 0:
            raise ConditionNotSatisfied("no admissible level for (delta_B, gamma_A)", 0.0)
        if tube.s0 <= 0:
            raise ConditionNotSatisfied("no admissible level for the tube", 0.0)
        self.solver_B = solver_B
        center, radius = B.enclosing_ball()
        self.r1 = float(radius if r1 is None else r1)
        if anchor is None:
            e1 = np.zeros(space.dim)
            e1[0] = 1.0
            anchor = center - (radius + self.r1) * e1
        self.anchor = np.asarray(anchor, dtype=float)
        self.R = float(space.norm((center - self.anchor)[None])[0] + radius)

    def H(self, c):
        return Intersection([self.B, Affine(self.A, -1.0, np.asarray(c, dtype=float))])

    def __call__(self, c):
        c = np.asarray(c, dtype=float).ravel()
        H = self.H(c)
        if H.is_empty():
            raise EmptySetError("c outside A+B")
        b = selection(H, self.tube, self.r1, self.anchor, self.R)
        a, b = _exact_split(c, b)
        residual = float(self.A.space.norm((a + b - c)[None])[0])
        defects = (float(self.A.distance(a[None])[0]), float(self.B.distance(b[None])[0]))
        return SplitResult(a, b, residual, defects)

    def modulus(self, dc):
        """Bound on ``|b(c) - b(c')|`` for ``|c - c'| = dc``."""
        h, _ = intersection_hausdorff_bound(float(dc), 0.0, self.solver_B, self.R)
        _, r = self.B.enclosing_ball()
        return selection_modulus(h, self.tube, self.R, self.r1, r)


def split(A, B, c, tube, r1=None, anchor=None, delta_B=None):
    """Split ``c in A + B`` as ``a + b`` with ``a in A`` and ``b in B``."""
    return Splitter(A, B, tube, r1, anchor, delta_B)(c)


def check_split_continuity(splitter, points, tol=1e-6):
    """Consecutive points: ``|b(c) - b(c')| <= modulus(|c - c'|)``."""
    P = np.asarray(points, dtype=float)
    res = [splitter(c) for c in P]
    sp = splitter.A.space
    rows = []
    for k in range(len(P) - 1):
        dc = float(sp.norm((P[k + 1] - P[k])[None])[0])
        db = float(sp.norm((res[k + 1].b - res[k].b)[None])[0])
        bound = splitter.modulus(dc)
        rows.append({"trial": k, "input": dc, "output": db, "bound": bound,
                     "pass": db <= bound + tol})
    return Report("split_continuity", rows, all(r["pass"] for r in rows), {"splits": res})


# ---------------------------------------------------------------- scene maps


def parse_map(obj, space, base_dir=Path("."), where="map"):
    """Build a :class:`SetValuedMap` from a scene ``map`` entry.

    Kinds: ``translate`` (params ``direction``, ``domain``), ``inflate``
    (``rate``, ``domain``) and ``custom_grid`` (``t``, ``sets``).  Optional
    ``convexity`` and ``modulus`` describe the values; a ball modulus is
    written ``{"ball_radius": r}``.
    """
    _fields(obj, {"kind", "base", "params", "convexity", "modulus"}, {"kind"}, where)
    kind = obj["kind"]
    params = obj.get("params", {})
    extra = {}
    if "convexity" in obj:
        extra["convexity"] = obj["convexity"]
    if "modulus" in obj:
        mod = obj["modulus"]
        _fields(mod, {"ball_radius"}, {"ball_radius"}, where + ".modulus")
        extra["modulus"] = BallModulus(space, mod["ball_radius"])
    try:
        if kind in ("translate", "inflate"):
            if "base" not in obj:
                raise SceneError(f"{where}: '{kind}' needs a base set")
            base = parse_set(obj["base"], space, base_dir, where + ".base")
            domain = tuple(params.get("domain", (0.0, 1.0)))
            if kind == "translate":
                _fields(params, {"direction", "domain"}, {"direction"}, where + ".params")
                return SetValuedMap.translate(base, params["direction"], domain, **extra)
            _fields(params, {"rate", "domain"}, set(), where + ".params")
            return SetValuedMap.inflate(base, params.get("rate", 1.0), domain, **extra)
        if kind == "custom_grid":
            _fields(params, {"t", "sets"}, {"t", "sets"}, where + ".params")
            sets = [parse_set(s, space, base_dir, f"{where}.params.sets[{k}]")
                    for k, s in enumerate(params["sets"])]
            return SetValuedMap.custom_grid(params["t"], sets, **extra)
    except DomainError as exc:
        raise SceneError(f"{where}: {exc}") from None
    raise SceneError(f"{where}: unknown map kind {kind!r}")


def load_map_scene(source):
    """Parse ``{"space": ..., "map": ...}`` from a path, JSON string or dict."""
    base_dir = Path(".")
    if isinstance(source, (str, Path)) and Path(source).exists():
        base_dir = Path(source).parent
        source = Path(source).read_text()
    if isinstance(source, str):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise SceneError(f"scene JSON error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _fields(source, {"space", "map"}, {"space", "map"}, "scene")
    space = parse_space(source["space"])
    return space, parse_map(source["map"], space, base_dir)
