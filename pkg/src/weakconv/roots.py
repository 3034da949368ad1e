"""Roots of ``g_s(t) = delta(t - s) - gamma(t)``.

For a level ``s`` the solver finds

* ``t_s``: the last zero of ``g_s`` after which ``g_s`` stays positive, and
* ``t(s)``: the solution of ``g_s(t) = s / 2`` on that positive branch,

both by bisection.  ``s0`` is the largest level for which both exist on the
sampled domain ``t in [s, s + delta.eps_max]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConditionNotSatisfied, DomainError
from .space import ROOT_TOL, ModulusCurve


class _Infeasible(Exception):
    pass


@dataclass(frozen=True)
class ConditionRoots:
    s: float
    t_s: float
    t_of_s: float
    branch_verified: bool
    s0: float


def _domain(fn):
    span = getattr(fn, "eps_max", None)
    if span is None:
        raise DomainError("delta must expose eps_max (a ModulusCurve or BallModulus)")
    return float(span)


def _bisect_scalar(pred, lo, hi, tol):
    """Shrink ``[lo, hi]`` with ``pred(lo)`` False and ``pred(hi)`` True."""
    for _ in range(400):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


class ConditionSolver:
    """Root solver for one ``(delta, gamma)`` pair, with ``s0`` cached.

    ``delta`` must expose ``eps_max``; ``gamma`` is any vectorized callable
    (a :class:`ModulusCurve` holds its last value past its grid).
    """

    def __init__(self, delta, gamma, n_grid=2048, n_check=128, tol=ROOT_TOL):
        self.delta = delta
        self.gamma = gamma
        self.span = _domain(delta)
        self.n_grid = int(n_grid)
        self.n_check = int(n_check)
        self.tol = tol
        self._s0 = None
        self._solve = lru_cache(maxsize=4096)(self._solve_uncached)

    def g(self, s, t):
        t = np.asarray(t, dtype=float)
        return np.asarray(self.delta(np.clip(t - s, 0.0, self.span))) - np.asarray(self.gamma(t))

    def _grid(self, s):
        # dense near t = s where the small-s roots live
        u = np.unique(np.concatenate([
            np.geomspace(1e-10, 1.0, self.n_grid // 2),
            np.linspace(0.0, 1.0, self.n_grid // 2),
        ]))
        return s + self.span * u

    def _solve_uncached(self, s):
        if s < 0:
            raise DomainError("s must be nonnegative")
        T = self._grid(s)
        G = self.g(s, T)
        nonpos = np.nonzero(G <= 0.0)[0]
        if len(nonpos) == 0:
            k = 0
            t_s = s
        else:
            k = int(nonpos[-1])
            if k == len(T) - 1:
                raise _Infeasible(f"delta(t-s)-gamma(t) never turns positive at s={s:.6g}")
            lo, hi = _bisect_scalar(lambda t: self.g(s, t) > 0.0, T[k], T[k + 1], self.tol)
            t_s = lo
        level = 0.5 * s
        above = np.nonzero((G >= level) & (np.arange(len(T)) > k))[0]
        if level == 0.0:
            t_of_s = t_s
        elif len(above) == 0:
            raise _Infeasible(f"level s/2 not reached on the domain at s={s:.6g}")
        else:
            j = int(above[0])
            lo_t = max(T[j - 1], t_s)
            lo, hi = _bisect_scalar(lambda t: self.g(s, t) >= level, lo_t, T[j], self.tol)
            t_of_s = hi
        check = np.linspace(t_s, T[-1], self.n_check + 1)[1:]
        gc = self.g(s, check)
        verified = bool(np.all(gc > 0.0) and np.all(np.diff(gc) >= -1e-14))
        return float(t_s), float(t_of_s), verified

    def feasible(self, s):
        try:
            self._solve(float(s))
        except _Infeasible:
            return False
        return True

    @property
    def s0(self):
        if self._s0 is None:
            self._s0 = self._detect_s0()
        return self._s0

    def _detect_s0(self):
        grid = np.linspace(0.0, self.span, 257)[1:]
        last_ok = 0.0
        for s in grid:
            if self.feasible(s):
                last_ok = float(s)
            else:
                lo, _ = _bisect_scalar(lambda v: not self.feasible(v), last_ok, float(s), 1e-9)
                return float(lo)
        return float(grid[-1])

    def roots(self, s):
        s = float(s)
        try:
            t_s, t_of_s, verified = self._solve(s)
        except _Infeasible as exc:
            raise ConditionNotSatisfied(str(exc), self.s0) from None
        return ConditionRoots(s, t_s, t_of_s, verified, self.s0)

    def t_of_s(self, s):
        return self.roots(s).t_of_s

    def t_curve(self, n=64):
        """``t(s)`` sampled on ``(0, s0]`` as a :class:`ModulusCurve`."""
        s_grid = np.linspace(0.0, self.s0, n + 1)[1:]
        return ModulusCurve(s_grid, [self.t_of_s(s) for s in s_grid])


def solve_condition_roots(delta, gamma, s, **kwargs):
    """Solve ``delta(t - s) - gamma(t) = 0`` and ``= s / 2`` for one level ``s``."""
    return ConditionSolver(delta, gamma, **kwargs).roots(s)
