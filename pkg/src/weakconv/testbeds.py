"""Shipped test scenes shared by the acceptance suites, the CLI and the tests."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .curves import ArcCurve, EllipseCurve
from .mappings import IntersectionFamily, SetValuedMap, Splitter
from .projection import make_tube
from .sets import Ball, Cavern, CurveRegion2D
from .space import BallModulus, PNormSpace

ARC_HALF_ANGLE = np.pi / 18
ARC_D = 0.5


def plane():
    return PNormSpace(2, 2)


def hilbert_gamma(eps):
    """Nonconvexity of the unit-disk cavern: ``1 - sqrt(1 - eps^2/4)``."""
    q = 0.25 * np.asarray(eps, dtype=float) ** 2
    out = q / (1.0 + np.sqrt(np.clip(1.0 - q, 0.0, None)))
    return float(out) if out.ndim == 0 else out


def zero_modulus(eps):
    out = np.zeros_like(np.asarray(eps, dtype=float))
    return float(out) if out.ndim == 0 else out


def unit_disk_cavern(clip_radius=3.0):
    sp = plane()
    return Cavern(Ball(sp, [0.0, 0.0], 1.0), Ball(sp, [0.0, 0.0], clip_radius))


def ellipse_region(a, b):
    return CurveRegion2D(plane(), EllipseCurve(a, b), "inside")


def arc(mid_angle=0.0, half_angle=ARC_HALF_ANGLE):
    """Arc of the unit circle as a closed set."""
    return CurveRegion2D(plane(), ArcCurve(1.0, (0.0, 0.0), mid_angle, half_angle), "boundary")


@lru_cache(maxsize=None)
def arc_tube(d=ARC_D):
    """Certified tube of the reference arc; rotated arcs are congruent and share it."""
    return make_tube(arc(), d)


def lens():
    """Unit-disk cavern meeting a small ball: endpoints at +-15 degrees on the circle."""
    sp = plane()
    A = unit_disk_cavern()
    B = Ball(sp, [1.2, 0.0], 0.4)
    th = np.deg2rad(15.0)
    a0 = np.array([np.cos(th), np.sin(th)])
    b0 = np.array([np.cos(th), -np.sin(th)])
    return {"A": A, "B": B, "a0": a0, "b0": b0, "gamma": hilbert_gamma,
            "delta_B": BallModulus(sp, 0.4), "d": 1.0}


def convex_control():
    sp = plane()
    return {"A": Ball(sp, [0.0, 0.0], 1.0), "B": Ball(sp, [0.5, 0.0], 1.0),
            "a0": np.array([0.3, 0.3]), "b0": np.array([0.3, -0.3]), "gamma": zero_modulus}


def disk_cavern_family(domain=(-0.3, 1.0)):
    """``F1`` = constant unit-disk cavern, ``F2(t)`` = ``B_0.6((0.8 + t, 0))``."""
    sp = plane()
    F1 = SetValuedMap.constant(unit_disk_cavern(), domain,
                               convexity="uniformly_weakly_convex", modulus=hilbert_gamma)
    F2 = SetValuedMap.translate(Ball(sp, [0.8, 0.0], 0.6), [1.0, 0.0], domain,
                                convexity="uniformly_convex", modulus=BallModulus(sp, 0.6))
    return IntersectionFamily(F1, F2)


def split_scene():
    """Reference arc plus ``B_0.1(0)``; ``c`` ranges over their sum."""
    A = arc()
    B = Ball(plane(), [0.0, 0.0], 0.1)
    return Splitter(A, B, arc_tube(), r1=0.1)


def clear_caches():
    arc_tube.cache_clear()
