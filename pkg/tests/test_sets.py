import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weakconv.errors import SceneError
from weakconv.sets import (Ball, Cavern, CurveRegion2D, Intersection, Polytope, hausdorff_distance,
                           load_scene)
from weakconv.space import PNormSpace
from weakconv.curves import EllipseCurve

SP = PNormSpace(2, 2)
pt = st.lists(st.floats(-4, 4), min_size=2, max_size=2).map(np.array)


@given(pt)
def test_ball_projection_realizes_distance(x):
    B = Ball(SP, [0.5, -0.2], 1.3)
    p = B.project(x[None])[0]
    assert np.linalg.norm(p - x) == pytest.approx(B.distance(x[None])[0], abs=1e-12)
    assert B.contains(p[None])[0]


@given(pt)
def test_projection_is_idempotent(x):
    P = Polytope(SP, [[0, 0], [2, 0], [1, 1.5]])
    p = P.project(x[None])[0]
    assert np.allclose(P.project(p[None])[0], p, atol=1e-12)


@given(pt)
def test_cavern_distance_outside_disk(x):
    C = Cavern(Ball(SP, [0, 0], 1.0), Ball(SP, [0, 0], 3.0))
    r = np.linalg.norm(x)
    if r < 1.0:
        assert C.distance(x[None])[0] == pytest.approx(1.0 - r, abs=1e-12)
    elif r <= 3.0:
        assert C.distance(x[None])[0] == pytest.approx(0.0, abs=1e-12)


def test_ellipse_region_contains_and_distance():
    E = CurveRegion2D(SP, EllipseCurve(2.0, 1.0), "inside")
    assert E.contains(np.array([[1.9, 0.0]]))[0]
    assert not E.contains(np.array([[0.0, 1.1]]))[0]
    assert E.distance(np.array([[3.0, 0.0]]))[0] == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("c2, r2", [([0.3, 0.0], 1.0), ([0.0, 0.0], 0.6), ([0.4, 0.3], 0.7)])
def test_hausdorff_between_balls(c2, r2):
    # for Euclidean balls h = |c1 - c2| + |r1 - r2|
    A, B = Ball(SP, [0, 0], 1.0), Ball(SP, c2, r2)
    expect = np.linalg.norm(c2) + abs(1.0 - r2)
    assert hausdorff_distance(A, B) == pytest.approx(expect, abs=2e-3)


def test_intersection_of_balls():
    I = Intersection([Ball(SP, [0, 0], 1.0), Ball(SP, [1, 0], 1.0)])
    assert I.contains(np.array([[0.5, 0.0]]))[0]
    assert not I.contains(np.array([[-0.5, 0.0]]))[0]
    assert not I.is_empty()


def test_load_scene_roundtrip(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"space": {"dim": 2, "p": 2},
                                "set": {"type": "ball", "center": [1, 2], "radius": 0.5}}))
    sp, B = load_scene(path)
    assert sp.p == 2 and isinstance(B, Ball)
    assert B.distance(np.array([[1.0, 3.0]]))[0] == pytest.approx(0.5)


@pytest.mark.parametrize("bad", [
    {"space": {"dim": 2, "p": 2}, "set": {"type": "ball", "center": [0, 0], "radius": 1, "color": 1}},
    {"space": {"dim": 2, "p": 2}, "set": {"type": "blob"}},
    {"space": {"dim": 2}, "set": {"type": "ball", "center": [0, 0], "radius": 1}},
])
def test_load_scene_rejects_bad_fields(bad):
    with pytest.raises(SceneError):
        load_scene(bad)


def test_scene_json_errors_report_line():
    with pytest.raises(SceneError, match="line 2"):
        load_scene('{"space": {"dim": 2, "p": 2},\n "set": }')


def test_vial_check_circle():
    from weakconv.curves import CircleCurve
    from weakconv.sets import vial_weakly_convex_check
    C = CurveRegion2D(SP, CircleCurve(1.0), "boundary")
    assert vial_weakly_convex_check(C, 1.0, pair_samples=100).passed
    # for a diameter the R = 2 lens meets the chord at 30 degrees and misses the circle
    assert not vial_weakly_convex_check(C, 2.0, pair_samples=100).passed


def test_vial_check_convex_set():
    from weakconv.sets import vial_weakly_convex_check
    assert vial_weakly_convex_check(Ball(SP, [0, 0], 1.0), 3.0, pair_samples=50).passed
