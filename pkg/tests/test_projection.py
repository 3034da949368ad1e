import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weakconv import testbeds as tb
from weakconv.errors import TubeError
from weakconv.projection import (connect_by_midpoint_iteration, distance_gradient_probe, loglog_slope,
                                 project_in_tube, retract)

HALF = tb.ARC_HALF_ANGLE


def arc_projection(x):
    """Closest point of the unit arc |theta| <= HALF: radial unless past an endpoint."""
    th = np.arctan2(x[1], x[0])
    if abs(th) <= HALF:
        return np.array([np.cos(th), np.sin(th)])
    ends = np.array([[np.cos(HALF), np.sin(HALF)], [np.cos(HALF), -np.sin(HALF)]])
    return ends[np.argmin(np.linalg.norm(ends - x, axis=1))]


tube_pt = st.tuples(st.floats(0.6, 1.4), st.floats(-0.35, 0.35)).map(
    lambda rt: np.array([rt[0] * np.cos(rt[1]), rt[0] * np.sin(rt[1])]))


@given(tube_pt)
def test_projection_matches_geometry(x):
    A, tube = tb.arc(), tb.arc_tube()
    if A.distance(x[None])[0] >= tube.d:
        return
    assert np.allclose(project_in_tube(A, x, tube), arc_projection(x), atol=1e-6)


@given(tube_pt, tube_pt)
def test_projection_respects_t_E(x1, x2):
    A, tube = tb.arc(), tb.arc_tube()
    if max(A.distance(np.array([x1, x2]))) >= tube.d:
        return
    d = np.linalg.norm(x1 - x2)
    if d >= tube.s0:
        return
    dp = np.linalg.norm(project_in_tube(A, x1, tube) - project_in_tube(A, x2, tube))
    assert dp <= tube.t_E(d) + 1e-6


def test_projection_outside_tube_raises():
    with pytest.raises(TubeError):
        project_in_tube(tb.arc(), np.array([3.0, 0.0]), tb.arc_tube())


@given(st.tuples(st.floats(-2, 2), st.floats(-2, 2)).map(np.array))
def test_retraction_idempotent(x):
    A, tube = tb.arc(), tb.arc_tube()
    z = retract(A, x, tube)
    assert A.distance(z[None])[0] <= 1e-9
    assert np.linalg.norm(retract(A, z, tube) - z) <= 2e-9


def test_gradient_of_distance_is_unit_normal():
    A, tube = tb.arc(), tb.arc_tube()
    x = np.array([1.2, 0.05])
    rep = distance_gradient_probe(A, x, tube)
    assert rep.passed


def test_convex_control_halves_gaps():
    C = tb.convex_control()
    rep = connect_by_midpoint_iteration(C["A"], C["B"], C["a0"], C["b0"], C["gamma"])
    g = rep.column("gap")
    assert np.max(np.abs(g[1:] - 0.5 * g[:-1])) <= 1e-12


def test_lens_chain_rate():
    L = tb.lens()
    rep = connect_by_midpoint_iteration(L["A"], L["B"], L["a0"], L["b0"], L["gamma"],
                                        delta_B=L["delta_B"], d=L["d"])
    assert rep.passed
    assert rep.info["rate"] <= 0.85


@given(st.floats(0.1, 3.0), st.floats(0.1, 10.0))
def test_loglog_slope_recovers_power(k, c):
    x = np.geomspace(1e-3, 1.0, 7)
    assert loglog_slope(x, c * x ** k) == pytest.approx(k, rel=1e-9)


def test_gradient_probe_rejects_tube_boundary():
    from weakconv.errors import PreconditionError
    with pytest.raises(PreconditionError):
        distance_gradient_probe(tb.arc(), np.array([1.5, 0.0]), tb.arc_tube())
