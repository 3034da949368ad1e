import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weakconv.curves import CircleCurve, EllipseCurve, PolylineCurve
from weakconv.errors import DomainError, SceneError
from weakconv.surfaces import (SmoothCurve2D, check_surface_gamma_bound, conjecture_probe,
                               curvature_radius, epsilon0, estimate_alpha, normal_field_continuity,
                               simplicity_parameter_probe)


@pytest.fixture(scope="module")
def circle():
    return SmoothCurve2D(CircleCurve(1.0))


@pytest.fixture(scope="module")
def ellipse():
    return SmoothCurve2D(EllipseCurve(2.0, 1.0))


@given(st.floats(0.5, 3.0), st.floats(0.5, 3.0), st.floats(0, 2 * np.pi))
def test_ellipse_curvature_radius(a, b, s):
    # (a^2 sin^2 s + b^2 cos^2 s)^(3/2) / (a b) for (a cos s, b sin s)
    expect = (a * a * np.sin(s) ** 2 + b * b * np.cos(s) ** 2) ** 1.5 / (a * b)
    assert curvature_radius(EllipseCurve(a, b), s) == pytest.approx(expect, rel=1e-9)


def test_ellipse_axis_radii(ellipse):
    assert curvature_radius(ellipse, 0.0) == pytest.approx(0.5, abs=1e-6)
    assert curvature_radius(ellipse, np.pi / 2) == pytest.approx(4.0, abs=1e-6)


def test_circle_alpha_is_half_chord(circle):
    # on the unit circle the normal component of a chord of length t is t^2/2
    t = np.array([0.1, 0.2, 0.5, 1.0])
    alpha = estimate_alpha(circle, t)
    assert np.allclose(alpha(t), t / 2, atol=2e-3)


def test_epsilon0_for_linear_alpha():
    # alpha(t) = t/2 gives 3t/4 < 1/2, so eps0 = 2/3
    assert epsilon0(lambda t: 0.5 * np.asarray(t), t_max=2.0) == pytest.approx(2 / 3, abs=1e-12)


def test_circle_epsilon0(circle):
    alpha = estimate_alpha(circle, np.linspace(0.0, 1.0, 501)[1:])
    assert epsilon0(alpha) == pytest.approx(2 / 3, abs=1e-2)


def test_gamma_bound_on_circle(circle):
    rep = check_surface_gamma_bound(circle, np.linspace(0.05, 0.6, 5))
    assert rep.passed


def test_gamma_bound_rejects_large_eps(circle):
    with pytest.raises(DomainError):
        check_surface_gamma_bound(circle, [0.9])


@pytest.mark.parametrize("name", ["circle", "ellipse"])
def test_normal_field_emptiness(name, circle, ellipse):
    rep = normal_field_continuity(circle if name == "circle" else ellipse, n_samples=200)
    assert rep.passed and rep.info["violations"] == 0


def test_normal_emptiness_fails_for_too_large_radius(ellipse):
    # balls of radius 1 exceed the tip curvature radius 0.5 and must hit the curve
    assert not normal_field_continuity(ellipse, r=1.0, n_samples=200).passed


def test_simplicity_probe_circle():
    # on the unit circle every ball of radius < 2 meets the curve in one arc
    assert simplicity_parameter_probe(CircleCurve(1.0), [0.5, 1.0, 1.5, 1.9]) == pytest.approx(1.9)


def test_from_points_rejects_two_pieces():
    th = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    one = np.column_stack([np.cos(th), np.sin(th)])
    SmoothCurve2D.from_points(one)
    two = np.vstack([one[:100], one[:100] + [5.0, 0.0]])
    with pytest.raises(SceneError):
        SmoothCurve2D.from_points(two)


def test_open_curve_rejected():
    from weakconv.curves import ArcCurve
    with pytest.raises(SceneError):
        SmoothCurve2D(ArcCurve(1.0, (0, 0), 0.0, 0.3))


def test_conjecture_probe_square_corner():
    sq = PolylineCurve([[0, 0], [1, 0], [1, 1], [0, 1]])
    rep = conjecture_probe(sq, [0.2])
    assert rep.passed
    # a right-angle corner: the worst midpoint of the complement sits eps/(2 sqrt 2) from the square
    assert rep.rows[0]["gamma_outside_ratio"] == pytest.approx(1 / (2 * np.sqrt(2)), abs=2e-3)


def test_simplicity_probe_thin_ellipse():
    # tips of radius 0.02 limit the simple-arc radius well below the half-width
    r = simplicity_parameter_probe(EllipseCurve(2.0, 0.2), np.arange(0.01, 1.0, 0.01))
    assert 0 < r <= 0.4
