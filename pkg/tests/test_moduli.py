import numpy as np
import pytest

from weakconv import testbeds as tb
from weakconv.moduli import (certify_weak_convexity, check_cavern_bounds, check_sigma_laws,
                             modulus_convexity, modulus_nonconvexity)
from weakconv.sets import Ball, Polytope
from weakconv.space import PNormSpace

SP = PNormSpace(2, 2)


@pytest.mark.parametrize("eps", [0.25, 0.5, 1.0, 1.5])
def test_cavern_nonconvexity_closed_form(eps):
    # the worst pair is a chord of the unit circle; its midpoint sits 1 - sqrt(1 - eps^2/4) inside
    assert modulus_nonconvexity(tb.unit_disk_cavern(), eps) == pytest.approx(tb.hilbert_gamma(eps), abs=1e-3)


def test_cavern_gamma_at_one():
    assert modulus_nonconvexity(tb.unit_disk_cavern(), 1.0) == pytest.approx(0.1340, abs=1e-3)


@pytest.mark.parametrize("eps", [0.3, 1.0])
def test_convex_sets_have_zero_nonconvexity(eps):
    assert modulus_nonconvexity(Ball(SP, [0, 0], 1.0), eps) == pytest.approx(0.0, abs=1e-9)
    assert modulus_nonconvexity(Polytope(SP, [[0, 0], [1, 0], [0, 1]]), eps) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("eps", [0.4, 1.2])
def test_unit_ball_modulus_of_convexity(eps):
    assert modulus_convexity(Ball(SP, [0, 0], 1.0), eps) == pytest.approx(tb.hilbert_gamma(eps), abs=1e-3)


def test_polytope_has_zero_convexity_modulus():
    sq = Polytope(SP, [[0, 0], [1, 0], [1, 1], [0, 1]])
    assert modulus_convexity(sq, 0.5) == pytest.approx(0.0, abs=1e-9)


def test_cavern_bounds_report():
    rep = check_cavern_bounds(Ball(SP, [0, 0], 1.0), Ball(SP, [0, 0], 3.0), 1.0, 1.0, [0.5, 1.0])
    assert rep.passed
    assert all(r["pass_sigma"] and r["pass_banas"] for r in rep.rows)


def test_sigma_laws_on_balls():
    rep = check_sigma_laws(Ball(SP, [0, 0], 1.0), Ball(SP, [0, 0], 1.5), Ball(SP, [0, 0], 2.0), 0.5)
    assert rep.passed, rep.failures()


def test_arc_certificate():
    cert = certify_weak_convexity(tb.arc(), tb.ARC_D)
    assert cert.valid
    assert np.all(cert.margin >= -1e-9)


def test_cavern_certificate_fails_for_large_tube():
    # gamma(eps) = d delta(eps/d) exactly at d = 1, so any d > 1 loses dominance
    assert not certify_weak_convexity(tb.unit_disk_cavern(), 1.5).valid
