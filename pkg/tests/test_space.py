import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weakconv.errors import DomainError
from weakconv.space import (BallModulus, ModulusCurve, PNormSpace, check_day_nordlander,
                            space_modulus_delta)

vec = st.lists(st.floats(-10, 10), min_size=2, max_size=2).map(np.array)
ps = st.floats(1.05, 8.0)


def hilbert(e):
    return 1.0 - np.sqrt(1.0 - e * e / 4.0)


@given(ps, vec, vec)
def test_norm_triangle_inequality(p, x, y):
    sp = PNormSpace(2, p)
    assert sp.norm(x + y) <= sp.norm(x) + sp.norm(y) + 1e-9


@given(ps, vec, st.floats(-5, 5))
def test_norm_homogeneity(p, x, lam):
    sp = PNormSpace(2, p)
    assert sp.norm(lam * x) == pytest.approx(abs(lam) * sp.norm(x), rel=1e-12, abs=1e-12)


@given(ps, vec, vec)
def test_holder_inequality(p, x, y):
    sp = PNormSpace(2, p)
    assert abs(x @ y) <= sp.norm(x) * sp.dual_norm(y) * (1 + 1e-12) + 1e-12


def test_norm_matches_numpy():
    x = np.array([3.0, -4.0])
    for p in (1.5, 2.0, 3.0, 7.0):
        assert PNormSpace(2, p).norm(x) == pytest.approx(np.linalg.norm(x, p))


@pytest.mark.parametrize("p", [0.5, 1.0, np.inf])
def test_invalid_exponent_rejected(p):
    with pytest.raises(DomainError):
        PNormSpace(2, p)


@pytest.mark.parametrize("eps", [0.2, 0.6, 1.0, 1.4, 1.8])
def test_sampled_hilbert_modulus(eps):
    got = space_modulus_delta(PNormSpace(2, 2), eps, method="sampled")
    assert got == pytest.approx(hilbert(eps), abs=1e-3)


def test_modulus_flattens_as_p_grows():
    # the unit sphere approaches the flat-faced l-infinity sphere
    vals = [space_modulus_delta(PNormSpace(2, p), 1.0, method="sampled") for p in (2.0, 4.0, 8.0)]
    assert vals[0] > vals[1] > vals[2] > 0


@given(st.floats(0.01, 1.99), st.floats(0.01, 1.99))
def test_space_modulus_monotone(e1, e2):
    lo, hi = sorted((e1, e2))
    sp = PNormSpace(2, 3.0)
    assert sp.delta(lo) <= sp.delta(hi) + 1e-9


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_day_nordlander(p):
    rep = check_day_nordlander(PNormSpace(2, p), np.linspace(0.2, 1.8, 5), method="sampled")
    assert rep.passed


@given(st.floats(0.1, 3.0), st.floats(0.0, 1.0))
def test_ball_modulus_scaling(r, frac):
    sp = PNormSpace(2, 2)
    eps = 2 * r * frac
    assert BallModulus(sp, r)(eps) == pytest.approx(r * hilbert(eps / r), abs=1e-12)


def test_ball_modulus_inverse_and_domain():
    bm = BallModulus(PNormSpace(2, 2), 0.5)
    assert bm.inverse(bm(0.3)) == pytest.approx(0.3, abs=1e-9)
    with pytest.raises(DomainError):
        bm(1.5)


def test_modulus_curve_takes_right_neighbour():
    c = ModulusCurve([0.0, 0.5, 1.0], [0.0, 0.1, 0.4])
    assert c(0.25) == pytest.approx(0.1)
    assert c(0.75) == pytest.approx(0.4)
    assert c(0.5) == pytest.approx(0.1)
