import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weakconv.projection import loglog_slope
from weakconv.roots import ConditionSolver
from weakconv.space import BallModulus, PNormSpace


def zero(e):
    return 0.0 * np.asarray(e, dtype=float)


@pytest.fixture(scope="module")
def solver():
    return ConditionSolver(BallModulus(PNormSpace(2, 2), 1.0), zero)


@pytest.mark.parametrize("s", [1e-4, 1e-3, 1e-2, 0.1])
def test_t_matches_closed_form(solver, s):
    # for the unit Hilbert ball with gamma = 0 the root solves 2 - 2 sqrt(1 - (t-s)^2/4) = s
    assert solver.t_of_s(s) == pytest.approx(s + np.sqrt(4 * s - s * s), abs=1e-9)


def test_square_root_scaling(solver):
    s = np.geomspace(1e-4, 1e-2, 9)
    slope = loglog_slope(s, [solver.t_of_s(v) for v in s])
    assert 0.45 <= slope <= 0.55


@given(st.floats(1e-5, 0.3), st.floats(1e-5, 0.3))
def test_t_is_monotone(s1, s2):
    solver = ConditionSolver(BallModulus(PNormSpace(2, 2), 1.0), zero)
    lo, hi = sorted((s1, s2))
    assert solver.t_of_s(lo) <= solver.t_of_s(hi) + 1e-12


def test_s0_positive(solver):
    assert solver.s0 > 0
