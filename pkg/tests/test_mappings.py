import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weakconv import testbeds as tb
from weakconv.errors import DomainError, EmptySetError, PreconditionError, SceneError
from weakconv.mappings import (SetValuedMap, _exact_split, estimate_continuity_modulus,
                               intersection_hausdorff_bound, intersection_stability_bound, load_map_scene,
                               selection, selection_modulus, transfer_point)
from weakconv.sets import Ball, hausdorff_distance

SP = tb.plane()


@pytest.fixture(scope="module")
def family():
    return tb.disk_cavern_family()


@pytest.fixture(scope="module")
def splitter():
    return tb.split_scene()


def test_translate_map_hausdorff_is_shift():
    F = SetValuedMap.translate(Ball(SP, [0, 0], 0.5), [0.6, 0.8], (0.0, 1.0))
    assert hausdorff_distance(F(0.1), F(0.4)) == pytest.approx(0.3, abs=2e-3)
    with pytest.raises(DomainError):
        F(1.5)


def test_inflate_map_hausdorff_is_radius_change():
    F = SetValuedMap.inflate(Ball(SP, [0, 0], 0.5), 2.0, (0.0, 1.0))
    assert hausdorff_distance(F(0.0), F(0.25)) == pytest.approx(0.5, abs=2e-3)


def test_continuity_modulus_of_translation():
    F = SetValuedMap.translate(Ball(SP, [0, 0], 0.5), [1.0, 0.0], (0.0, 1.0))
    mod = estimate_continuity_modulus(F, [0.0, 0.25, 0.5, 1.0])
    assert np.allclose(mod.values, mod.eps, atol=2e-3)


def test_bound_branches(family):
    solver, M, s0 = family.solver, family.M, family.s0
    b2, branch = intersection_hausdorff_bound(s0, s0, solver, M, s0)
    assert branch == 2 and b2 == pytest.approx(2 * M)
    b1, branch = intersection_hausdorff_bound(0.1 * s0, 0.0, solver, M, s0)
    assert branch == 1 and b1 == pytest.approx(0.2 * s0 + solver.t_of_s(0.05 * s0))


@pytest.mark.parametrize("t1, t2", [(0.3, 0.35), (0.0, 0.1), (-0.2, 0.9)])
def test_intersection_stability(family, t1, t2):
    rep = intersection_stability_bound(family.F1, family.F2, t1, t2, family=family)
    assert rep.passed
    assert rep.rows[0]["measured"] <= rep.rows[0]["bound"]


@given(st.floats(-0.3, 1.0), st.floats(-0.3, 1.0), st.floats(0, 2 * np.pi))
def test_transfer_point_lands_in_both_sets(t1, t2, phi):
    fam = tb.disk_cavern_family()
    S = fam(t1).boundary_samples(64)
    c1 = S[int(phi / (2 * np.pi) * len(S)) % len(S)]
    res = transfer_point(c1, fam, t1, t2)
    assert max(res.defects) <= 1e-6
    assert res.distance <= res.bound + 1e-6


def test_selection_of_symmetric_arc_is_its_midpoint():
    # rotating the scene rotates the selection; a symmetric arc selects its axis point
    tube = tb.arc_tube()
    for th in (0.0, 1.0, 2.5, 4.0):
        s = selection(tb.arc(th), tube, 0.9)
        assert np.allclose(s, [np.cos(th), np.sin(th)], atol=1e-6)


def test_selection_modulus_is_capped_and_monotone():
    tube = tb.arc_tube()
    hs = [1e-8, 1e-6, 1e-4, 1e-2]
    vals = [selection_modulus(h, tube, 1.0, 0.9, 0.1736) for h in hs]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= 2.0


def test_selection_rejects_anchor_inside_hull():
    with pytest.raises(Exception):
        selection(tb.arc(), tb.arc_tube(), 0.9, anchor=np.array([0.99, 0.0]))


@given(st.integers(-2 ** 40, 2 ** 40), st.integers(-2 ** 30, 2 ** 30))
def test_exact_split_on_dyadic_inputs(ci, bi):
    c = np.array([ci * 2.0 ** -40, 0.5])
    b = np.array([bi * 2.0 ** -30 / 3.0, 0.1])
    a, b2 = _exact_split(c, b)
    assert np.all(a + b2 == c)
    assert np.all(np.abs(b2 - b) <= 4 * np.spacing(np.maximum(np.abs(c), np.abs(b)) + 1.0))


def test_split_on_axis(splitter):
    res = splitter(np.array([1.05, 0.0]))
    assert np.allclose(res.b, [0.05, 0.0], atol=1e-6)
    assert np.allclose(res.a, [1.0, 0.0], atol=1e-6)
    assert res.residual == 0.0


def test_split_outside_sum_raises(splitter):
    with pytest.raises(EmptySetError, match="A\\+B"):
        splitter(np.array([-1.0, 0.0]))


def test_splitter_rejects_large_B():
    from weakconv.mappings import Splitter
    with pytest.raises(PreconditionError):
        Splitter(tb.arc(), Ball(SP, [0, 0], 0.2), tb.arc_tube())


def test_load_map_scene(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"space": {"dim": 2, "p": 2},
                                "map": {"kind": "inflate", "base": {"type": "ball", "center": [0, 0],
                                                                    "radius": 1}, "params": {"rate": 0.5}}}))
    _, F = load_map_scene(path)
    assert F(1.0).radius == pytest.approx(1.5)
    with pytest.raises(SceneError):
        load_map_scene({"space": {"dim": 2, "p": 2}, "map": {"kind": "spin"}})


def test_family_rejects_larger_s0(family):
    from weakconv.mappings import IntersectionFamily
    with pytest.raises(PreconditionError):
        IntersectionFamily(family.F1, family.F2, s0=2 * family.s0)
