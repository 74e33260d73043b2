import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from raysplit.errors import IterationBudget
from raysplit.geometry import Ellipse, radial_from_expr
from raysplit.regions import (construct, extend_gamma1, extend_gamma2, gamma_x0, localisation_L,
                              witness_x02)
from raysplit.scenario import concentric_scenario, offset_scenario


@pytest.fixture(scope="module")
def s_a():
    scn = offset_scenario()
    return scn, construct(scn)


def test_nesting_and_lengths(s_a):
    _, st_ = s_a
    prev = None
    for _, g1, g2 in st_.history:
        assert 0 < g1.length <= 1 and 0 < g2.length <= 1
        if prev is not None:
            assert g1.includes(prev[0], 1e-12) and g2.includes(prev[1], 1e-12)
            assert g1.length >= prev[0].length - 1e-12 and g2.length >= prev[1].length - 1e-12
        prev = (g1, g2)
    assert st_.gamma1.includes(gamma_x0(offset_scenario().outer_curve, (6.0, 0.0)), 1e-12)


def test_fixpoint_is_idempotent(s_a):
    scn, st_ = s_a
    g2, _ = extend_gamma2(scn, st_.gamma1, st_.gamma2)
    g1, _ = extend_gamma1(scn, st_.gamma1, g2)
    assert g2.hausdorff(st_.gamma2) <= scn.tol.arc
    assert g1.hausdorff(st_.gamma1) <= scn.tol.arc


def test_witness_round_trip(s_a):
    scn, st_ = s_a
    w = witness_x02(scn, st_.gamma2)
    assert gamma_x0(scn.inner_curve, w, "inner").hausdorff(st_.gamma2) < 1e-6


def test_residual_region_is_bounded_by_bridges(s_a):
    scn, st_ = s_a
    res = st_.residual
    assert res.bridges_clear(scn)
    assert len(res.polygon(scn)) > 3


def test_concentric_construction_matches_oracle():
    # oracle: no Step-1 root, the outer endpoints sit at cos(phi) = R/|x0| = 2/3,
    # and Gamma2 shares their polar angles, so its witness is (r / (2/3), 0)
    scn = concentric_scenario()
    st_ = construct(scn)
    assert all(side.branch == "no_root" for side in st_.step1)
    assert st_.reason == "normal_parallel"
    phi = math.acos(2 / 3)
    inner = scn.inner_curve
    assert abs(inner.u_of_s(st_.gamma2.lo) - phi) < 1e-9
    assert abs(inner.u_of_s(st_.gamma2.hi) - (2 * math.pi - phi)) < 1e-9
    w = witness_x02(scn, st_.gamma2)
    assert np.hypot(*(w - (1.5, 0.0))) < 1e-8


def test_localisation_constant_on_concentric_circles():
    scn = concentric_scenario()
    for s in np.linspace(0, 1, 9, endpoint=False):
        for sign in (1, -1):
            L, _ = localisation_L(scn, float(s), sign)
            assert abs(L - 0.5) < 1e-9


def test_budget_is_reported():
    scn = offset_scenario()
    with pytest.raises(IterationBudget):
        construct(scn, max_iter=1)
    assert construct(scn, max_iter=1, strict=False).reason == "budget"


@given(a=st.floats(1, 5), b=st.floats(1, 5), r=st.floats(1.5, 40), phi=st.floats(0, 2 * math.pi))
def test_gamma_x0_exceeds_half_on_symmetric_curves(a, b, r, phi):
    c = Ellipse((0, 0), a, b)
    x0 = r * max(a, b) * np.array([math.cos(phi), math.sin(phi)])
    assert gamma_x0(c, x0).length > 0.5


def test_gamma_x0_can_be_shorter_than_half_without_central_symmetry():
    c = radial_from_expr("1.5 + 0.05*cos(3*phi)")
    assert gamma_x0(c, (1e4, 0.0)).length < 0.5
