import math

import numpy as np
import pytest

from raysplit.escape import (check_thmtrap_hypothesis, escape_value, find_trapped_rays,
                             is_uniformly_escaping, normal_escape_values)
from raysplit.geometry import BoundaryArc
from raysplit.regions import construct
from raysplit.scenario import concentric_scenario, offset_scenario, trapped_scenario


@pytest.fixture(scope="module")
def fig10():
    scn = trapped_scenario()
    return scn, find_trapped_rays(scn, scn.gamma)


def _circle_exit(p, d, R):
    # oracle: positive root of |p + t d| = R
    b = p @ d
    t = -b + math.sqrt(b * b - (p @ p - R * R))
    return p + t * d


@pytest.mark.parametrize("s", [0.1, 0.3, 0.4, 0.65, 0.9])
def test_escape_value_matches_direct_ray_cast(s):
    scn = offset_scenario()
    inner = scn.inner_curve
    p = inner.point_at(s)
    n = inner.frame_at(s).normal
    q = _circle_exit(p, n, 3.0)
    tangent = np.array([-q[1], q[0]]) / 3.0
    assert abs(escape_value(scn, s, n) - n @ tangent) < 1e-10


def test_escape_value_is_zero_for_concentric_circles():
    scn = concentric_scenario()
    assert np.max(np.abs(normal_escape_values(scn, np.linspace(0, 1, 1000)))) < 1e-9


def test_escape_profile_mirror_antisymmetry():
    scn = offset_scenario()
    s = np.linspace(0.01, 0.49, 50)
    a = normal_escape_values(scn, s)
    b = normal_escape_values(scn, 1 - s)
    assert np.max(np.abs(a + b)) < 1e-9


def test_escape_value_rejects_inward_direction():
    scn = offset_scenario()
    n = scn.inner_curve.frame_at(0.2).normal
    with pytest.raises(ValueError):
        escape_value(scn, 0.2, -n)


def test_ueg_verdicts():
    conc = concentric_scenario()
    assert is_uniformly_escaping(conc, construct(conc).gamma2).ueg
    assert is_uniformly_escaping(conc, BoundaryArc.whole("inner")).ueg
    fig = trapped_scenario()
    prof = is_uniformly_escaping(fig, construct(fig, strict=False).gamma2)
    assert not prof.ueg and prof.violations
    assert prof.stable or prof.violations


def test_figure10_orbit_geometry(fig10):
    scn, orbits = fig10
    target = [o for o in orbits if abs(o.length - 44 / math.sqrt(33)) < 1e-10]
    assert target
    o = target[0]
    assert o.residual < scn.tol.orbit
    assert len(set(np.round(o.inner_angles, 12))) == 1
    for ang in o.inner_angles:
        assert ang > math.pi / 4
    for b, p, d in zip(o.boundaries, o.points, o.directions):
        if b == "outer":
            t = scn.outer_curve.frame_at(scn.outer_curve.param_of(p)).tangent
            assert abs(d @ t) < 1e-10


def test_trapped_orbits_avoid_gamma(fig10):
    scn, orbits = fig10
    for o in orbits:
        for s in o.outer_s:
            assert not scn.gamma.contains(s)


def test_trapped_orbits_shadow_for_a_thousand_periods(fig10):
    scn, orbits = fig10
    for o in orbits:
        assert o.shadow(scn, 1000) < 1e-6


def test_no_trapped_orbit_in_concentric_annulus():
    scn = concentric_scenario()
    st = construct(scn)
    assert find_trapped_rays(scn, st.gamma1, st.gamma2) == []


def test_fast_inclusion_traps_many_rays():
    scn = trapped_scenario(c2=50.0)
    assert len(find_trapped_rays(scn, scn.gamma, grid=(64, 64))) > 0


def test_trap_hypothesis_verdicts():
    sa = offset_scenario()
    st = construct(sa)
    assert check_thmtrap_hypothesis(sa, st.gamma1, st.gamma2).holds
    fig = trapped_scenario()
    st = construct(fig, strict=False)
    hv = check_thmtrap_hypothesis(fig, st.gamma1, st.gamma2)
    assert not hv.holds
    assert any(v["reason"] == "total_reflection" for v in hv.violations)
    assert check_thmtrap_hypothesis(fig, st.gamma1, BoundaryArc.whole("inner")).holds
