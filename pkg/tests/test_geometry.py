import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import ellipe

from raysplit.errors import InsidePoint, NonConvex
from raysplit.geometry import BoundaryArc, Ellipse, ellipse_as_radial, radial_from_expr
from raysplit.regions import gamma_x0

CURVES = {
    "circle": Ellipse((0.5, -0.2), 1.5, 1.5),
    "ellipse": Ellipse((0, 0), 4, 2),
    "tilted": Ellipse((1, 1), 3, 1.2, 0.4),
    "radial": radial_from_expr("1.5 + 0.05*cos(3*phi)"),
}

unit_s = st.floats(0, 1, exclude_max=True)
angle = st.floats(0, 2 * math.pi)


@pytest.mark.parametrize("name", CURVES)
@given(s=unit_s)
def test_frames_are_orthonormal(name, s):
    fr = CURVES[name].frame_at(s)
    assert abs(np.hypot(*fr.tangent) - 1) < 1e-12
    assert abs(np.hypot(*fr.normal) - 1) < 1e-12
    assert abs(fr.tangent @ fr.normal) < 1e-12


@pytest.mark.parametrize("name", CURVES)
@given(r=st.floats(0, 0.9), phi=angle, d=angle)
def test_interior_rays_always_hit(name, r, phi, d):
    c = CURVES[name]
    # scale toward a point on the curve from its centre so the origin stays inside
    p = c.center + r * (c.point_at(phi / (2 * math.pi)) - c.center)
    hit = c.intersect_ray(p, (math.cos(d), math.sin(d)))
    assert hit is not None and hit.distance > 0
    assert abs(c._inside_value(*hit.point)) < 1e-8


def test_tangent_lines_touch():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        c = CURVES[rng.choice(list(CURVES))]
        ang = rng.uniform(0, 2 * math.pi)
        x0 = c.center + rng.uniform(5, 30) * np.array([math.cos(ang), math.sin(ang)])
        for s in c.tangent_points_from(x0):
            fr = c.frame_at(s)
            assert abs((c.point_at(s) - x0) @ fr.normal) < 1e-10 * max(1, np.hypot(*x0))


def test_non_convex_radial_curve_is_rejected():
    with pytest.raises(NonConvex):
        radial_from_expr("1.5 + 0.2*cos(3*phi)")


def test_tangent_points_reject_inside():
    with pytest.raises(InsidePoint):
        CURVES["ellipse"].tangent_points_from((0, 0))


@given(s=unit_s, d=angle)
def test_analytic_ellipse_agrees_with_radial(s, d):
    a, r = Ellipse((0, 0), 4, 2), ellipse_as_radial(4, 2)
    assert np.hypot(*(a.point_at(s) - r.point_at(s))) < 1e-8
    h1 = a.intersect_ray((0.3, -0.1), (math.cos(d), math.sin(d)))
    h2 = r.intersect_ray((0.3, -0.1), (math.cos(d), math.sin(d)))
    assert abs(h1.distance - h2.distance) < 1e-8
    assert abs(np.sin(math.pi * (h1.s - h2.s))) < 1e-8


def test_ellipse_perimeter_matches_complete_integral():
    a, b = 4.0, 2.0
    assert abs(Ellipse((0, 0), a, b).perimeter - 4 * a * ellipe(1 - (b / a) ** 2)) < 1e-9


@given(s=unit_s)
def test_param_round_trip(s):
    c = CURVES["tilted"]
    got = c.param_of(c.point_at(s))
    assert min(abs(got - s), 1 - abs(got - s)) < 1e-10


def test_anchor_is_nearest_point():
    c = Ellipse((0, 0), 4, 2).anchored_at((1, 5))
    p0 = c.point_at(0.0)
    dists = np.hypot(*(c.sample(4000) - (1, 5)).T)
    assert np.hypot(*(p0 - (1, 5))) <= dists.min() + 1e-12
    fr = c.frame_at(0.0)
    assert abs((p0 - (1, 5)) @ fr.tangent) < 1e-12


@given(lo=unit_s, hi=unit_s, s=unit_s)
def test_arc_and_complement_partition(lo, hi, s):
    arc = BoundaryArc("outer", lo, hi)
    ends = min(abs(s - lo), 1 - abs(s - lo), abs(s - hi), 1 - abs(s - hi))
    if lo == hi or ends < 1e-12:
        return
    assert arc.contains(s) != arc.complement().contains(s)
    assert arc.complement().complement() == arc
    assert abs(arc.length + arc.complement().length - 1) < 1e-12


@given(lo=unit_s, a=st.floats(0, 0.3), b=st.floats(0, 0.3))
def test_arc_includes_is_monotone(lo, a, b):
    inner = BoundaryArc("outer", lo, (lo + a) % 1)
    outer = BoundaryArc("outer", (lo - b) % 1, (lo + a + b) % 1)
    if a == 0:
        return
    assert outer.includes(inner, 1e-12)
    assert inner.includes(inner)


@pytest.mark.parametrize("name", CURVES)
def test_gamma_x0_signs(name):
    c = CURVES[name]
    x0 = c.center + np.array([7.0, 2.0])
    g = gamma_x0(c, x0)
    for s in (g.lo, g.hi):
        assert abs((c.point_at(s) - x0) @ c.frame_at(s).normal) < 1e-9
    for s in g.sample(1000):
        assert (c.point_at(s) - x0) @ c.frame_at(s).normal > 0
    assert g.length > 0.5
