import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from raysplit.ellipse_lab import (CausticClass, both_sides_gcc, classify_caustic, focal_convergence, foci,
                                  is_gamma_x0_form, lemel_arc, orbit_classes, search_both_sides)
from raysplit.errors import NotEllipse, NotInThirdQuadrant
from raysplit.geometry import BoundaryArc, Ellipse
from raysplit.regions import gamma_x0

E42 = Ellipse((0, 0), 4, 2)
E21 = Ellipse((0, 0), 2, 1)


def _pt(ell, deg):
    t = math.radians(deg)
    return np.array([ell.a * math.cos(t), ell.b * math.sin(t)])


def _crosses_between_foci(p, q, c):
    # oracle: the chord's line meets the major axis at |x| < c
    if abs(q[1] - p[1]) < 1e-15:
        return False
    x = p[0] - p[1] * (q[0] - p[0]) / (q[1] - p[1])
    return abs(x) < c


def test_named_chords():
    assert classify_caustic(E42, (4, 0), (-4, 0)) is CausticClass.MAJOR_AXIS
    assert classify_caustic(E42, (0, 2), (0, -2)) is CausticClass.MINOR_AXIS
    assert classify_caustic(E42, _pt(E42, 80), _pt(E42, 100)) is CausticClass.ELLIPTIC
    assert classify_caustic(E42, _pt(E42, 80), _pt(E42, 260)) is CausticClass.HYPERBOLIC
    f1, _ = foci(E42)
    top = np.array([0.0, 2.0])
    assert classify_caustic(E42, top, _far(E42, top, f1)) is CausticClass.FOCAL


def _far(ell, p, f):
    d = np.asarray(f, float) - p
    d /= np.hypot(*d)
    lam, u, _ = ell.hit(p[0], p[1], d[0], d[1])
    return np.array(ell.xy(u))


@given(a=st.floats(0, 360), b=st.floats(0, 360))
def test_classification_matches_intersection_oracle(a, b):
    assume(abs((a - b + 180) % 360 - 180) > 1.0)
    p, q = _pt(E42, a), _pt(E42, b)
    c = math.sqrt(12)
    assume(min(abs(p[1]), abs(q[1])) > 1e-6 and abs(p[0] - q[0]) > 1e-6)
    x = p[0] - p[1] * (q[0] - p[0]) / (q[1] - p[1]) if abs(q[1] - p[1]) > 1e-12 else math.inf
    assume(abs(abs(x) - c) > 1e-6)
    got = classify_caustic(E42, p, q)
    want = CausticClass.HYPERBOLIC if _crosses_between_foci(p, q, c) else CausticClass.ELLIPTIC
    assert got is want


def test_caustic_is_invariant_along_orbits():
    rng = np.random.default_rng(0)
    codes = orbit_classes(E21, rng.uniform(0, 1, 200), rng.uniform(0.05, math.pi - 0.05, 200), 100)
    assert codes.shape == (100, 200)
    assert np.all(codes == codes[0])


def test_focal_orbit_from_minor_vertex_flattens():
    run = focal_convergence(E42, (0, 2), 200)
    assert np.min(np.abs(run.ys)) < 1e-6
    assert np.all(np.diff(run.foci_hit) != 0)
    assert run.to_csv().startswith("bounce,x,y,angle,focus\n")


def test_axis_start_is_a_two_cycle():
    run = focal_convergence(E42, (-4, 0), 50)
    assert np.max(np.abs(run.ys)) < 1e-10
    assert np.allclose(run.points[::2], run.points[0], atol=1e-10)
    assert np.allclose(run.points[1::2], -run.points[0], atol=1e-10)


def test_focal_requires_distinct_foci():
    with pytest.raises(NotEllipse):
        focal_convergence(Ellipse((0, 0), 1, 1), (1, 0))


def test_lemel_arc_second_point_matches_quadratic_oracle():
    x1 = _pt(E21, 200)
    g = lemel_arc(E21, x1)
    f1 = np.array([math.sqrt(3), 0.0])
    d = f1 - x1
    # oracle: (x1 + t d)^2 / 4 + (y1 + t d)^2 = 1 has roots 0 and t*
    A = d[0] ** 2 / 4 + d[1] ** 2
    B = 2 * (x1[0] * d[0] / 4 + x1[1] * d[1])
    x2 = x1 - (B / A) * d
    assert np.hypot(*(E21.point_at(g.hi) - x2)) < 1e-9
    assert np.hypot(*(E21.point_at(g.lo) - x1)) < 1e-9
    assert g.contains(E21.param_of((2, 0))) and g.contains(E21.param_of((0, -1)))


def test_lemel_rejects_other_quadrants():
    with pytest.raises(NotInThirdQuadrant):
        lemel_arc(E21, _pt(E21, 30))


def test_gamma_x0_form_recovers_the_point():
    x0 = np.array([1.0, 5.0])
    got = is_gamma_x0_form(E21, gamma_x0(E21, x0))
    assert got is not None and np.hypot(*(got - x0)) < 1e-8
    assert is_gamma_x0_form(E21, BoundaryArc.whole("outer")) is None
    assert is_gamma_x0_form(E21, BoundaryArc("outer", 0.1, 0.3)) is None


def test_both_sides_of_full_and_tiny_arcs():
    full, none = both_sides_gcc(E21, BoundaryArc.whole("outer"), 20.0, (48, 24))
    assert full.passed and none is None
    tiny, rest = both_sides_gcc(E21, BoundaryArc("outer", 0.1, 0.11), 20.0, (48, 24))
    assert not tiny.passed and tiny.witnesses
    assert rest.passed


def test_search_finds_a_mirrored_lemel_arc():
    x1, g = search_both_sides(E21)
    assert x1[0] < 0 and x1[1] < 0
    assert g.complement().length > 0
