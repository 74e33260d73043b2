"""End-to-end acceptance checks, one test per criterion."""
import math
import random

import numpy as np
import pytest

import treegen
from conftest import SCENARIOS
from raysplit import cli
from raysplit import ellipse_lab as el
from raysplit.escape import find_trapped_rays, is_uniformly_escaping
from raysplit.gcc import check_gcc_simple, check_observability, propagate_observation, seed_observed
from raysplit.geometry import BoundaryArc, Ellipse
from raysplit.optics import EventKind, classify_hit, critical_angle, incidence_angle, refract
from raysplit.regions import construct, gamma_x0, witness_x02
from raysplit.scenario import concentric_scenario, load_scenario, trapped_scenario


def test_c1_snell_and_critical_angle(acceptance):
    with acceptance(1, "Snell / critical angle", 1.0):
        n = np.array([0.0, 1.0])
        th1 = math.radians(30)
        d = np.array([math.sin(th1), -math.cos(th1)])
        out = refract(d, n, 1.0, math.sqrt(2))
        assert abs(incidence_angle(out, n) - math.pi / 4) < 1e-12
        th1 = math.radians(60)
        d = np.array([math.sin(th1), -math.cos(th1)])
        assert refract(d, n, 1.0, math.sqrt(2)) is None
        assert classify_hit("inner", 1, th1, False, 1.0, math.sqrt(2)) is EventKind.TOTAL_INTERNAL_REFLECTION
        assert abs(critical_angle(1.0, math.sqrt(2)) - math.pi / 4) < 1e-12


def test_c2_gamma_x0_analytics(acceptance):
    with acceptance(2, "Gamma(x0) endpoints", 1.0):
        circ = Ellipse((0, 0), 1, 1)
        g = gamma_x0(circ, (2.0, 0.0))
        assert abs(circ.u_of_s(g.lo) - math.pi / 3) < 1e-9
        assert abs(circ.u_of_s(g.hi) - 5 * math.pi / 3) < 1e-9
        ell = Ellipse((0, 0), 4, 2)
        g = gamma_x0(ell, (8.0, 0.0))
        assert abs(ell.u_of_s(g.lo) - math.pi / 3) < 1e-9
        assert abs(ell.u_of_s(g.hi) - 5 * math.pi / 3) < 1e-9
        for s in g.sample(50):
            assert ell.point_at(s)[0] < 2.0
        for s in g.complement().sample(50):
            assert ell.point_at(s)[0] > 2.0


def test_c3_figure10_trapped_orbit(acceptance, tmp_path):
    with acceptance(3, "trapped orbit in the ellipse with a disc", 30.0):
        scn = load_scenario(SCENARIOS / "figure10.cfg")
        assert scn.trap_grid == (256, 256)
        orbits = find_trapped_rays(scn, scn.gamma)
        target = 44 / math.sqrt(33)
        match = [o for o in orbits if abs(o.length - target) < 1e-10]
        assert match, [o.length for o in orbits]
        o = match[0]
        pts = o.points
        a = np.array([1.0, 0.0])
        b = np.array([4 / 3, 4 * math.sqrt(2) / 3])
        assert np.min(np.hypot(*(pts - a).T)) < 1e-6
        assert np.min(np.hypot(*(pts - b).T)) < 1e-6
        for ang in o.inner_angles:
            assert abs(math.cos(ang) - 1 / math.sqrt(33)) < 1e-10
        code = cli.main(["check-obs", "--scenario", str(SCENARIOS / "figure10.cfg"), "--out", str(tmp_path)])
        assert code == cli.EXIT_TRAPPED
        assert (tmp_path / "trapped.svg").exists()


def test_c4_construction_on_offset_inclusion(acceptance):
    with acceptance(4, "construction fixpoint, nesting, witness round trip", 10.0):
        scn = load_scenario(SCENARIOS / "s_a.cfg")
        st = construct(scn, max_iter=20)
        assert st.n <= 20 and st.reason != "budget"
        for (_, a1, a2), (_, b1, b2) in zip(st.history, st.history[1:]):
            assert b1.includes(a1, 1e-12)
            assert b2.includes(a2, 1e-12)
        w = witness_x02(scn, st.gamma2)
        assert gamma_x0(scn.inner_curve, w, "inner").hausdorff(st.gamma2) < 1e-6


@pytest.fixture(scope="module")
def gamma2_pair():
    conc = concentric_scenario()
    fig = trapped_scenario()
    return (conc, construct(conc).gamma2), (fig, construct(fig, strict=False).gamma2)


def test_c5_uniform_escape(acceptance, gamma2_pair):
    (conc, g2c), (fig, g2f) = gamma2_pair
    with acceptance(5, "uniform escape: annulus true, trapped ellipse false", 5.0):
        prof = is_uniformly_escaping(conc, g2c)
        assert len(prof.s) >= 1000
        assert np.max(np.abs(prof.values)) < 1e-9
        assert prof.ueg
        assert not is_uniformly_escaping(fig, g2f).ueg


def test_c6_observation_fixpoint(acceptance):
    with acceptance(6, "observation fixpoint logic", 10.0):
        # two of four at a splitting event infer the rest; one does not
        both_out = treegen.build(("R4", ("L", 1), ("L", 0), ("L", 0), ("L", 1)))
        st = propagate_observation(both_out, seed_observed(both_out))
        assert st.observed == {e.id for e in both_out.edges}
        single = treegen.build(("R4", ("L", 1), ("L", 0), ("L", 0), ("L", 0)))
        st = propagate_observation(single, seed_observed(single))
        assert st.observed == {single.germ}

        rng = random.Random(7)
        big = [t for t in treegen.all_trees(10) if len(t) == 5][::499][:5]
        for spec in big:
            tree = treegen.build(spec)
            ref = propagate_observation(tree, seed_observed(tree)).observed
            for _ in range(100):
                order = list(range(len(tree.nodes)))
                rng.shuffle(order)
                assert propagate_observation(tree, seed_observed(tree), order).observed == ref

        for spec in treegen.all_trees(12):
            tree = treegen.build(spec)
            assert propagate_observation(tree, seed_observed(tree)).observed == treegen.kleene(tree)
        for spec in treegen.all_trees(8):
            tree = treegen.build(spec)
            assert propagate_observation(tree, seed_observed(tree)).observed == treegen.least_closed(tree)


def test_c7_concentric_observability(acceptance):
    with acceptance(7, "annulus observability at 128x64, depth 8", 60.0):
        scn = load_scenario(SCENARIOS / "concentric.cfg")
        rep = check_observability(scn, grid=(128, 64), depth_cap=8)
        assert len(rep.samples) == 3 * 128 * 63
        assert rep.all_observed, rep.summary()
        assert rep.max_time is not None and math.isfinite(rep.max_time)
        print(rep.summary())


def _third_quadrant(ell, rng):
    t = rng.uniform(math.pi + 1e-3, 1.5 * math.pi - 1e-3)
    return np.array([ell.a * math.cos(t), ell.b * math.sin(t)])


def test_c8_ellipse_lab(acceptance):
    with acceptance(8, "ellipse lab", 60.0):
        rng = np.random.default_rng(11)
        ell = Ellipse((0, 0), 4, 2)
        s = rng.random(1000)
        th = rng.uniform(0.01, math.pi - 0.01, 1000)
        codes = el.orbit_classes(ell, s, th, 1000)
        focal = el._CODES.index(el.CausticClass.FOCAL)
        assert not np.any(codes[0] == focal)
        assert int((codes != codes[0]).sum()) == 0

        for _ in range(100):
            start = ell.point_at(rng.random())
            run = el.focal_convergence(ell, start, 200)
            assert np.min(np.abs(run.ys)) < 1e-6

        prng = random.Random(5)
        for e in (Ellipse((0, 0), 2, 1), ell):
            for _ in range(20):
                arc = el.lemel_arc(e, _third_quadrant(e, prng))
                res = check_gcc_simple(e, arc, 100.0, (360, 180))
                assert res.passed and res.max_time <= 100.0
                if arc.length <= 0.5:
                    assert el.is_gamma_x0_form(e, arc) is None

        circ = Ellipse((0, 0), 1, 1)
        x0 = el.is_gamma_x0_form(circ, gamma_x0(circ, (2.0, 0.0)))
        assert x0 is not None and np.hypot(*(x0 - (2.0, 0.0))) < 1e-8

        e21 = Ellipse((0, 0), 2, 1)
        found = el.search_both_sides(e21)
        assert found is not None
        a, b = el.both_sides_gcc(e21, found[1])
        assert a.passed and b is not None and b.passed


def test_c9_negative_gcc_control(acceptance):
    with acceptance(9, "short arc on the circle fails GCC with a periodic witness", 5.0):
        circ = Ellipse((0, 0), 1, 1)
        c = math.pi / 8
        arc = BoundaryArc("outer", (c - 0.05) / (2 * math.pi), (c + 0.05) / (2 * math.pi))
        res = check_gcc_simple(circ, arc, 20.0, (360, 180))
        assert not res.passed
        squares = [w for w in res.witnesses if w["period"] == 4]
        assert squares
        pts = squares[0]["points"]
        sides = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)
        assert np.allclose(sides, math.sqrt(2), atol=1e-9)
