import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import treegen
from raysplit.gcc import (OBSERVED, UNDETERMINED, _Evaluator, check_gcc_simple, check_observability,
                          observe_tree, propagate_observation, seed_observed)
from raysplit.geometry import BoundaryArc, Ellipse, radial_from_expr
from raysplit.regions import gamma_x0
from raysplit.scenario import concentric_scenario, offset_scenario
from raysplit.tracer import phase_point, trace

ALL = list(treegen.all_trees(9))


@settings(max_examples=200)
@given(i=st.integers(0, len(ALL) - 1))
def test_propagation_is_idempotent(i):
    tree = treegen.build(ALL[i])
    once = propagate_observation(tree, seed_observed(tree))
    twice = propagate_observation(tree, once)
    assert once.observed == twice.observed and once.root == twice.root


@settings(max_examples=200)
@given(i=st.integers(0, len(ALL) - 1), seed=st.integers(0, 2**32 - 1))
def test_propagation_is_confluent(i, seed):
    tree = treegen.build(ALL[i])
    ref = propagate_observation(tree, seed_observed(tree)).observed
    order = list(range(len(tree.nodes)))
    random.Random(seed).shuffle(order)
    assert propagate_observation(tree, seed_observed(tree), order).observed == ref


@settings(max_examples=200)
@given(i=st.integers(0, len(ALL) - 1))
def test_rules_are_time_symmetric(i):
    tree = treegen.build(ALL[i])
    ref = propagate_observation(tree, seed_observed(tree))
    swap = {"in1": "out1", "out1": "in1", "in2": "out2", "out2": "in2"}
    for n in tree.nodes:
        n.slots = {swap[k]: v for k, v in n.slots.items()}
    got = propagate_observation(tree, seed_observed(tree))
    assert got.observed == ref.observed


def test_two_slot_event_passes_labels_both_ways():
    tree = treegen.build(("R2", ("L", 0), ("2", ("L", 1))))
    st_ = propagate_observation(tree, seed_observed(tree))
    assert st_.observed == {0, 1, 2} and st_.root == OBSERVED


def test_unobserved_tree_stays_unknown():
    tree = treegen.build(("R4", ("L", 0), ("4", ("L", 1), ("L", 0), ("L", 0)), ("L", 0), ("L", 0)))
    st_ = propagate_observation(tree, seed_observed(tree))
    assert st_.root == UNDETERMINED
    assert st_.observed == seeds_only(tree)


def seeds_only(tree):
    return treegen.seeds(tree)


@pytest.mark.parametrize("make", [concentric_scenario, offset_scenario])
@pytest.mark.parametrize("T,cap", [(7.0, 3), (3.0, 2)])
def test_lazy_evaluator_matches_tree_fixpoint(make, T, cap):
    scn = make(horizon=T, depth_cap=cap)
    seen = set()
    for b, m in (("outer", 1), ("inner", 1), ("inner", 2)):
        for s in np.linspace(0, 1, 5, endpoint=False):
            for th in np.linspace(0.25, 2.9, 4):
                ev = _Evaluator(scn, scn.gamma, T, cap, 10**6, resolve_glide=False)
                lazy, _ = ev.germ(b, float(s), float(th), m)
                tree = trace(scn, phase_point(scn, b, float(s), float(th), m), reverse=True)
                assert observe_tree(tree).root == lazy
                seen.add(lazy)
    if T < 5:
        assert seen == {OBSERVED, UNDETERMINED}


def test_concentric_observability_small_grid():
    rep = check_observability(concentric_scenario(), grid=(24, 12))
    assert rep.all_observed and rep.exit_code == 0
    assert rep.max_time <= 20.0


def test_short_horizon_is_undetermined_not_trapped():
    rep = check_observability(concentric_scenario(horizon=1.0), grid=(8, 4))
    assert not rep.all_observed and rep.exit_code == 2


def test_gcc_passes_on_gamma_x0_arcs():
    rng = np.random.default_rng(2)
    curves = [Ellipse((0, 0), 1, 1), Ellipse((0, 0), 2, 1), Ellipse((0.3, 0), 3, 2, 0.5),
              radial_from_expr("1.5 + 0.05*cos(3*phi)", samples=1024)]
    for k in range(20):
        c = curves[k % len(curves)]
        ang = rng.uniform(0, 2 * math.pi)
        x0 = c.center + rng.uniform(4, 12) * np.array([math.cos(ang), math.sin(ang)])
        res = check_gcc_simple(c, gamma_x0(c, x0), 60.0, (90, 45))
        assert res.passed, (k, x0)


def test_gcc_circle_square_witness():
    circ = Ellipse((0, 0), 1, 1)
    arc = BoundaryArc("outer", (math.pi / 8 - 0.05) / (2 * math.pi), (math.pi / 8 + 0.05) / (2 * math.pi))
    res = check_gcc_simple(circ, arc, 20.0, (360, 180))
    assert not res.passed
    periods = [w["period"] for w in res.witnesses]
    assert periods == sorted(periods) and 4 in periods


def test_gcc_circle_known_max_time():
    # oracle: worst case is the equilateral triangle from s = 0, side sqrt(3), three sides to land past pi/3
    circ = Ellipse((0, 0), 1, 1)
    res = check_gcc_simple(circ, BoundaryArc("outer", 1 / 6, 5 / 6), 20.0, (360, 180))
    assert res.passed
    assert abs(res.max_time - 3 * math.sqrt(3)) < 1e-9
