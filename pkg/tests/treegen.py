"""Abstract ray trees for exercising the observation fixpoint without any geometry.

A subtree hanging off an edge is a nested tuple:

* ``("L", 0)`` / ``("L", 1)``: a leaf edge, unobserved / landing in Gamma;
* ``("2", sub)``: the edge ends at a two-ray event with one further edge;
* ``("4", a, b, c)``: the edge ends at a splitting event with three further edges.

A whole tree is ``("R2", germ, other)`` or ``("R4", germ, a, b, c)``.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from raysplit.optics import EventKind
from raysplit.tracer import HIT_GAMMA, TIME_EXPIRED, Edge, InterfaceEvent, PhasePoint, RayTree

KINDS = {"2": EventKind.OUTER_REFLECTION, "4": EventKind.REFLECT_TRANSMIT}
OTHERS = {"2": ("out1",), "4": ("out1", "in2", "out2")}


def _node(kind: EventKind, nid: int) -> InterfaceEvent:
    return InterfaceEvent(kind, "outer", 0.0, np.zeros(2), 0.0, None, None, id=nid)


def build(spec) -> RayTree:
    nodes: list[InterfaceEvent] = []
    edges: list[Edge] = []

    def attach(nid: int, slot: str, sub) -> None:
        eid = len(edges)
        nodes[nid].slots[slot] = eid
        z = np.zeros(2)
        if sub[0] == "L":
            leaf, dst = (HIT_GAMMA if sub[1] else TIME_EXPIRED), None
        else:
            leaf, dst = None, len(nodes)
        edges.append(Edge(eid, 1, nid, dst, z, z, z, 1.0, 1.0, 0.0, 1.0, 0, "forward", leaf))
        if dst is None:
            return
        nodes.append(_node(KINDS[sub[0]], dst))
        nodes[dst].slots["in1"] = eid
        for s, child in zip(OTHERS[sub[0]], sub[1:]):
            attach(dst, s, child)

    kind = spec[0][1]
    nodes.append(_node(KINDS[kind], 0))
    root_slots = ("out1", "in1") if kind == "2" else ("out1", "in1", "in2", "out2")
    for s, sub in zip(root_slots, spec[1:]):
        attach(0, s, sub)
    root = PhasePoint("outer", 0.0, np.zeros(2), np.array([1.0, 0.0]), 1)
    return RayTree(root, nodes, edges, None, 1.0, 8)


@lru_cache(None)
def subtrees(n: int) -> tuple:
    """All edge-subtrees with ``n`` edges up to reordering of siblings."""
    if n == 1:
        return (("L", 0), ("L", 1))
    out = [("2", t) for t in subtrees(n - 1)]
    for a in range(1, n - 1):
        for b in range(a, n - 1):
            c = n - 1 - a - b
            if c < b:
                continue
            for x, y, z in itertools.product(subtrees(a), subtrees(b), subtrees(c)):
                if (a == b and y < x) or (b == c and z < y):
                    continue
                out.append(("4", x, y, z))
    return tuple(out)


def _multisets(total: int, k: int):
    """Non-decreasing size tuples of length ``k`` summing to ``total``."""
    def rec(left, k, lo):
        if k == 1:
            if left >= lo:
                yield (left,)
            return
        for a in range(lo, left // k + 1):
            for rest in rec(left - a, k - 1, a):
                yield (a, *rest)
    yield from rec(total, k, 1)


def all_trees(max_edges: int):
    """Every tree with at most ``max_edges`` edges, up to sibling order (germ is distinguished)."""
    for n in range(2, max_edges + 1):
        for g in range(1, n):
            for germ in subtrees(g):
                for other in subtrees(n - g):
                    yield ("R2", germ, other)
                for sizes in _multisets(n - g, 3):
                    pools = [subtrees(s) for s in sizes]
                    for trio in itertools.product(*pools):
                        if any(sizes[i] == sizes[i + 1] and trio[i + 1] < trio[i] for i in range(2)):
                            continue
                        yield ("R4", germ, *trio)


def _need(node: InterfaceEvent) -> int:
    return 2 if len(node.slots) == 4 else 1


def seeds(tree: RayTree) -> set[int]:
    return {e.id for e in tree.edges if e.leaf == HIT_GAMMA}


def kleene(tree: RayTree) -> set[int]:
    """Naive oracle: sweep every node with every rule until nothing changes."""
    obs = seeds(tree)
    changed = True
    while changed:
        changed = False
        for node in tree.nodes:
            ids = set(node.slots.values())
            if len(ids & obs) >= _need(node) and not ids <= obs:
                obs |= ids
                changed = True
    return obs


def least_closed(tree: RayTree) -> set[int]:
    """Brute-force oracle: intersection of every rule-closed edge set containing the seeds."""
    base = seeds(tree)
    free = [e.id for e in tree.edges if e.id not in base]
    slot_sets = [(set(n.slots.values()), _need(n)) for n in tree.nodes]
    best = set(e.id for e in tree.edges)
    for mask in range(1 << len(free)):
        s = base | {free[i] for i in range(len(free)) if mask >> i & 1}
        if all(len(ids & s) < need or ids <= s for ids, need in slot_sets):
            best &= s
    return best
