"""Generalised ray flow in the two-medium table.

Rays move in straight lines at speed ``c1`` in the outer medium and ``c2`` in
the inclusion.  Each boundary hit becomes an :class:`InterfaceEvent` whose
half-rays are named by slot: ``in1``/``out1`` are the incoming and outgoing
half-rays in medium 1, ``in2``/``out2`` those in medium 2.  Directions are
always the physical (forward-time) direction of travel.

A :class:`RayTree` grows from a root phase point by following outgoing slots
forward in time and, when ``reverse`` is set, incoming slots backward in time.
Reflections are free; every switch of medium costs one unit of depth.
"""
from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import EventBudget, GrazingOuter, NotOnBoundary, RaysplitError
from .geometry import SKIP_EPS, ArcTest, BoundaryArc, unit
from .optics import EventKind, classify_hit, incidence_xy, reflect_xy, refract_xy

if TYPE_CHECKING:
    from .scenario import Scenario

HIT_GAMMA = "HitGamma"
TIME_EXPIRED = "TimeExpired"
DEPTH_EXPIRED = "DepthExpired"
GLIDING = "Gliding"

SLOTS = ("in1", "out1", "in2", "out2")


class StuckRay(RaysplitError):
    """A ray failed to reach any boundary."""


def partner(slot: str) -> str:
    """The same-medium slot on the other side of the event (in1 <-> out1)."""
    return ("out" if slot.startswith("in") else "in") + slot[-1]


def slot_medium(slot: str) -> int:
    return int(slot[-1])


# ---------------------------------------------------------------------------
# phase points


@dataclass
class PhasePoint:
    """A half-ray germ: boundary point, outgoing unit direction, medium, time."""

    boundary: str
    s: float | None
    position: np.ndarray
    direction: np.ndarray
    medium: int
    time: float = 0.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.direction = unit(self.direction)


def phase_point(scn: "Scenario", boundary: str, s: float, theta: float,
                medium: int | None = None, time: float = 0.0) -> PhasePoint:
    """Germ at ``s`` leaving the boundary at angle ``theta`` from the ccw tangent.

    ``theta`` lies in (0, pi); ``pi/2`` is the normal direction into the medium.
    On the outer boundary the medium is 1; on the inner boundary it defaults to 1
    (leaving the inclusion outward).
    """
    if medium is None:
        medium = 1
    curve = scn.curve(boundary)
    if curve is None:
        raise NotOnBoundary(f"scenario has no {boundary} boundary")
    fr = curve.frame_at(s)
    into = -fr.normal if (boundary == "outer" or medium == 2) else fr.normal
    d = math.cos(theta) * fr.tangent + math.sin(theta) * into
    return PhasePoint(boundary, s % 1.0, curve.point_at(s), d, medium, time)


def project_interior(scn: "Scenario", position, direction, medium: int, time: float = 0.0) -> PhasePoint:
    """Move an interior germ back along its ray to the boundary it came from."""
    d = unit(direction)
    fl = fly(scn, medium, float(position[0]), float(position[1]), -d[0], -d[1], 0.0)
    if fl is None:
        raise StuckRay("interior point does not see a boundary behind it")
    curve = scn.curve(fl.boundary)
    return PhasePoint(fl.boundary, curve.s_of_u(fl.u), (fl.x, fl.y), d, medium,
                      time - fl.distance / scn.speed(medium))


# ---------------------------------------------------------------------------
# straight flights and event geometry


@dataclass
class Flight:
    boundary: str
    u: float
    distance: float
    grazing: bool
    x: float
    y: float


def fly(scn: "Scenario", medium: int, x: float, y: float, dx: float, dy: float,
        skip: float = SKIP_EPS) -> Flight | None:
    """First boundary reached by a straight ray travelling inside ``medium``."""
    inner = scn.inner_curve
    if medium == 2:
        h = inner.hit(x, y, dx, dy, skip)
        if h is None:
            return None
        lam, u, g = h
        return Flight("inner", u, lam, g, x + lam * dx, y + lam * dy)
    best = None
    h = scn.outer_curve.hit(x, y, dx, dy, skip)
    if h is not None:
        best = ("outer", *h)
    if inner is not None:
        h2 = inner.hit(x, y, dx, dy, skip)
        if h2 is not None and (best is None or h2[0] < best[1]):
            best = ("inner", *h2)
    if best is None:
        return None
    b, lam, u, g = best
    px, py = scn.curve(b).xy(u)
    return Flight(b, u, lam, g, px, py)


@dataclass
class NodeGeometry:
    kind: EventKind
    theta1: float | None
    theta2: float | None
    dirs: dict[str, tuple[float, float]]
    gliding: tuple[str, ...] = ()


def node_geometry(scn: "Scenario", boundary: str, u: float, slot: str,
                  d: tuple[float, float], grazing: bool = False) -> NodeGeometry:
    """All half-rays of the event at native parameter ``u`` given one of them.

    ``slot`` names the known half-ray and ``d`` its physical direction.
    """
    curve = scn.curve(boundary)
    _, _, nx, ny, _ = curve.frame_u(u)
    dx, dy = d
    if boundary == "outer":
        if slot not in ("in1", "out1"):
            raise ValueError("outer events only carry medium-1 half-rays")
        if grazing:
            raise GrazingOuter("interior ray grazed the outer boundary")
        other = reflect_xy(dx, dy, nx, ny)
        dirs = {"in1": (dx, dy), "out1": other} if slot == "in1" else {"in1": other, "out1": (dx, dy)}
        th = incidence_xy(dx, dy, nx, ny)
        return NodeGeometry(EventKind.OUTER_REFLECTION, th, None, dirs)

    c1, c2 = scn.c1, scn.c2
    m = slot_medium(slot)
    incoming = (dx, dy) if slot.startswith("in") else reflect_xy(dx, dy, nx, ny)
    th_in = incidence_xy(incoming[0], incoming[1], nx, ny)
    kind = classify_hit("inner", m, th_in, grazing and m == 1, c1, c2, scn.tol.angle)
    j = 3 - m
    if kind is EventKind.DIFFRACTIVE:
        dirs = {f"in{m}": (dx, dy), f"out{m}": (dx, dy)}
        return NodeGeometry(kind, th_in, None, dirs)
    dirs = {f"in{m}": incoming, f"out{m}": reflect_xy(incoming[0], incoming[1], nx, ny)}
    th = {m: th_in, j: None}
    if kind is EventKind.TOTAL_INTERNAL_REFLECTION:
        return NodeGeometry(kind, th[1], th[2], dirs)
    if kind is EventKind.CRITICAL_GLIDING:
        th[j] = math.pi / 2
        return NodeGeometry(kind, th[1], th[2], dirs, gliding=(f"in{j}", f"out{j}"))
    ratio = scn.speed(j) / scn.speed(m)
    t = refract_xy(incoming[0], incoming[1], nx, ny, ratio)
    if t is None:  # only reachable inside the tolerance collar
        return NodeGeometry(EventKind.TOTAL_INTERNAL_REFLECTION, th[1], th[2], dirs)
    dirs[f"out{j}"] = t
    dirs[f"in{j}"] = reflect_xy(t[0], t[1], nx, ny)
    th[j] = incidence_xy(t[0], t[1], nx, ny)
    return NodeGeometry(kind, th[1], th[2], dirs)


# ---------------------------------------------------------------------------
# collision maps


@dataclass
class Collision:
    """One application of a collision map."""

    boundary: str
    s: float
    point: np.ndarray
    distance: float
    time: float
    incoming: np.ndarray
    grazing: bool
    theta: float
    outgoing: PhasePoint


def _collide(scn: "Scenario", p: PhasePoint, medium: int) -> Collision:
    if p.boundary == "inner" and medium == 2:
        # a germ launched tangentially inside the inclusion never enters it
        _, _, nx, ny, _ = scn.inner_curve.frame_u(scn.inner_curve.u_of_s(p.s))
        if abs(p.direction[0] * nx + p.direction[1] * ny) < math.sin(scn.tol.tangency):
            out = PhasePoint("inner", p.s, p.position, p.direction, 1, p.time)
            return Collision("inner", p.s, p.position.copy(), 0.0, p.time, p.direction.copy(),
                             True, math.pi / 2, out)
    x, y = p.position
    dx, dy = p.direction
    fl = fly(scn, medium, x, y, dx, dy)
    if fl is None or fl.distance < scn.tol.geom:
        raise StuckRay("ray did not reach a boundary")
    curve = scn.curve(fl.boundary)
    _, _, nx, ny, _ = curve.frame_u(fl.u)
    if fl.grazing and fl.boundary == "inner" and medium == 1:
        rx, ry = dx, dy
    else:
        if fl.grazing:
            raise GrazingOuter("interior ray grazed the outer boundary")
        rx, ry = reflect_xy(dx, dy, nx, ny)
    s = curve.s_of_u(fl.u)
    t = p.time + fl.distance / scn.speed(medium)
    out = PhasePoint(fl.boundary, s, (fl.x, fl.y), (rx, ry), medium, t)
    return Collision(fl.boundary, s, np.array([fl.x, fl.y]), fl.distance, t, p.direction.copy(),
                     fl.grazing, incidence_xy(dx, dy, nx, ny), out)


def collision_F(scn: "Scenario", p: PhasePoint) -> Collision:
    """Next hit of a medium-1 germ on either boundary, with its specular reflection."""
    return _collide(scn, p, 1)


def collision_F2(scn: "Scenario", p: PhasePoint) -> Collision:
    """Next hit of a germ travelling inside the inclusion."""
    if scn.inner_curve is None:
        raise NotOnBoundary("scenario has no inclusion")
    return _collide(scn, p, 2)


# ---------------------------------------------------------------------------
# events and trees


@dataclass
class InterfaceEvent:
    kind: EventKind
    boundary: str
    s: float
    point: np.ndarray
    time: float
    theta1: float | None
    theta2: float | None
    depth: int = 0
    half_rays: dict[str, np.ndarray] = field(default_factory=dict)
    gliding: tuple[str, ...] = ()
    slots: dict[str, int] = field(default_factory=dict)
    id: int = -1
    in_gamma: bool = False

    @property
    def outgoing(self) -> list[str]:
        return [k for k in ("out1", "out2") if k in self.half_rays]


def _event(scn, boundary, u, slot, d, grazing, time, depth) -> InterfaceEvent:
    g = node_geometry(scn, boundary, u, slot, d, grazing)
    curve = scn.curve(boundary)
    return InterfaceEvent(g.kind, boundary, curve.s_of_u(u), np.array(curve.xy(u)), time,
                          g.theta1, g.theta2, depth,
                          {k: np.array(v) for k, v in g.dirs.items()}, g.gliding)


def root_event(scn: "Scenario", p: PhasePoint) -> InterfaceEvent:
    """Event at the root germ, treating the germ as its outgoing half-ray."""
    if p.boundary == "interior":
        p = project_interior(scn, p.position, p.direction, p.medium, p.time)
    curve = scn.curve(p.boundary)
    u = curve.u_of_point(*p.position)
    _, _, nx, ny, _ = curve.frame_u(u)
    grazing = abs(p.direction[0] * nx + p.direction[1] * ny) < math.sin(scn.tol.tangency)
    return _event(scn, p.boundary, u, f"out{p.medium}", tuple(p.direction), grazing, p.time, 0)


def step(scn: "Scenario", p: PhasePoint) -> InterfaceEvent:
    """Fly ``p`` to its next boundary and classify the event there."""
    if p.boundary == "interior":
        p = project_interior(scn, p.position, p.direction, p.medium, p.time)
    col = _collide(scn, p, p.medium)
    curve = scn.curve(col.boundary)
    u = curve.u_of_point(*col.point)
    return _event(scn, col.boundary, u, f"in{p.medium}", tuple(p.direction), col.grazing, col.time, 0)


@dataclass
class Edge:
    """A straight segment of one half-ray between two events (or a leaf)."""

    id: int
    medium: int
    src: int | None
    dst: int | None
    start: np.ndarray
    end: np.ndarray
    direction: np.ndarray
    length: float
    speed: float
    t0: float
    t1: float
    depth: int
    traced: str
    leaf: str | None = None

    @property
    def duration(self) -> float:
        return self.t1 - self.t0


@dataclass
class RayTree:
    root: PhasePoint
    nodes: list[InterfaceEvent]
    edges: list[Edge]
    gamma: BoundaryArc | None = None
    horizon: float = 0.0
    depth_cap: int = 0

    @property
    def root_node(self) -> InterfaceEvent:
        return self.nodes[0]

    @property
    def germ(self) -> int | None:
        """Edge carrying the root germ (the root's outgoing half-ray)."""
        return self.nodes[0].slots.get(f"out{self.root.medium}")

    def leaves(self) -> list[Edge]:
        return [e for e in self.edges if e.leaf is not None]

    def endpoints(self, edge: Edge) -> tuple[int | None, int | None]:
        return edge.src, edge.dst

    def event_rows(self) -> list[tuple]:
        rows = []
        for n in self.nodes:
            rows.append((n.time, n.boundary, n.s, str(n.kind),
                         "" if n.theta1 is None else n.theta1,
                         "" if n.theta2 is None else n.theta2, n.depth))
        return rows

    def to_csv(self) -> str:
        return event_log_csv(self.event_rows())


def event_log_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time", "boundary", "s", "kind", "theta1", "theta2", "depth"])
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def trace(scn: "Scenario", p0: PhasePoint, horizon: float | None = None,
          depth_cap: int | None = None, reverse: bool = False,
          gamma: BoundaryArc | None = None, max_events: int | None = None) -> RayTree:
    """Grow the splitting tree of ``p0``.

    Outgoing half-rays are followed forward in time and, with ``reverse``,
    incoming half-rays backward in time, for ``|t - t0| <= horizon``.  Edges
    landing strictly inside ``gamma`` (default: the scenario's observation
    region) stop there as ``HitGamma`` leaves.
    """
    T = scn.horizon if horizon is None else float(horizon)
    cap = scn.depth_cap if depth_cap is None else int(depth_cap)
    budget = scn.max_events if max_events is None else int(max_events)
    gamma = scn.gamma if gamma is None else gamma
    in_gamma = ArcTest(scn.outer_curve, gamma, scn.tol.geom)

    root = root_event(scn, p0)
    root.id = 0
    if root.boundary == "outer":
        root.in_gamma = in_gamma(scn.outer_curve.u_of_s(root.s))
    tree = RayTree(p0, [root], [], gamma, T, cap)
    t_start = root.time
    root_medium = p0.medium

    queue: deque = deque()

    def schedule(node: InterfaceEvent, arrived: str | None, depth: int):
        m_arr = slot_medium(arrived) if arrived else root_medium
        for slot in SLOTS:
            if slot == arrived or (slot not in node.half_rays and slot not in node.gliding):
                continue
            d = depth if slot_medium(slot) == m_arr else depth + 1
            queue.append((node.id, slot, d))

    schedule(root, None, 0)
    while queue:
        nid, slot, depth = queue.popleft()
        node = tree.nodes[nid]
        forward = slot.startswith("out")
        if not forward and not reverse:
            continue
        if abs(node.time - t_start) >= T:
            continue
        m = slot_medium(slot)
        c = scn.speed(m)
        pt = node.point
        eid = len(tree.edges)

        def stub(leaf):
            e = Edge(eid, m, nid if forward else None, None if forward else nid, pt.copy(), pt.copy(),
                     np.zeros(2), 0.0, c, node.time, node.time, depth, "forward" if forward else "backward",
                     leaf)
            tree.edges.append(e)
            node.slots[slot] = eid

        if slot in node.gliding:
            stub(GLIDING)
            continue
        if depth > cap:
            stub(DEPTH_EXPIRED)
            continue
        d = node.half_rays[slot]
        sgn = 1.0 if forward else -1.0
        fl = fly(scn, m, float(pt[0]), float(pt[1]), sgn * d[0], sgn * d[1])
        if fl is None:
            raise StuckRay(f"half-ray {slot} of event {nid} reaches no boundary")
        dt = fl.distance / c
        t_far = node.time + sgn * dt
        far = np.array([fl.x, fl.y])
        if abs(t_far - t_start) > T:
            remaining = T - abs(node.time - t_start)
            far = pt + sgn * d * (remaining * c)
            t_far = node.time + sgn * remaining
            leaf, length = TIME_EXPIRED, remaining * c
        elif fl.boundary == "outer" and not fl.grazing and in_gamma(fl.u):
            leaf, length = HIT_GAMMA, fl.distance
        else:
            leaf, length = None, fl.distance
        child_id = None
        if leaf is None:
            if len(tree.nodes) >= budget:
                raise EventBudget(f"more than {budget} events")
            arrive = partner(slot)
            child = _event(scn, fl.boundary, fl.u, arrive, tuple(d), fl.grazing, t_far, depth)
            child.id = child_id = len(tree.nodes)
            child.slots[arrive] = eid
            tree.nodes.append(child)
            schedule(child, arrive, depth)
        if forward:
            e = Edge(eid, m, nid, child_id, pt.copy(), far, d.copy(), length, c, node.time, t_far,
                     depth, "forward", leaf)
        else:
            e = Edge(eid, m, child_id, nid, far, pt.copy(), d.copy(), length, c, t_far, node.time,
                     depth, "backward", leaf)
        tree.edges.append(e)
        node.slots[slot] = eid
    return tree


# ---------------------------------------------------------------------------
# gliding


@dataclass
class GlideResult:
    boundary: str
    s_start: float
    s_end: float
    duration: float
    times: np.ndarray
    s: np.ndarray
    germs: list[PhasePoint]
    observed: bool
    observed_time: float | None


def glide(scn: "Scenario", s0: float, sign: int, boundary: str, until: float,
          spacing: float | None = None, region: BoundaryArc | None = None,
          samples: int = 64) -> GlideResult:
    """Move along a boundary at the medium speed for ``until`` seconds.

    Gliding on the inclusion emits transmitted germs into medium 1 at the
    critical angle every ``spacing`` units of arc length.  ``region`` is an
    observation arc on the same boundary; entering it marks observation.
    """
    curve = scn.curve(boundary)
    c = scn.c2 if boundary == "inner" else scn.c1
    spacing = scn.spacing if spacing is None else float(spacing)
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    sign = 1 if sign >= 0 else -1
    P = curve.perimeter
    L = c * until
    times = np.linspace(0.0, until, samples + 1)
    s_path = np.mod(s0 + sign * c * times / P, 1.0)
    germs: list[PhasePoint] = []
    if boundary == "inner":
        theta_c = math.asin(min(scn.c1 / scn.c2, 1.0))
        n_emit = int(math.floor(L / spacing + 1e-9))
        for k in range(1, n_emit + 1):
            s = (s0 + sign * k * spacing / P) % 1.0
            fr = curve.frame_at(s)
            d = math.cos(theta_c) * fr.normal + math.sin(theta_c) * sign * fr.tangent
            germs.append(PhasePoint("inner", s, curve.point_at(s), d, 1, k * spacing / c))
    observed, t_obs = False, None
    if region is not None and until >= 0:
        if region.contains(s0):
            observed, t_obs = True, 0.0
        elif not region.empty:
            targets = [region.lo, region.hi] if not region.full else [s0]
            best = None
            for tgt in targets:
                ds = ((tgt - s0) * sign) % 1.0
                cand = ds * P / c
                if best is None or cand < best:
                    best = cand
            if best is not None and best < until:
                observed, t_obs = True, best
    return GlideResult(boundary, s0 % 1.0, float(s_path[-1]), float(until), times, s_path,
                       germs, observed, t_obs)
