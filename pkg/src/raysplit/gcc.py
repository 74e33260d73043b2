"""Observability checks: label propagation on ray trees, sampled verdicts, single-medium GCC."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

import numpy as np

from . import batch
from .errors import EventBudget, GrazingOuter
from .geometry import ArcTest, BoundaryArc, BoundaryCurve
from .optics import EventKind
from .tracer import (HIT_GAMMA, SLOTS, RayTree, StuckRay, fly, node_geometry, partner, phase_point,
                     root_event, slot_medium)

if TYPE_CHECKING:
    from .scenario import Scenario

OBSERVED = "Observed"
UNDETERMINED = "Undetermined"
TRAPPED = "TrappedWitness"

FOUR_SLOT = (EventKind.REFLECT_TRANSMIT, EventKind.CRITICAL_GLIDING)


# ---------------------------------------------------------------------------
# explicit fixpoint on a traced tree


@dataclass
class ObservationState:
    """Observed labels on tree edges; everything else is Unknown."""

    observed: set[int] = field(default_factory=set)
    root: str = UNDETERMINED
    time: float | None = None

    def copy(self) -> "ObservationState":
        return ObservationState(set(self.observed), self.root, self.time)


def seed_observed(tree: RayTree, gamma: BoundaryArc | None = None) -> ObservationState:
    """Mark every edge that ends strictly inside Gamma with a non-grazing hit.

    Trees traced against a different arc than ``gamma`` are re-checked from
    the edge endpoints.
    """
    st = ObservationState()
    if gamma is None or gamma == tree.gamma:
        st.observed = {e.id for e in tree.edges if e.leaf == HIT_GAMMA}
    else:
        raise ValueError("trace the tree against the arc you want to seed with")
    _set_root(tree, st)
    return st


def node_rule(kind: EventKind, labels: dict[str, bool]) -> bool:
    """True if the known labels at an event force all of its half-rays observed."""
    n = sum(labels.values())
    if kind in FOUR_SLOT:
        return n >= 2
    return n >= 1


def _set_root(tree: RayTree, st: ObservationState) -> None:
    germ = tree.germ
    if germ is not None and germ in st.observed:
        st.root = OBSERVED
        times = [abs(e.t1 - tree.root_node.time) if e.traced == "forward" else abs(tree.root_node.time - e.t0)
                 for e in tree.edges if e.leaf == HIT_GAMMA and e.id in st.observed]
        st.time = max(times) if times else 0.0
    else:
        st.root = UNDETERMINED


def propagate_observation(tree: RayTree, state: ObservationState,
                          order: Iterable[int] | None = None) -> ObservationState:
    """Least fixpoint of the event rules, by worklist.

    Outer reflection, total internal reflection and diffractive contact make
    their two half-rays equivalent; a splitting event makes all four observed
    as soon as two are.  Truncated edges stay Unknown.  ``order`` optionally
    fixes the initial worklist order (used to test confluence).
    """
    st = state.copy()
    obs = st.observed
    nodes = tree.nodes
    edge_nodes = {e.id: [v for v in (e.src, e.dst) if v is not None] for e in tree.edges}
    work = list(order) if order is not None else list(range(len(nodes)))
    queued = set(work)
    while work:
        v = work.pop()
        queued.discard(v)
        node = nodes[v]
        labels = {sl: eid in obs for sl, eid in node.slots.items()}
        if not node_rule(node.kind, labels) or all(labels.values()):
            continue
        for sl, eid in node.slots.items():
            if eid not in obs:
                obs.add(eid)
                for w in edge_nodes[eid]:
                    if w != v and w not in queued:
                        work.append(w)
                        queued.add(w)
    _set_root(tree, st)
    return st


def observe_tree(tree: RayTree) -> ObservationState:
    return propagate_observation(tree, seed_observed(tree))


# ---------------------------------------------------------------------------
# lazy evaluation straight from the dynamics


@dataclass
class _Node:
    boundary: str
    u: float
    x: float
    y: float
    time: float
    dirs: dict
    gliding: tuple


class _Evaluator:
    """Decides whether a germ is observed without materialising its tree.

    A half-ray leaving an event is observed iff it lands in Gamma or, at the
    event it reaches, enough of the remaining half-rays are observed (one at a
    two-ray event, two at a splitting event).  On a tree this is exactly the
    least fixpoint computed by :func:`propagate_observation`.  With
    ``resolve_glide`` gliding half-rays are additionally followed along the
    inclusion (see :meth:`glide`); without it they stay Unknown as in the tree.
    """

    def __init__(self, scn: "Scenario", gamma: BoundaryArc, horizon: float, depth_cap: int,
                 max_events: int, resolve_glide: bool = True):
        self.scn = scn
        self.resolve_glide = resolve_glide
        self.in_gamma = ArcTest(scn.outer_curve, gamma, scn.tol.geom)
        self.T = horizon
        self.cap = depth_cap
        self.budget = max_events
        self.count = 0
        self.t0 = 0.0

    def half_ray(self, node: _Node, slot: str, depth: int) -> float | None:
        if abs(node.time - self.t0) >= self.T:
            return None
        if slot in node.gliding:
            return self.glide(node, slot, depth) if self.resolve_glide else None
        scn = self.scn
        m = slot_medium(slot)
        c = scn.speed(m)
        dx, dy = node.dirs[slot]
        sgn = 1.0 if slot.startswith("out") else -1.0
        fl = fly(scn, m, node.x, node.y, sgn * dx, sgn * dy)
        if fl is None:
            raise StuckRay("half-ray reaches no boundary")
        t_far = node.time + sgn * fl.distance / c
        if abs(t_far - self.t0) > self.T:
            return None
        if fl.boundary == "outer" and not fl.grazing and self.in_gamma(fl.u):
            return abs(t_far - self.t0)
        self.count += 1
        if self.count > self.budget:
            raise EventBudget(f"more than {self.budget} events")
        arrive = partner(slot)
        g = node_geometry(scn, fl.boundary, fl.u, arrive, (dx, dy), fl.grazing)
        w = _Node(fl.boundary, fl.u, fl.x, fl.y, t_far, g.dirs, g.gliding)
        return self.rest(w, arrive, depth)

    def glide(self, node: _Node, slot: str, depth: int) -> float | None:
        """A gliding half-ray is observed once both critical rays at a later glide point are.

        The glide is sampled every ``scn.spacing`` of arc length, moving with
        the tangential part of the feeding medium-1 ray (forward in time for
        an outgoing slot, backward for an incoming one).
        """
        scn = self.scn
        inner = scn.inner_curve
        if depth + 1 > self.cap:
            return None
        tx, ty, _, _, _ = inner.frame_u(node.u)
        feed = node.dirs.get("in1") or node.dirs.get("out1")
        sigma = 1.0 if feed[0] * tx + feed[1] * ty >= 0.0 else -1.0
        forward = slot.startswith("out")
        if not forward:
            sigma = -sigma
        sgn_t = 1.0 if forward else -1.0
        c2 = scn.c2
        sin_c = min(scn.c1 / c2, 1.0)
        cos_c = math.sqrt(1.0 - sin_c * sin_c)
        s0 = inner.s_of_u(node.u)
        step = scn.spacing / inner.perimeter
        k = 1
        while True:
            ds = k * step
            t = node.time + sgn_t * ds * inner.perimeter / c2
            if ds >= 1.0 or abs(t - self.t0) >= self.T:
                return None
            u = inner.u_of_s(s0 + sigma * ds)
            x, y = inner.xy(u)
            tx, ty, nx, ny, _ = inner.frame_u(u)
            gx, gy = sigma * tx, sigma * ty
            dirs = {"out1": (sin_c * gx + cos_c * nx, sin_c * gy + cos_c * ny),
                    "in1": (sin_c * gx - cos_c * nx, sin_c * gy - cos_c * ny)}
            w = _Node("inner", u, x, y, t, dirs, ())
            a = self.half_ray(w, "out1", depth + 1)
            if a is not None:
                b = self.half_ray(w, "in1", depth + 1)
                if b is not None:
                    return max(a, b)
            k += 1

    def rest(self, w: _Node, known: str, depth: int) -> float | None:
        """Time at which the other half-rays of ``w`` force ``known`` observed."""
        m = slot_medium(known)
        others = [sl for sl in SLOTS if sl != known and (sl in w.dirs or sl in w.gliding)]
        others.sort(key=slot_medium)
        need = 2 if len(others) >= 3 else 1
        found: list[float] = []
        for k, sl in enumerate(others):
            if len(found) + len(others) - k < need:
                break
            d = depth if slot_medium(sl) == m else depth + 1
            if d > self.cap:
                continue
            r = self.half_ray(w, sl, d)
            if r is not None:
                found.append(r)
                if len(found) >= need:
                    return max(found)
        return None

    def germ(self, boundary: str, s: float, theta: float, medium: int) -> tuple[str, float | None]:
        scn = self.scn
        p = phase_point(scn, boundary, s, theta, medium)
        root = root_event(scn, p)
        self.t0 = root.time
        self.count = 0
        u = scn.curve(root.boundary).u_of_s(root.s)
        w = _Node(root.boundary, u, float(root.point[0]), float(root.point[1]), root.time,
                  {k: tuple(v) for k, v in root.half_rays.items()}, root.gliding)
        slot = f"out{medium}"
        t = self.half_ray(w, slot, 0)
        if t is None:
            t = self.rest(w, slot, 0)
        return (OBSERVED, t) if t is not None else (UNDETERMINED, None)


@dataclass
class SampleVerdict:
    boundary: str
    medium: int
    s: float
    theta: float
    verdict: str
    time: float | None = None
    note: str = ""


@dataclass
class ObservabilityReport:
    samples: list[SampleVerdict]
    trapped: list = field(default_factory=list)
    horizon: float = 0.0
    depth_cap: int = 0

    @property
    def all_observed(self) -> bool:
        return all(v.verdict == OBSERVED for v in self.samples) and not self.trapped

    @property
    def undetermined(self) -> list[SampleVerdict]:
        return [v for v in self.samples if v.verdict != OBSERVED]

    @property
    def max_time(self) -> float | None:
        ts = [v.time for v in self.samples if v.time is not None]
        return float(max(ts)) if ts else None

    @property
    def exit_code(self) -> int:
        if self.trapped:
            return 3
        return 0 if self.all_observed else 2

    def summary(self) -> str:
        n = len(self.samples)
        k = n - len(self.undetermined)
        if self.trapped:
            head = f"trapped witness: {len(self.trapped)} periodic orbit(s) avoid Gamma"
        elif self.all_observed:
            head = "all samples observed"
        else:
            head = f"undetermined samples: {len(self.undetermined)}"
        mt = self.max_time
        return (f"{head}\nobserved {k}/{n} (horizon {self.horizon}, depth {self.depth_cap})\n"
                f"max time: {'n/a' if mt is None else repr(mt)}")

    def rows(self) -> str:
        out = ["boundary,medium,s,theta,verdict,time,note"]
        for v in self.samples:
            t = "" if v.time is None else repr(v.time)
            out.append(f"{v.boundary},{v.medium},{v.s!r},{v.theta!r},{v.verdict},{t},{v.note}")
        return "\n".join(out) + "\n"


def sample_grid(n_s: int, n_theta: int) -> tuple[np.ndarray, np.ndarray]:
    """Boundary parameters ``i/n_s`` and angles ``j*pi/n_theta`` (tangential ends excluded)."""
    return np.arange(n_s) / n_s, np.arange(1, n_theta) * math.pi / n_theta


def check_observability(scn: "Scenario", gamma: BoundaryArc | None = None,
                        horizon: float | None = None, grid: tuple[int, int] | None = None,
                        depth_cap: int | None = None, witnesses: bool = True,
                        boundaries: tuple[tuple[str, int], ...] | None = None,
                        stop_on_trap: bool = True) -> ObservabilityReport:
    """Sampled observability verdict for every germ on the grid.

    Germs leave the outer boundary into the exterior medium and the inner
    boundary into both media.  With ``witnesses`` the trapped-orbit detector
    runs first against Gamma; any orbit it certifies makes the report a
    trapped witness, and with ``stop_on_trap`` the germ sampling is skipped
    since its outcome can no longer change the verdict.
    """
    from .escape import find_trapped_rays

    gamma = scn.gamma if gamma is None else gamma
    T = scn.horizon if horizon is None else float(horizon)
    cap = scn.depth_cap if depth_cap is None else int(depth_cap)
    ns, nt = grid or scn.obs_grid
    s_vals, th_vals = sample_grid(ns, nt)
    if boundaries is None:
        boundaries = (("outer", 1),)
        if scn.inner_curve is not None:
            boundaries += (("inner", 1), ("inner", 2))
    trapped = []
    if witnesses and T > 0 and not gamma.full:
        trapped = find_trapped_rays(scn, gamma, None, T)
        if trapped and stop_on_trap:
            return ObservabilityReport([], trapped, T, cap)
    ev = _Evaluator(scn, gamma, T, cap, scn.max_events)
    out = []
    for boundary, medium in boundaries:
        for s in s_vals:
            for th in th_vals:
                try:
                    verdict, t = ev.germ(boundary, float(s), float(th), medium)
                    note = ""
                except EventBudget:
                    verdict, t, note = UNDETERMINED, None, "budget"
                except (StuckRay, GrazingOuter) as exc:
                    verdict, t, note = UNDETERMINED, None, type(exc).__name__
                out.append(SampleVerdict(boundary, medium, float(s), float(th), verdict, t, note))
    return ObservabilityReport(out, trapped, T, cap)


# ---------------------------------------------------------------------------
# single-medium GCC


@dataclass
class GCCResult:
    passed: bool
    max_time: float | None
    failures: int = 0
    witness: dict | None = None
    witnesses: list[dict] = field(default_factory=list)


def _periodic_orbit(curve: BoundaryCurve, s: float, theta: float, max_returns: int = 400,
                    tol: float = 1e-8) -> dict | None:
    x, y, dx, dy = (float(a[0]) for a in batch.launch(curve, [s], [theta]))
    x0, y0, dx0, dy0 = x, y, dx, dy
    pts = []
    for k in range(max_returns):
        h = curve.hit(x, y, dx, dy)
        if h is None:
            return None
        lam, u, _ = h
        x, y = curve.xy(u)
        _, _, nx, ny, _ = curve.frame_u(u)
        c = 2.0 * (dx * nx + dy * ny)
        dx, dy = dx - c * nx, dy - c * ny
        pts.append((x, y))
        if math.hypot(x - x0, y - y0) < tol and math.hypot(dx - dx0, dy - dy0) < tol:
            return {"s": s, "theta": theta, "period": k + 1, "points": np.array(pts)}
    return None


def check_gcc_simple(curve: BoundaryCurve, gamma: BoundaryArc, horizon: float = 20.0,
                     grid: tuple[int, int] = (360, 180), speed: float = 1.0) -> GCCResult:
    """Billiard GCC check in a single medium.

    Every grid orbit must hit ``gamma`` non-tangentially at a positive time no
    later than ``horizon``.  Failing samples whose orbits close are reported
    as periodic witnesses, one per period, shortest period first.
    """
    ns, nt = grid
    s_vals, th_vals = sample_grid(ns, nt)
    S, TH = np.meshgrid(s_vals, th_vals, indexing="ij")
    S, TH = S.ravel(), TH.ravel()
    x, y, dx, dy = batch.launch(curve, S, TH)
    test = ArcTest(curve, gamma, 1e-10)
    n = len(S)
    t = np.zeros(n)
    hit_time = np.full(n, np.nan)
    live = np.ones(n, bool)
    while np.any(live):
        idx = np.flatnonzero(live)
        lam, u = curve.hit_batch(x[idx], y[idx], dx[idx], dy[idx])
        bad = ~np.isfinite(lam)
        live[idx[bad]] = False
        idx, lam, u = idx[~bad], lam[~bad], u[~bad]
        t[idx] += lam / speed
        late = t[idx] > horizon
        live[idx[late]] = False
        idx, u = idx[~late], u[~late]
        p = curve.xy_batch(u)
        _, _, nx, ny = batch.frames(curve, u)
        graze = batch.incidence(dx[idx], dy[idx], nx, ny) > math.pi / 2 - 1e-9
        got = test.batch(u) & ~graze
        hit_time[idx[got]] = t[idx[got]]
        live[idx[got]] = False
        x[idx], y[idx] = p[:, 0], p[:, 1]
        dx[idx], dy[idx] = batch.reflect(dx[idx], dy[idx], nx, ny)
    failed = np.flatnonzero(~np.isfinite(hit_time))
    if failed.size == 0:
        return GCCResult(True, float(np.max(hit_time)), 0)
    witnesses: list[dict] = []
    for i in _by_period(curve, S[failed], TH[failed], failed):
        if len(witnesses) >= 8:
            break
        orb = _periodic_orbit(curve, float(S[i]), float(TH[i]))
        if orb is None or any(orb["period"] == w["period"] for w in witnesses):
            continue
        witnesses.append(orb)
    fallback = {"s": float(S[failed[0]]), "theta": float(TH[failed[0]]), "period": None, "points": None}
    return GCCResult(False, None, int(failed.size), witnesses[0] if witnesses else fallback, witnesses)


def _by_period(curve: BoundaryCurve, s, th, ids, max_returns: int = 64, tol: float = 1e-8):
    """Ids of closing orbits, shortest period first (sample order breaks ties)."""
    x, y, dx, dy = batch.launch(curve, s, th)
    x0, y0, dx0, dy0 = x.copy(), y.copy(), dx.copy(), dy.copy()
    period = np.zeros(len(s), int)
    for k in range(1, max_returns + 1):
        _, u = curve.hit_batch(x, y, dx, dy)
        u = np.where(np.isfinite(u), u, 0.0)
        p = curve.xy_batch(u)
        _, _, nx, ny = batch.frames(curve, u)
        x, y = p[:, 0], p[:, 1]
        dx, dy = batch.reflect(dx, dy, nx, ny)
        close = (period == 0) & (np.hypot(x - x0, y - y0) < tol) & (np.hypot(dx - dx0, dy - dy0) < tol)
        period[close] = k
    order = np.lexsort((np.arange(len(s)), period))
    return [int(ids[j]) for j in order if period[j] > 0]


def _same_points(a: np.ndarray, b: np.ndarray, tol: float = 1e-6) -> bool:
    if len(a) != len(b):
        return False
    return all(np.min(np.hypot(*(b - p).T)) < tol for p in a)
