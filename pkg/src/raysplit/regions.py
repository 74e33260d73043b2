"""Observation regions as boundary arcs and the iterative (Gamma1, Gamma2) construction.

Arcs are :class:`~raysplit.geometry.BoundaryArc` objects oriented
counter-clockwise.  On both boundaries endpoint 1 is ``lo`` and endpoint 2 is
``hi``; with that orientation the paper-style pairing of "opposite" endpoints
is simply ``lo`` with ``hi``.

Outline of :func:`construct`:

1. start from Gamma(x0) (or a given arc) and push each endpoint into the
   unobserved side while the inward normal ray misses the inclusion, stopping
   where that ray becomes tangent to it;
2. Gamma2 starts as the inner arc between the tangency points that maximise
   the localisation function L at the two endpoints;
3. each inner endpoint grows up to the second intersection of the line through
   the opposite outer endpoint, keeping only points whose outward normal ray
   lands in Gamma1;
4. each outer endpoint grows until its inward normal ray hits the matching
   inner endpoint;
5. repeat 3-4 until Gamma2 stops changing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy import optimize

from .errors import (DegenerateGeometry, EmptyComplement, IterationBudget, NoTangencyRoot,
                     RaysplitError)
from .geometry import BoundaryArc, BoundaryCurve
from .tracer import fly

if TYPE_CHECKING:
    from .scenario import Scenario

__all__ = ["BoundaryArc", "gamma_x0", "localisation_L", "step1_gamma1_0", "step2_gamma2_0",
           "extend_gamma2", "extend_gamma1", "construct", "witness_x02", "ConstructionState",
           "ResidualRegion", "WitnessMismatch", "EmptyGamma2"]


class WitnessMismatch(RaysplitError):
    def __init__(self, message: str, distance: float):
        super().__init__(message)
        self.distance = distance


class EmptyGamma2(RaysplitError):
    pass


def gamma_x0(curve: BoundaryCurve, x0, boundary: str = "outer") -> BoundaryArc:
    """The open arc ``{x : <x - x0, n(x)> > 0}`` seen from outside point ``x0``."""
    lo, hi = curve.tangent_points_from(x0)
    return BoundaryArc(boundary, lo, hi)


def _signed(ds: float) -> float:
    """Map a parameter difference to (-1/2, 1/2]."""
    return ds - math.floor(ds + 0.5)


# ---------------------------------------------------------------------------
# Step 1 and 2


def localisation_L(scn: "Scenario", s: float, sign: int) -> tuple[float, float]:
    """Largest cosine between ``sign * delta'(s)`` and directions to the inclusion.

    Returns ``(L, s2)`` where ``s2`` is the inner parameter attaining it.  The
    tangent line of the outer curve never meets the inclusion, so the maximum
    sits at one of the two tangency points seen from ``delta(s)``.
    """
    outer, inner = scn.outer_curve, scn.inner_curve
    p = outer.point_at(s)
    v = sign * outer.frame_at(s).tangent
    best = None
    for s2 in inner.tangent_points_from(p):
        w = inner.point_at(s2) - p
        c = float(v @ w) / math.hypot(*w)
        if best is None or c > best[0]:
            best = (c, s2)
    return best


@dataclass
class Step1Side:
    branch: str  # "extended" | "unchanged" | "no_root" | "overlap"
    s: float
    sweep: float = 0.0


def _first_root(f, span: float, steps: int = 512) -> float | None:
    """Smallest sigma in (0, span] where the continuous ``f`` changes sign."""
    prev_x, prev_f = 0.0, f(0.0)
    for k in range(1, steps + 1):
        x = span * k / steps
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx > 0) != (prev_f > 0):
            return optimize.brentq(f, prev_x, x, xtol=1e-13, rtol=1e-15)
        prev_x, prev_f = x, fx
    return None


def step1_gamma1_0(scn: "Scenario", start: BoundaryArc) -> tuple[BoundaryArc, tuple[Step1Side, Step1Side]]:
    """Extend each endpoint of ``start`` while the inward normal ray misses the inclusion.

    An endpoint moves only when the inclusion lies entirely behind its normal
    line (L < 0).  It then moves away from the arc up to the first parameter
    where L = 0, i.e. where the inward normal ray touches the inclusion.  The
    sweep is limited to half the perimeter; without a root the endpoint stays
    and the side is flagged ``no_root`` (a degenerate scenario, not an error).
    """
    sides = []
    for sign, s_end in ((1, start.lo), (-1, start.hi)):
        # moving away from the arc: decreasing s at lo, increasing s at hi
        def L(sig):
            return localisation_L(scn, s_end - sign * sig, sign)[0]

        L0 = L(0.0)
        root = _first_root(L, 0.5)
        if root is None:
            # no tangency anywhere in the sweep (e.g. concentric circles)
            sides.append(Step1Side("no_root", s_end))
        elif L0 >= 0.0:
            sides.append(Step1Side("unchanged", s_end))
        else:
            sides.append(Step1Side("extended", (s_end - sign * root) % 1.0, root))
    lo, hi = sides[0], sides[1]
    if lo.sweep + hi.sweep >= 1.0 - start.length:
        # the two extensions would swallow the whole unobserved arc
        lo = Step1Side("overlap", start.lo)
        hi = Step1Side("overlap", start.hi)
    return BoundaryArc("outer", lo.s, hi.s), (lo, hi)


def step2_gamma2_0(scn: "Scenario", gamma1: BoundaryArc) -> BoundaryArc:
    """Inner arc between the L-maximising tangency points of the two endpoints."""
    _, a = localisation_L(scn, gamma1.lo, 1)
    _, b = localisation_L(scn, gamma1.hi, -1)
    arc = BoundaryArc("inner", a, b)
    if arc.length <= scn.tol.arc:
        raise EmptyGamma2("initial inner arc is empty")
    return arc


# ---------------------------------------------------------------------------
# Steps 3 and 4


def normal_landing(scn: "Scenario", s2: float) -> float:
    """Outer parameter hit by the outward normal ray from inner parameter ``s2``."""
    inner = scn.inner_curve
    u = inner.u_of_s(s2)
    x, y = inner.xy(u)
    _, _, nx, ny, _ = inner.frame_u(u)
    fl = fly(scn, 1, x, y, nx, ny)
    return scn.outer_curve.s_of_u(fl.u)


def inward_normal_hit(scn: "Scenario", s1: float):
    """First boundary hit of the inward normal ray from outer parameter ``s1``.

    Returns ``(boundary, s, incidence_cosine)``.
    """
    outer = scn.outer_curve
    u = outer.u_of_s(s1)
    x, y = outer.xy(u)
    _, _, nx, ny, _ = outer.frame_u(u)
    fl = fly(scn, 1, x, y, -nx, -ny)
    curve = scn.curve(fl.boundary)
    _, _, mx, my, _ = curve.frame_u(fl.u)
    return fl.boundary, curve.s_of_u(fl.u), abs(nx * mx + ny * my)


def _line_second_hit(scn: "Scenario", a: np.ndarray, b_s: float) -> float | None:
    """Other intersection of line(a, delta2(b_s)) with the inner curve, if any."""
    inner = scn.inner_curve
    b = inner.point_at(b_s)
    d = b - a
    d = d / math.hypot(*d)
    h = inner.hit(float(a[0]), float(a[1]), float(d[0]), float(d[1]), 0.0)
    if h is None:
        return None
    lam_entry = h[0]
    ex, ey = a + lam_entry * d
    # exit point: continue from just past the entry
    h2 = inner.hit(float(ex), float(ey), float(d[0]), float(d[1]), 1e-9)
    pts = [inner.s_of_u(h[1])]
    if h2 is not None:
        pts.append(inner.s_of_u(h2[1]))
    others = [s for s in pts if abs(_signed(s - b_s)) > 1e-9]
    if not others:
        return None
    return others[0]


@dataclass
class SideInfo:
    line_hit: bool = False
    moved: bool = False
    normal_parallel: bool = False


def _grow_while(pred, span: float, steps: int = 256) -> float:
    """Largest sigma in [0, span] such that ``pred`` holds on (0, sigma]."""
    if span <= 0:
        return 0.0
    h = span / steps
    last_ok = 0.0
    for k in range(1, steps + 1):
        x = k * h
        if pred(x):
            last_ok = x
            continue
        lo, hi = last_ok, x
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if pred(mid):
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-13:
                break
        return lo
    return span


def extend_gamma2(scn: "Scenario", gamma1: BoundaryArc, gamma2: BoundaryArc):
    """Step 3: grow the inner arc toward the line intersections, filtered by normal rays."""
    outer = scn.outer_curve
    tol = scn.tol.arc
    free = 1.0 - gamma2.length
    new = {}
    infos = []
    for side, sign, a_s, b_s, s_end in ((0, 1, gamma1.lo, gamma2.hi, gamma2.lo),
                                        (1, -1, gamma1.hi, gamma2.lo, gamma2.hi)):
        info = SideInfo()
        other = _line_second_hit(scn, outer.point_at(a_s), b_s)
        reach = 0.0
        if other is not None:
            info.line_hit = True
            reach = ((s_end - other) * sign) % 1.0
            if reach >= free:
                reach = 0.0
        if reach > tol:
            grown = _grow_while(lambda sig: gamma1.contains(normal_landing(scn, s_end - sign * sig),
                                                            tol), reach)
            if grown > tol:
                info.moved = True
                s_end = (s_end - sign * grown) % 1.0
        new[side] = s_end
        infos.append(info)
    return BoundaryArc("inner", new[0], new[1]), infos


def extend_gamma1(scn: "Scenario", gamma1: BoundaryArc, gamma2: BoundaryArc):
    """Step 4: push outer endpoints until their inward normal ray hits the inner endpoints."""
    tol = scn.tol.arc
    free = 1.0 - gamma1.length
    new = {}
    infos = []
    for side, sign, s_end, target in ((0, 1, gamma1.lo, gamma2.lo), (1, -1, gamma1.hi, gamma2.hi)):
        info = SideInfo()

        def miss(sig):
            b, s2, _ = inward_normal_hit(scn, s_end - sign * sig)
            return None if b != "inner" else _signed(s2 - target)

        span = max(free - 1e-9, 0.0)
        steps = 1024
        prev = (0.0, miss(0.0))
        found = None
        if prev[1] is not None and abs(prev[1]) <= tol:
            found = 0.0
        else:
            for k in range(1, steps + 1):
                x = span * k / steps
                fx = miss(x)
                if fx is not None and prev[1] is not None and (fx > 0) != (prev[1] > 0) \
                        and abs(fx - prev[1]) < 0.25:
                    found = optimize.brentq(lambda t: miss(t), prev[0], x, xtol=1e-14, rtol=1e-15)
                    break
                if fx is not None and fx == 0.0:
                    found = x
                    break
                prev = (x, fx)
        if found is not None and found > tol:
            info.moved = True
            s_end = (s_end - sign * found) % 1.0
        b, _, cos_inc = inward_normal_hit(scn, s_end)
        info.normal_parallel = b == "inner" and cos_inc > 1.0 - 1e-12
        new[side] = s_end
        infos.append(info)
    return BoundaryArc("outer", new[0], new[1]), infos


# ---------------------------------------------------------------------------
# iteration, residual region, witness


@dataclass
class ResidualRegion:
    """Region bounded by the unobserved arcs and the two bridging segments."""

    outer_arc: BoundaryArc
    inner_arc: BoundaryArc
    bridges: tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]

    def polygon(self, scn: "Scenario", n: int = 128) -> np.ndarray:
        """Closed polyline: outer arc, bridge, inner arc reversed, bridge back."""
        so = self.outer_arc.sample(n, closed=True)
        si = self.inner_arc.sample(n, closed=True)[::-1]
        return np.vstack([scn.outer_curve.points(so), scn.inner_curve.points(si)])

    def bridges_clear(self, scn: "Scenario", samples: int = 200) -> bool:
        """True if neither bridging segment passes through the inclusion."""
        inner = scn.inner_curve
        t = np.linspace(0.02, 0.98, samples)
        for a, b in self.bridges:
            pts = a[None, :] + t[:, None] * (b - a)[None, :]
            if np.any(inner.inside_batch(pts[:, 0], pts[:, 1]) < -scn.tol.geom * 1e3):
                return False
        return True


@dataclass
class ConstructionState:
    n: int
    gamma1: BoundaryArc
    gamma2: BoundaryArc
    history: list[tuple[int, BoundaryArc, BoundaryArc]] = field(default_factory=list)
    reason: str = ""
    start: BoundaryArc | None = None
    step1: tuple = ()
    x0: tuple | None = None

    @property
    def residual(self) -> ResidualRegion:
        return residual_region(self._scn, self.gamma1, self.gamma2)

    def report_lines(self) -> list[str]:
        lines = [f"iterations: {self.n}", f"reason: {self.reason}"]
        if self.start is not None:
            lines.append(f"start: {self.start.lo!r} {self.start.hi!r}")
        for side in self.step1:
            lines.append(f"step1: {side.branch} {side.s!r}")
        for n, g1, g2 in self.history:
            lines.append(f"iter {n}: gamma1 {g1.lo!r} {g1.hi!r} gamma2 {g2.lo!r} {g2.hi!r}")
        return lines


def residual_region(scn: "Scenario", gamma1: BoundaryArc, gamma2: BoundaryArc) -> ResidualRegion:
    outer, inner = scn.outer_curve, scn.inner_curve
    bridges = ((outer.point_at(gamma1.lo), inner.point_at(gamma2.lo)),
               (outer.point_at(gamma1.hi), inner.point_at(gamma2.hi)))
    return ResidualRegion(gamma1.complement(), gamma2.complement(), bridges)


def construct(scn: "Scenario", x0=None, max_iter: int | None = None, start: BoundaryArc | None = None,
              strict: bool = True) -> ConstructionState:
    """Run Steps 1-5 from ``Gamma(x0)`` (or from an explicit outer arc ``start``).

    Terminates when Gamma2 stops changing (within tol_arc).  The reason is
    ``no_line_intersection`` when neither Step-3 line met the inclusion,
    ``normal_parallel`` when both outer endpoints' inward normals hit the
    inclusion at normal incidence, ``normal_filter`` otherwise, and ``budget``
    when ``max_iter`` runs out (raised as IterationBudget if ``strict``).
    """
    if scn.inner_curve is None:
        raise DegenerateGeometry("construction needs an inclusion")
    max_iter = scn.max_iter if max_iter is None else max_iter
    if start is None:
        if x0 is None:
            if scn.observation.kind == "full":
                raise EmptyComplement("observation covers the whole boundary")
            x0 = scn.observation.x0
            start = scn.gamma
        else:
            start = gamma_x0(scn.outer_curve, x0)
    g1, sides = step1_gamma1_0(scn, start)
    g2 = step2_gamma2_0(scn, g1)
    state = ConstructionState(0, g1, g2, [(0, g1, g2)], "", start, sides,
                              None if x0 is None else tuple(map(float, x0)))
    state._scn = scn
    tol = scn.tol.arc
    for n in range(1, max_iter + 1):
        g2_new, info2 = extend_gamma2(scn, g1, g2)
        g1_new, info1 = extend_gamma1(scn, g1, g2_new)
        state.history.append((n, g1_new, g2_new))
        state.n = n
        done = g2_new.hausdorff(g2) <= tol
        g1, g2 = g1_new, g2_new
        state.gamma1, state.gamma2 = g1, g2
        if done:
            if not any(i.line_hit for i in info2):
                state.reason = "no_line_intersection"
            elif all(i.normal_parallel for i in info1):
                state.reason = "normal_parallel"
            else:
                state.reason = "normal_filter"
            return state
    state.reason = "budget"
    if strict:
        err = IterationBudget(f"no fixpoint after {max_iter} iterations")
        err.state = state
        raise err
    return state


def witness_x02(scn: "Scenario", gamma2: BoundaryArc, tol: float | None = None) -> np.ndarray:
    """Point x0' with Gamma(x0') = gamma2 on the inner curve.

    Intersects the tangent lines at the two endpoints and checks the result.
    """
    inner = scn.inner_curve
    tol = scn.tol.witness if tol is None else tol
    if gamma2.full or gamma2.empty:
        raise DegenerateGeometry("witness needs a proper arc")
    pa, pb = inner.point_at(gamma2.lo), inner.point_at(gamma2.hi)
    ta, tb = inner.frame_at(gamma2.lo).tangent, inner.frame_at(gamma2.hi).tangent
    m = np.column_stack([ta, -tb])
    if abs(np.linalg.det(m)) < 1e-14:
        raise DegenerateGeometry("endpoint tangents are parallel (witness at infinity)")
    lam = np.linalg.solve(m, pb - pa)
    x = pa + lam[0] * ta
    if inner._inside_value(*x) <= 0:
        raise WitnessMismatch("tangent lines meet inside the inclusion", 1.0)
    dist = gamma_x0(inner, x, "inner").hausdorff(gamma2)
    if dist > tol:
        raise WitnessMismatch(f"Gamma(x0') differs from the arc by {dist:.3e}", dist)
    return x
