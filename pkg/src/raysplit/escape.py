"""Escape analysis of the unobserved region: direction map, UEG verdict, trapped orbits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy import optimize

from . import batch
from .geometry import ArcTest, BoundaryArc, unit
from .tracer import StuckRay, fly

if TYPE_CHECKING:
    from .scenario import Scenario

TIR_RETRO = "TIR-retroreflection"
OTHER = "other"


def _signed(ds):
    return ds - np.floor(ds + 0.5)


# ---------------------------------------------------------------------------
# direction map


def escape_value(scn: "Scenario", s: float, xi) -> float:
    """Tangential component of ``xi`` at the outer point reached from ``delta2(s)``.

    Positive values drift counter-clockwise along the outer boundary.
    """
    inner, outer = scn.inner_curve, scn.outer_curve
    u = inner.u_of_s(s)
    x, y = inner.xy(u)
    _, _, nx, ny, _ = inner.frame_u(u)
    dx, dy = unit(xi)
    if dx * nx + dy * ny <= 0.0:
        raise ValueError("xi must point out of the inclusion")
    fl = fly(scn, 1, x, y, dx, dy)
    if fl is None or fl.boundary != "outer":
        raise StuckRay("ray from the inclusion did not reach the outer boundary")
    tx, ty, _, _, _ = outer.frame_u(fl.u)
    return dx * tx + dy * ty


def normal_escape_values(scn: "Scenario", s) -> np.ndarray:
    """``escape_value(s, n2(s))`` for an array of inner parameters."""
    inner, outer = scn.inner_curve, scn.outer_curve
    u = inner.u_of_s(np.asarray(s, dtype=float))
    pts = inner.xy_batch(u)
    _, _, nx, ny = batch.frames(inner, u)
    _, uo = outer.hit_batch(pts[:, 0], pts[:, 1], nx, ny)
    tx, ty, _, _ = batch.frames(outer, uo)
    return nx * tx + ny * ty


@dataclass
class EscapeProfile:
    s: np.ndarray
    values: np.ndarray
    nondecreasing: bool
    violations: list[tuple[float, float, float]]
    stable: bool = True
    spacing: float = 0.0

    @property
    def ueg(self) -> bool:
        return self.nondecreasing

    def to_csv(self) -> str:
        rows = ["s,M"] + [f"{a!r},{b!r}" for a, b in zip(self.s, self.values)]
        return "\n".join(rows) + "\n"


def _monotone(s, m, tol):
    drops = np.flatnonzero(np.diff(m) < -tol)
    return len(drops) == 0, [(float(s[k]), float(s[k + 1]), float(m[k] - m[k + 1])) for k in drops]


def is_uniformly_escaping(scn: "Scenario", gamma2: BoundaryArc,
                          spacing: float | None = None) -> EscapeProfile:
    """Check that the normal escape map is nondecreasing along the unobserved inner arc.

    The arc is traversed counter-clockwise, from the upper end of ``gamma2``
    round to its lower end.  The verdict is recomputed at half the spacing and
    ``stable`` records whether both agree.
    """
    comp = gamma2.complement()
    if comp.empty:
        return EscapeProfile(np.empty(0), np.empty(0), True, [], True, 0.0)
    length = comp.length
    if spacing is None:
        spacing = length / max(scn.mono_samples - 1, 1)
    n = max(int(math.ceil(length / spacing)) + 1, 2)
    tol = scn.tol.mono
    s = comp.sample(n, closed=True)
    m = normal_escape_values(scn, s)
    ok, viol = _monotone(s, m, tol)
    s_fine = comp.sample(2 * n - 1, closed=True)
    ok_fine, _ = _monotone(s_fine, normal_escape_values(scn, s_fine), tol)
    return EscapeProfile(s, m, ok, viol, ok == ok_fine, length / (n - 1))


# ---------------------------------------------------------------------------
# trapped orbits


def _theta_c(scn: "Scenario") -> float:
    if scn.c2 <= scn.c1:
        return math.pi / 2  # nothing is totally reflected from the slow side
    return math.asin(scn.c1 / scn.c2)


def _returns(scn: "Scenario", x, y, dx, dy, n_ret: int, gamma1: BoundaryArc | None = None,
             check: bool = True):
    """Run the reflect-only medium-1 dynamics for ``n_ret`` outer returns.

    With ``check`` a ray dies when it hits the inclusion below the TIR
    threshold (it would leak a transmitted branch) or lands in ``gamma1``.
    Returns per-return outer phases ``(s, theta)``, the alive mask after each
    return and the accumulated path length.
    """
    outer, inner = scn.outer_curve, scn.inner_curve
    x, y, dx, dy = (np.array(a, dtype=float) for a in (x, y, dx, dy))
    n = len(x)
    alive = np.ones(n, bool)
    length = np.zeros(n)
    s_out = np.full((n_ret, n), np.nan)
    th_out = np.full((n_ret, n), np.nan)
    alive_at = np.zeros((n_ret, n), bool)
    gtest = ArcTest(outer, gamma1, 0.0) if (check and gamma1 is not None) else None
    th_lim = _theta_c(scn) + scn.tol.angle
    for k in range(n_ret):
        on_inner, lam, u = batch.first_hits(scn, 1, x, y, dx, dy)
        alive &= np.isfinite(lam)
        length += np.where(alive, lam, 0.0)
        ii = np.flatnonzero(on_inner & alive)
        if ii.size:
            ui = u[ii]
            p = inner.xy_batch(ui)
            _, _, nx, ny = batch.frames(inner, ui)
            if check:
                th = batch.incidence(dx[ii], dy[ii], nx, ny)
                alive[ii[th <= th_lim]] = False
            x[ii], y[ii] = p[:, 0], p[:, 1]
            dx[ii], dy[ii] = batch.reflect(dx[ii], dy[ii], nx, ny)
            lam2, uo = outer.hit_batch(x[ii], y[ii], dx[ii], dy[ii])
            length[ii] += np.where(np.isfinite(lam2), lam2, 0.0)
            u[ii] = uo
        alive &= np.isfinite(u)
        u = np.where(np.isfinite(u), u, 0.0)
        p = outer.xy_batch(u)
        tx, ty, nx, ny = batch.frames(outer, u)
        x, y = p[:, 0].copy(), p[:, 1].copy()
        dx, dy = batch.reflect(dx, dy, nx, ny)
        if gtest is not None:
            alive &= ~gtest.batch(u)
        s_out[k] = outer.s_of_u(u)
        th_out[k] = np.arctan2(-(dx * nx + dy * ny), dx * tx + dy * ty)
        alive_at[k] = alive
    return s_out, th_out, alive_at, length


def _return_map(scn: "Scenario", s, th, p: int):
    x, y, dx, dy = batch.launch(scn.outer_curve, np.atleast_1d(s), np.atleast_1d(th))
    s_out, th_out, _, _ = _returns(scn, x, y, dx, dy, p, check=False)
    return s_out[-1], th_out[-1]


def _newton(scn: "Scenario", s: float, th: float, p: int, iters: int = 40):
    h = 1e-7
    z = np.array([s, th])
    for _ in range(iters):
        ss, tt = _return_map(scn, [z[0], z[0] + h, z[0]], [z[1], z[1], z[1] + h], p)
        if not (np.all(np.isfinite(ss)) and np.all(np.isfinite(tt))):
            return None
        r = np.array([_signed(ss[0] - z[0]), tt[0] - z[1]])
        if np.max(np.abs(r)) < 1e-14:
            return z
        jac = np.array([[_signed(ss[1] - ss[0]) / h, _signed(ss[2] - ss[0]) / h],
                        [(tt[1] - tt[0]) / h, (tt[2] - tt[0]) / h]]) - np.eye(2)
        try:
            dz = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(dz)) or np.max(np.abs(dz)) > 0.1:
            return None
        z = z - dz
        z[0] %= 1.0
        if not 0.0 < z[1] < math.pi:
            return None
    ss, tt = _return_map(scn, [z[0]], [z[1]], p)
    return z if max(abs(_signed(ss[0] - z[0])), abs(tt[0] - z[1])) < 1e-11 else None


@dataclass
class TrappedOrbit:
    """A periodic medium-1 cycle that never meets Gamma and never transmits."""

    points: np.ndarray
    directions: np.ndarray
    boundaries: list[str]
    length: float
    time: float
    mechanism: str
    residual: float
    inner_angles: list[float] = field(default_factory=list)
    outer_s: list[float] = field(default_factory=list)
    seed: tuple[float, float] = (0.0, 0.0)
    period: int = 1

    def shadow(self, scn: "Scenario", periods: int = 1000) -> float:
        """Largest drift of the outer hits from the cycle over ``periods`` re-traced periods."""
        x, y = self.points[-1]
        dx, dy = self.directions[-1]
        outer_pts = self.points[[b == "outer" for b in self.boundaries]]
        worst = 0.0
        for _ in range(periods):
            for k in range(self.period):
                s_out, th_out, _, _ = _returns(scn, [x], [y], [dx], [dy], 1, check=False)
                u = scn.outer_curve.u_of_s(s_out[0, 0])
                x, y = scn.outer_curve.xy(u)
                tx, ty, nx, ny, _ = scn.outer_curve.frame_u(u)
                c, sn = math.cos(th_out[0, 0]), math.sin(th_out[0, 0])
                dx, dy = c * tx - sn * nx, c * ty - sn * ny
                worst = max(worst, math.hypot(*(outer_pts[k] - (x, y))))
            if not worst < 1.0:
                break
        return worst


def _cycle(scn: "Scenario", s: float, th: float, p: int, gamma1: BoundaryArc | None):
    """Re-trace one period from an outer phase point, recording every event."""
    outer, inner = scn.outer_curve, scn.inner_curve
    x0, y0, dx0, dy0 = (float(a[0]) for a in batch.launch(outer, [s], [th]))
    x, y, dx, dy = x0, y0, dx0, dy0
    pts, dirs, kinds, angles, svals = [], [], [], [], []
    total = 0.0
    ok = True
    returns = 0
    while returns < p:
        fl = fly(scn, 1, x, y, dx, dy)
        if fl is None:
            return None
        total += fl.distance
        curve = scn.curve(fl.boundary)
        _, _, nx, ny, _ = curve.frame_u(fl.u)
        th_in = math.atan2(abs(dx * ny - dy * nx), abs(dx * nx + dy * ny))
        k = 2.0 * (dx * nx + dy * ny)
        dx, dy = dx - k * nx, dy - k * ny
        x, y = fl.x, fl.y
        pts.append((x, y))
        dirs.append((dx, dy))
        kinds.append(fl.boundary)
        if fl.boundary == "inner":
            angles.append(th_in)
            if th_in <= _theta_c(scn) + scn.tol.angle:
                ok = False
        else:
            sv = outer.s_of_u(fl.u)
            svals.append(sv)
            if gamma1 is not None and gamma1.contains(sv):
                ok = False
            returns += 1
    residual = max(math.hypot(x - x0, y - y0), math.hypot(dx - dx0, dy - dy0))
    mech = TIR_RETRO if angles else OTHER
    orbit = TrappedOrbit(np.array(pts), np.array(dirs), kinds, total, total / scn.c1, mech,
                         residual, angles, svals, (s, th), p)
    return orbit, ok


def _same(a: TrappedOrbit, b: TrappedOrbit, tol: float = 1e-7) -> bool:
    if len(a.outer_s) != len(b.outer_s):
        return False
    return all(min(abs(_signed(s - t)) for t in b.outer_s) < tol for s in a.outer_s)


def _retro_roots(scn: "Scenario", gamma1: BoundaryArc, n: int, max_events: int):
    """Outer parameters whose inward normal ray later meets the outer boundary normally.

    Such a ray retraces its own path, so it is periodic.  Returns pairs
    ``(s, outer_hits)`` where ``outer_hits`` counts outer events up to and
    including the normal one.
    """
    outer, inner = scn.outer_curve, scn.inner_curve
    s = gamma1.complement().sample(n)
    th_lim = _theta_c(scn) + scn.tol.angle
    gtest = ArcTest(outer, gamma1, 0.0)

    def run(sv, k_max, check=True):
        x, y, dx, dy = batch.launch(outer, sv, np.full(len(sv), math.pi / 2))
        m = len(sv)
        tau = np.full((k_max, m), np.nan)
        on_in = np.zeros((k_max, m), bool)
        alive = np.ones(m, bool)
        alive_at = np.zeros((k_max, m), bool)
        for k in range(k_max):
            hit_in, lam, u = batch.first_hits(scn, 1, x, y, dx, dy)
            alive &= np.isfinite(lam)
            u = np.where(alive, u, 0.0)
            tx, ty, nx, ny = (np.where(hit_in, a, b) for a, b in
                              zip(batch.frames(inner, u) if inner is not None else batch.frames(outer, u),
                                  batch.frames(outer, u)))
            pts_i = inner.xy_batch(u) if inner is not None else outer.xy_batch(u)
            pts_o = outer.xy_batch(u)
            tau[k] = dx * tx + dy * ty
            on_in[k] = hit_in
            if check:
                th = batch.incidence(dx, dy, nx, ny)
                alive &= ~(hit_in & (th <= th_lim))
                alive &= hit_in | ~gtest.batch(u)
            x = np.where(hit_in, pts_i[:, 0], pts_o[:, 0])
            y = np.where(hit_in, pts_i[:, 1], pts_o[:, 1])
            dx, dy = batch.reflect(dx, dy, nx, ny)
            alive_at[k] = alive
        return tau, on_in, alive_at

    tau, on_in, alive_at = run(s, max_events)
    roots = []
    for k in range(max_events):
        ok = alive_at[k, :-1] & alive_at[k, 1:] & ~on_in[k, :-1]
        ok &= np.all(on_in[:k + 1, :-1] == on_in[:k + 1, 1:], axis=0)
        ok &= np.sign(tau[k, :-1]) != np.sign(tau[k, 1:])
        for i in np.flatnonzero(ok):
            def f(v, k=k):
                return float(run(np.array([v]), k + 1, check=False)[0][k, 0])
            try:
                r = optimize.brentq(f, s[i], s[i + 1], xtol=1e-15, rtol=1e-15)
            except ValueError:
                continue
            roots.append((r % 1.0, int(np.count_nonzero(~on_in[:k + 1, i]))))
    return roots


def find_trapped_rays(scn: "Scenario", gamma1: BoundaryArc, gamma2: BoundaryArc | None = None,
                      horizon: float | None = None, grid: tuple[int, int] | None = None,
                      max_period: int = 8, max_candidates: int = 48) -> list[TrappedOrbit]:
    """Periodic medium-1 orbits that avoid ``gamma1`` and only meet the inclusion beyond TIR.

    Seeds on a grid over the unobserved outer arc are flowed for
    ``max_period`` returns; near-returns are refined by Newton on the return
    map and kept when the closed cycle passes every check.  A second pass
    looks for self-retracing orbits: inward normal rays that later strike the
    outer boundary at normal incidence.  ``gamma2`` is
    accepted for interface symmetry; inner hits are constrained by the TIR
    test alone.
    """
    del gamma2
    ns, nt = grid or scn.trap_grid
    comp = gamma1.complement()
    if comp.empty:
        return []
    s0 = comp.sample(ns)
    th0 = np.arange(1, nt) * math.pi / nt
    S, TH = np.meshgrid(s0, th0, indexing="ij")
    S, TH = S.ravel(), TH.ravel()
    x, y, dx, dy = batch.launch(scn.outer_curve, S, TH)
    s_out, th_out, alive_at, _ = _returns(scn, x, y, dx, dy, max_period, gamma1)
    d = np.hypot(2 * math.pi * _signed(s_out - S[None, :]), th_out - TH[None, :])
    d = np.where(alive_at, d, np.inf)
    best_p = np.argmin(d, axis=0)
    best_d = d[best_p, np.arange(len(S))]
    thr = 6.0 * max(2 * math.pi * comp.length / ns, math.pi / nt)
    order = [i for i in np.argsort(best_d) if best_d[i] < thr]
    found: list[TrappedOrbit] = []
    tried = 0
    for i in order:
        if tried >= max_candidates:
            break
        p = int(best_p[i]) + 1
        if any(min(abs(_signed(S[i] - t)) for t in o.outer_s) < 2.0 / ns for o in found):
            continue
        tried += 1
        z = _newton(scn, float(S[i]), float(TH[i]), p)
        if z is None:
            continue
        # smallest period that closes
        for q in range(1, p + 1):
            if p % q == 0:
                res = _cycle(scn, float(z[0]), float(z[1]), q, gamma1)
                if res is not None and res[0].residual < scn.tol.orbit:
                    break
        if res is None:
            continue
        orbit, ok = res
        if not ok or orbit.residual >= scn.tol.orbit:
            continue
        if horizon is not None and orbit.time <= 0:
            continue
        if not any(_same(orbit, o) for o in found):
            found.append(orbit)
    # self-retracing orbits are usually too unstable for the return-map search
    for r, hits in _retro_roots(scn, gamma1, 4 * ns, 2 * max_period):
        p = 2 * hits
        for q in range(1, p + 1):
            if p % q:
                continue
            res = _cycle(scn, r, math.pi / 2, q, gamma1)
            if res is not None and res[0].residual < scn.tol.orbit:
                break
        if res is None:
            continue
        orbit, ok = res
        if ok and orbit.residual < scn.tol.orbit and not any(_same(orbit, o) for o in found):
            found.append(orbit)
    found.sort(key=lambda o: (o.period, o.outer_s[0]))
    return found


# ---------------------------------------------------------------------------
# hypothesis of the trapping theorem


@dataclass
class HypothesisVerdict:
    holds: bool
    checked: int
    violations: list[dict]


def check_thmtrap_hypothesis(scn: "Scenario", gamma1: BoundaryArc, gamma2: BoundaryArc,
                             grid: tuple[int, int] = (128, 128)) -> HypothesisVerdict:
    """Check that transmitted branches of rays bouncing inside the residual region land in Gamma2.

    For a ray from the unobserved outer arc that hits the unobserved inner arc
    and returns to the unobserved outer arc, the forward transmitted ray and
    the backward continuation of the incoming inner half-ray must both meet
    the inclusion boundary again inside ``gamma2``.  Total reflection counts
    as a violation since no transmitted branch exists.
    """
    outer, inner = scn.outer_curve, scn.inner_curve
    comp = gamma1.complement()
    if comp.empty or gamma2.full:
        return HypothesisVerdict(True, 0, [])
    ns, nt = grid
    S, TH = np.meshgrid(comp.sample(ns), np.arange(1, nt) * math.pi / nt, indexing="ij")
    S, TH = S.ravel(), TH.ravel()
    x, y, dx, dy = batch.launch(outer, S, TH)
    on_inner, _, u = batch.first_hits(scn, 1, x, y, dx, dy)
    g2 = ArcTest(inner, gamma2, 0.0)
    keep = on_inner & ~g2.batch(np.where(on_inner, u, 0.0))
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        return HypothesisVerdict(True, 0, [])
    ui = u[idx]
    p = inner.xy_batch(ui)
    _, _, nx, ny = batch.frames(inner, ui)
    ddx, ddy = dx[idx], dy[idx]
    rx, ry = batch.reflect(ddx, ddy, nx, ny)
    _, uo = outer.hit_batch(p[:, 0], p[:, 1], rx, ry)
    g1 = ArcTest(outer, gamma1, 0.0)
    back = np.isfinite(uo) & ~g1.batch(np.where(np.isfinite(uo), uo, 0.0))
    idx, p, nx, ny, ddx, ddy, ui = (a[back] for a in (idx, p, nx, ny, ddx, ddy, ui))
    theta = batch.incidence(ddx, ddy, nx, ny)
    tx, ty = batch.refract(ddx, ddy, nx, ny, scn.c2 / scn.c1)
    tir = ~np.isfinite(tx)
    crit = np.abs(theta - _theta_c(scn)) <= scn.tol.angle
    px, py = p[:, 0], p[:, 1]
    txs, tys = np.where(tir, 0.0, tx), np.where(tir, 1.0, ty)
    _, uf = inner.hit_batch(px, py, txs, tys)
    bx, by = batch.reflect(txs, tys, nx, ny)
    _, ub = inner.hit_batch(px, py, -bx, -by)
    fwd_ok = np.isfinite(uf) & g2.batch(np.where(np.isfinite(uf), uf, 0.0))
    bwd_ok = np.isfinite(ub) & g2.batch(np.where(np.isfinite(ub), ub, 0.0))
    violations = []
    for k in range(len(idx)):
        if tir[k]:
            reason = "total_reflection"
        elif crit[k]:
            reason = "critical"
        elif not fwd_ok[k]:
            reason = "forward_outside"
        elif not bwd_ok[k]:
            reason = "backward_outside"
        else:
            continue
        i = idx[k]
        violations.append({"s": float(S[i]), "theta": float(TH[i]),
                           "inner_s": float(inner.s_of_u(ui[k])), "reason": reason})
    return HypothesisVerdict(not violations, len(idx), violations)
