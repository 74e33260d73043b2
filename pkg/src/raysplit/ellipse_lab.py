"""Billiard dynamics in an ellipse: caustics, focal rays, and arcs with GCC that are not Gamma(x0)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import batch
from .errors import NotEllipse, NotInThirdQuadrant
from .gcc import GCCResult, check_gcc_simple
from .geometry import BoundaryArc, BoundaryCurve, Ellipse
from .regions import gamma_x0

TOL_FOCAL = 1e-9


class CausticClass(str, Enum):
    ELLIPTIC = "Elliptic"
    HYPERBOLIC = "Hyperbolic"
    FOCAL = "Focal"
    MAJOR_AXIS = "MajorAxis"
    MINOR_AXIS = "MinorAxis"
    GLIDING = "Gliding"

    def __str__(self) -> str:
        return self.value


_CODES = list(CausticClass)


class _Local:
    """Frame in which the ellipse is centred with its major axis along x."""

    def __init__(self, ell: BoundaryCurve):
        if not isinstance(ell, Ellipse):
            raise NotEllipse("the ellipse lab needs an Ellipse boundary")
        self.ell = ell
        swap = ell.b > ell.a
        self.a, self.b = (ell.b, ell.a) if swap else (ell.a, ell.b)
        ang = ell.angle + (math.pi / 2 if swap else 0.0)
        self.ca, self.sa = math.cos(ang), math.sin(ang)
        self.c = math.sqrt(self.a ** 2 - self.b ** 2)
        self.center = ell.center

    def to_local(self, p):
        p = np.asarray(p, dtype=float) - self.center
        x, y = p[..., 0], p[..., 1]
        return np.stack([self.ca * x + self.sa * y, -self.sa * x + self.ca * y], axis=-1)

    def to_world(self, q):
        q = np.asarray(q, dtype=float)
        x, y = q[..., 0], q[..., 1]
        return np.stack([self.ca * x - self.sa * y, self.sa * x + self.ca * y], axis=-1) + self.center


def foci(ell: BoundaryCurve) -> tuple[np.ndarray, np.ndarray]:
    """``(F1, F2)``; F1 lies on the positive end of the major axis."""
    fr = _Local(ell)
    return fr.to_world([fr.c, 0.0]), fr.to_world([-fr.c, 0.0])


def _classify_codes(fr: _Local, p, q, tol: float):
    """Vectorised classification returning indices into ``_CODES``."""
    p, q = fr.to_local(p), fr.to_local(q)
    px, py, qx, qy = p[..., 0], p[..., 1], q[..., 0], q[..., 1]
    dx, dy = qx - px, qy - py
    ln = np.hypot(dx, dy)
    out = np.full(np.shape(px), _CODES.index(CausticClass.ELLIPTIC))
    safe = np.where(ln > 0, ln, 1.0)
    dist = [np.abs(dx * (py - 0.0) - dy * (px - fx)) / safe for fx in (fr.c, -fr.c)]
    focal = (dist[0] <= tol) | (dist[1] <= tol)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = py / (py - qy)
        xc = px + t * dx
    cross = (py * qy < 0) & (np.abs(xc) < fr.c)
    out = np.where(cross, _CODES.index(CausticClass.HYPERBOLIC), out)
    out = np.where(focal, _CODES.index(CausticClass.FOCAL), out)
    out = np.where((np.abs(px) <= tol) & (np.abs(qx) <= tol), _CODES.index(CausticClass.MINOR_AXIS), out)
    out = np.where((np.abs(py) <= tol) & (np.abs(qy) <= tol), _CODES.index(CausticClass.MAJOR_AXIS), out)
    out = np.where(ln <= tol, _CODES.index(CausticClass.GLIDING), out)
    return out


def classify_caustic(ell: BoundaryCurve, p, q, tol: float = TOL_FOCAL) -> CausticClass:
    """Class of the billiard orbit containing the chord from ``p`` to ``q``.

    Axis chords are reported as such; a chord whose line passes within
    ``tol`` of a focus is Focal; a chord crossing the open segment between
    the foci is Hyperbolic; anything else is Elliptic.
    """
    return _CODES[int(_classify_codes(_Local(ell), p, q, tol))]


def orbit_classes(ell: BoundaryCurve, s, theta, n_bounces: int, tol: float = TOL_FOCAL) -> np.ndarray:
    """Class codes of every chord of each orbit, shape ``(n_bounces, len(s))``."""
    fr = _Local(ell)
    x, y, dx, dy = batch.launch(ell, np.atleast_1d(s), np.atleast_1d(theta))
    out = np.empty((n_bounces, len(x)), int)
    for k in range(n_bounces):
        _, u = ell.hit_batch(x, y, dx, dy)
        p = ell.xy_batch(u)
        out[k] = _classify_codes(fr, np.column_stack([x, y]), p, tol)
        _, _, nx, ny = batch.frames(ell, u)
        x, y = p[:, 0], p[:, 1]
        dx, dy = batch.reflect(dx, dy, nx, ny)
    return out


def code_name(code: int) -> CausticClass:
    return _CODES[int(code)]


@dataclass
class FocalRun:
    angles: np.ndarray
    points: np.ndarray
    foci_hit: list[int]
    ys: np.ndarray

    def to_csv(self) -> str:
        out = ["bounce,x,y,angle,focus"]
        for i, (p, a, f) in enumerate(zip(self.points, self.angles, self.foci_hit)):
            out.append(f"{i + 1},{p[0]!r},{p[1]!r},{a!r},F{f + 1}")
        return "\n".join(out) + "\n"


def focal_convergence(ell: BoundaryCurve, start, n_bounces: int = 200, refocus: bool = True) -> FocalRun:
    """Bounce a ray launched from ``start`` through F1.

    Returns ``|angle to the major axis|`` after each bounce.  Every reflected
    chord passes through the other focus; with ``refocus`` the direction is
    re-aimed at that focus after each bounce so rounding cannot push the orbit
    off the focal family, whose convergence to the axis is otherwise masked
    by the instability of the axis orbit.
    """
    fr = _Local(ell)
    f1, f2 = foci(ell)
    fs = (f1, f2)
    p = np.asarray(start, dtype=float)
    if fr.c == 0.0:
        raise NotEllipse("a circle has no distinct foci")
    q = fr.to_local(p)
    if abs(q[1]) <= TOL_FOCAL * fr.a:
        # the major axis is a 2-cycle; a re-aimed float orbit would drift off it
        ends = fr.to_world([[-math.copysign(fr.a, q[0]), 0.0], [math.copysign(fr.a, q[0]), 0.0]])
        pts = ends[np.arange(n_bounces) % 2]
        return FocalRun(np.zeros(n_bounces), pts, [(k + 1) % 2 for k in range(n_bounces)], np.zeros(n_bounces))
    d = f1 - p
    d /= np.hypot(*d)
    aim = 0
    angles, pts, hit = [], [], []
    axis = np.array([fr.ca, fr.sa])
    for _ in range(n_bounces):
        h = ell.hit(p[0], p[1], d[0], d[1])
        if h is None:
            break
        lam, u, _ = h
        p = np.array(ell.xy(u))
        _, _, nx, ny, _ = ell.frame_u(u)
        k = 2.0 * (d[0] * nx + d[1] * ny)
        d = np.array([d[0] - k * nx, d[1] - k * ny])
        aim = 1 - aim
        hit.append(aim)
        if refocus:
            v = fs[aim] - p
            nv = np.hypot(*v)
            if nv > 1e-12:
                d = v / nv
        pts.append(p)
        c = abs(float(d @ axis))
        angles.append(math.acos(min(c, 1.0)))
    pts = np.array(pts).reshape(-1, 2)
    return FocalRun(np.array(angles), pts, hit, fr.to_local(pts)[:, 1])


def lemel_arc(ell: BoundaryCurve, x1) -> BoundaryArc:
    """Arc from ``x1`` counter-clockwise to the second hit of the line ``x1 F1``.

    ``x1`` must lie strictly in the third quadrant of the ellipse frame.  The
    arc contains the positive major vertex and the negative minor vertex.
    """
    fr = _Local(ell)
    x1 = np.asarray(x1, dtype=float)
    q = fr.to_local(x1)
    if not (q[0] < 0 and q[1] < 0):
        raise NotInThirdQuadrant(f"x1={tuple(x1)} is not in the third quadrant")
    f1, _ = foci(ell)
    d = f1 - x1
    d /= np.hypot(*d)
    h = ell.hit(x1[0], x1[1], d[0], d[1])
    x2 = np.array(ell.xy(h[1]))
    return BoundaryArc("outer", ell.param_of(x1), ell.param_of(x2))


def is_gamma_x0_form(curve: BoundaryCurve, gamma: BoundaryArc, tol: float = 1e-8):
    """A point ``x0`` with ``Gamma(x0) = gamma``, or None.

    Candidates come from the endpoint tangent lines; the candidate is kept only
    if it is outside the curve and reproduces ``gamma``.
    """
    if gamma.full or gamma.empty:
        return None
    pa, pb = curve.point_at(gamma.lo), curve.point_at(gamma.hi)
    ta, tb = curve.frame_at(gamma.lo).tangent, curve.frame_at(gamma.hi).tangent
    m = np.column_stack([ta, -tb])
    if abs(np.linalg.det(m)) < 1e-14:
        return None
    lam = np.linalg.solve(m, pb - pa)
    x0 = pa + lam[0] * ta
    if curve._inside_value(*x0) <= 0:
        return None
    if gamma_x0(curve, x0).hausdorff(gamma) > tol:
        return None
    return x0


def both_sides_gcc(ell: BoundaryCurve, gamma: BoundaryArc, horizon: float = 100.0,
                   grid: tuple[int, int] = (360, 180)) -> tuple[GCCResult, GCCResult | None]:
    """GCC verdicts for ``gamma`` and its complement (None when the complement is empty)."""
    first = check_gcc_simple(ell, gamma, horizon, grid)
    comp = gamma.complement()
    second = None if comp.empty else check_gcc_simple(ell, comp, horizon, grid)
    return first, second


def mirrored_pair_ok(ell: BoundaryCurve, gamma: BoundaryArc, eps: float = 1e-6) -> bool:
    """Whether the complement of a lemel arc holds the mirror pair (x1', x2') through F2."""
    fr = _Local(ell)
    comp = gamma.complement()
    s1 = (comp.lo + eps) % 1.0
    x1 = ell.point_at(s1)
    if not (fr.to_local(x1)[0] > 0 and fr.to_local(x1)[1] > 0):
        return False
    _, f2 = foci(ell)
    d = f2 - x1
    d /= np.hypot(*d)
    h = ell.hit(x1[0], x1[1], d[0], d[1])
    s2 = ell.s_of_u(h[1])
    return comp.contains(s2) and comp.offset(s2) > comp.offset(s1)


def search_both_sides(ell: BoundaryCurve, samples: int = 90):
    """First third-quadrant ``x1`` whose lemel arc's complement is itself a mirrored lemel arc."""
    fr = _Local(ell)
    for t in np.linspace(1.5 * math.pi - 1e-3, math.pi + 1e-3, samples):
        x1 = fr.to_world([fr.a * math.cos(t), fr.b * math.sin(t)])
        g = lemel_arc(ell, x1)
        if mirrored_pair_ok(ell, g):
            return x1, g
    return None
