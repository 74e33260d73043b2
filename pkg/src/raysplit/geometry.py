"""Strictly convex closed curves: points, frames, ray intersections, tangents.

Every curve carries a native angle parameter ``u`` (the parametric angle for
ellipses, the polar angle about the centre for radial curves).  The public
parameter ``s`` in [0, 1) is arc length divided by the perimeter, measured
counter-clockwise from an anchor point.  By default the anchor is the point
at ``u = 0``; :meth:`BoundaryCurve.anchored_at` moves it to the boundary point
nearest a given external point.

Scalar hot paths (``hit``, ``frame_u``) work on plain floats because the ray
tracer calls them millions of times; the ``*_batch`` variants take arrays.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, special

from .errors import InsidePoint, NonConvex

TOL_GEOM = 1e-10
TOL_TANGENCY = 1e-9
TOL_CURV = 1e-12
SKIP_EPS = 1e-9

TWO_PI = 2.0 * math.pi
_SIN_TANG = math.sin(TOL_TANGENCY)

# Gauss-Legendre nodes on [0, 1] for composite arc-length quadrature
_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def unit(v) -> np.ndarray:
    """Return ``v`` as a float array of norm one."""
    v = np.asarray(v, dtype=float)
    n = math.hypot(v[0], v[1])
    if n == 0.0:
        raise ValueError("zero vector has no direction")
    return v / n


@dataclass(frozen=True)
class Frame:
    tangent: np.ndarray
    normal: np.ndarray
    curvature: float


@dataclass(frozen=True)
class RayHit:
    s: float
    distance: float
    grazing: bool
    point: np.ndarray
    u: float


class BoundaryCurve:
    """Base class for closed, strictly convex, counter-clockwise curves."""

    kind: str = "abstract"
    center: np.ndarray
    perimeter: float
    _shift: float = 0.0  # anchor offset in s units

    # -- native-parameter primitives implemented by subclasses --------------
    def xy(self, u: float) -> tuple[float, float]:
        raise NotImplementedError

    def frame_u(self, u: float) -> tuple[float, float, float, float, float]:
        """(tx, ty, nx, ny, kappa) at native parameter ``u``."""
        raise NotImplementedError

    def hit(self, ox, oy, dx, dy, skip=SKIP_EPS):
        """First forward hit as ``(distance, u, grazing)`` or None."""
        raise NotImplementedError

    def u_of_point(self, x: float, y: float) -> float:
        raise NotImplementedError

    def _arclen(self, u):
        raise NotImplementedError

    def _u_of_arclen(self, length):
        raise NotImplementedError

    def _inside_value(self, x: float, y: float) -> float:
        """Negative inside, zero on the curve, positive outside (length-like)."""
        raise NotImplementedError

    def _tangent_us(self, ex: float, ey: float) -> tuple[float, float]:
        raise NotImplementedError

    # -- parameter conversion ----------------------------------------------
    def s_of_u(self, u):
        u = np.mod(u, TWO_PI)
        s = np.mod(self._arclen(u) / self.perimeter - self._shift, 1.0)
        return float(s) if np.ndim(s) == 0 else s

    def u_of_s(self, s):
        s_nat = np.mod(np.mod(s, 1.0) + self._shift, 1.0)
        u = self._u_of_arclen(s_nat * self.perimeter)
        return float(u) if np.ndim(u) == 0 else u

    # -- public queries -------------------------------------------------------
    def point_at(self, s: float) -> np.ndarray:
        return np.array(self.xy(self.u_of_s(s)))

    def points(self, s) -> np.ndarray:
        """Vectorised :meth:`point_at`; returns shape (n, 2)."""
        return np.array([self.xy(u) for u in np.atleast_1d(self.u_of_s(np.asarray(s)))])

    def frame_at(self, s: float) -> Frame:
        tx, ty, nx, ny, k = self.frame_u(self.u_of_s(s))
        if k <= TOL_CURV:
            raise NonConvex(f"curvature {k:.3e} at s={s}")
        return Frame(np.array([tx, ty]), np.array([nx, ny]), k)

    def param_of(self, p) -> float:
        """Parameter ``s`` of a point lying on the curve."""
        return self.s_of_u(self.u_of_point(float(p[0]), float(p[1])))

    def contains(self, p) -> bool:
        """True iff ``p`` lies strictly inside (farther than tol_geom from the curve)."""
        return self._inside_value(float(p[0]), float(p[1])) < -TOL_GEOM

    def intersect_ray(self, origin, direction, skip_eps: float = SKIP_EPS) -> RayHit | None:
        d = unit(direction)
        res = self.hit(float(origin[0]), float(origin[1]), float(d[0]), float(d[1]), skip_eps)
        if res is None:
            return None
        lam, u, grazing = res
        return RayHit(self.s_of_u(u), lam, grazing, np.array(self.xy(u)), u)

    def tangent_points_from(self, external) -> tuple[float, float]:
        """Tangency parameters of the two lines through ``external``.

        Ordered so that the counter-clockwise arc from the first to the second
        is the far side, i.e. the set where ``<x - external, n(x)> > 0``.
        """
        ex, ey = float(external[0]), float(external[1])
        if not self._inside_value(ex, ey) > TOL_GEOM:
            raise InsidePoint(f"{tuple(external)} is not outside the curve")
        ua, ub = self._tangent_us(ex, ey)
        return self.s_of_u(ua), self.s_of_u(ub)

    def nearest_u(self, p) -> float:
        px, py = float(p[0]), float(p[1])
        us = np.linspace(0.0, TWO_PI, 721)[:-1]
        pts = self.xy_batch(us)
        d2 = (pts[:, 0] - px) ** 2 + (pts[:, 1] - py) ** 2
        k = int(np.argmin(d2))
        h = us[1] - us[0]

        def g(u):
            x, y = self.xy(u)
            tx, ty, _, _, _ = self.frame_u(u)
            return (x - px) * tx + (y - py) * ty

        a, b = us[k] - h, us[k] + h
        if g(a) < 0.0 < g(b):
            u = optimize.brentq(g, a, b, xtol=1e-15, rtol=1e-15)
        else:
            u = optimize.minimize_scalar(lambda v: float(np.hypot(*(np.array(self.xy(v)) - (px, py)))),
                                         bounds=(a, b), method="bounded",
                                         options={"xatol": 1e-12}).x
        return float(np.mod(u, TWO_PI))

    def anchored_at(self, p) -> "BoundaryCurve":
        """Copy whose ``s = 0`` is the boundary point nearest ``p``."""
        c = copy.copy(self)
        c._shift = 0.0
        c._shift = float(c.s_of_u(self.nearest_u(p)))
        return c

    def with_shift(self, shift: float) -> "BoundaryCurve":
        c = copy.copy(self)
        c._shift = float(shift) % 1.0
        return c

    # -- batch helpers --------------------------------------------------------
    def xy_batch(self, u) -> np.ndarray:
        return np.array([self.xy(v) for v in np.atleast_1d(u)])

    def frame_batch(self, u):
        """Arrays (tx, ty, nx, ny) for native parameters ``u``."""
        fr = np.array([self.frame_u(v)[:4] for v in np.atleast_1d(u)])
        return fr[:, 0], fr[:, 1], fr[:, 2], fr[:, 3]

    def hit_batch(self, ox, oy, dx, dy, skip=SKIP_EPS):
        """Vectorised :meth:`hit`; misses give ``inf`` distance and ``nan`` u."""
        n = len(ox)
        lam = np.full(n, np.inf)
        uu = np.full(n, np.nan)
        for i in range(n):
            r = self.hit(ox[i], oy[i], dx[i], dy[i], skip)
            if r is not None:
                lam[i], uu[i] = r[0], r[1]
        return lam, uu

    def inside_batch(self, x, y) -> np.ndarray:
        return np.array([self._inside_value(a, b) for a, b in zip(x, y)])

    def sample(self, n: int = 512) -> np.ndarray:
        return self.xy_batch(np.linspace(0.0, TWO_PI, n, endpoint=False))

    def check_convex(self, n: int = 1024) -> None:
        for u in np.linspace(0.0, TWO_PI, n, endpoint=False):
            k = self.frame_u(u)[4]
            if not k > TOL_CURV:
                raise NonConvex(f"curvature {k:.3e} at u={u:.6f}")


class Ellipse(BoundaryCurve):
    """Ellipse ``c + R(angle) (a cos u, b sin u)``; a circle when ``a == b``."""

    def __init__(self, center=(0.0, 0.0), a: float = 1.0, b: float = 1.0, angle: float = 0.0):
        if not (a > 0 and b > 0):
            raise NonConvex("semi-axes must be positive")
        self.center = np.array(center, dtype=float)
        self.a, self.b, self.angle = float(a), float(b), float(angle)
        self.kind = "circle" if a == b else "ellipse"
        self._cx, self._cy = float(self.center[0]), float(self.center[1])
        self._ca, self._sa = math.cos(self.angle), math.sin(self.angle)
        self._shift = 0.0
        if a == b:
            self.perimeter = TWO_PI * a
        else:
            self.perimeter = float(self._arclen(TWO_PI))

    @property
    def radius(self) -> float:
        return self.a

    # unit-disc frame helpers
    def _to_unit(self, x, y):
        px, py = x - self._cx, y - self._cy
        return (self._ca * px + self._sa * py) / self.a, (-self._sa * px + self._ca * py) / self.b

    def xy(self, u):
        lx, ly = self.a * math.cos(u), self.b * math.sin(u)
        return (self._cx + self._ca * lx - self._sa * ly, self._cy + self._sa * lx + self._ca * ly)

    def xy_batch(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        lx, ly = self.a * np.cos(u), self.b * np.sin(u)
        return np.column_stack([self._cx + self._ca * lx - self._sa * ly,
                                self._cy + self._sa * lx + self._ca * ly])

    def frame_u(self, u):
        su, cu = math.sin(u), math.cos(u)
        lx, ly = -self.a * su, self.b * cu
        sp = math.hypot(lx, ly)
        tx = (self._ca * lx - self._sa * ly) / sp
        ty = (self._sa * lx + self._ca * ly) / sp
        return tx, ty, ty, -tx, self.a * self.b / sp ** 3

    def frame_batch(self, u):
        u = np.asarray(u, dtype=float)
        lx, ly = -self.a * np.sin(u), self.b * np.cos(u)
        sp = np.hypot(lx, ly)
        tx = (self._ca * lx - self._sa * ly) / sp
        ty = (self._sa * lx + self._ca * ly) / sp
        return tx, ty, ty, -tx

    def u_of_point(self, x, y):
        ux, uy = self._to_unit(x, y)
        return math.atan2(uy, ux) % TWO_PI

    def u_of_point_batch(self, x, y):
        px, py = x - self._cx, y - self._cy
        ux = (self._ca * px + self._sa * py) / self.a
        uy = (-self._sa * px + self._ca * py) / self.b
        return np.mod(np.arctan2(uy, ux), TWO_PI)

    def _inside_value(self, x, y):
        ux, uy = self._to_unit(x, y)
        return (math.hypot(ux, uy) - 1.0) * min(self.a, self.b)

    def inside_batch(self, x, y):
        px, py = np.asarray(x) - self._cx, np.asarray(y) - self._cy
        ux = (self._ca * px + self._sa * py) / self.a
        uy = (-self._sa * px + self._ca * py) / self.b
        return (np.hypot(ux, uy) - 1.0) * min(self.a, self.b)

    # arc length: a*[E(pi/2|m) - E(pi/2-u|m)] for a >= b, b*E(u|m') otherwise
    def _arclen(self, u):
        if self.a == self.b:
            return self.a * np.asarray(u, dtype=float)
        if self.a > self.b:
            m = 1.0 - (self.b / self.a) ** 2
            return self.a * (special.ellipe(m) - special.ellipeinc(np.pi / 2 - np.asarray(u), m))
        m = 1.0 - (self.a / self.b) ** 2
        return self.b * special.ellipeinc(np.asarray(u, dtype=float), m)

    def _speed(self, u):
        return np.hypot(self.a * np.sin(u), self.b * np.cos(u))

    def _u_of_arclen(self, length):
        if self.a == self.b:
            return np.asarray(length, dtype=float) / self.a
        target = np.asarray(length, dtype=float)
        u = TWO_PI * target / self.perimeter
        for _ in range(30):
            step = (self._arclen(u) - target) / self._speed(u)
            u = u - step
            if np.all(np.abs(step) < 1e-15):
                break
        return u

    def hit(self, ox, oy, dx, dy, skip=SKIP_EPS):
        px, py = ox - self._cx, oy - self._cy
        a, b, ca, sa = self.a, self.b, self._ca, self._sa
        qx, qy = (ca * px + sa * py) / a, (-sa * px + ca * py) / b
        ex, ey = (ca * dx + sa * dy) / a, (-sa * dx + ca * dy) / b
        A = ex * ex + ey * ey
        B = qx * ex + qy * ey
        C = qx * qx + qy * qy - 1.0
        disc = B * B - A * C
        if disc < 0.0:
            lam = -B / A
            gap = math.sqrt(max(1.0 - disc / A, 0.0)) - 1.0
            if gap * min(a, b) > TOL_GEOM or lam <= skip:
                return None
            u = math.atan2(qy + lam * ey, qx + lam * ex) % TWO_PI
            return lam, u, True
        sq = math.sqrt(disc)
        q = -(B + math.copysign(sq, B))
        if q == 0.0:
            roots = (0.0,)
        else:
            r1, r2 = q / A, C / q
            roots = (r1, r2) if r1 <= r2 else (r2, r1)
        lam = None
        for r in roots:
            if r > skip:
                lam = r
                break
        if lam is None:
            return None
        hx, hy = qx + lam * ex, qy + lam * ey
        u = math.atan2(hy, hx) % TWO_PI
        _, _, nx, ny, _ = self.frame_u(u)
        return lam, u, abs(dx * nx + dy * ny) < _SIN_TANG

    def hit_batch(self, ox, oy, dx, dy, skip=SKIP_EPS):
        px, py = np.asarray(ox) - self._cx, np.asarray(oy) - self._cy
        a, b, ca, sa = self.a, self.b, self._ca, self._sa
        qx, qy = (ca * px + sa * py) / a, (-sa * px + ca * py) / b
        ex, ey = (ca * dx + sa * dy) / a, (-sa * dx + ca * dy) / b
        A = ex * ex + ey * ey
        B = qx * ex + qy * ey
        C = qx * qx + qy * qy - 1.0
        disc = B * B - A * C
        sq = np.sqrt(np.maximum(disc, 0.0))
        q = -(B + np.copysign(sq, B))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = q / A
            r2 = np.where(q != 0.0, C / q, 0.0)
        lo, hi = np.minimum(r1, r2), np.maximum(r1, r2)
        lam = np.where(lo > skip, lo, np.where(hi > skip, hi, np.inf))
        lam = np.where(disc >= 0.0, lam, np.inf)
        fin = np.isfinite(lam)
        lf = np.where(fin, lam, 0.0)
        u = np.mod(np.arctan2(qy + lf * ey, qx + lf * ex), TWO_PI)
        u = np.where(fin, u, np.nan)
        return lam, u

    def _tangent_us(self, ex, ey):
        qx, qy = self._to_unit(ex, ey)
        d = math.hypot(qx, qy)
        if d <= 1.0:
            raise InsidePoint("point is not outside the curve")
        psi = math.atan2(qy, qx)
        alpha = math.acos(1.0 / d)
        return (psi + alpha) % TWO_PI, (psi - alpha) % TWO_PI

    def __repr__(self):
        if self.kind == "circle":
            return f"circle(center={tuple(self.center)}, r={self.a})"
        return f"ellipse(center={tuple(self.center)}, a={self.a}, b={self.b}, angle={self.angle})"


def circle(center=(0.0, 0.0), radius: float = 1.0) -> Ellipse:
    return Ellipse(center, radius, radius, 0.0)


def ellipse(center=(0.0, 0.0), a: float = 2.0, b: float = 1.0, angle: float = 0.0) -> Ellipse:
    return Ellipse(center, a, b, angle)


def _as_array_fn(f: Callable) -> Callable:
    def g(u):
        u = np.asarray(u, dtype=float)
        return np.asarray(f(u), dtype=float) + np.zeros_like(u)
    return g


class RadialCurve(BoundaryCurve):
    """Star-shaped convex curve ``c + r(phi) (cos phi, sin phi)``.

    ``r``, ``dr`` and ``d2r`` must accept numpy arrays.  Intersections and
    tangencies are bracketed on ``samples`` grid points and refined with Brent's
    method, so fidelity depends on the sample count.
    """

    kind = "generic"

    def __init__(self, r: Callable, dr: Callable, d2r: Callable, center=(0.0, 0.0),
                 samples: int = 4096, expr: str | None = None):
        self.center = np.array(center, dtype=float)
        self._cx, self._cy = float(self.center[0]), float(self.center[1])
        self.r, self.dr, self.d2r = _as_array_fn(r), _as_array_fn(dr), _as_array_fn(d2r)
        self.samples = int(samples)
        self.expr = expr
        self._shift = 0.0
        n = self.samples
        self._h = TWO_PI / n
        self._grid_u = np.arange(n) * self._h
        nodes = self._grid_u[:, None] + self._h * _GL_X[None, :]
        seg = (self._speed(nodes) * _GL_W[None, :]).sum(axis=1) * self._h
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])
        self.perimeter = float(self._cum[-1])
        rr = self.r(self._grid_u)
        if np.any(rr <= 0):
            raise NonConvex("radial function must be positive")
        cu, su = np.cos(self._grid_u), np.sin(self._grid_u)
        self._gx = self._cx + rr * cu
        self._gy = self._cy + rr * su
        tx, ty, nx, ny = self.frame_batch(self._grid_u)
        self._gnx, self._gny = nx, ny
        k = self._curv(self._grid_u)
        if np.any(k <= TOL_CURV):
            raise NonConvex(f"curvature min {k.min():.3e} is not positive")

    def _speed(self, u):
        return np.hypot(self.r(u), self.dr(u))

    def _curv(self, u):
        r, r1, r2 = self.r(u), self.dr(u), self.d2r(u)
        return (r * r + 2 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5

    def xy(self, u):
        r = float(self.r(u))
        return self._cx + r * math.cos(u), self._cy + r * math.sin(u)

    def xy_batch(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        r = self.r(u)
        return np.column_stack([self._cx + r * np.cos(u), self._cy + r * np.sin(u)])

    def frame_batch(self, u):
        u = np.asarray(u, dtype=float)
        r, r1 = self.r(u), self.dr(u)
        cu, su = np.cos(u), np.sin(u)
        dx, dy = r1 * cu - r * su, r1 * su + r * cu
        sp = np.hypot(dx, dy)
        tx, ty = dx / sp, dy / sp
        return tx, ty, ty, -tx

    def frame_u(self, u):
        r, r1 = float(self.r(u)), float(self.dr(u))
        cu, su = math.cos(u), math.sin(u)
        dx, dy = r1 * cu - r * su, r1 * su + r * cu
        sp = math.hypot(dx, dy)
        tx, ty = dx / sp, dy / sp
        return tx, ty, ty, -tx, float(self._curv(u))

    def u_of_point(self, x, y):
        return math.atan2(y - self._cy, x - self._cx) % TWO_PI

    def _inside_value(self, x, y):
        rho = math.hypot(x - self._cx, y - self._cy)
        phi = math.atan2(y - self._cy, x - self._cx)
        return rho - float(self.r(phi))

    def inside_batch(self, x, y):
        px, py = np.asarray(x) - self._cx, np.asarray(y) - self._cy
        return np.hypot(px, py) - self.r(np.arctan2(py, px))

    def _arclen(self, u):
        u = np.asarray(u, dtype=float)
        k = np.clip((u / self._h).astype(int), 0, self.samples - 1)
        u0 = k * self._h
        w = u - u0
        nodes = u0[..., None] + w[..., None] * _GL_X
        part = (self._speed(nodes) * _GL_W).sum(axis=-1) * w
        return self._cum[k] + part

    def _u_of_arclen(self, length):
        L = np.asarray(length, dtype=float)
        k = np.clip(np.searchsorted(self._cum, L, side="right") - 1, 0, self.samples - 1)
        frac = (L - self._cum[k]) / (self._cum[k + 1] - self._cum[k])
        u = (k + frac) * self._h
        for _ in range(20):
            step = (self._arclen(u) - L) / self._speed(u)
            u = u - step
            if np.all(np.abs(step) < 1e-15):
                break
        return u

    def hit(self, ox, oy, dx, dy, skip=SKIP_EPS):
        h = dx * (self._gy - oy) - dy * (self._gx - ox)
        h_next = np.roll(h, -1)
        brackets = np.nonzero(np.sign(h) != np.sign(h_next))[0]
        best = None

        def hf(u):
            x, y = self.xy(u)
            return dx * (y - oy) - dy * (x - ox)

        for k in brackets:
            ua, ub = self._grid_u[k], self._grid_u[k] + self._h
            fa, fb = hf(ua), hf(ub)
            if fa == 0.0:
                u = ua
            elif fb == 0.0:
                u = ub
            elif np.sign(fa) == np.sign(fb):
                continue
            else:
                u = optimize.brentq(hf, ua, ub, xtol=1e-15, rtol=1e-15)
            x, y = self.xy(u)
            lam = dx * (x - ox) + dy * (y - oy)
            if lam > skip and (best is None or lam < best[0]):
                best = (lam, u % TWO_PI, False)
        # tangential touches leave no sign change; look for near-zero minima
        ah = np.abs(h)
        cand = np.nonzero((ah <= np.roll(ah, 1)) & (ah <= np.roll(ah, -1))
                          & (ah < 4.0 * self.perimeter / self.samples))[0]
        for k in cand:
            if k in brackets or (k - 1) % self.samples in brackets:
                continue
            u0 = self._grid_u[k]
            res = optimize.minimize_scalar(lambda u: abs(hf(u)), bounds=(u0 - self._h, u0 + self._h),
                                           method="bounded", options={"xatol": 1e-14})
            if res.fun < TOL_GEOM:
                x, y = self.xy(res.x)
                lam = dx * (x - ox) + dy * (y - oy)
                if lam > skip and (best is None or lam < best[0]):
                    best = (lam, res.x % TWO_PI, True)
        if best is None:
            return None
        lam, u, grazing = best
        if not grazing:
            _, _, nx, ny, _ = self.frame_u(u)
            grazing = abs(dx * nx + dy * ny) < _SIN_TANG
        return lam, u, grazing

    def _tangent_us(self, ex, ey):
        g = (self._gx - ex) * self._gnx + (self._gy - ey) * self._gny
        g_next = np.roll(g, -1)

        def gf(u):
            x, y = self.xy(u)
            _, _, nx, ny, _ = self.frame_u(u)
            return (x - ex) * nx + (y - ey) * ny

        up = down = None
        for k in np.nonzero(np.sign(g) != np.sign(g_next))[0]:
            ua, ub = self._grid_u[k], self._grid_u[k] + self._h
            u = optimize.brentq(gf, ua, ub, xtol=1e-15, rtol=1e-15) % TWO_PI
            if g[k] < 0:
                up = u
            else:
                down = u
        if up is None or down is None:
            raise InsidePoint("point is not outside the curve")
        return up, down

    def __repr__(self):
        return f"generic(center={tuple(self.center)}, r={self.expr or '<callable>'})"


def radial_from_expr(expr: str, center=(0.0, 0.0), samples: int = 4096) -> RadialCurve:
    """Build a radial curve from a sympy expression in ``phi``."""
    import sympy as sp

    phi = sp.Symbol("phi")
    e = sp.sympify(expr, locals={"phi": phi})
    funcs = [sp.lambdify(phi, x, "numpy") for x in (e, sp.diff(e, phi), sp.diff(e, phi, 2))]
    return RadialCurve(*funcs, center=center, samples=samples, expr=expr)


def ellipse_as_radial(a: float, b: float, center=(0.0, 0.0), samples: int = 4096) -> RadialCurve:
    """Axis-aligned ellipse expressed through its polar radius (for oracle checks)."""
    return radial_from_expr(f"{a}*{b}/sqrt(({b}*cos(phi))**2 + ({a}*sin(phi))**2)",
                            center=center, samples=samples)



def _circ_dist(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


@dataclass(frozen=True)
class BoundaryArc:
    """Open arc ``{s : s runs counter-clockwise from lo to hi}`` on one boundary.

    ``full`` and ``empty`` mark the whole boundary and the empty set; for those
    the endpoints are ignored.
    """

    boundary: str
    lo: float = 0.0
    hi: float = 0.0
    full: bool = False
    empty: bool = False

    @classmethod
    def whole(cls, boundary: str) -> "BoundaryArc":
        return cls(boundary, 0.0, 0.0, full=True)

    @classmethod
    def none(cls, boundary: str) -> "BoundaryArc":
        return cls(boundary, 0.0, 0.0, empty=True)

    @property
    def length(self) -> float:
        """Length as a fraction of the perimeter."""
        if self.full:
            return 1.0
        if self.empty:
            return 0.0
        return (self.hi - self.lo) % 1.0

    def offset(self, s: float) -> float:
        return (s - self.lo) % 1.0

    def contains(self, s: float, tol: float = 0.0) -> bool:
        """Membership in the open arc, excluding a collar ``tol`` at each end."""
        if self.full:
            return True
        if self.empty:
            return False
        d = (s - self.lo) % 1.0
        return tol < d < self.length - tol

    def contains_closed(self, s: float, tol: float = 0.0) -> bool:
        if self.full:
            return True
        if self.empty:
            return False
        d = (s - self.lo) % 1.0
        return d <= self.length + tol or d >= 1.0 - tol

    def complement(self) -> "BoundaryArc":
        if self.full:
            return BoundaryArc.none(self.boundary)
        if self.empty:
            return BoundaryArc.whole(self.boundary)
        return BoundaryArc(self.boundary, self.hi, self.lo)

    def includes(self, other: "BoundaryArc", tol: float = 0.0) -> bool:
        """True if ``other`` is a subset of this arc (up to ``tol`` at the ends)."""
        if other.empty or self.full:
            return True
        if other.full:
            return self.full or self.length >= 1.0 - tol
        if self.empty:
            return False
        start = (other.lo - self.lo) % 1.0
        if start > 1.0 - tol:
            start -= 1.0
        return start >= -tol and start + other.length <= self.length + tol

    def hausdorff(self, other: "BoundaryArc") -> float:
        """Parameter-space distance between two arcs, via their endpoints."""
        if self.full or other.full or self.empty or other.empty:
            same = (self.full, self.empty) == (other.full, other.empty)
            return 0.0 if same else 1.0
        return max(_circ_dist(self.lo, other.lo), _circ_dist(self.hi, other.hi))

    def sample(self, n: int, closed: bool = False) -> np.ndarray:
        """``n`` parameters spread over the arc (endpoints included if ``closed``)."""
        if closed:
            t = np.linspace(0.0, self.length, n)
        else:
            t = (np.arange(n) + 0.5) * self.length / n
        return np.mod(self.lo + t, 1.0)


class ArcTest:
    """Fast membership test for an arc, in native curve parameters."""

    def __init__(self, curve: BoundaryCurve, arc: BoundaryArc, tol: float = TOL_GEOM):
        self.arc = arc
        self.full, self.empty = arc.full, arc.empty
        if not (self.full or self.empty):
            self.u_lo = curve.u_of_s(arc.lo)
            self.span = (curve.u_of_s(arc.hi) - self.u_lo) % TWO_PI
            if self.span == 0.0:
                self.span = TWO_PI
            # smallest speed |dP/du| bounds the parameter width of the collar
            us = np.linspace(0.0, TWO_PI, 256, endpoint=False)
            pts = curve.xy_batch(us)
            seg = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T) / (us[1] - us[0])
            self.tol_u = tol / max(float(seg.min()), 1e-300)

    def __call__(self, u: float) -> bool:
        if self.full:
            return True
        if self.empty:
            return False
        d = (u - self.u_lo) % TWO_PI
        return self.tol_u < d < self.span - self.tol_u

    def batch(self, u: np.ndarray) -> np.ndarray:
        if self.full:
            return np.ones(np.shape(u), bool)
        if self.empty:
            return np.zeros(np.shape(u), bool)
        d = np.mod(u - self.u_lo, TWO_PI)
        return (d > self.tol_u) & (d < self.span - self.tol_u)
