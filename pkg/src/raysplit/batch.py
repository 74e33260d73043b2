"""Vectorised straight-flight kernels shared by the scanning analyses."""
from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from .geometry import SKIP_EPS

if TYPE_CHECKING:
    from .scenario import Scenario


def first_hits(scn: "Scenario", medium: int, x, y, dx, dy, skip: float = SKIP_EPS):
    """Nearest boundary for each ray: ``(on_inner, distance, u)``.

    ``u`` is the native parameter on whichever curve was hit; misses give an
    infinite distance.
    """
    inner = scn.inner_curve
    if medium == 2:
        lam, u = inner.hit_batch(x, y, dx, dy, skip)
        return np.ones(len(lam), bool), lam, u
    lam_o, u_o = scn.outer_curve.hit_batch(x, y, dx, dy, skip)
    if inner is None:
        return np.zeros(len(lam_o), bool), lam_o, u_o
    lam_i, u_i = inner.hit_batch(x, y, dx, dy, skip)
    on_inner = lam_i < lam_o
    return on_inner, np.where(on_inner, lam_i, lam_o), np.where(on_inner, u_i, u_o)


def frames(curve, u):
    tx, ty, nx, ny = curve.frame_batch(u)
    return np.asarray(tx), np.asarray(ty), np.asarray(nx), np.asarray(ny)


def reflect(dx, dy, nx, ny):
    k = 2.0 * (dx * nx + dy * ny)
    return dx - k * nx, dy - k * ny


def refract(dx, dy, nx, ny, ratio):
    """Snell transmission for arrays; rows with total reflection come back as nan."""
    cos_i = dx * nx + dy * ny
    flip = np.where(cos_i < 0.0, -1.0, 1.0)
    nx, ny, cos_i = nx * flip, ny * flip, cos_i * flip
    tx, ty = dx - cos_i * nx, dy - cos_i * ny
    sin2 = ratio * ratio * (tx * tx + ty * ty)
    ok = sin2 <= 1.0
    cos_o = np.sqrt(np.where(ok, 1.0 - sin2, np.nan))
    ox, oy = ratio * tx + cos_o * nx, ratio * ty + cos_o * ny
    norm = np.hypot(ox, oy)
    return ox / norm, oy / norm


def incidence(dx, dy, nx, ny):
    """Angle between each direction and the normal line, in [0, pi/2]."""
    return np.arctan2(np.abs(dx * ny - dy * nx), np.abs(dx * nx + dy * ny))


def launch(curve, s, theta, inward: bool = True):
    """Points and directions at angle ``theta`` from the ccw tangent.

    With ``inward`` the direction leans toward the region enclosed by the
    curve, otherwise away from it.
    """
    u = curve.u_of_s(np.asarray(s, dtype=float))
    pts = curve.xy_batch(u)
    tx, ty, nx, ny = frames(curve, u)
    sgn = -1.0 if inward else 1.0
    c, sn = np.cos(theta), np.sin(theta)
    return pts[:, 0], pts[:, 1], c * tx + sgn * sn * nx, c * ty + sgn * sn * ny
