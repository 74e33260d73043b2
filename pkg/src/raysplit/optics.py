"""Pointwise optical laws at a boundary: reflection, refraction, event classes."""
from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .errors import GrazingOuter, NonPositiveSpeed, SpeedOrder

TOL_ANGLE = 1e-9


class EventKind(str, Enum):
    OUTER_REFLECTION = "OuterReflection"
    REFLECT_TRANSMIT = "ReflectTransmit"
    CRITICAL_GLIDING = "CriticalGliding"
    TOTAL_INTERNAL_REFLECTION = "TotalInternalReflection"
    DIFFRACTIVE = "Diffractive"
    OUTER_GLIDING = "OuterGliding"

    def __str__(self) -> str:
        return self.value


def reflect(d, n) -> np.ndarray:
    """Specular reflection ``d - 2<d,n> n``."""
    d = np.asarray(d, dtype=float)
    n = np.asarray(n, dtype=float)
    return d - 2.0 * float(d @ n) * n


def refract(d, n, c_in: float, c_out: float) -> np.ndarray | None:
    """Snell transmission of ``d`` through an interface with normal ``n``.

    The orientation of ``n`` does not matter; the transmitted ray keeps the
    tangential orientation of ``d`` and crosses to the other side.  Returns
    None when ``(c_out/c_in) sin(theta_in) > 1``.
    """
    if c_in <= 0 or c_out <= 0:
        raise NonPositiveSpeed(f"speeds must be positive, got {c_in}, {c_out}")
    d = np.asarray(d, dtype=float)
    n = np.asarray(n, dtype=float)
    out = refract_xy(float(d[0]), float(d[1]), float(n[0]), float(n[1]), c_out / c_in)
    return None if out is None else np.array(out)


def refract_xy(dx, dy, nx, ny, ratio):
    """Float version of :func:`refract`; ``ratio = c_out / c_in``."""
    cos_i = dx * nx + dy * ny
    if cos_i < 0.0:
        nx, ny, cos_i = -nx, -ny, -cos_i
    tx, ty = dx - cos_i * nx, dy - cos_i * ny
    sin_o2 = ratio * ratio * (tx * tx + ty * ty)
    if sin_o2 > 1.0:
        return None
    cos_o = math.sqrt(1.0 - sin_o2)
    ox, oy = ratio * tx + cos_o * nx, ratio * ty + cos_o * ny
    norm = math.hypot(ox, oy)
    return ox / norm, oy / norm


def reflect_xy(dx, dy, nx, ny):
    k = 2.0 * (dx * nx + dy * ny)
    return dx - k * nx, dy - k * ny


def incidence_angle(d, n) -> float:
    """Angle in [0, pi/2] between the line of ``d`` and the normal line."""
    d = np.asarray(d, dtype=float)
    n = np.asarray(n, dtype=float)
    return incidence_xy(float(d[0]), float(d[1]), float(n[0]), float(n[1]))


def incidence_xy(dx, dy, nx, ny) -> float:
    return math.atan2(abs(dx * ny - dy * nx), abs(dx * nx + dy * ny))


def critical_angle(c_slow: float, c_fast: float) -> float:
    """Incidence angle beyond which a ray from the slow medium is totally reflected."""
    if c_slow <= 0 or c_fast <= 0:
        raise NonPositiveSpeed(f"speeds must be positive, got {c_slow}, {c_fast}")
    if c_slow > c_fast:
        raise SpeedOrder(f"c_slow={c_slow} exceeds c_fast={c_fast}")
    return math.asin(c_slow / c_fast)


def classify_hit(boundary: str, incoming_medium: int, theta: float, grazing: bool,
                 c1: float, c2: float, tol_angle: float = TOL_ANGLE,
                 started_gliding: bool = False) -> EventKind:
    """Event class of a boundary hit.

    ``boundary`` is ``"outer"`` or ``"inner"``; ``incoming_medium`` is 1 or 2.
    A ray coming from the slower medium has a critical angle; one coming from
    the faster medium always splits.  With the usual ``c2 > c1`` this means
    rays from the inclusion always reflect and transmit.
    """
    if boundary == "outer":
        if started_gliding:
            return EventKind.OUTER_GLIDING
        if grazing:
            raise GrazingOuter("an interior ray grazed the outer boundary")
        return EventKind.OUTER_REFLECTION
    if boundary != "inner":
        raise ValueError(f"unknown boundary {boundary!r}")
    c_in, c_out = (c1, c2) if incoming_medium == 1 else (c2, c1)
    if grazing and incoming_medium == 1:
        return EventKind.DIFFRACTIVE
    if c_out <= c_in:
        return EventKind.REFLECT_TRANSMIT
    theta_c = math.asin(c_in / c_out)
    if theta < theta_c - tol_angle:
        return EventKind.REFLECT_TRANSMIT
    if theta <= theta_c + tol_angle:
        return EventKind.CRITICAL_GLIDING
    return EventKind.TOTAL_INTERNAL_REFLECTION
