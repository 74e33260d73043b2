"""Caustics, focal orbits and a two-sided control arc in the ellipse x^2/4 + y^2 = 1."""
import math

import numpy as np

from raysplit.ellipse_lab import both_sides_gcc, classify_caustic, focal_convergence, search_both_sides
from raysplit.geometry import Ellipse

ell = Ellipse((0, 0), 2, 1)
for a, b in ((80, 100), (80, 260), (0, 180), (90, 270)):
    p = [2 * math.cos(math.radians(a)), math.sin(math.radians(a))]
    q = [2 * math.cos(math.radians(b)), math.sin(math.radians(b))]
    print(f"chord {a:3d} deg -> {b:3d} deg: {classify_caustic(ell, p, q)}")

run = focal_convergence(ell, (0, 1), 60)
print("focal orbit |y| every 10 bounces:", np.round(np.abs(run.ys[::10]), 8))

x1, arc = search_both_sides(ell)
first, second = both_sides_gcc(ell, arc, horizon=100, grid=(90, 45))
print(f"x1 = {x1}, arc length {arc.length:.4f}: arc {first.passed}, complement {second.passed}")
