"""The trapped ray inside an ellipse with a slow disc, and how fast it is lost under rounding."""
import math

from raysplit.escape import find_trapped_rays
from raysplit.scenario import trapped_scenario

scn = trapped_scenario()
orbits = find_trapped_rays(scn, scn.gamma)
print(f"{len(orbits)} trapped orbit(s)")
for o in orbits:
    print(f"  length {o.length:.12f} (44/sqrt(33) = {44 / math.sqrt(33):.12f}), mechanism {o.mechanism}")
    for p in o.points:
        print(f"    vertex ({p[0]: .6f}, {p[1]: .6f})")
    # each period amplifies rounding error roughly a thousandfold on the unstable orbits
    drifts = [o.shadow(scn, n) for n in range(1, 7)]
    print("    drift after 1..6 periods:", " ".join(f"{d:.1e}" for d in drifts))
