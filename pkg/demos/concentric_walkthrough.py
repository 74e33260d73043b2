"""Observation regions for an annulus observed from far away, then the sampled check."""
from raysplit.escape import is_uniformly_escaping
from raysplit.gcc import check_observability
from raysplit.regions import construct, witness_x02
from raysplit.scenario import concentric_scenario

scn = concentric_scenario()
st = construct(scn)
for k, g1, g2 in st.history:
    print(f"iter {k}: outer {g1.lo:.4f}..{g1.hi:.4f}  inner {g2.lo:.4f}..{g2.hi:.4f}")
print("stopped:", st.reason)
print("inner witness point:", witness_x02(scn, st.gamma2))
print("uniform escape:", is_uniformly_escaping(scn, st.gamma2).ueg)

rep = check_observability(scn, grid=(32, 16))
print(f"sampled observability: all observed = {rep.all_observed}, max time = {rep.max_time:.3f}")
