"""Locating symmetric periodic orbits along symmetry lines.

Uses the 4-interval family interpolating (0.38, 0.01, 0.01, 0.6) and its
reverse: at y = 1/2 the unperturbed member has two period-2 intervals whose
midpoints continue to isolated orbits once the kick is switched on.  The
search intersects the primary symmetry lines with their pushforwards and
Newton-refines each crossing.
"""

from iexmaps import (
    Family,
    Forcing,
    Permutation,
    PerturbedMap,
    find_symmetric,
    gamma_primary,
    intersections,
    transversality_test,
)

fam = Family.linear(Permutation.reversing(4), ["19/50", "1/100", "1/100", "3/5"],
                    ["3/5", "1/100", "1/100", "19/50"])
T = PerturbedMap(fam, Forcing.single(1), 1e-3)

g0, gm1 = gamma_primary(T, samples=301)
print("Gamma_0 branches:", len(g0.branches), " Gamma_-1 branches:", len(gm1.branches))
cands = intersections(g0, gm1, T)
print("Gamma_0 x Gamma_-1 crossings (period | 1):")
for c in cands:
    print(f"  ({c.x:.6f}, {c.y:.6f}) refined={c.refined}")

found = find_symmetric(T, q_max=2, samples=301)
print("\nsymmetric orbits with q <= 2 at eps = 1e-3:")
for r in found:
    print(f"  q={r.q} x0={r.x0:.6f} y0={r.y0:.6f} M={r.M:+.4f} residue={r.residue:+.3e} -> {r.stability}")

# the unperturbed transversality certificate behind the persistence
T0 = PerturbedMap(fam, Forcing.single(1), 0.0)
v = transversality_test(T0, [(0.245, 0.5), (0.755, 0.5)])
print("\ntransversality at the period-2 orbit:", v.case,
      f"tangent difference {v.delta:+.3f}, k-vector {v.khat}, transversal={v.transversal}")
