"""Persisting non-symmetric orbits under a high-harmonic kick.

For f = sin(2 pi l x) the displaced roots x +- m/(2l) inside an unperturbed
periodic interval of width d survive the perturbation whenever the symmetric
orbit is unbalanced; there are exactly 2(ceil(l d) - 1) of them and none at
all below l = ceil(1/d).  The 3-interval family below has a fixed interval
of width 0.3 around x = 1/2 at y = 1/2.
"""

from iexmaps import (
    Family,
    Forcing,
    Permutation,
    PerturbedMap,
    make_record,
    newton_refine,
    predict_nonsymmetric,
)

fam = Family.linear(Permutation.reversing(3), [0.25, 0.3, 0.45], [0.45, 0.3, 0.25])

for harmonic in (1, 3, 4, 9):
    T0 = PerturbedMap(fam, Forcing.single(harmonic), 0.0)
    sym = make_record(T0, (0.5, 0.5), 1)
    pred = predict_nonsymmetric(T0, sym, harmonic)
    print(f"l = {harmonic}: interval width {pred.width:.2f} -> {pred.count} predicted orbits")
    if not pred.count:
        continue
    T = PerturbedMap(fam, Forcing.single(harmonic), 1e-3)
    for seed in pred.seed_orbits:
        rec = newton_refine(T, seed[0], 1)
        print(f"    x0 = {rec.x0:.6f}  residue = {rec.residue:+.3e}  {rec.stability}"
              f"  symmetric={rec.symmetric}")

# the symmetric point itself stays hyperbolic for l = 9
T = PerturbedMap(fam, Forcing.single(9), 1e-3)
sym = newton_refine(T, (0.5, 0.5), 1)
print(f"\nsymmetric fixed point: residue {sym.residue:+.3e} -> {sym.stability}")
