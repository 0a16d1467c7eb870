"""Continuation in eps and the pitchfork of the elliptic period-2 orbit.

Along the sweep the near-quarter orbit point drifts right; exactly when it
crosses x = 1/4 (at eps = 1/11 for this family) the elliptic symmetric orbit
turns hyperbolic and two elliptic non-symmetric orbits, exchanged by the
local reflection L, branch off on the same horizontal segment.
"""

import numpy as np

from iexmaps import Family, Forcing, Permutation, PerturbedMap, newton_refine, sweep_eps

fam = Family.linear(Permutation.reversing(4), ["19/50", "1/100", "1/100", "3/5"],
                    ["3/5", "1/100", "1/100", "19/50"])
fc = Forcing.single(1)

start = newton_refine(PerturbedMap(fam, fc, 5e-4), (0.245, 0.5), 2)
grid = np.arange(5e-4, 0.1101, 5e-4)
sw = sweep_eps(fam, fc, start, grid)

for e in sw.events:
    print(f"event {e.kind:>20} at eps = {e.eps:.4f}")

print("\ntrack tail:")
for r in sw.rows[-9:]:
    rec = r.record
    print(f"  eps={r.eps:.4f} {r.branch:>7} x0={rec.x0:.5f} y0={rec.y0:.5f} "
          f"res={rec.residue:+.2e} {rec.stability} symmetric={rec.symmetric}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the figure")
else:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors = {"main": "k", "branch+": "tab:red", "branch-": "tab:blue"}
    for r in sw.rows:
        xq = min(p.x for p in r.record.points)
        ax.plot(r.eps, xq, ".", ms=2, color=colors[r.branch])
    for e in sw.events:
        if e.kind == "pitchfork":
            ax.axvline(e.eps, ls="--", lw=0.8, color="gray")
    ax.set_xlabel("eps")
    ax.set_ylabel("x of the near-quarter orbit point")
    ax.set_title("pitchfork of the symmetric period-2 orbit (eps_b = 1/11)")
    fig.savefig("demo_pitchfork.png", dpi=150)
    print("wrote demo_pitchfork.png")
