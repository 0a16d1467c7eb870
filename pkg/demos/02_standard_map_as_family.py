"""The standard map as a perturbed family of 2-interval exchange maps.

The family lambda(y) = (1-y, y) makes F_y a rotation by y; adding the kick
eps*sin(2*pi*x') on the action gives exactly the Chirikov map on the torus.
This script iterates a bundle of seeds, samples the first symmetry lines and
saves a phase portrait.
"""

import numpy as np

from iexmaps import Family, Forcing, Permutation, PerturbedMap, gamma

EPS = 0.12

fam = Family.linear(Permutation.reversing(2), [1, 0], [0, 1], wrap_y=1.0)
T = PerturbedMap(fam, Forcing.single(1), EPS)

# one-step images agree with the directly coded Chirikov formula
rng = np.random.default_rng(7)
x, y = rng.random(8), rng.random(8)
cx = (x + y) % 1
cy = (y + EPS * np.sin(2 * np.pi * cx)) % 1
X, Y, _, _ = T.step_many(x, y)
print("one-step deviation from Chirikov:", float(np.abs(X - cx).max()), float(np.abs(Y - cy).max()))

# long trajectories (y wraps on the torus)
trajs = []
for x0 in np.linspace(0.02, 0.98, 25):
    xs, ys = np.full(1, x0 % 1), np.full(1, (2.71 * x0) % 1)
    px, py = [], []
    for _ in range(3000):
        xs, ys, _, _ = T.step_many(xs, ys)
        px.append(xs[0])
        py.append(ys[0])
    trajs.append((px, py))

lines = {i: gamma(T, i, samples=513) for i in range(-7, 8)}
print("symmetry lines sampled:", {i: g.n_samples() for i, g in sorted(lines.items())})

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the figure")
else:
    fig, ax = plt.subplots(figsize=(7, 7))
    for px, py in trajs:
        ax.plot(px, py, ".", ms=0.4)
    for i, g in lines.items():
        for b in g.branches:
            lw = 1.6 if i in (0, 1) else 0.6
            ax.plot(b.points[:, 0], b.points[:, 1], "k.", ms=lw)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"standard map as a perturbed 2-interval family, eps = {EPS}")
    fig.savefig("demo_standard_map.png", dpi=150)
    print("wrote demo_standard_map.png")
