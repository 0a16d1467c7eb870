"""Invariant suites for a configured family + forcing, runnable in batch.

Each check returns (name, passed, detail); the CLI ``verify`` command prints
one line per check and exits nonzero when anything fails.  The same suites
back the property tests, so library and batch runs agree on what "healthy"
means.
"""

from __future__ import annotations

import numpy as np

from .families import Family
from .iem import compose, invert, reflection
from .orbits import ResidualG, find_symmetric
from .perturbed import BoundaryEscape, Forcing, PerturbedMap, PhasePoint
from .symlines import fixed_set_residual, gamma, intersections

__all__ = ["run_all_suites", "Check"]


class Check(tuple):
    def __new__(cls, name, passed, detail=""):
        return super().__new__(cls, (name, bool(passed), detail))

    @property
    def name(self):
        return self[0]

    @property
    def passed(self):
        return self[1]

    @property
    def detail(self):
        return self[2]


def _interior_ys(fam: Family, n: int, rng) -> list[float]:
    y0, y1 = (float(v) for v in fam.domain)
    span = y1 - y0
    return [y0 + span * (0.02 + 0.96 * float(rng.random())) for _ in range(n)]


def suite_iem_core(fam: Family, rng, n_samples=1000):
    checks = []
    ys = _interior_ys(fam, 3, rng)
    ok_tile = True
    for y in ys:
        F = fam.iem_at(y)
        imgs = sorted((l + w, l + w + lam) for l, w, lam in zip(F.lefts, F.omega, F.lengths))
        ok_tile &= abs(float(imgs[0][0])) < 1e-12 and abs(float(imgs[-1][1]) - 1) < 1e-12
        ok_tile &= all(abs(float(imgs[i][1] - imgs[i + 1][0])) < 1e-12 for i in range(len(imgs) - 1))
    checks.append(Check("iem.partition", ok_tile))

    F = fam.iem_at(ys[0])
    G = fam.iem_at(ys[1])
    C = compose(F, G)
    worst = 0.0
    for _ in range(n_samples):
        x = float(rng.random())
        worst = max(worst, abs(C.evaluate(x) - F.evaluate(G.evaluate(x))))
    checks.append(Check("iem.compose_evaluate", worst <= 1e-12, f"worst={worst:.2e}"))

    Fi = invert(F)
    worst = max(abs(Fi.evaluate(F.evaluate(float(rng.random()))) - 0) for _ in [0])
    worst = 0.0
    for _ in range(200):
        x = float(rng.random())
        worst = max(worst, abs(Fi.evaluate(F.evaluate(x)) - x))
    ident = compose(F, Fi)
    checks.append(Check("iem.inverse", worst <= 1e-12 and ident.d == 1, f"worst={worst:.2e}"))

    if fam.perm.is_reversing:
        ok = True
        for _ in range(200):
            x = float(rng.random())
            y = reflection(F.evaluate(x))
            ok &= F.interval_of(x) == F.interval_of(y)
            ok &= abs(reflection(F.evaluate(y)) - x) <= 1e-12
        checks.append(Check("iem.local_reflection", ok))
    return checks


def suite_fiem(fam: Family, rng):
    checks = []
    ys = np.linspace(float(fam.domain[0]), float(fam.domain[1]), 1000)
    worst = max(abs(sum(float(v) for v in fam._lam_raw(float(y))) - 1) for y in ys)
    checks.append(Check("fiem.normalization", worst <= 1e-12, f"worst={worst:.2e}"))

    ok = True
    for _ in range(100):
        y = _interior_ys(fam, 1, rng)[0]
        x = float(rng.random())
        ok &= fam.index_at(x, y) == fam.iem_at(y).interval_of(x)
    checks.append(Check("fiem.partition_in_y", ok))

    if fam.perm.is_reversing:
        worst = 0.0
        for y in np.linspace(float(fam.domain[0]) + 1e-6, float(fam.domain[1]) - 1e-6, 101):
            m = fam.midpoints(float(y))
            w = fam.omega_all(float(y))
            worst = max(worst, max(abs(float(mi) - (1 - float(wi)) / 2) for mi, wi in zip(m, w)))
        checks.append(Check("fiem.reversing_midpoint_identity", worst <= 1e-12, f"worst={worst:.2e}"))
    return checks


def suite_perturbed(T: PerturbedMap, rng, n_points=1000):
    checks = []
    worst_rev = worst_inv = worst_det = worst_L = 0.0
    fib_ok = True
    h = 1e-6
    count = 0
    while count < n_points:
        p = PhasePoint(float(rng.random()), _interior_ys(T.family, 1, rng)[0])
        if T.distance_to_discontinuity(p) < 1e-5:
            continue
        count += 1
        s2 = T.symmetry_S(T.symmetry_S(p))
        worst_inv = max(worst_inv, abs((s2.x - p.x + 0.5) % 1 - 0.5), T.y_dist(s2.y, p.y))
        l2 = T.local_symmetry_L(T.local_symmetry_L(p))
        worst_L = max(worst_L, abs((l2.x - p.x + 0.5) % 1 - 0.5), T.y_dist(l2.y, p.y))
        if T.local_symmetry_L(p).y != p.y:
            worst_L = max(worst_L, 1.0)
        try:
            z = T.symmetry_S(T.step(T.symmetry_S(T.step(p))))
            worst_rev = max(worst_rev, abs((z.x - p.x + 0.5) % 1 - 0.5), T.y_dist(z.y, p.y))
        except BoundaryEscape:
            pass
        try:
            cols = []
            for dx, dy in [(h, 0.0), (0.0, h)]:
                qp = T.step((p.x + dx, p.y + dy))
                qm = T.step((p.x - dx, p.y - dy))
                ddx = qp.x - qm.x
                ddx -= round(ddx)
                cols.append((ddx / (2 * h), T.y_diff(qp.y, qm.y) / (2 * h)))
            fd = np.array(cols).T
            worst_det = max(worst_det, abs(float(np.linalg.det(fd)) - 1.0))
        except BoundaryEscape:
            pass
        if T.eps == 0:
            fib_ok &= T.step(p).y == p.y
    checks.append(Check("perturbed.involutions", worst_inv <= 1e-13, f"worst={worst_inv:.2e}"))
    checks.append(Check("perturbed.L_involution", worst_L <= 1e-13, f"worst={worst_L:.2e}"))
    checks.append(Check("perturbed.reversibility", worst_rev <= 1e-11, f"worst={worst_rev:.2e}"))
    checks.append(Check("perturbed.area_preservation", worst_det <= 1e-5, f"worst={worst_det:.2e}"))
    if T.eps == 0:
        checks.append(Check("perturbed.unperturbed_fibration", fib_ok))
    return checks


def suite_symmetry(T: PerturbedMap, i_max=3, samples=201):
    checks = []
    worst = 0.0
    lines = {}
    for i in range(-i_max, i_max + 1):
        g = gamma(T, i, samples=samples)
        lines[i] = g
        for b in g.branches:
            res = fixed_set_residual(T, i, b.points)
            if np.any(np.isfinite(res)):
                worst = max(worst, float(np.nanmax(res)))
    checks.append(Check("symmetry.fixed_set_residual", worst <= 1e-9, f"worst={worst:.2e}"))

    ok = True
    checked = 0
    for (j, k) in [(0, 1), (-1, 1), (0, 2)]:
        if j not in lines or k not in lines:
            continue
        for c in intersections(lines[j], lines[k], T):
            if not c.refined:
                continue
            p = PhasePoint(c.x, c.y)
            try:
                for _ in range(c.divisor_period):
                    p = T.step(p)
            except BoundaryEscape:
                continue
            ok &= abs((p.x - c.x + 0.5) % 1 - 0.5) <= 1e-10 and abs(p.y - c.y) <= 1e-10
            checked += 1
    checks.append(Check("symmetry.period_dividing", ok, f"checked={checked}"))
    return checks


def suite_orbits(T: PerturbedMap, rng, q_max=2, samples=201):
    checks = []
    T0 = PerturbedMap(T.family, T.forcing, 0.0)
    worst = 0.0
    for _ in range(50):
        q = 1 + int(rng.random() * 5)
        x0 = float(rng.random())
        y0 = _interior_ys(T.family, 1, rng)[0]
        itin = T0.orbit_itinerary((x0, y0), q)
        G = ResidualG(T0, q, itin)
        _, Dg = G.value_and_jacobian(x0, y0)
        det = Dg[0, 0] * Dg[1, 1] - Dg[0, 1] * Dg[1, 0]
        pts = T0.orbit_points(PhasePoint(x0, y0), q)
        sw = sum(float(T.family.omega_deriv(y0, a)) for a in itin)
        sf = sum(T.forcing.df(p.x) for p in pts)
        worst = max(worst, abs(det + sw * sf))
    checks.append(Check("orbits.dg_identity", worst <= 1e-9, f"worst={worst:.2e}"))

    found = find_symmetric(T, q_max, samples=samples)
    ok_close = all(r.closure_error <= 1e-10 for r in found)
    checks.append(Check("orbits.closure", ok_close, f"n={len(found)}"))
    ok_place = True
    for r in found:
        if r.witness_lines:
            res = min(fixed_set_residual(T, i, [r.points[0]])[0] for i in r.witness_lines)
            ok_place &= res <= 1e-8
    checks.append(Check("orbits.symmetric_placement", ok_place))
    return checks


def run_all_suites(fam: Family, forcing: Forcing, eps: float, rng_seed: int = 20250810,
                   i_max: int = 3, q_max: int = 2, n_points: int = 1000):
    import random

    rng = random.Random(rng_seed)
    T = PerturbedMap(fam, forcing, eps)
    checks = []
    checks += suite_iem_core(fam, rng)
    checks += suite_fiem(fam, rng)
    checks += suite_perturbed(T, rng, n_points=n_points)
    checks += suite_symmetry(T, i_max=i_max)
    checks += suite_orbits(T, rng, q_max=q_max)
    return checks
