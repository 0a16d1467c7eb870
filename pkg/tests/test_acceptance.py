"""Acceptance criteria, one test per criterion.

Each test appends a PASS/FAIL line to acceptance_report.txt in the repo root
(and prints it), so a plain pytest run leaves a one-line-per-criterion
record.  Two sub-criteria are expected failures with a documented analysis
(see the ledger): the standard-map fixed point has residue exactly pi*eps/2
(linear, not quadratic, in eps), and the figure-12 pitchfork sits at
eps_b = 1/11, outside the window (0, 0.05] the criterion guessed.
"""

import csv
import json
import math
import time
from fractions import Fraction as Fr
from pathlib import Path

import numpy as np
import pytest

from iexmaps.families import Family
from iexmaps.iem import (
    Iem,
    Lengths,
    Permutation,
    SaddleConnection,
    orbit_intervals,
    periodic_intervals,
    reflection,
    saddle_connections,
    verify_no_nonsymmetric,
)
from iexmaps.orbits import (
    find_symmetric,
    make_record,
    newton_refine,
    predict_nonsymmetric,
    sweep_eps,
)
from iexmaps.perturbed import BoundaryEscape, Forcing, PerturbedMap, PhasePoint
from iexmaps.symlines import fixed_set_residual, gamma, intersections

REPORT = Path(__file__).resolve().parent.parent / "acceptance_report.txt"
_started = False


def report(criterion: str, passed: bool, detail: str = ""):
    global _started
    line = f"{criterion}: {'PASS' if passed else 'FAIL'}" + (f"  ({detail})" if detail else "")
    mode = "w" if not _started else "a"
    with open(REPORT, mode) as fh:
        fh.write(line + "\n")
    _started = True
    print(line)


def std_family():
    return Family.linear(Permutation.reversing(2), [1, 0], [0, 1], wrap_y=1.0)


def fig12_family():
    return Family.linear(Permutation.reversing(4), ["19/50", "1/100", "1/100", "3/5"],
                         ["3/5", "1/100", "1/100", "19/50"])


def iem3_family():
    return Family.linear(Permutation.reversing(3), [0.25, 0.3, 0.45], [0.45, 0.3, 0.25])


def fig8_family():
    # unnormalized figure data; the constructor rescales (and warns)
    with pytest.warns(UserWarning):
        fam = Family.linear(Permutation.reversing(4), [0.07, 0.06, 0.13, 0.29],
                            [0.12, 0.23, 0.29, 0.45])
    return fam


def test_a1_standard_map_equivalence():
    t0 = time.time()
    worst = 0.0
    for eps in (0.05, 0.1545):
        T = PerturbedMap(std_family(), Forcing.single(1), eps)
        rng = np.random.default_rng(42)
        x, y = rng.random(100), rng.random(100)
        for _ in range(10_000):
            cx = (x + y) % 1
            cy = (y + eps * np.sin(2 * np.pi * cx)) % 1
            x, y, _, _ = T.step_many(x, y)
            worst = max(worst, float(np.abs(x - cx).max()), float(np.abs(y - cy).max()))
    dt = time.time() - t0
    ok = worst <= 1e-12 and dt < 5.0
    report("A1 standard-map equivalence", ok, f"max dev {worst:.2e}, {dt:.1f}s")
    assert worst <= 1e-12
    assert dt < 5.0


def test_a2_standard_map_gamma1():
    t0 = time.time()
    worst = 0.0
    n = 0
    for eps in (0.05, 0.1545):
        T = PerturbedMap(std_family(), Forcing.single(1), eps)
        g1 = gamma(T, 1, samples=513)
        for b in g1.branches:
            for x, y in b.points:
                r = (2 * x + eps * math.sin(2 * math.pi * x) - y) % 1
                worst = max(worst, min(r, 1 - r))
                n += 1
    dt = time.time() - t0
    ok = worst <= 1e-9 and n > 500 and dt < 5.0
    report("A2 standard-map Gamma_1", ok, f"{n} samples, worst {worst:.2e}, {dt:.1f}s")
    assert ok


def test_a3_figure4_oracle():
    t0 = time.time()
    F = Iem(Permutation.reversing(4), Lengths(["7/50", "2/5", "1/10", "9/25"]))
    pis = periodic_intervals(F, 3)
    ok = len(pis) == 1 and pis[0].period == 3
    conns = saddle_connections(F, 3)
    ok &= SaddleConnection(1, 1, 3, "left") in conns
    ok &= SaddleConnection(1, 1, 3, "right") in conns
    # the orbit is bounded by those connections: endpoints of the anchor
    # interval are forward images of the (B,B,3) endpoints
    ok &= pis[0].left == Fr(7, 50) and pis[0].right == Fr(11, 50)
    # midpoint lies on the intersection of two symmetry lines at eps=0
    fam = Family.constant(Permutation.reversing(4), ["7/50", "2/5", "1/10", "9/25"])
    T0 = PerturbedMap(fam, Forcing.single(1), 0.0)
    mid = float(pis[0].midpoint)
    res1 = fixed_set_residual(T0, 1, [(mid, 0.5)])[0]
    res2 = fixed_set_residual(T0, -2, [(mid, 0.5)])[0]
    ok &= res1 <= 1e-10 and res2 <= 1e-10
    dt = time.time() - t0
    report("A3 figure-4 oracle", ok,
           f"1 orbit of period 3, midpoint on Gamma_1 & Gamma_-2 ({max(res1, res2):.1e}), {dt:.1f}s")
    assert ok and dt < 5.0


def test_a4_theorem_3_7_suite():
    import random

    t0 = time.time()
    rng = random.Random(37)
    bad = 0
    for _ in range(100):
        d = rng.randrange(3, 7)
        den = rng.randrange(max(d, 2), 65)
        cuts = sorted(rng.sample(range(1, den), d - 1))
        parts = [a - b for a, b in zip(cuts + [den], [0] + cuts)]
        F = Iem(Permutation.reversing(d), Lengths([Fr(p, den) for p in parts]))
        if not verify_no_nonsymmetric(F, 20).passed:
            bad += 1
    dt = time.time() - t0
    report("A4 theorem-3.7 property suite", bad == 0 and dt < 60,
           f"100 maps, {bad} counterexamples, {dt:.1f}s")
    assert bad == 0
    assert dt < 60


def test_a5_reversibility_area_suite():
    import random

    t0 = time.time()
    rng = random.Random(55)
    worst_inv = worst_rev = worst_det = 0.0
    h = 1e-6
    for _ in range(20):
        d = rng.randrange(2, 6)
        lam0 = [rng.random() + 0.05 for _ in range(d)]
        lam1 = [rng.random() + 0.05 for _ in range(d)]
        fam = Family.linear(Permutation.reversing(d),
                            [v / sum(lam0) for v in lam0],
                            [v / sum(lam1) for v in lam1])
        T = PerturbedMap(fam, Forcing([(rng.randrange(1, 4), rng.uniform(0.3, 1.0))]),
                         rng.uniform(0.0, 0.02))
        npts = 0
        while npts < 1000:
            p = PhasePoint(rng.random(), rng.uniform(0.05, 0.95))
            if T.distance_to_discontinuity(p) < 1e-5:
                continue
            npts += 1
            s2 = T.symmetry_S(T.symmetry_S(p))
            worst_inv = max(worst_inv, abs((s2.x - p.x + 0.5) % 1 - 0.5), abs(s2.y - p.y))
            l2 = T.local_symmetry_L(T.local_symmetry_L(p))
            worst_inv = max(worst_inv, abs((l2.x - p.x + 0.5) % 1 - 0.5), abs(l2.y - p.y))
            try:
                z = T.symmetry_S(T.step(T.symmetry_S(T.step(p))))
                worst_rev = max(worst_rev, abs((z.x - p.x + 0.5) % 1 - 0.5), abs(z.y - p.y))
                cols = []
                for dx, dy in [(h, 0.0), (0.0, h)]:
                    qp = T.step((p.x + dx, p.y + dy))
                    qm = T.step((p.x - dx, p.y - dy))
                    ddx = qp.x - qm.x
                    ddx -= round(ddx)
                    cols.append((ddx / (2 * h), (qp.y - qm.y) / (2 * h)))
                worst_det = max(worst_det, abs(float(np.linalg.det(np.array(cols).T)) - 1))
            except BoundaryEscape:
                continue
    dt = time.time() - t0
    ok = worst_inv <= 1e-13 and worst_rev <= 1e-11 and worst_det <= 1e-5 and dt < 30
    report("A5 reversibility/area suite", ok,
           f"invol {worst_inv:.1e}, rev {worst_rev:.1e}, |det-1| {worst_det:.1e}, {dt:.1f}s")
    assert worst_inv <= 1e-13 and worst_rev <= 1e-11 and worst_det <= 1e-5
    assert dt < 30


def _a6_catalog(harmonic, eps=1e-3):
    fam = iem3_family()
    T0 = PerturbedMap(fam, Forcing.single(harmonic), 0.0)
    T = PerturbedMap(fam, Forcing.single(harmonic), eps)
    sym = make_record(T0, (0.5, 0.5), 1)
    pred = predict_nonsymmetric(T0, sym, harmonic)
    confirmed = []
    for seed in pred.seed_orbits:
        rec = newton_refine(T, seed[0], 1)
        if not rec.symmetric:
            confirmed.append(rec)
    # independent enumeration: fixed points need omega(y)=0 and f(x)=0, so
    # x = k/(2 l) inside the central subinterval at y = 1/2
    lo, hi = 0.35, 0.65
    roots = [k / (2 * harmonic) for k in range(2 * harmonic + 1) if lo <= k / (2 * harmonic) < hi]
    brute = sorted(r for r in roots if abs(r - 0.5) > 1e-12)
    return T, sym, pred, confirmed, brute


def test_a6_nonsymmetric_count():
    t0 = time.time()
    T, sym0, pred, confirmed, brute = _a6_catalog(9)
    ok = pred.count == 4 and len(confirmed) == 4
    ok &= len(brute) == 4  # the prediction is exhaustive
    got = sorted(round(r.x0, 9) for r in confirmed)
    ok &= got == sorted(round(v, 9) for v in (0.5 - 1 / 18, 0.5 + 1 / 18, 0.5 - 1 / 9, 0.5 + 1 / 9))
    for rec in confirmed:
        if abs(abs(rec.x0 - 0.5) - 1 / 18) < 1e-9:
            ok &= rec.stability == "elliptic" and 0 < rec.residue < 1
        else:
            ok &= rec.stability == "hyperbolic" and rec.residue < 0
    Teps = T
    sym_eps = newton_refine(Teps, (0.5, 0.5), 1)
    ok &= sym_eps.symmetric and sym_eps.stability == "hyperbolic"
    _, _, pred3, confirmed3, brute3 = _a6_catalog(3)
    ok &= pred3.count == 0 and confirmed3 == [] and brute3 == []
    dt = time.time() - t0
    report("A6 theorem-5.7 count", ok,
           f"l=9: 4 non-symmetric (2 elliptic, 2 hyperbolic) + symmetric hyperbolic; l=3: none; {dt:.1f}s")
    assert ok and dt < 10


def test_a7a_residue_scaling_elliptic():
    t0 = time.time()
    fam = iem3_family()
    eps_list = [1e-3, 5e-4, 2.5e-4]
    rems = []
    for eps in eps_list:
        T = PerturbedMap(fam, Forcing.single(9), eps)
        rec = newton_refine(T, (0.5 - 1 / 18, 0.5), 1)
        rems.append(abs(rec.residue + eps * rec.M / 4))
    if all(r <= 1e-14 for r in rems):
        # single-step residues are exactly -eps*M/4: the remainder vanishes
        # identically, which satisfies |Res + eps M/4| = O(eps^2) vacuously
        ok, slope = True, math.inf
    else:
        slope = np.polyfit(np.log(eps_list), np.log(rems), 1)[0]
        ok = slope >= 1.9
    dt = time.time() - t0
    report("A7a residue scaling (elliptic fixed point)", ok,
           f"remainders {['%.1e' % r for r in rems]}, slope {slope}, {dt:.1f}s")
    assert ok and dt < 10


@pytest.mark.xfail(
    strict=True,
    reason="spec defect: the standard-map fixed point at (1/2, 0) is unbalanced "
    "(sum f' = -2pi), so Res(eps) = pi*eps/2 exactly and Res/eps = pi/2 does not "
    "tend to 0; the paper's O(eps^2) statement concerns balanced orbits (q >= 2), "
    "verified separately in test_orbits.py::TestResidue",
)
def test_a7b_residue_scaling_standard_map_fixed_point():
    ratios = []
    for eps in (1e-2, 1e-3, 1e-4):
        T = PerturbedMap(std_family(), Forcing.single(1), eps)
        rec = make_record(T, (0.5, 0.0), 1)
        ratios.append(abs(rec.residue) / eps)
    decreasing = all(b <= 0.5 * a for a, b in zip(ratios, ratios[1:]))
    report("A7b residue scaling (std-map fixed point)", decreasing,
           f"Res/eps = {['%.4f' % r for r in ratios]} (expected FAIL: exactly pi/2, see ledger)")
    assert decreasing, f"Res(eps)/eps stays at {ratios} (= pi/2): criterion unattainable"


def test_a8_pitchfork_reproduction():
    t0 = time.time()
    fam = fig12_family()
    fc = Forcing.single(1)
    T = PerturbedMap(fam, fc, 1e-3)
    found = [r for r in find_symmetric(T, 2, samples=301) if r.q == 2]
    ok = len(found) == 2
    by_x = {round(min(p.x for p in r.points), 2): r for r in found}
    ell = by_x.get(0.25) or by_x.get(0.24)
    hyp = by_x.get(0.49) or by_x.get(0.5)
    ok &= ell is not None and hyp is not None
    if ok:
        ok &= ell.M < 0 and ell.stability == "elliptic"
        ok &= hyp.M > 0 and hyp.stability == "hyperbolic"
    # continuation: one pitchfork event, then two L-related non-symmetric
    # orbits next to the now-hyperbolic symmetric orbit
    grid = np.arange(5e-4, 0.1001, 5e-4)
    start = newton_refine(PerturbedMap(fam, fc, float(grid[0])), (ell.x0, ell.y0), 2)
    sw = sweep_eps(fam, fc, start, grid)
    pf = [e for e in sw.events if e.kind == "pitchfork"]
    ok &= len(pf) == 1
    eps_b = pf[0].eps if pf else math.nan
    post_eps = max(r.eps for r in sw.rows)
    post = [r for r in sw.rows if r.eps == post_eps]
    mains = [r.record for r in post if r.branch == "main"]
    branches = [r.record for r in post if r.branch != "main"]
    ok &= len(mains) == 1 and mains[0].symmetric and mains[0].stability == "hyperbolic"
    ok &= len(branches) == 2 and all(not b.symmetric for b in branches)
    if len(branches) == 2:
        Tb = PerturbedMap(fam, fc, post_eps)
        from iexmaps.orbits import _l_related

        ok &= _l_related(Tb, branches[0], branches[1])
    dt = time.time() - t0
    report("A8 pitchfork reproduction", ok,
           f"orbits at eps=1e-3 OK, pitchfork at eps_b={eps_b:.4f} (= 1/11), "
           f"post-bifurcation pair L-related, {dt:.1f}s")
    assert ok and dt < 120
    # the window assertion of the criterion text lives in test_a8_window below


@pytest.mark.xfail(
    strict=True,
    reason="spec defect: the derived bifurcation point is eps_b = 1/11 = 0.0909.. "
    "(the near-quarter point rides m_1(y); x=1/4 forces lambda_1(y)=1/2, i.e. "
    "y=6/11, i.e. eps = 2(y - 1/2) = 1/11), outside the guessed window (0, 0.05]",
)
def test_a8_window():
    fam = fig12_family()
    fc = Forcing.single(1)
    start = newton_refine(PerturbedMap(fam, fc, 5e-4), (0.245, 0.5), 2)
    sw = sweep_eps(fam, fc, start, np.arange(5e-4, 0.1001, 5e-4))
    pf = [e for e in sw.events if e.kind == "pitchfork"]
    eps_b = pf[0].eps if pf else math.inf
    in_window = 0 < eps_b <= 0.05
    report("A8w pitchfork window (0, 0.05]", in_window,
           f"eps_b = {eps_b:.4f} (expected FAIL: derived value 1/11, see ledger)")
    assert in_window, f"eps_b = {eps_b} outside (0, 0.05]"


def test_a9_figure8_period_dividing():
    t0 = time.time()
    fam = fig8_family()
    eps = 0.1 / (2 * math.pi)
    T = PerturbedMap(fam, Forcing.single(1), eps)
    lines = {}
    for i in range(-11, 15):
        lines[i] = gamma(T, i, samples=301)
    checked = 0
    failures = []
    for j in sorted(lines):
        for k in sorted(lines):
            if j >= k or k - j > 25:
                continue
            for c in intersections(lines[j], lines[k], T):
                if not c.refined:
                    continue
                checked += 1
                try:
                    rec = newton_refine(T, (c.x, c.y), c.divisor_period)
                except Exception as e:
                    failures.append((j, k, c.x, c.y, str(e)))
                    continue
                if c.divisor_period % rec.q != 0:
                    failures.append((j, k, c.x, c.y, f"minimal period {rec.q}"))
    dt = time.time() - t0
    ok = checked > 0 and not failures and dt < 120
    report("A9 figure-8 period-dividing", ok,
           f"{checked} refined intersections over pairs |j-k|<=25, "
           f"{len(failures)} failures, {dt:.1f}s")
    assert checked > 0
    assert not failures, failures[:5]
    assert dt < 120
