"""Tests for periodic-orbit refinement, stability theory and continuation."""

import math
import random
from fractions import Fraction as Fr

import numpy as np
import pytest

from iexmaps.families import Family
from iexmaps.iem import Iem, Lengths, Permutation, periodic_intervals
from iexmaps.orbits import (
    BalancedOrbitError,
    DegeneratePersistence,
    ResidualG,
    SweepResult,
    balance,
    classify_residue,
    evaluate_M,
    find_symmetric,
    make_record,
    newton_refine,
    periodic_interval_width,
    predict_nonsymmetric,
    residue,
    sweep_eps,
)
from iexmaps.perturbed import Forcing, PerturbedMap, PhasePoint

TWO_PI = 2 * math.pi


def std_family():
    return Family.linear(Permutation.reversing(2), [1, 0], [0, 1], wrap_y=1.0)


def fig12_family():
    return Family.linear(Permutation.reversing(4), ["19/50", "1/100", "1/100", "3/5"],
                         ["3/5", "1/100", "1/100", "19/50"])


def iem3_family():
    # three intervals, central width 0.3 pinned, outer pair trading 0.2 per unit y
    return Family.linear(Permutation.reversing(3), [0.25, 0.3, 0.45], [0.45, 0.3, 0.25])


class TestResidualG:
    def test_zero_at_periodic_point(self):
        fam = iem3_family()
        T = PerturbedMap(fam, Forcing.single(9), 1e-3)
        G = ResidualG(T, 1, (1,))
        assert np.max(np.abs(G.value(0.5, 0.5))) <= 2e-15  # sin(9 pi) in floats

    def test_det_identity_at_eps0(self):
        # det DG = -(sum omega')(sum f') with the itinerary frozen
        rng = random.Random(6)
        for _ in range(20):
            d = rng.randrange(2, 5)
            lam0 = [rng.random() + 0.05 for _ in range(d)]
            lam1 = [rng.random() + 0.05 for _ in range(d)]
            fam = Family.linear(Permutation.reversing(d),
                                [v / sum(lam0) for v in lam0],
                                [v / sum(lam1) for v in lam1])
            T = PerturbedMap(fam, Forcing([(rng.randrange(1, 4), rng.uniform(0.2, 1.0))]), 0.0)
            q = rng.randrange(1, 6)
            x0, y0 = rng.random(), rng.uniform(0.2, 0.8)
            itin = T.orbit_itinerary((x0, y0), q)
            G = ResidualG(T, q, itin)
            _, Dg = G.value_and_jacobian(x0, y0)
            det = Dg[0, 0] * Dg[1, 1] - Dg[0, 1] * Dg[1, 0]
            pts = T.orbit_points(PhasePoint(x0, y0), q)
            sw = sum(float(fam.omega_deriv(y0, a)) for a in itin)
            sf = sum(T.forcing.df(p.x) for p in pts)
            assert abs(det - (-(sw * sf))) <= 1e-9


class TestNewton:
    def test_immediate_convergence_at_midpoint(self):
        fam = iem3_family()
        T = PerturbedMap(fam, Forcing.single(9), 0.0)
        rec = newton_refine(T, (0.5, 0.5), 1)
        assert rec.q == 1 and rec.closure_error == 0.0
        assert rec.points[0] == PhasePoint(0.5, 0.5)

    def test_degenerate_for_balanced_standard_map_orbits(self):
        # q >= 2 unperturbed orbits are equally spaced, so sum f' = 0 and DG
        # is singular; at eps > 0 Newton reports the degeneracy outright
        T0 = PerturbedMap(std_family(), Forcing.single(1), 0.0)
        for q, y in [(2, 0.5), (3, 1 / 3), (5, 2 / 5)]:
            itin = T0.orbit_itinerary((0.1234, y), q)
            assert abs(ResidualG(T0, q, itin).det_at(0.1234, y)) < 1e-12
            with pytest.raises(DegeneratePersistence):
                newton_refine(T0, (0.1234, y), q)

    def test_standard_map_fixed_point_not_degenerate(self):
        # q = 1 is the exception: a single point is never balanced for sin
        T = PerturbedMap(std_family(), Forcing.single(1), 1e-2)
        rec = newton_refine(T, (0.5 + 1e-4, 1e-6), 1)
        assert abs(rec.x0 - 0.5) < 1e-12

    def test_minimal_period_reduction(self):
        fam = fig12_family()
        T = PerturbedMap(fam, Forcing.single(1), 1e-3)
        rec = newton_refine(T, (0.2451, 0.5005), 4)  # seed the period-2 orbit with q = 4
        assert rec.q == 2

    def test_nonsymmetric_fixed_points_converge(self):
        fam = iem3_family()
        T = PerturbedMap(fam, Forcing.single(9), 1e-3)
        for x0 in (0.5 - 1 / 18, 0.5 + 1 / 18, 0.5 - 1 / 9, 0.5 + 1 / 9):
            rec = newton_refine(T, (x0 + 3e-4, 0.5 + 2e-4), 1)
            assert abs(rec.x0 - x0) < 1e-12 and abs(rec.y0 - 0.5) < 1e-12
            assert not rec.symmetric


class TestStabilityNumbers:
    def test_M_fig12_elliptic(self):
        # (sum f')(sum omega') = 4 f'(a/2) (l1-l4) = -1.76 pi cos(0.49 pi)
        fam = fig12_family()
        T = PerturbedMap(fam, Forcing.single(1), 0.0)
        rec = make_record(T, (0.245, 0.5), 2)
        expect = -1.76 * math.pi * math.cos(0.49 * math.pi)
        assert rec.M == pytest.approx(expect, rel=1e-12)
        assert rec.M < 0

    def test_M_balanced_standard_map_orbit(self):
        T = PerturbedMap(std_family(), Forcing.single(1), 0.0)
        rec = make_record(T, (0.1234, 0.5), 2)
        assert abs(rec.M) <= 1e-12

    def test_M_l9_fixed_point(self):
        fam = iem3_family()
        T = PerturbedMap(fam, Forcing.single(9), 0.0)
        rec = make_record(T, (0.5, 0.5), 1)
        assert rec.M == pytest.approx(TWO_PI * 9 * math.cos(9 * math.pi) * (-0.4), rel=1e-12)
        assert rec.M > 0

    def test_balance_sums(self):
        # equally spaced points are balanced unless q divides l
        pts = [(k / 5, 0.5) for k in range(5)]
        for l in (1, 2, 3, 4):
            S, C, ok = balance(pts, l)
            assert ok
        S, C, ok = balance(pts, 5)
        assert not ok and C == pytest.approx(5.0)
        S1, C1, ok1 = balance([(0.25, 0.5)], 1)
        assert S1 == pytest.approx(1.0) and not ok1

    def test_fig12_period2_unbalanced(self):
        pts = [(0.245, 0.5), (0.755, 0.5)]
        S, C, ok = balance(pts, 1)
        assert abs(S) < 1e-12 and C == pytest.approx(2 * math.cos(TWO_PI * 0.245)) and not ok


class TestResidue:
    def test_parabolic_at_eps0(self):
        fam = fig12_family()
        T = PerturbedMap(fam, Forcing.single(1), 0.0)
        rec = make_record(T, (0.245, 0.5), 2)
        assert rec.residue == 0.0 and rec.stability == "parabolic"

    def test_leading_order_matches_M(self):
        # Res(eps) = -(eps/4) M + O(eps^2) for the persisting elliptic orbit
        fam = fig12_family()
        fc = Forcing.single(1)
        eps = 1e-4
        T = PerturbedMap(fam, fc, eps)
        rec = newton_refine(T, (0.245, 0.5), 2)
        ratio = rec.residue / (-(eps / 4) * rec.M)
        assert 0.9 <= ratio <= 1.1

    def test_standard_map_fixed_point_residue_exactly_linear(self):
        # single-step trace is exactly 2 + eps f' omega', so Res = pi eps / 2
        fc = Forcing.single(1)
        for eps in (1e-2, 1e-3, 1e-4):
            T = PerturbedMap(std_family(), fc, eps)
            rec = make_record(T, (0.5, 0.0), 1)
            assert rec.residue == pytest.approx(math.pi * eps / 2, rel=1e-12)

    def test_balanced_period2_residue_quadratic(self):
        # the {(0, 1/2), (1/2, 1/2)} orbit is balanced: Res = (pi eps)^2 exactly
        fc = Forcing.single(1)
        ratios = []
        for eps in (1e-2, 1e-3, 1e-4):
            T = PerturbedMap(std_family(), fc, eps)
            rec = make_record(T, (0.0, 0.5), 2)
            assert rec.residue == pytest.approx((math.pi * eps) ** 2, rel=1e-9)
            ratios.append(rec.residue / eps)
        # Res/eps tends to zero linearly along the decreasing eps sequence
        assert ratios[1] / ratios[0] == pytest.approx(0.1, rel=1e-6)
        assert ratios[2] / ratios[1] == pytest.approx(0.1, rel=1e-6)

    def test_residue_remainder_quadratic_period2(self):
        # |Res + eps M/4| <= C eps^2 for the persisting unbalanced orbits
        fam = fig12_family()
        fc = Forcing.single(1)
        eps_list = [1e-3, 5e-4, 2.5e-4]
        for seed in ((0.245, 0.5), (0.495, 0.5)):
            rems = []
            for eps in eps_list:
                rec = newton_refine(PerturbedMap(fam, fc, eps), seed, 2)
                rems.append(abs(rec.residue + eps * rec.M / 4))
            slope = np.polyfit(np.log(eps_list), np.log(rems), 1)[0]
            assert slope >= 1.9, (seed, rems, slope)

    def test_classification_thresholds(self):
        assert classify_residue(-0.2) == "hyperbolic"
        assert classify_residue(0.5) == "elliptic"
        assert classify_residue(1.5) == "hyperbolic-with-reflection"
        assert classify_residue(0.0) == "parabolic"
        assert classify_residue(5e-13) == "parabolic"


class TestPredictNonsymmetric:
    def make(self, l, eps=0.0):
        fam = iem3_family()
        return PerturbedMap(fam, Forcing.single(l), eps)

    def test_width(self):
        T = self.make(9)
        rec = make_record(T, (0.5, 0.5), 1)
        assert periodic_interval_width(T, rec.points, rec.itinerary) == pytest.approx(0.3)

    def test_count_l9(self):
        T = self.make(9)
        rec = make_record(T, (0.5, 0.5), 1)
        pred = predict_nonsymmetric(T, rec, 9)
        assert pred.count == 4 and len(pred.seed_orbits) == 4
        assert sorted(round(s[0].x, 6) for s in pred.seed_orbits) == sorted(
            round(v, 6) for v in (0.5 - 1 / 18, 0.5 + 1 / 18, 0.5 - 1 / 9, 0.5 + 1 / 9))

    @pytest.mark.parametrize("l", [1, 2, 3])
    def test_below_threshold_empty(self, l):
        T = self.make(9)
        rec = make_record(T, (0.5, 0.5), 1)
        pred = predict_nonsymmetric(T, rec, l)
        assert pred.count == 0 and pred.seed_orbits == []

    def test_sin2pix_never_yields_nonsymmetric_fixed_points(self):
        # harmonic 1 needs an interval of width >= 1: impossible
        for fam in (fig12_family(), iem3_family()):
            T = PerturbedMap(fam, Forcing.single(1), 0.0)
            res = find_symmetric(T, 1, samples=201)
            for rec in res:
                if rec.q != 1:
                    continue
                pred = predict_nonsymmetric(T, rec, 1)
                assert pred.count == 0

    def test_balanced_orbit_rejected(self):
        T = PerturbedMap(std_family(), Forcing.single(1), 0.0)
        rec = make_record(T, (0.0, 0.5), 2)  # balanced period-2 orbit
        with pytest.raises(BalancedOrbitError):
            predict_nonsymmetric(T, rec, 1)


class TestFindSymmetric:
    def test_eps0_matches_oracle_midpoints(self):
        fam = fig12_family()
        T = PerturbedMap(fam, Forcing.single(1), 0.0)
        found = find_symmetric(T, 2, samples=401)
        assert len(found) >= 4
        for rec in found:
            y = Fr(rec.y0).limit_denominator(10**6)
            F = fam.iem_at(y)
            mids = [float(p.midpoint) for p in periodic_intervals(F, rec.q)
                    for _ in [0]]
            # the orbit's own midpoints: collect all orbit-interval midpoints
            from iexmaps.iem import orbit_intervals
            all_mids = []
            for p in periodic_intervals(F, rec.q):
                all_mids += [float(l + (p.right - p.left) / 2) for l, r in orbit_intervals(F, p)]
            assert min(abs(rec.x0 - m) for m in all_mids) <= 1e-10

    def test_orbit_point_counts_per_line_parity(self):
        # odd period: one orbit point on every symmetry line; even period on
        # odd lines: two points on each odd line and none on the even ones
        from iexmaps.symlines import fixed_set_residual

        fam = fig12_family()
        T = PerturbedMap(fam, Forcing.single(1), 1e-3)
        for rec in find_symmetric(T, 2, samples=301):
            counts = {}
            for i in range(-3, 4):
                c = 0
                for p in rec.points:
                    r = fixed_set_residual(T, i, [p])[0]
                    if np.isfinite(r) and r <= 1e-8:
                        c += 1
                counts[i] = c
            if rec.q == 1:
                assert all(c == 1 for c in counts.values()), counts
            else:
                assert rec.q == 2
                odd = {i: c for i, c in counts.items() if i % 2}
                even = {i: c for i, c in counts.items() if not i % 2}
                assert all(c == 2 for c in odd.values()), counts
                assert all(c == 0 for c in even.values()), counts

    def test_symmetric_records_have_line_witnesses(self):
        fam = fig12_family()
        T = PerturbedMap(fam, Forcing.single(1), 1e-3)
        for rec in find_symmetric(T, 2, samples=301):
            assert rec.symmetric and rec.witness_lines is not None
            from iexmaps.symlines import fixed_set_residual
            assert min(fixed_set_residual(T, i, [rec.points[0]])[0] for i in rec.witness_lines) <= 1e-8

    def test_below_smallest_period_empty(self):
        # the rotation family on a domain avoiding integer rotation numbers
        # has no fixed points at all: asking for q_max = 1 returns nothing
        fam = Family.linear(Permutation.reversing(2), [1, 0], [0, 1], domain=(0.05, 0.95))
        T = PerturbedMap(fam, Forcing.single(1), 1e-3)
        res = find_symmetric(T, 1, samples=201)
        assert len(res) == 0

    def test_fig12_q1_catalogue_central(self):
        fam = fig12_family()
        T = PerturbedMap(fam, Forcing.single(1), 1e-3)
        recs = [r for r in find_symmetric(T, 1, samples=201) if r.q == 1]
        assert len(recs) == 2 and all(abs(r.x0 - 0.5) < 1e-9 for r in recs)


class TestSweep:
    def test_single_point_grid(self):
        fam = fig12_family()
        fc = Forcing.single(1)
        T = PerturbedMap(fam, fc, 1e-3)
        rec = newton_refine(T, (0.245, 0.5), 2)
        sw = sweep_eps(fam, fc, rec, [1e-3])
        assert len(sw.main_track()) == 1 and sw.events == []

    def test_pitchfork_detected_near_one_eleventh(self):
        fam = fig12_family()
        fc = Forcing.single(1)
        T0 = PerturbedMap(fam, fc, 1e-3)
        rec = newton_refine(T0, (0.245, 0.5), 2)
        grid = np.arange(0.085, 0.096, 5e-4)
        sw = sweep_eps(fam, fc, rec, grid)
        pf = [e for e in sw.events if e.kind == "pitchfork"]
        assert len(pf) == 1
        assert abs(pf[0].eps - 1 / 11) <= 2e-3
        # after the event: symmetric orbit hyperbolic, two L-related branches
        post = [r for r in sw.rows if r.eps > pf[0].eps + 2e-3]
        assert any(r.branch == "main" and r.record.stability == "hyperbolic" for r in post)
        eps_last = max(r.eps for r in post)
        branches = [r.record for r in post if r.eps == eps_last and r.branch != "main"]
        assert len(branches) == 2
        assert all(not b.symmetric for b in branches)
        assert branches[0].residue == pytest.approx(branches[1].residue, abs=1e-8)
        ys0 = sorted(p.y for p in branches[0].points)
        ys1 = sorted(p.y for p in branches[1].points)
        assert ys0 == pytest.approx(ys1, abs=1e-12)

    def test_track_survives_without_events_below_bifurcation(self):
        fam = fig12_family()
        fc = Forcing.single(1)
        T0 = PerturbedMap(fam, fc, 1e-3)
        rec = newton_refine(T0, (0.245, 0.5), 2)
        sw = sweep_eps(fam, fc, rec, np.arange(1e-3, 0.02, 1e-3))
        assert not [e for e in sw.events if e.kind == "pitchfork"]
        assert all(r.record.stability == "elliptic" for r in sw.main_track())
