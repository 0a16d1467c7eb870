"""Symmetry lines of a perturbed symmetric family and their intersections.

The reversing symmetry S generates the family S_i = T^i o S with fixed sets
Gamma_i.  Two of them are explicit: Gamma_0 is the pair of vertical lines
x in {0, 1/2}, and Gamma_-1 is the union of the d midpoint curves
(m_i(y), y).  Every other line is a pushforward,

    Gamma_{2n}   = T^n Gamma_0,      Gamma_{2n+1} = T^{n+1} Gamma_-1,

so lines are sampled by pushing the primary ones and split wherever the
generating orbit changes its itinerary (pushing a curve through a
discontinuity scatters it).  A point lying on two lines Gamma_j, Gamma_k is
periodic with period dividing |j - k|; intersections are located on the
sampled polylines, sharpened by bisection on the exactly re-evaluated curves,
and finally polished against the |j-k|-step closure map.

Branch sampling and pairwise intersection tests are independent work items;
results are canonically ordered before emission, so outputs are deterministic
regardless of how the work would be scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .perturbed import BoundaryEscape, PerturbedMap, PhasePoint

__all__ = [
    "Branch",
    "SymmetryLineSet",
    "IntersectionCandidate",
    "gamma",
    "gamma_primary",
    "intersections",
    "fixed_set_residual",
    "tangent_unperturbed",
    "transversality_test",
    "TransversalityVerdict",
]

TOL_LINE = 1e-9      # fixed-set residual of emitted samples
TOL_ORBIT = 1e-10    # closure tolerance of refined candidates
Y_RES = 1e-6         # adaptive split resolution in the source parameter
DEDUPE_TOL = 1e-9


def _steps_for(i: int) -> tuple[str, int]:
    """(source kind, signed pushforward count) realizing Gamma_i."""
    if i % 2 == 0:
        return "gamma0", i // 2
    return "gamma-1", (i + 1) // 2


def _source_point(T: PerturbedMap, kind: str, branch: int, t: float) -> PhasePoint:
    if kind == "gamma0":
        return PhasePoint(0.0 if branch == 0 else 0.5, t)
    return PhasePoint(float(T.family.midpoints(t)[branch]), t)


def _push(T: PerturbedMap, p: PhasePoint, steps: int):
    """Apply T^steps recording the itinerary; raises BoundaryEscape."""
    itin = []
    if steps >= 0:
        for _ in range(steps):
            a = T.family.index_at(p.x, p.y)
            itin.append(a)
            p = T.step(p)
    else:
        for _ in range(-steps):
            p = T.step_inverse(p)
            itin.append(T.family.index_at(p.x, p.y))
    return p, tuple(itin)


@dataclass
class Branch:
    """A maximal constant-itinerary polyline piece of one symmetry line."""

    line_index: int
    source_kind: str
    source_branch: int
    steps: int
    params: np.ndarray          # source y values, increasing
    points: np.ndarray          # (N, 2) pushed samples
    itinerary: tuple[int, ...]
    truncated: bool = False

    def __len__(self):
        return len(self.params)

    def eval(self, T: PerturbedMap, t: float) -> PhasePoint:
        p, _ = _push(T, _source_point(T, self.source_kind, self.source_branch, t), self.steps)
        return p


@dataclass
class SymmetryLineSet:
    index: int
    branches: list[Branch] = field(default_factory=list)

    def n_samples(self) -> int:
        return sum(len(b) for b in self.branches)

    def all_points(self) -> np.ndarray:
        if not self.branches:
            return np.zeros((0, 2))
        return np.concatenate([b.points for b in self.branches])


def gamma_primary(T: PerturbedMap, samples: int = 257) -> tuple[SymmetryLineSet, SymmetryLineSet]:
    """(Gamma_0, Gamma_-1): the vertical pair and the d midpoint curves."""
    return gamma(T, 0, samples=samples), gamma(T, -1, samples=samples)


def gamma(T: PerturbedMap, i: int, samples: int = 401, y_res: float = Y_RES,
          tol_line: float = TOL_LINE, verify: bool = True) -> SymmetryLineSet:
    """Sample Gamma_i by pushing the appropriate primary line.

    Branches are split so no emitted segment's generating orbit crosses a
    discontinuity; the boundary between itineraries is bisected down to
    ``y_res`` and unresolved slivers are dropped.  With ``verify`` each
    branch's endpoints are checked against the fixed-set residual.
    """
    kind, steps = _steps_for(i)
    n_src = 2 if kind == "gamma0" else T.family.d
    y0, y1 = float(T.family.domain[0]), float(T.family.domain[1])
    pad = (y1 - y0) * 1e-9
    ts = np.linspace(y0 + pad, y1 - pad, samples)
    out = SymmetryLineSet(i)
    for b in range(n_src):
        pts = np.full((samples, 2), np.nan)
        itins: list = [None] * samples
        for k, t in enumerate(ts):
            try:
                p, itin = _push(T, _source_point(T, kind, b, float(t)), steps)
                pts[k] = p
                itins[k] = itin
            except BoundaryEscape:
                itins[k] = "escaped"
        if verify and steps != 0:
            # a pushforward through a discontinuity is not a fixed point of
            # S_i (the primary verticals ride one for every y when the map is
            # genuinely discontinuous at 0); keep only true fixed-set samples
            res = fixed_set_residual(T, i, pts)
            for k in range(samples):
                if itins[k] not in (None, "escaped") and not (res[k] <= tol_line):
                    itins[k] = "nonfix"
        out.branches.extend(
            _split_runs(T, i, kind, b, steps, ts, pts, itins, y_res, tol_line if verify else None)
        )
    return out


def _split_runs(T, line_index, kind, srcb, steps, ts, pts, itins, y_res, tol_line=None):
    """Group samples into constant-itinerary runs with refined boundaries."""

    def valid(it):
        return isinstance(it, tuple)

    def vetted(pt):
        if pt is None:
            return None
        if tol_line is not None and steps != 0:
            if not (fixed_set_residual(T, line_index, [pt])[0] <= tol_line):
                return None
        return pt

    branches = []
    n = len(ts)
    k = 0
    while k < n:
        if not valid(itins[k]):
            k += 1
            continue
        j = k
        while j + 1 < n and itins[j + 1] == itins[k]:
            j += 1
        t_lo, t_hi = ts[k], ts[j]
        p_extra_lo = p_extra_hi = None
        # sharpen the boundaries toward the neighbouring runs
        if j + 1 < n and valid(itins[j + 1]):
            t_hi, p_extra_hi = _refine_boundary(T, kind, srcb, steps, ts[j], ts[j + 1], itins[k], y_res)
            p_extra_hi = vetted(p_extra_hi)
        if k > 0 and valid(itins[k - 1]) and itins[k - 1] != itins[k]:
            t_lo, p_extra_lo = _refine_boundary_left(T, kind, srcb, steps, ts[k - 1], ts[k], itins[k], y_res)
            p_extra_lo = vetted(p_extra_lo)
        params = list(ts[k:j + 1])
        points = list(pts[k:j + 1])
        if p_extra_lo is not None and t_lo < params[0]:
            params.insert(0, t_lo)
            points.insert(0, p_extra_lo)
        if p_extra_hi is not None and t_hi > params[-1]:
            params.append(t_hi)
            points.append(p_extra_hi)
        if len(params) >= 2:
            cut_short = (j + 1 < n and itins[j + 1] == "escaped") or (k > 0 and itins[k - 1] == "escaped")
            branches.append(Branch(line_index, kind, srcb, steps,
                                   np.array(params), np.array(points), itins[k],
                                   truncated=cut_short))
        k = j + 1
    return branches


def _refine_boundary(T, kind, srcb, steps, t_in, t_out, itin, y_res):
    """Largest t <= t_out with the run's itinerary, to resolution y_res."""
    p_in = None
    while t_out - t_in > y_res:
        tm = 0.5 * (t_in + t_out)
        try:
            p, it = _push(T, _source_point(T, kind, srcb, tm), steps)
        except BoundaryEscape:
            t_out = tm
            continue
        if it == itin:
            t_in, p_in = tm, p
        else:
            t_out = tm
    return t_in, (None if p_in is None else np.array(p_in))


def _refine_boundary_left(T, kind, srcb, steps, t_out, t_in, itin, y_res):
    """Smallest t >= t_out with the run's itinerary, mirror of the above."""
    p_in = None
    while t_in - t_out > y_res:
        tm = 0.5 * (t_in + t_out)
        try:
            p, it = _push(T, _source_point(T, kind, srcb, tm), steps)
        except BoundaryEscape:
            t_out = tm
            continue
        if it == itin:
            t_in, p_in = tm, p
        else:
            t_out = tm
    return t_in, (None if p_in is None else np.array(p_in))


def fixed_set_residual(T: PerturbedMap, i: int, pts) -> np.ndarray:
    """sup-norm of S_i(z) - z for each z (x compared on the circle)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    out = np.full(len(pts), np.nan)
    for k, (x, y) in enumerate(pts):
        if not (np.isfinite(x) and np.isfinite(y)):
            continue
        try:
            p = T.symmetry_S((x, y))
            if i >= 0:
                for _ in range(i):
                    p = T.step(p)
            else:
                for _ in range(-i):
                    p = T.step_inverse(p)
        except (BoundaryEscape, ValueError):
            continue
        dx = (p.x - x + 0.5) % 1 - 0.5
        out[k] = max(abs(dx), T.y_dist(p.y, y))
    return out


# ---------------------------------------------------------------------------
# intersections
# ---------------------------------------------------------------------------


@dataclass
class IntersectionCandidate:
    """A (refined) crossing of Gamma_j and Gamma_k: periodic, period | j-k."""

    x: float
    y: float
    j: int
    k: int
    divisor_period: int
    refined: bool
    low_confidence: bool = False
    closure_error: float = math.inf

    def to_json_dict(self) -> dict:
        return {
            "x": self.x, "y": self.y, "j": self.j, "k": self.k,
            "divisor_period": self.divisor_period, "refined": self.refined,
            "low_confidence": self.low_confidence, "closure_error": self.closure_error,
        }


def _seg_cross(p0, p1, q0, q1):
    """Intersection parameters (s, u) of two segments, or None."""
    r = p1 - p0
    s = q1 - q0
    den = r[0] * s[1] - r[1] * s[0]
    if den == 0:
        return None
    d = q0 - p0
    t = (d[0] * s[1] - d[1] * s[0]) / den
    u = (d[0] * r[1] - d[1] * r[0]) / den
    if -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= u <= 1 + 1e-12:
        return t, u
    return None


def _shifted(q0, q1, shift):
    return q0 + np.array([shift, 0.0]), q1 + np.array([shift, 0.0])


def _seg_cross_circle(p0, p1, q0, q1):
    """Segment crossing with x understood mod 1 (tries lifts -1, 0, 1)."""
    for shift in (0.0, 1.0, -1.0):
        hit = _seg_cross(p0, p1, *_shifted(q0, q1, shift))
        if hit is not None:
            return hit, shift
    return None, 0.0


def _closure_map(T: PerturbedMap, q: int, x: float, y: float):
    p = PhasePoint(x % 1, y)
    for _ in range(q):
        p = T.step(p)
    dx = (p.x - x + 0.5) % 1 - 0.5
    return np.array([dx, T.y_diff(p.y, y)])


def _polish_closure(T, q, x, y, iters=10):
    """Damped finite-difference Newton on the q-step closure map."""
    h = 1e-8
    z = np.array([x, y])
    best = z.copy()
    best_err = np.max(np.abs(_closure_map(T, q, *z)))
    for _ in range(iters):
        try:
            F = _closure_map(T, q, *z)
            J = np.empty((2, 2))
            for c, dz in enumerate([(h, 0.0), (0.0, h)]):
                J[:, c] = (_closure_map(T, q, z[0] + dz[0], z[1] + dz[1]) - F) / h
            step = np.linalg.solve(J, -F)
        except (np.linalg.LinAlgError, BoundaryEscape):
            break
        if not np.all(np.isfinite(step)):
            break
        step = np.clip(step, -1e-2, 1e-2)
        z = z + step
        try:
            err = np.max(np.abs(_closure_map(T, q, *z)))
        except BoundaryEscape:
            break
        if err < best_err:
            best, best_err = z.copy(), err
        if err < 1e-14:
            break
    return best[0] % 1, best[1], best_err


def intersections(A: SymmetryLineSet, B: SymmetryLineSet, T: PerturbedMap,
                  param_tol: float = 1e-12, dedupe_tol: float = DEDUPE_TOL,
                  polish: bool = True, tol_orbit: float = TOL_ORBIT) -> list[IntersectionCandidate]:
    """All transverse crossings of two symmetry lines.

    Polyline seeds are sharpened by bisection in the two source parameters
    (re-evaluating the true curves), then polished against the closure map of
    T^{|j-k|}.  Tangential or unresolvable seeds are emitted with the
    low-confidence flag and never marked refined.
    """
    if A.index == B.index:
        raise ValueError("need two distinct symmetry lines")
    q = abs(A.index - B.index)
    cands: list[IntersectionCandidate] = []
    for ba in A.branches:
        if len(ba) < 2:
            continue
        sa0, sa1 = _lifted_segments(ba.points)
        for bb in B.branches:
            if len(bb) < 2:
                continue
            sb0, sb1 = _lifted_segments(bb.points)
            for ia, ib in _bbox_candidates(sa0, sa1, sb0, sb1):
                hit, shift = _seg_cross_circle(sa0[ia], sa1[ia], sb0[ib], sb1[ib])
                if hit is None:
                    continue
                cand = _refine_candidate(T, ba, ia, bb, ib, shift, param_tol)
                if cand is None:
                    continue
                x, y, low_conf = cand
                if polish:
                    x, y, err = _polish_closure(T, q, x, y)
                else:
                    err = float(np.max(np.abs(_closure_map(T, q, x, y))))
                cands.append(IntersectionCandidate(
                    x % 1, y, A.index, B.index, q,
                    refined=(err <= tol_orbit) and not low_conf,
                    low_confidence=low_conf, closure_error=err))
    return _dedupe_candidates(cands, dedupe_tol)


def _lifted_segments(pts: np.ndarray):
    """Segment endpoint arrays with the second point lifted near the first."""
    p0 = pts[:-1]
    p1 = pts[1:].copy()
    dx = p1[:, 0] - p0[:, 0]
    p1[:, 0] -= np.round(dx)
    return p0, p1


def _bbox_candidates(sa0, sa1, sb0, sb1, pad: float = 1e-9):
    """Index pairs of segments whose boxes overlap (x tested over 3 lifts)."""
    ay0 = np.minimum(sa0[:, 1], sa1[:, 1]) - pad
    ay1 = np.maximum(sa0[:, 1], sa1[:, 1]) + pad
    by0 = np.minimum(sb0[:, 1], sb1[:, 1]) - pad
    by1 = np.maximum(sb0[:, 1], sb1[:, 1]) + pad
    over_y = (ay0[:, None] <= by1[None, :]) & (by0[None, :] <= ay1[:, None])
    ax0 = np.minimum(sa0[:, 0], sa1[:, 0]) - pad
    ax1 = np.maximum(sa0[:, 0], sa1[:, 0]) + pad
    bx0 = np.minimum(sb0[:, 0], sb1[:, 0]) - pad
    bx1 = np.maximum(sb0[:, 0], sb1[:, 0]) + pad
    over_x = np.zeros_like(over_y)
    for shift in (-1.0, 0.0, 1.0):
        over_x |= (ax0[:, None] <= bx1[None, :] + shift) & (bx0[None, :] + shift <= ax1[:, None])
    return np.argwhere(over_y & over_x)


def _refine_candidate(T, ba: Branch, ia: int, bb: Branch, ib: int, shift, param_tol):
    """Bisection on both source parameters; returns (x, y, low_confidence)."""
    a0, a1 = ba.params[ia], ba.params[ia + 1]
    b0, b1 = bb.params[ib], bb.params[ib + 1]
    PA0 = ba.points[ia].copy()
    PA1 = _lift_near(ba.points[ia + 1], PA0)
    PB0 = bb.points[ib] + [shift, 0]
    PB1 = _lift_near(bb.points[ib + 1] + [shift, 0], PB0)
    low_conf = False
    for _ in range(80):
        if max(a1 - a0, b1 - b0) < param_tol:
            break
        progressed = False
        if a1 - a0 >= b1 - b0:
            am = 0.5 * (a0 + a1)
            try:
                PM = np.array(ba.eval(T, am))
            except BoundaryEscape:
                break
            PM = _lift_near(PM, PA0)
            if _seg_cross(PA0, PM, PB0, PB1):
                a1, PA1 = am, PM
                progressed = True
            elif _seg_cross(PM, PA1, PB0, PB1):
                a0, PA0 = am, PM
                progressed = True
        else:
            bm = 0.5 * (b0 + b1)
            try:
                QM = np.array(bb.eval(T, bm))
            except BoundaryEscape:
                break
            QM = _lift_near(QM + [shift, 0], PB0)
            if _seg_cross(PA0, PA1, PB0, QM):
                b1, PB1 = bm, QM
                progressed = True
            elif _seg_cross(PA0, PA1, QM, PB1):
                b0, PB0 = bm, QM
                progressed = True
        if not progressed:
            low_conf = True
            break
    hit = _seg_cross(PA0, PA1, PB0, PB1)
    if hit is None:
        # crossing lost under refinement: report the midpoint, flagged
        mid = 0.25 * (PA0 + PA1 + PB0 + PB1)
        return float(mid[0]), float(mid[1]), True
    t, _ = hit
    pt = PA0 + t * (PA1 - PA0)
    # tangency check on the final segments
    ra, rb = PA1 - PA0, PB1 - PB0
    na, nb = np.hypot(*ra), np.hypot(*rb)
    if na > 0 and nb > 0 and abs(ra[0] * rb[1] - ra[1] * rb[0]) / (na * nb) < 1e-8:
        low_conf = True
    return float(pt[0]), float(pt[1]), low_conf


def _lift_near(p, ref):
    """Shift x by an integer so the point sits on the same lift as ref."""
    p = np.array(p, dtype=float)
    p[0] += round(ref[0] - p[0])
    return p


def _dedupe_candidates(cands, tol):
    out = []
    for c in sorted(cands, key=lambda c: (c.low_confidence, c.closure_error)):
        dup = False
        for o in out:
            dx = abs((c.x - o.x + 0.5) % 1 - 0.5)
            if dx <= tol and abs(c.y - o.y) <= tol:
                dup = True
                break
        if not dup:
            out.append(c)
    out.sort(key=lambda c: (c.y, c.x))
    return out


# ---------------------------------------------------------------------------
# unperturbed tangents and the transversality test
# ---------------------------------------------------------------------------


def tangent_unperturbed(T: PerturbedMap, i: int, point) -> np.ndarray:
    """Tangent (dx/dy, 1) of the eps=0 line Gamma_i at a point on it.

    Pull the point back to the primary line it came from, then push the
    primary tangent forward: each unperturbed step adds the local twist
    omega'_alpha(y), and the midpoint-curve tangent is m_b'(y) = -w_b'(y)/2.
    """
    T0 = PerturbedMap(T.family, T.forcing, 0.0)
    kind, steps = _steps_for(i)
    p = PhasePoint(float(point[0]), float(point[1]))
    if steps >= 0:
        for _ in range(steps):
            p = T0.step_inverse(p)
    else:
        for _ in range(-steps):
            p = T0.step(p)
    y = p.y
    if kind == "gamma0":
        if min(abs(p.x - 0.0), abs(p.x - 1.0), abs(p.x - 0.5)) > 1e-7:
            raise ValueError(f"point does not pull back to Gamma_0 (got x={p.x})")
        slope = 0.0
    else:
        b = T.family.index_at(p.x, y)
        if abs(p.x - float(T.family.midpoints(y)[b])) > 1e-7:
            raise ValueError(f"point does not pull back to Gamma_-1 (got x={p.x})")
        slope = float(T.family.midpoint_deriv(y)[b])
    if steps >= 0:
        for _ in range(steps):
            a = T.family.index_at(p.x, p.y)
            slope += float(T.family.omega_deriv(p.y, a))
            p = T0.step(p)
    else:
        for _ in range(-steps):
            p = T0.step_inverse(p)
            a = T.family.index_at(p.x, p.y)
            slope -= float(T.family.omega_deriv(p.y, a))
    return np.array([slope, 1.0])


@dataclass
class TransversalityVerdict:
    case: str                    # "odd" | "even-even" | "even-odd"
    delta: float                 # x-component of the tangent difference
    khat: tuple[int, ...]        # integer twist-combination 2*delta = khat . omega'
    transversal: bool
    lines: tuple[int, int]
    anchor: tuple[float, float]


def transversality_test(T: PerturbedMap, orbit_points, tol_transv: float = 1e-10,
                        tol_on_line: float = 1e-8) -> TransversalityVerdict:
    """Does the symmetric eps=0 orbit sit on a transverse line crossing?

    For odd q the anchor is the orbit point on Gamma_0 (also on Gamma_q); for
    even q it is either a Gamma_0 point (lines Gamma_0, Gamma_q) or a
    midpoint-curve point (lines Gamma_-1, Gamma_{q-1}).  The verdict reports
    the x-difference of the two unperturbed tangents and the integer vector
    k with 2*delta = sum_i k_i omega_i'(y).
    """
    pts = [PhasePoint(float(p[0]), float(p[1])) for p in orbit_points]
    q = len(pts)
    fam = T.family
    d = fam.d
    on_g0 = [p for p in pts if min(p.x, abs(p.x - 0.5), abs(p.x - 1)) <= tol_on_line]
    if on_g0:
        z = on_g0[0]
        lines = (0, q)
        t_a = np.array([0.0, 1.0])
        t_b = tangent_unperturbed(T, q, z)
        case = "odd" if q % 2 else "even-even"
    else:
        z = None
        for p in pts:
            b = fam.index_at(p.x, p.y)
            if abs(p.x - float(fam.midpoints(p.y)[b])) <= tol_on_line:
                z = p
                break
        if z is None:
            raise ValueError("orbit has no point on Gamma_0 or Gamma_-1: not symmetric?")
        lines = (-1, q - 1)
        t_a = tangent_unperturbed(T, -1, z)
        t_b = tangent_unperturbed(T, q - 1, z)
        case = "even-odd"
    delta = float(t_b[0] - t_a[0])
    khat = _khat_vector(T, z, q, case, d)
    return TransversalityVerdict(case, delta, khat, abs(delta) > tol_transv, lines, (z.x, z.y))


def _khat_vector(T, z, q, case, d):
    """Visit counts of the relevant half orbit, folded per the parity case."""
    T0 = PerturbedMap(T.family, T.forcing, 0.0)
    itin = T0.orbit_itinerary(z, q)
    counts = [0] * d
    if case == "odd":
        n = (q - 1) // 2
        for k in range(n, 2 * n + 1):
            counts[itin[k % q]] += 2
        counts[itin[n % q]] -= 1
    elif case == "even-even":
        n = q // 2
        for k in range(n, 2 * n):
            counts[itin[k % q]] += 2
    else:
        n = q // 2
        for k in range(n, 2 * n):
            counts[itin[k % q]] += 2
        counts[itin[n % q]] -= 1
        counts[itin[0]] += 1
    return tuple(counts)
