"""Locating, refining, classifying and continuing periodic orbits.

A q-periodic orbit of T is a zero of the two-component residual

    G(x0, y0) = ( wrap(sum_k omega_{a_k}(y_k)),  sum_k f(x_k) )

whose Jacobian is accumulated in forward mode along the orbit with the
itinerary (a_0 .. a_{q-1}) frozen to the seed's; at eps = 0 its determinant
reduces to -(sum_k omega'_{a_k})(sum_k f'(x_k)).  Newton on G refines seeds
coming from symmetry-line intersections (symmetric orbits) or from the
displaced-midpoint construction (non-symmetric orbits of sin(2 pi l x)
forcings).

Stability is summarized by two numbers: the first-order coefficient

    M(X) = (sum_k f'(x_k)) (sum_k omega'_{a_k}(y_k))

and the residue Res = (2 - tr D(T^q))/4, related by
Res = -(eps/4) M + O(eps^2) for persisting unbalanced orbits; Res < 0 is
hyperbolic, 0 < Res < 1 elliptic, Res > 1 hyperbolic with reflection.

Searches over line pairs, seed lists and continuation grids are independent
tasks; results are merged deterministically (canonical sort by (q, y, x)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .perturbed import BoundaryEscape, Forcing, PerturbedMap, PhasePoint
from .symlines import TOL_ORBIT, fixed_set_residual, gamma, intersections

__all__ = [
    "NewtonFailure",
    "DegeneratePersistence",
    "ItineraryMismatch",
    "BalancedOrbitError",
    "OrbitRecord",
    "ResidualG",
    "newton_refine",
    "make_record",
    "find_symmetric",
    "SearchResult",
    "evaluate_M",
    "residue",
    "classify_residue",
    "balance",
    "periodic_interval_width",
    "predict_nonsymmetric",
    "PredictedSeeds",
    "sweep_eps",
    "SweepResult",
]

TOL_G = 1e-12
TOL_SYM = 1e-8
TOL_BAL = 1e-9
TOL_RES_PARABOLIC = 1e-12
EPS_FLOOR = 1e-8


class NewtonFailure(RuntimeError):
    pass


class DegeneratePersistence(NewtonFailure):
    """det DG vanished: the transversality needed for persistence fails."""


class ItineraryMismatch(NewtonFailure):
    def __init__(self, expected, observed):
        self.expected = tuple(expected)
        self.observed = tuple(observed)
        super().__init__(f"converged orbit has itinerary {observed}, expected {expected}")


class BalancedOrbitError(ValueError):
    """The symmetric orbit is balanced for this harmonic: the displaced-root
    prediction does not apply."""


def _wrap_half(v: float) -> float:
    """Reduce mod 1 into (-1/2, 1/2]."""
    w = v % 1.0
    return w - 1.0 if w > 0.5 else w


def _omega_unchecked(fam, y, a):
    if fam.kind == "linear":
        _, _, Oc, Os = fam.affine_float()
        return Oc[a] + Os[a] * y
    return float(fam.omega_at(y, a))


def _domega_unchecked(fam, y, a):
    if fam.kind == "linear":
        _, _, _, Os = fam.affine_float()
        return Os[a]
    return float(fam.omega_deriv(y, a))


class ResidualG:
    """Periodicity residual with frozen itinerary and its exact Jacobian."""

    def __init__(self, T: PerturbedMap, q: int, itinerary):
        if len(itinerary) != q:
            raise ValueError("itinerary length must equal the period")
        self.T = T
        self.q = q
        self.itinerary = tuple(itinerary)

    def value_and_jacobian(self, x0: float, y0: float):
        T, fam, f = self.T, self.T.family, self.T.forcing
        eps = T.eps
        x, y = float(x0), float(y0)
        dx = np.array([1.0, 0.0])
        dy = np.array([0.0, 1.0])
        g1 = 0.0
        g2 = 0.0
        dg1 = np.zeros(2)
        dg2 = np.zeros(2)
        for a in self.itinerary:
            g2 += f.f(x)
            dg2 += f.df(x) * dx
            w = _omega_unchecked(fam, y, a)
            dw = _domega_unchecked(fam, y, a)
            g1 += w
            dg1 += dw * dy
            x1 = x + w
            dx1 = dx + dw * dy
            y = y + eps * f.f(x1)
            dy = dy + eps * f.df(x1) * dx1
            x, dx = x1, dx1
        return np.array([_wrap_half(g1), g2]), np.vstack([dg1, dg2])

    def value(self, x0: float, y0: float) -> np.ndarray:
        return self.value_and_jacobian(x0, y0)[0]

    def det_at(self, x0: float, y0: float) -> float:
        return float(np.linalg.det(self.value_and_jacobian(x0, y0)[1]))


def evaluate_M(T: PerturbedMap, points, itinerary=None) -> float:
    """First-order stability coefficient (sum f')(sum omega') along the orbit."""
    if itinerary is None:
        itinerary = [T.family.index_at(p[0], p[1]) for p in points]
    sf = sum(T.forcing.df(p[0]) for p in points)
    sw = sum(_domega_unchecked(T.family, p[1], a) for p, a in zip(points, itinerary))
    return float(sf * sw)


def residue(T: PerturbedMap, points) -> float:
    """Greene residue (2 - tr D(T^q))/4 from the ordered Jacobian product."""
    D = np.eye(2)
    for p in points:
        D = T.jacobian_step(p) @ D
    return float((2.0 - np.trace(D)) / 4.0)


def classify_residue(res: float, tol: float = TOL_RES_PARABOLIC) -> str:
    if abs(res) <= tol or abs(res - 1.0) <= tol:
        return "parabolic"
    if res < 0:
        return "hyperbolic"
    if res < 1:
        return "elliptic"
    return "hyperbolic-with-reflection"


def balance(points, harmonic: int, tol: float = TOL_BAL):
    """(S_l, C_l, is_balanced): harmonic sums of the orbit's x coordinates."""
    xs = [float(p[0]) for p in points]
    S = sum(math.sin(2 * math.pi * harmonic * x) for x in xs)
    C = sum(math.cos(2 * math.pi * harmonic * x) for x in xs)
    return S, C, (abs(S) <= tol and abs(C) <= tol)


@dataclass
class OrbitRecord:
    """A located periodic orbit with its stability data."""

    q: int
    points: list[PhasePoint]
    eps: float
    itinerary: tuple[int, ...]
    symmetric: bool
    witness_lines: tuple[int, int] | None
    M: float
    residue: float
    stability: str
    balance: dict
    closure_error: float
    residue_reliable: bool = True

    @property
    def x0(self) -> float:
        return self.points[0].x

    @property
    def y0(self) -> float:
        return self.points[0].y

    def to_json_dict(self) -> dict:
        return {
            "q": self.q,
            "eps": self.eps,
            "points": [[p.x, p.y] for p in self.points],
            "itinerary": list(self.itinerary),
            "symmetric": self.symmetric,
            "witness_lines": list(self.witness_lines) if self.witness_lines else None,
            "M": self.M,
            "residue": self.residue,
            "stability": self.stability,
            "balance": {str(l): [s, c] for l, (s, c) in self.balance.items()},
            "closure_error": self.closure_error,
            "residue_reliable": self.residue_reliable,
        }


def _orbit_closure_error(T: PerturbedMap, points, q: int) -> float:
    p = T.step(points[-1])
    dx = abs((p.x - points[0].x + 0.5) % 1 - 0.5)
    return max(dx, T.y_dist(p.y, points[0].y))


def _is_symmetric_orbit(T: PerturbedMap, points, tol: float = TOL_SYM) -> bool:
    s = T.symmetry_S(points[0])
    return any(abs((s.x - p.x + 0.5) % 1 - 0.5) <= tol and T.y_dist(s.y, p.y) <= tol for p in points)


def _find_witness_lines(T: PerturbedMap, points, q: int, tol: float = TOL_SYM):
    hits = []
    for i in range(-q, q + 1):
        res = fixed_set_residual(T, i, [points[0]])
        if np.isfinite(res[0]) and res[0] <= tol:
            hits.append(i)
        if len(hits) == 2:
            return tuple(hits)
    return tuple(hits) if hits else None


def make_record(T: PerturbedMap, p0, q: int, witness_lines=None) -> OrbitRecord:
    """Assemble the full record for a (refined) q-periodic point."""
    points = T.orbit_points(PhasePoint(float(p0[0]), float(p0[1])), q)
    itin = tuple(T.family.index_at(p.x, p.y) for p in points)
    closure = _orbit_closure_error(T, points, q)
    symmetric = _is_symmetric_orbit(T, points)
    if symmetric and witness_lines is None:
        witness_lines = _find_witness_lines(T, points, q)
    res = residue(T, points)
    bal = {l: balance(points, l)[:2] for l, _ in T.forcing.terms}
    reliable = all(T.distance_to_discontinuity(p) > 1e-12 for p in points)
    return OrbitRecord(
        q=q, points=points, eps=T.eps, itinerary=itin,
        symmetric=symmetric, witness_lines=witness_lines if symmetric else None,
        M=evaluate_M(T, points, itin), residue=res,
        stability=classify_residue(res), balance=bal,
        closure_error=closure, residue_reliable=reliable,
    )


def _minimal_period(T: PerturbedMap, p0, q: int, tol: float = TOL_ORBIT) -> int:
    points = T.orbit_points(p0, q + 1)
    for k in [k for k in range(1, q) if q % k == 0]:
        dx = abs((points[k].x - points[0].x + 0.5) % 1 - 0.5)
        if dx <= tol and T.y_dist(points[k].y, points[0].y) <= tol:
            return k
    return q


def newton_refine(T: PerturbedMap, seed, q: int, freeze_itinerary: bool = True,
                  tol: float = TOL_G, max_iter: int = 50,
                  det_tol: float = 1e-14) -> OrbitRecord:
    """Newton's method on the periodicity residual from a seed point.

    The linearization keeps the seed's itinerary; after convergence the
    itinerary of the true orbit is revalidated and the minimal period is
    settled over the divisors of q.  Raises DegeneratePersistence when DG is
    singular at the seed and ItineraryMismatch / NewtonFailure otherwise.
    """
    x, y = float(seed[0]), float(seed[1])
    try:
        itin = T.orbit_itinerary((x, y), q)
    except BoundaryEscape as e:
        raise NewtonFailure(f"seed orbit escapes the domain: {e}") from e
    G = ResidualG(T, q, itin)
    for it in range(max_iter):
        g, Dg = G.value_and_jacobian(x, y)
        if np.max(np.abs(g)) <= tol:
            break
        det = Dg[0, 0] * Dg[1, 1] - Dg[0, 1] * Dg[1, 0]
        if abs(det) < det_tol:
            raise DegeneratePersistence(
                f"det DG = {det:.3e} at ({x}, {y}); persistence transversality fails")
        step = np.linalg.solve(Dg, -g)
        step = np.clip(step, -0.25, 0.25)
        x, y = x + step[0], y + step[1]
        if not freeze_itinerary:
            try:
                itin = T.orbit_itinerary((x % 1, y), q)
            except BoundaryEscape as e:
                raise NewtonFailure("orbit escaped during refinement") from e
            G = ResidualG(T, q, itin)
    else:
        raise NewtonFailure(f"no convergence after {max_iter} iterations (|G| = {np.max(np.abs(g)):.2e})")
    x = x % 1
    det = G.det_at(x, y)
    if abs(det) < det_tol:
        raise DegeneratePersistence(
            f"det DG = {det:.3e} at the converged orbit ({x}, {y}); "
            "persistence transversality fails")
    try:
        observed = T.orbit_itinerary((x, y), q)
    except BoundaryEscape as e:
        raise NewtonFailure("converged point escapes the domain") from e
    if observed != tuple(itin):
        raise ItineraryMismatch(itin, observed)
    try:
        q_min = _minimal_period(T, PhasePoint(x, y), q)
        return make_record(T, (x, y), q_min)
    except BoundaryEscape as e:
        raise NewtonFailure(f"converged orbit leaves the domain: {e}") from e


# ---------------------------------------------------------------------------
# symmetric search via symmetry lines
# ---------------------------------------------------------------------------


@dataclass
class SearchResult:
    orbits: list[OrbitRecord] = field(default_factory=list)
    diagnostics: list[dict] = field(default_factory=list)

    def __iter__(self):
        return iter(self.orbits)

    def __len__(self):
        return len(self.orbits)

    def __getitem__(self, i):
        return self.orbits[i]


def _orbit_key(rec: OrbitRecord, tol: float = 1e-6):
    pts = sorted((round(p.x / tol) * tol % 1, round(p.y / tol) * tol) for p in rec.points)
    return (rec.q, tuple(pts))


def find_symmetric(T: PerturbedMap, q_max: int, samples: int = 401,
                   line_cache: dict | None = None) -> SearchResult:
    """All symmetric periodic orbits of period <= q_max.

    Every symmetric q-orbit has a point on Gamma_0 cap Gamma_q or on
    Gamma_-1 cap Gamma_{q-1} (parity of the period decides which), so those
    pairs of lines are intersected; each candidate is Newton-refined with the
    frozen-itinerary residual and deduplicated into orbits.  Failed
    candidates land in the diagnostics list.
    """
    cache = line_cache if line_cache is not None else {}

    def line(i):
        if i not in cache:
            cache[i] = gamma(T, i, samples=samples)
        return cache[i]

    result = SearchResult()
    seen = set()
    pairs = [(0, q) for q in range(1, q_max + 1)] + [(-1, q - 1) for q in range(1, q_max + 1)]
    for j, k in pairs:
        if j == k:
            continue
        try:
            cands = intersections(line(j), line(k), T)
        except ValueError:
            continue
        for c in cands:
            if c.low_confidence:
                result.diagnostics.append({"stage": "intersection", "candidate": c.to_json_dict()})
                continue
            try:
                rec = newton_refine(T, (c.x, c.y), c.divisor_period)
            except NewtonFailure as e:
                result.diagnostics.append(
                    {"stage": "newton", "candidate": c.to_json_dict(), "error": str(e)})
                continue
            if not rec.symmetric:
                result.diagnostics.append(
                    {"stage": "symmetry", "candidate": c.to_json_dict(),
                     "error": "refined orbit is not symmetric"})
                continue
            key = _orbit_key(rec)
            if key in seen:
                continue
            seen.add(key)
            if rec.witness_lines is None:
                rec.witness_lines = (j, k)
            result.orbits.append(rec)
    result.orbits.sort(key=lambda r: (r.q, r.y0, r.x0))
    return result


# ---------------------------------------------------------------------------
# non-symmetric orbit prediction (single-harmonic forcings)
# ---------------------------------------------------------------------------


def periodic_interval_width(T: PerturbedMap, points, itinerary=None) -> float:
    """Width of the eps=0 periodic interval around an unperturbed orbit.

    Translations are rigid, so the interval extends from the orbit by the
    least slack to a subinterval boundary on either side.
    """
    fam = T.family
    if itinerary is None:
        itinerary = [fam.index_at(p[0], p[1]) for p in points]
    slack_l = math.inf
    slack_r = math.inf
    for p, a in zip(points, itinerary):
        lefts = [float(v) for v in fam.lefts_at(p[1])] + [1.0]
        slack_l = min(slack_l, float(p[0]) - lefts[a])
        slack_r = min(slack_r, lefts[a + 1] - float(p[0]))
    return slack_l + slack_r


def _ceil_tol(v: float, tol: float = 1e-12) -> int:
    return math.ceil(v - tol)


@dataclass
class PredictedSeeds:
    count: int
    seed_orbits: list[list[PhasePoint]]
    offsets: list[float]
    width: float


def predict_nonsymmetric(T: PerturbedMap, symmetric_orbit: OrbitRecord, harmonic: int) -> PredictedSeeds:
    """Persisting non-symmetric orbits for f = sin(2 pi l x).

    For an unbalanced symmetric orbit with interval width d_q there are
    exactly 2(ceil(l d_q) - 1) persisting non-symmetric orbits, displaced by
    +-m/(2l) from the midpoints; below l = ceil(1/d_q) there are none.  A
    balanced orbit makes the construction inapplicable.
    """
    pts = symmetric_orbit.points
    S, C, is_bal = balance(pts, harmonic)
    if is_bal:
        raise BalancedOrbitError(
            f"orbit is balanced for harmonic {harmonic} (S={S:.2e}, C={C:.2e})")
    d_q = periodic_interval_width(T, pts, symmetric_orbit.itinerary)
    if harmonic < _ceil_tol(1.0 / d_q):
        return PredictedSeeds(0, [], [], d_q)
    m_max = _ceil_tol(harmonic * d_q) - 1
    seeds = []
    offsets = []
    for m in range(1, m_max + 1):
        for sgn in (+1, -1):
            delta = sgn * m / (2.0 * harmonic)
            seeds.append([PhasePoint((p.x + delta) % 1, p.y) for p in pts])
            offsets.append(delta)
    return PredictedSeeds(2 * m_max, seeds, offsets, d_q)


# ---------------------------------------------------------------------------
# continuation in eps with pitchfork detection
# ---------------------------------------------------------------------------


@dataclass
class SweepEvent:
    eps: float
    kind: str
    info: dict = field(default_factory=dict)


@dataclass
class SweepRow:
    eps: float
    branch: str  # "main" | "branch+" | "branch-"
    record: OrbitRecord
    event: str = ""


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    events: list[SweepEvent] = field(default_factory=list)
    last_good_eps: float | None = None

    def main_track(self):
        return [r for r in self.rows if r.branch == "main"]


def _l_related(T: PerturbedMap, rec_a: OrbitRecord, rec_b: OrbitRecord, tol=1e-6) -> bool:
    imgs = [T.local_symmetry_L(p) for p in rec_a.points]
    for img in imgs:
        if not any(abs((img.x - p.x + 0.5) % 1 - 0.5) <= tol and T.y_dist(img.y, p.y) <= tol
                   for p in rec_b.points):
            return False
    return True


def sweep_eps(family, forcing: Forcing, orbit0: OrbitRecord, eps_grid,
              delta_seed: float = 1e-3, require_signals: int = 2) -> SweepResult:
    """Naive continuation of a symmetric orbit along an eps grid.

    Each solution seeds the Newton refinement at the next eps.  Recorded
    events: residue crossings of 0 and 1, Newton degeneration, the quarter
    crossing of the near-quarter orbit point (period-2 bifurcation marker),
    and successful off-symmetry convergence to an L-related pair.  A
    pitchfork is declared at the first eps where at least ``require_signals``
    of the three markers agree.
    """
    out = SweepResult()
    prev = orbit0
    prev_res = orbit0.residue
    prev_marker = _quarter_marker(orbit0)
    fired: dict[str, float] = {}
    pitchfork_done = False
    for eps in eps_grid:
        T = PerturbedMap(family, forcing, float(eps))
        try:
            rec = newton_refine(T, prev.points[0], prev.q)
        except DegeneratePersistence as e:
            out.events.append(SweepEvent(float(eps), "newton-degeneration", {"error": str(e)}))
            fired.setdefault("degeneration", float(eps))
            rec = None
        except NewtonFailure as e:
            out.events.append(SweepEvent(float(eps), "track-loss", {"error": str(e)}))
            break
        if rec is None or rec.q != prev.q:
            out.events.append(SweepEvent(float(eps), "track-loss",
                                         {"error": "period changed" if rec else "degenerate"}))
            break
        event_names = []
        if prev_res is not None and (rec.residue < 0) != (prev_res < 0):
            out.events.append(SweepEvent(float(eps), "residue-crossing-0",
                                         {"from": prev_res, "to": rec.residue}))
            fired.setdefault("residue", float(eps))
            event_names.append("residue-crossing-0")
        if prev_res is not None and (rec.residue > 1) != (prev_res > 1):
            out.events.append(SweepEvent(float(eps), "residue-crossing-1",
                                         {"from": prev_res, "to": rec.residue}))
            event_names.append("residue-crossing-1")
        marker = _quarter_marker(rec)
        if (marker is not None and prev_marker is not None
                and (marker - 0.25) * (prev_marker - 0.25) < 0):
            out.events.append(SweepEvent(float(eps), "quarter-crossing",
                                         {"from": prev_marker, "to": marker}))
            fired.setdefault("quarter", float(eps))
            event_names.append("quarter-crossing")
        branches = _off_symmetry_branches(T, rec, delta_seed)
        if branches:
            fired.setdefault("branches", float(eps))
            for sign, brec in branches:
                out.rows.append(SweepRow(float(eps), f"branch{sign}", brec))
            if len(branches) == 2 and _l_related(T, branches[0][1], branches[1][1]):
                event_names.append("nonsymmetric-pair")
        if not pitchfork_done and len(fired) >= require_signals:
            out.events.append(SweepEvent(float(eps), "pitchfork", {"signals": dict(fired)}))
            event_names.append("pitchfork")
            pitchfork_done = True
        out.rows.append(SweepRow(float(eps), "main", rec, ";".join(event_names)))
        out.last_good_eps = float(eps)
        prev, prev_res, prev_marker = rec, rec.residue, marker
    return out


def _quarter_marker(rec: OrbitRecord):
    """x of the orbit point in (0, 1/2), the pitchfork marker for period 2."""
    if rec.q != 2 or not rec.symmetric:
        return None
    for p in rec.points:
        if 0.0 < p.x < 0.5:
            return p.x
    return None


def _off_symmetry_branches(T: PerturbedMap, rec: OrbitRecord, delta_seed: float):
    """Try Newton from x0 +- delta; keep genuinely non-symmetric results.

    Pitchfork branches separate like sqrt(eps - eps_b), so a ladder of seed
    offsets (doubling from delta_seed) is probed; the first non-symmetric
    root on each side wins.
    """
    found = []
    for sign, s in (("+", 1.0), ("-", -1.0)):
        delta = delta_seed
        while delta < 0.2:
            try:
                brec = newton_refine(T, ((rec.x0 + s * delta) % 1, rec.y0), rec.q)
            except NewtonFailure:
                delta *= 2
                continue
            sep = min(abs((brec.x0 - p.x + 0.5) % 1 - 0.5) for p in rec.points)
            if (not brec.symmetric) and brec.q == rec.q and sep > 10 * TOL_ORBIT:
                found.append((sign, brec))
                break
            delta *= 2
    return found
