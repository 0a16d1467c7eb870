"""Exact algebra of interval and circle exchange maps.

An interval exchange map (IEM) on [0, 1) is a piecewise translation: the
interval is split into d subintervals I_1 .. I_d (closed on the left, open on
the right) of lengths lambda_1 .. lambda_d, and the pieces are rearranged
according to a permutation of their order.  The translation applied to piece
alpha is

    omega_alpha = sum(lambda_beta for beta placed before alpha in the image)
                - sum(lambda_beta for beta before alpha in the domain)

and the map is F(x) = x + omega_alpha for x in I_alpha.  Throughout we take
the unit interval with its endpoints identified, so every IEM is also a
circle exchange map (CEM) with zero initial/final rotation, and the natural
reflection is R(x) = -x mod 1.

Two arithmetic modes are supported.  In ``rational`` mode all positions are
`fractions.Fraction` and every statement below is exact; this is the oracle
used by the rest of the package.  In ``float`` mode the same code runs on
floats with explicit tolerances (compositions amplify roundoff, so rational
mode is preferred for anything combinatorial).

Indices are 0-based everywhere in code; interval labels A, B, C, ... are used
only for display.  All types are immutable values after construction and all
operations are pure functions, safe to share across threads.
"""

from __future__ import annotations

import string
import warnings
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "DegeneracyWarning",
    "NotReversibleError",
    "Permutation",
    "Lengths",
    "Iem",
    "Cem",
    "SaddleConnection",
    "PeriodicInterval",
    "NoNonSymmetricReport",
    "translation_vector",
    "reflection",
    "compose",
    "invert",
    "conjugate_by_reflection",
    "is_reversible",
    "swap_decompose",
    "saddle_connections",
    "periodic_intervals",
    "orbit_intervals",
    "verify_no_nonsymmetric",
    "power_pieces",
]

# Tolerances for float mode (rational mode always compares exactly).
FLOAT_CUT_TOL = 1e-12     # discontinuity collision / merging
FLOAT_MATCH_TOL = 1e-10   # endpoint collision in saddle-connection search


class DegeneracyWarning(UserWarning):
    """Discontinuities collided (within tolerance) during a construction."""


class NotReversibleError(ValueError):
    """The map admits no decomposition into a symmetric IEM and a swap."""


def _is_exact(v) -> bool:
    return isinstance(v, (Fraction, int)) and not isinstance(v, bool)


def _as_scalar(v, mode: str):
    if mode == "rational":
        if isinstance(v, str):
            return Fraction(v)
        if _is_exact(v):
            return Fraction(v)
        raise TypeError(f"rational mode requires exact values, got {v!r}")
    return float(v)


def _eq(a, b, tol) -> bool:
    if tol == 0:
        return a == b
    return abs(a - b) <= tol


def reflection(x):
    """Reflection of the circle about 0: R(x) = -x mod 1 (an involution)."""
    return (-x) % 1


class Permutation:
    """Reordering data of an exchange map.

    ``final_order[i]`` is the 1-based position that the (i+1)-th subinterval
    occupies after the exchange; the initial order is always the identity.
    The permutation is *reversing* (order-reversing) when interval i is sent
    to position d+1-i for every i.
    """

    __slots__ = ("final_order", "_targets0")

    def __init__(self, final_order: Sequence[int]):
        fo = tuple(int(v) for v in final_order)
        d = len(fo)
        if d == 0 or sorted(fo) != list(range(1, d + 1)):
            raise ValueError(f"final_order must be a bijection of 1..d, got {fo}")
        self.final_order = fo
        self._targets0 = tuple(v - 1 for v in fo)

    @property
    def d(self) -> int:
        return len(self.final_order)

    @classmethod
    def identity(cls, d: int) -> "Permutation":
        return cls(range(1, d + 1))

    @classmethod
    def reversing(cls, d: int) -> "Permutation":
        return cls(range(d, 0, -1))

    @classmethod
    def from_image_order(cls, labels: Sequence[int]) -> "Permutation":
        """Build from the bottom row of the usual two-row notation.

        ``labels[p]`` is the 1-based interval appearing at image position p+1.
        """
        d = len(labels)
        fo = [0] * d
        for pos, lab in enumerate(labels):
            fo[int(lab) - 1] = pos + 1
        return cls(fo)

    def image_order(self) -> tuple[int, ...]:
        """1-based intervals listed by image position (two-row bottom row)."""
        d = self.d
        out = [0] * d
        for i, p in enumerate(self._targets0):
            out[p] = i + 1
        return tuple(out)

    @property
    def is_reversing(self) -> bool:
        d = self.d
        return all(p == d - 1 - i for i, p in enumerate(self._targets0))

    def inverse(self) -> "Permutation":
        d = self.d
        fo = [0] * d
        for i, p in enumerate(self._targets0):
            fo[p] = i + 1
        return Permutation(fo)

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.final_order == other.final_order

    def __hash__(self):
        return hash(self.final_order)

    def __repr__(self):
        return f"Permutation({list(self.final_order)})"


def _labels(d: int) -> list[str]:
    if d <= 26:
        return list(string.ascii_uppercase[:d])
    return [f"I{i+1}" for i in range(d)]


class Lengths:
    """Subinterval lengths, normalized to total 1.

    Values may be given as Fractions, ints, ``"p/q"`` strings (rational mode)
    or floats (float mode); the mode is inferred unless forced.  Inputs whose
    sum differs from 1 are rescaled with a warning -- figure data in the
    source material is sometimes unnormalized.
    """

    __slots__ = ("values", "mode")

    def __init__(self, values: Iterable, mode: str | None = None):
        vals = list(values)
        if not vals:
            raise ValueError("need at least one length")
        if mode is None:
            mode = "rational" if all(_is_exact(v) or isinstance(v, str) for v in vals) else "float"
        if mode not in ("rational", "float"):
            raise ValueError(f"unknown mode {mode!r}")
        vals = [_as_scalar(v, mode) for v in vals]
        if any(v <= 0 for v in vals):
            raise ValueError(f"lengths must be positive, got {vals}")
        total = sum(vals)
        if mode == "rational":
            if total != 1:
                warnings.warn(f"lengths sum to {total}, normalizing to 1", stacklevel=2)
                vals = [v / total for v in vals]
        else:
            if abs(total - 1.0) > 1e-12:
                warnings.warn(f"lengths sum to {total!r}, normalizing to 1", stacklevel=2)
            vals = [v / total for v in vals]
        self.values = tuple(vals)
        self.mode = mode

    @property
    def d(self) -> int:
        return len(self.values)

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __eq__(self, other):
        return isinstance(other, Lengths) and self.values == other.values

    def __repr__(self):
        return f"Lengths({list(self.values)}, mode={self.mode!r})"


def translation_vector(perm: Permutation, lengths: Lengths) -> tuple:
    """Per-interval offsets omega derived from the permutation and lengths."""
    lam = lengths.values
    t0 = perm._targets0
    d = perm.d
    if lengths.d != d:
        raise ValueError("permutation and lengths sizes differ")
    # left endpoint of interval i in the image ordering minus in the domain
    image_lefts = [sum(lam[b] for b in range(d) if t0[b] < t0[a]) for a in range(d)]
    domain_lefts = [sum(lam[b] for b in range(a)) for a in range(d)]
    return tuple(image_lefts[a] - domain_lefts[a] for a in range(d))


class Iem:
    """Interval exchange map of [0, 1), endpoints identified (a 0-rotation CEM)."""

    def __init__(self, perm: Permutation, lengths: Lengths):
        if perm.d != lengths.d:
            raise ValueError("permutation and lengths sizes differ")
        self.perm = perm
        self.lengths = lengths
        self.omega = translation_vector(perm, lengths)
        lefts = [lengths.values[0] * 0]
        for v in lengths.values[:-1]:
            lefts.append(lefts[-1] + v)
        self.lefts = tuple(lefts)

    # -- basic queries ----------------------------------------------------

    @property
    def d(self) -> int:
        return self.perm.d

    @property
    def mode(self) -> str:
        return self.lengths.mode

    @property
    def rights(self) -> tuple:
        return tuple(l + v for l, v in zip(self.lefts, self.lengths.values))

    def image_lefts(self) -> tuple:
        return tuple(l + w for l, w in zip(self.lefts, self.omega))

    def interval_of(self, x) -> int:
        """Index of the (closed-left) subinterval containing x in [0, 1)."""
        if not (0 <= x < 1):
            raise ValueError(f"x={x!r} outside [0, 1)")
        return bisect_right(self.lefts, x) - 1

    def interval_of_left_limit(self, x, tol=None) -> int:
        """Interval containing points just below x (x in (0, 1])."""
        if tol is None:
            tol = 0 if self.mode == "rational" else FLOAT_CUT_TOL
        if x <= 0 or x > 1:
            x = x % 1 if x != 1 else x
        for j, l in enumerate(self.lefts):
            if _eq(x, l, tol):
                return (j - 1) % self.d
        if _eq(x, 1, tol):
            return self.d - 1
        return self.interval_of(x)

    def evaluate(self, x):
        """F(x) = x + omega_alpha mod 1 for x in I_alpha."""
        return (x + self.omega[self.interval_of(x)]) % 1

    __call__ = evaluate

    def evaluate_left_limit(self, x):
        """Image of the one-sided limit at x from the left (as a limit point)."""
        a = self.interval_of_left_limit(x)
        return _limit_mod(x + self.omega[a])

    def iterate(self, x, n: int):
        for _ in range(n):
            x = self.evaluate(x)
        return x

    # -- structure --------------------------------------------------------

    def pieces(self) -> list[tuple]:
        """(left, shift) per subinterval, sorted by left."""
        return list(zip(self.lefts, self.omega))

    def is_symmetric(self) -> bool:
        """True iff the permutation reverses the order of intervals."""
        return self.perm.is_reversing

    def symmetry_witness(self) -> list[bool]:
        """Interior equality F(J_i) = R(J_i) for each i.

        All-true exactly when the map is symmetric; the reflected interior of
        [l, r) is (1-r, 1-l), to be matched against the image piece.
        """
        out = []
        rights = self.rights
        for i in range(self.d):
            img_l = self.lefts[i] + self.omega[i]
            img_r = rights[i] + self.omega[i]
            tol = 0 if self.mode == "rational" else FLOAT_CUT_TOL
            out.append(_eq(img_l % 1, (1 - rights[i]) % 1, tol) and _eq(img_r % 1, (1 - self.lefts[i]) % 1, tol))
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Iem)
            and self.perm == other.perm
            and self.lengths.values == other.lengths.values
        )

    def approx_equal(self, other: "Iem", tol=FLOAT_CUT_TOL) -> bool:
        return (
            self.perm == other.perm
            and self.d == other.d
            and all(_eq(a, b, tol) for a, b in zip(self.lengths.values, other.lengths.values))
        )

    def __repr__(self):
        return f"Iem(perm={list(self.perm.final_order)}, lengths={[str(v) for v in self.lengths.values]})"

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "type": "iem",
            "mode": self.mode,
            "perm": list(self.perm.final_order),
            "lengths": [_scalar_repr(v) for v in self.lengths.values],
        }

    def to_text(self) -> str:
        lines = [
            f"iem d={self.d} mode={self.mode}",
            "perm " + " ".join(str(v) for v in self.perm.final_order),
            "lengths " + " ".join(_scalar_repr(v) for v in self.lengths.values),
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Iem":
        if doc.get("type") != "iem":
            raise ValueError(f"not an iem document: {doc.get('type')!r}")
        return cls(Permutation(doc["perm"]), Lengths(doc["lengths"], mode=doc["mode"]))

    @classmethod
    def from_text(cls, text: str) -> "Iem":
        fields = _parse_text_record(text, "iem")
        return cls(Permutation([int(v) for v in fields["perm"]]), Lengths(fields["lengths"], mode=fields["mode"]))


def _limit_mod(x):
    """Reduce a left-limit point to (0, 1]; the limit at 0 is the limit at 1."""
    x = x % 1
    if x == 0:
        return x + 1
    return x


def _scalar_repr(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return repr(float(v))


def _parse_text_record(text: str, kind: str) -> dict:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    head = lines[0].split()
    if head[0] != kind:
        raise ValueError(f"expected a {kind} record, got {head[0]!r}")
    fields = dict(kv.split("=", 1) for kv in head[1:])
    for ln in lines[1:]:
        key, *vals = ln.split()
        fields[key] = vals
    return fields


class Cem:
    """Circle exchange map: arcs start at theta0, images are laid out from theta1."""

    def __init__(self, perm: Permutation, lengths: Lengths, theta0, theta1):
        self.perm = perm
        self.lengths = lengths
        if lengths.mode == "rational":
            theta0, theta1 = Fraction(theta0), Fraction(theta1)
        else:
            theta0, theta1 = float(theta0), float(theta1)
        self.theta0 = theta0 % 1
        self.theta1 = theta1 % 1
        self._base = Iem(perm, lengths)

    @property
    def d(self) -> int:
        return self.perm.d

    @property
    def mode(self) -> str:
        return self.lengths.mode

    def evaluate(self, x):
        """F(x) = x + omega_alpha - theta0 + theta1 mod 1."""
        a = self._base.interval_of((x - self.theta0) % 1)
        return (x + self._base.omega[a] - self.theta0 + self.theta1) % 1

    __call__ = evaluate

    def reflection_center(self):
        """The symmetric CEM is reversible about (theta0 + theta1) / 2."""
        return ((self.theta0 + self.theta1) / 2) % 1

    def reflect(self, x):
        return (-x + self.theta0 + self.theta1) % 1

    def is_symmetric(self) -> bool:
        return self.perm.is_reversing

    def symmetry_witness(self) -> list[bool]:
        """Interior equality F(J_i) = R(J_i), R the reflection about the center."""
        out = []
        tol = 0 if self.mode == "rational" else FLOAT_CUT_TOL
        for i in range(self.d):
            l = (self.theta0 + self._base.lefts[i]) % 1
            r = l + self.lengths.values[i]
            img_l = (l + self._base.omega[i] - self.theta0 + self.theta1) % 1
            refl_l = self.reflect(r % 1)
            out.append(_eq(img_l, refl_l, tol))
        return out

    def to_json_dict(self) -> dict:
        return {
            "type": "cem",
            "mode": self.mode,
            "perm": list(self.perm.final_order),
            "lengths": [_scalar_repr(v) for v in self.lengths.values],
            "theta0": _scalar_repr(self.theta0),
            "theta1": _scalar_repr(self.theta1),
        }

    def to_text(self) -> str:
        return (
            f"cem d={self.d} mode={self.mode}\n"
            + "perm " + " ".join(str(v) for v in self.perm.final_order) + "\n"
            + "lengths " + " ".join(_scalar_repr(v) for v in self.lengths.values) + "\n"
            + f"theta0 {_scalar_repr(self.theta0)}\n"
            + f"theta1 {_scalar_repr(self.theta1)}\n"
        )

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Cem":
        if doc.get("type") != "cem":
            raise ValueError(f"not a cem document: {doc.get('type')!r}")
        mode = doc["mode"]
        conv = (lambda s: Fraction(s)) if mode == "rational" else float
        return cls(
            Permutation(doc["perm"]),
            Lengths(doc["lengths"], mode=mode),
            conv(doc["theta0"]),
            conv(doc["theta1"]),
        )

    @classmethod
    def from_text(cls, text: str) -> "Cem":
        fields = _parse_text_record(text, "cem")
        mode = fields["mode"]
        conv = (lambda s: Fraction(s)) if mode == "rational" else float
        return cls(
            Permutation([int(v) for v in fields["perm"]]),
            Lengths(fields["lengths"], mode=mode),
            conv(fields["theta0"][0]),
            conv(fields["theta1"][0]),
        )


# ---------------------------------------------------------------------------
# construction from raw pieces (shared by compose / invert / conjugation)
# ---------------------------------------------------------------------------


def _snap01(v, tol):
    """Reduce to [0, 1) with roundoff just below 1 (or 0) snapped to 0."""
    v = v % 1
    if tol and (v > 1 - tol or v < tol):
        return 0.0
    return v


def _from_pieces(pieces: list[tuple], mode: str, merge: bool = True) -> Iem:
    """Build an Iem from sorted (left, shift) pieces covering [0, 1).

    Adjacent pieces with equal shift are merged and zero-length pieces
    dropped, so the result is canonical (a degenerate d-IEM reduces to the
    (d-1)-IEM it really is).
    """
    tol = 0 if mode == "rational" else FLOAT_CUT_TOL
    pieces = sorted((_snap01(l, tol), s) for l, s in pieces)
    if pieces[0][0] != 0:
        raise ValueError("pieces do not cover [0, 1) from 0")
    cleaned: list[list] = []
    one = Fraction(1) if mode == "rational" else 1.0
    for idx, (l, s) in enumerate(pieces):
        r = pieces[idx + 1][0] if idx + 1 < len(pieces) else one
        if _eq(l, r, tol):
            if not _eq(l, r, 0):
                warnings.warn("zero-length piece within tolerance dropped", DegeneracyWarning, stacklevel=2)
            continue
        if merge and cleaned and _eq(cleaned[-1][1], s, tol):
            continue  # same translation as previous piece: degenerate cut
        cleaned.append([l, s])
    lefts = [l for l, _ in cleaned]
    shifts = [s for _, s in cleaned]
    rights = lefts[1:] + [one]
    lams = [r - l for l, r in zip(lefts, rights)]
    imlefts = [_snap01(lefts[j] + shifts[j], tol) for j in range(len(cleaned))]
    order = sorted(range(len(cleaned)), key=lambda j: imlefts[j])
    fo = [0] * len(cleaned)
    for pos, j in enumerate(order):
        fo[j] = pos + 1
    return Iem(Permutation(fo), Lengths(lams, mode=mode))


def invert(iem: Iem) -> Iem:
    """Inverse map; the inverse of a d-IEM is again a d-IEM."""
    return _from_pieces([((l + w) % 1, -w) for l, w in zip(iem.lefts, iem.omega)], iem.mode, merge=False)


def conjugate_by_reflection(iem: Iem) -> Iem:
    """R o F o R as an IEM (orientation is preserved twice over).

    On the reflected piece R(J_i) the conjugated map translates by -omega_i.
    """
    pieces = []
    for l, r, w in zip(iem.lefts, iem.rights, iem.omega):
        pieces.append(((1 - r) % 1, -w))
    return _from_pieces(pieces, iem.mode, merge=False)


def is_reversible(iem: Iem, tol=None) -> bool:
    """Exact check of R o F o R = F^{-1} via canonical IEM comparison."""
    a = conjugate_by_reflection(iem)
    b = invert(iem)
    if tol is None and iem.mode == "rational":
        return a == b
    return a.approx_equal(b, tol if tol is not None else FLOAT_CUT_TOL)


def compose(outer: Iem, inner: Iem, merge: bool = True) -> Iem:
    """outer o inner on the circle.

    The partition of the result refines the inner partition with preimages of
    the outer map's discontinuities; pieces that end up with equal adjacent
    translations are merged (set ``merge=False`` to keep the raw refinement).
    """
    if outer.mode != inner.mode:
        raise ValueError("cannot compose maps with different arithmetic modes")
    mode = inner.mode
    tol = 0 if mode == "rational" else FLOAT_CUT_TOL
    inner_inv = invert(inner)
    cuts = list(inner.lefts)
    for c in outer.lefts:
        cuts.append(inner_inv.evaluate(c))
    cuts = _dedupe_sorted(sorted(_snap01(c, tol) for c in cuts), tol)
    pieces = []
    one = Fraction(1) if mode == "rational" else 1.0
    for idx, l in enumerate(cuts):
        r = cuts[idx + 1] if idx + 1 < len(cuts) else one
        mid = (l + r) / 2
        a = inner.interval_of(mid)
        y = (mid + inner.omega[a]) % 1
        b = outer.interval_of(y)
        pieces.append((l, inner.omega[a] + outer.omega[b]))
    return _from_pieces(pieces, mode, merge=merge)


def _dedupe_sorted(vals: list, tol) -> list:
    out = []
    for v in vals:
        if out and _eq(out[-1], v, tol):
            if out[-1] != v:
                warnings.warn("discontinuity collision within tolerance", DegeneracyWarning, stacklevel=2)
            continue
        out.append(v)
    return out


# ---------------------------------------------------------------------------
# powers with itineraries, periodic intervals, saddle connections
# ---------------------------------------------------------------------------


def power_pieces(iem: Iem, q: int) -> list[tuple]:
    """Pieces of F^q as (left, right, shifts, itinerary).

    ``shifts`` are the cumulative translations (t_1, .., t_q) of the piece
    under F, F^2, .., F^q and ``itinerary`` the q subinterval indices visited.
    Interval IEMs never wrap, so x + t_k stays in [0, 1) for x in the piece.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    mode = iem.mode
    tol = 0 if mode == "rational" else FLOAT_CUT_TOL
    zero = Fraction(0) if mode == "rational" else 0.0
    one = Fraction(1) if mode == "rational" else 1.0
    pieces = [(zero, one, (), ())]  # start with the identity partition
    min_gap = one
    for _ in range(q):
        new_pieces = []
        for l, r, shifts, itin in pieces:
            s = shifts[-1] if shifts else zero
            # cut [l, r) at preimages of breakpoints interior to the shifted image
            cuts = [l]
            for c in iem.lefts:
                c_pre = c - s
                if l < c_pre < r and not _eq(c_pre, l, tol) and not _eq(c_pre, r, tol):
                    cuts.append(c_pre)
            cuts = _dedupe_sorted(sorted(cuts), tol)
            for idx, cl in enumerate(cuts):
                cr = cuts[idx + 1] if idx + 1 < len(cuts) else r
                mid = (cl + cr) / 2
                a = iem.interval_of((mid + s) % 1)
                new_pieces.append((cl, cr, shifts + (s + iem.omega[a],), itin + (a,)))
                if cr - cl < min_gap:
                    min_gap = cr - cl
        pieces = new_pieces
    if mode == "float" and min_gap < 1e-8:
        warnings.warn(
            "refined pieces narrower than 1e-8; accumulated float error may be "
            "significant -- consider rational mode",
            DegeneracyWarning,
            stacklevel=2,
        )
    # merge adjacent pieces with identical itinerary (maximality)
    merged = []
    for p in pieces:
        if merged and merged[-1][3] == p[3] and _eq(merged[-1][1], p[0], tol):
            merged[-1] = (merged[-1][0], p[1], merged[-1][2], merged[-1][3])
        else:
            merged.append(p)
    return merged


@dataclass(frozen=True)
class PeriodicInterval:
    """One orbit of periodic intervals, anchored at its leftmost member.

    F^q translates [left, right) to itself with every iterate inside a single
    elemental subinterval; ``itinerary`` lists the q subintervals visited from
    the anchor.  For symmetric maps ``symmetric_partner_offset`` is the k with
    R(J) = F^k(J) (interiors).
    """

    left: object
    right: object
    period: int
    itinerary: tuple[int, ...]
    symmetric_partner_offset: int | None = None

    @property
    def width(self):
        return self.right - self.left

    @property
    def midpoint(self):
        return (self.left + self.right) / 2

    def to_json_dict(self) -> dict:
        return {
            "type": "periodic_interval",
            "left": _scalar_repr(self.left),
            "right": _scalar_repr(self.right),
            "period": self.period,
            "itinerary": list(self.itinerary),
            "symmetric_partner_offset": self.symmetric_partner_offset,
        }

    def to_text(self) -> str:
        off = "-" if self.symmetric_partner_offset is None else str(self.symmetric_partner_offset)
        return (
            f"periodic_interval period={self.period} partner_offset={off}\n"
            f"left {_scalar_repr(self.left)}\n"
            f"right {_scalar_repr(self.right)}\n"
            f"itinerary {' '.join(str(i) for i in self.itinerary)}\n"
        )


def _is_zero_mod1(v, tol) -> bool:
    w = v % 1
    return _eq(w, 0, tol) or _eq(w, 1, tol)


def _prefix_shift_is_periodic(shifts, k, tol) -> bool:
    return _is_zero_mod1(shifts[k - 1], tol)


def periodic_intervals(iem: Iem, q_max: int) -> list[PeriodicInterval]:
    """All orbits of periodic intervals with period <= q_max.

    Works on the refined partition of F^q: a piece is periodic when its total
    translation vanishes, and has minimal period q when no prefix translation
    over a proper divisor vanishes.  Rational mode is exact; float mode warns
    when the refinement becomes too fine to trust.
    """
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    tol = 0 if iem.mode == "rational" else FLOAT_CUT_TOL
    found: list[PeriodicInterval] = []
    seen_anchors: set = set()
    for q in range(1, q_max + 1):
        divisors = [k for k in range(1, q) if q % k == 0]
        for l, r, shifts, itin in power_pieces(iem, q):
            if not _is_zero_mod1(shifts[-1], tol):
                continue
            if any(_prefix_shift_is_periodic(shifts, k, tol) for k in divisors):
                continue  # minimal period is a proper divisor, reported earlier
            # anchor the orbit at its leftmost interval
            lefts_orbit = [l] + [l + s for s in shifts[:-1]]
            j = min(range(q), key=lambda i: lefts_orbit[i])
            anchor_l = lefts_orbit[j]
            anchor_r = anchor_l + (r - l)
            key = (q, _round_key(anchor_l, tol))
            if key in seen_anchors:
                continue
            seen_anchors.add(key)
            anchor_itin = itin[j:] + itin[:j]
            offset = _symmetric_offset(anchor_l, anchor_r, shifts, j, q, tol) if iem.is_symmetric() else None
            found.append(PeriodicInterval(anchor_l, anchor_r, q, anchor_itin, offset))
    return found


def _round_key(v, tol):
    if tol == 0:
        return v
    return round(float(v) / max(tol, 1e-12))


def _symmetric_offset(l, r, shifts, j, q, tol) -> int | None:
    """k with interior R(J) == interior F^k(J), if any."""
    refl_l, refl_r = (1 - r) % 1, 1 - l  # interior (1-r, 1-l)
    if refl_r == 0:
        refl_r = 1
    shifts_anchor = _reanchored_shifts(shifts, j, q)
    for k in range(q):
        s = shifts_anchor[k]
        if _eq((l + s) % 1, refl_l % 1, tol) and _eq(l + s + (r - l), refl_r, tol):
            return k
    return None


def _reanchored_shifts(shifts, j, q):
    """Cumulative shifts of the orbit re-anchored at member j (k = 0..q-1).

    shifts[q-1] is 0 for a periodic piece, so positions wrap cleanly.
    """
    full = (shifts[-1] * 0,) + tuple(shifts)  # positions of members 0..q
    base = full[j]
    return [full[(j + k) % q] - base for k in range(q)]


def orbit_intervals(iem: Iem, pi: PeriodicInterval) -> list[tuple]:
    """The q intervals (left, right) along the orbit of a periodic interval."""
    out = []
    l = pi.left
    w = pi.width
    for a in pi.itinerary:
        out.append((l, l + w))
        l = (l + iem.omega[a]) % 1
    return out


@dataclass(frozen=True)
class SaddleConnection:
    """Endpoint alpha reaches endpoint beta after m iterations (given side)."""

    alpha: int
    beta: int
    m: int
    side: str  # "left" | "right"

    def labels(self, d: int) -> tuple[str, str]:
        lab = _labels(d)
        return lab[self.alpha], lab[self.beta]


def saddle_connections(iem: Iem, m_max: int) -> list[SaddleConnection]:
    """All left and right saddle connections with m <= m_max.

    Left connections iterate the left endpoints directly.  Right connections
    iterate one-sided limits at the right endpoints: the image of the limit
    at x is the limit at x + omega of the interval whose closure meets x from
    the left.
    """
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    tol = 0 if iem.mode == "rational" else FLOAT_MATCH_TOL
    out: list[SaddleConnection] = []
    lefts = iem.lefts
    rights = iem.rights
    for a in range(iem.d):
        x = lefts[a]
        for m in range(1, m_max + 1):
            x = iem.evaluate(x)
            for b, lb in enumerate(lefts):
                if _eq(x, lb, tol):
                    out.append(SaddleConnection(a, b, m, "left"))
    for a in range(iem.d):
        x = rights[a]  # a left-limit point in (0, 1]
        for m in range(1, m_max + 1):
            j = iem.interval_of_left_limit(x)
            x = _limit_mod(x + iem.omega[j])
            for b, rb in enumerate(rights):
                if _eq(x, rb, tol):
                    out.append(SaddleConnection(a, b, m, "right"))
    return out


@dataclass
class NoNonSymmetricReport:
    passed: bool
    checked: int
    counterexamples: list

    def __bool__(self):
        return self.passed


def verify_no_nonsymmetric(iem: Iem, q_max: int) -> NoNonSymmetricReport:
    """Check that every periodic interval of a symmetric IEM is symmetric.

    A failure would indicate an implementation bug, not a property of the
    map: symmetric exchange maps admit only symmetric periodic intervals.
    """
    if not iem.is_symmetric():
        raise ValueError("map is not symmetric (precondition)")
    bad = []
    pis = periodic_intervals(iem, q_max)
    for pi in pis:
        if pi.symmetric_partner_offset is None:
            bad.append(pi)
    return NoNonSymmetricReport(passed=not bad, checked=len(pis), counterexamples=bad)


def swap_decompose(iem: Iem) -> tuple[Iem, Permutation]:
    """Split a reversible map G into a symmetric IEM F and a swap W, G = F o W.

    Builds the directed graph i -> i' with R(J_i) contained in G(J_{i'});
    reversibility forces this graph to be an involution pairing equal-length
    intervals.  Raises NotReversibleError otherwise.
    """
    tol = 0 if iem.mode == "rational" else FLOAT_CUT_TOL
    d = iem.d
    ginv = invert(iem)  # its pieces are the image intervals of G
    if ginv.d != d:
        raise NotReversibleError("degenerate discontinuities present; canonicalize first")
    lam = iem.lengths.values
    sigma = []
    # ginv piece j covers the image of original interval sigma0(j)
    img_order = [v - 1 for v in iem.perm.image_order()]
    for i in range(d):
        lo = (1 - iem.rights[i]) % 1
        mid = lo + lam[i] / 2
        j = ginv.interval_of(mid % 1)
        i_prime = img_order[j]
        # containment of the reflected interior in the image piece
        if not (_eq(ginv.lefts[j], lo, tol) and _eq(ginv.lengths.values[j], lam[i], tol)):
            raise NotReversibleError(f"reflected interval {i} is not an image interval")
        sigma.append(i_prime)
    for i, ip in enumerate(sigma):
        if sigma[ip] != i:
            raise NotReversibleError("inclusion graph has a cycle longer than 2")
        if not _eq(lam[i], lam[ip], tol):
            raise NotReversibleError("paired intervals have different lengths")
    swap_perm = Permutation([s + 1 for s in sigma])
    w = Iem(swap_perm, Lengths(lam, mode=iem.mode))
    f = compose(iem, w, merge=False)
    if f.d != d or not f.is_symmetric():
        raise NotReversibleError("decomposition does not yield a symmetric map")
    return f, swap_perm
