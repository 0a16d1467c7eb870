"""Area-preserving perturbations of symmetric exchange-map families.

The two-dimensional map on the strip [0,1) x P is

    T(x, y) = (x', y')      x' = x + omega_alpha(y) mod 1,  x in I_alpha(y)
                            y' = y + eps * f(x')

with f a finite sum of odd harmonics f(x) = sum_l a_l sin(2 pi l x).  That
the kick acts on x' (not x) is forced by area preservation; antisymmetry of f
makes the map reversible through the orientation-reversing involution

    S(x, y) = (-x mod 1, y - eps f(x)),

and L = S o T reflects each elemental subinterval about its midpoint while
leaving y untouched.  The single-step Jacobian

    [[1, omega'_alpha(y)], [eps f'(x'), 1 + eps f'(x') omega'_alpha(y)]]

has unit determinant identically.

Steps that would leave P raise BoundaryEscape rather than clamping (families
with wrap_y instead reduce y modulo the period).  All objects are immutable
and every operation is a pure function, so maps can be shared freely across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .families import Family

__all__ = ["Forcing", "PhasePoint", "PerturbedMap", "BoundaryEscape", "Trajectory"]

TWO_PI = 2.0 * math.pi


class Forcing:
    """Antisymmetric circle forcing f(x) = sum_l a_l sin(2 pi l x).

    Only odd sine harmonics are representable, so f(-x mod 1) = -f(x) and
    f(0) = f(1/2) = 0 hold by construction; cosine or constant terms are not
    accepted.
    """

    __slots__ = ("terms", "_ls", "_amps")

    def __init__(self, terms):
        clean = []
        for l, a in terms:
            if int(l) != l or l < 1:
                raise ValueError(f"harmonic must be a positive integer, got {l!r}")
            clean.append((int(l), float(a)))
        if not clean:
            raise ValueError("forcing needs at least one term")
        self.terms = tuple(clean)
        self._ls = np.array([l for l, _ in clean], dtype=float)
        self._amps = np.array([a for _, a in clean], dtype=float)

    @classmethod
    def single(cls, harmonic: int = 1, amplitude: float = 1.0) -> "Forcing":
        return cls([(harmonic, amplitude)])

    def f(self, x: float) -> float:
        return float(sum(a * math.sin(TWO_PI * l * x) for l, a in self.terms))

    def df(self, x: float) -> float:
        return float(sum(a * TWO_PI * l * math.cos(TWO_PI * l * x) for l, a in self.terms))

    def f_many(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (self._amps[None, :] * np.sin(TWO_PI * self._ls[None, :] * x[..., None])).sum(axis=-1)

    def __repr__(self):
        return f"Forcing({list(self.terms)})"


class PhasePoint(NamedTuple):
    x: float
    y: float


class BoundaryEscape(Exception):
    """A step left the family domain; carries the partial state."""

    def __init__(self, point, step=None):
        self.point = PhasePoint(*point)
        self.step = step
        super().__init__(f"trajectory left the domain at {self.point}" + (f" (step {step})" if step is not None else ""))


@dataclass
class Trajectory:
    xs: np.ndarray
    ys: np.ndarray
    alphas: np.ndarray | None
    escaped: bool = False

    def __len__(self):
        return len(self.xs)

    @property
    def points(self):
        return list(zip(self.xs, self.ys))


class PerturbedMap:
    """T(x, y) = (F_y(x), y + eps f(F_y(x))) for a symmetric family."""

    def __init__(self, family: Family, forcing: Forcing, eps: float):
        if not family.perm.is_reversing:
            raise ValueError("perturbed maps require a symmetric (order-reversing) family")
        if eps < 0:
            raise ValueError("eps must be >= 0")
        self.family = family
        self.forcing = forcing
        self.eps = float(eps)

    # -- single steps -------------------------------------------------------

    def _admit_y(self, y, step=None, x=None):
        fam = self.family
        if fam.wrap_y is not None:
            return fam._wrap(y)
        y0, y1 = float(fam.domain[0]), float(fam.domain[1])
        if y < y0 or y > y1:
            raise BoundaryEscape((x if x is not None else math.nan, y), step)
        return y

    def step(self, p) -> PhasePoint:
        x, y = p
        y = self._admit_y(y, x=x)
        fam = self.family
        a = fam.index_at(x, y)
        x1 = (x + fam.omega_at(y, a)) % 1
        y1 = self._admit_y(y + self.eps * self.forcing.f(x1), x=x1)
        return PhasePoint(x1, y1)

    def step_inverse(self, p) -> PhasePoint:
        x, y = p
        y0 = self._admit_y(y - self.eps * self.forcing.f(x), x=x)
        fam = self.family
        lefts = fam.lefts_at(y0)
        omg = fam.omega_all(y0)
        lam = fam._lam_raw(y0)
        # pick the image interval containing x, tolerating float slivers at
        # the piece boundaries (the margin is lam_b - (x - m_b) mod 1)
        best_b, best_margin = -1, -math.inf
        for b in range(fam.d):
            m = (lefts[b] + omg[b]) % 1
            margin = float(lam[b]) - (x - m) % 1
            if margin > best_margin:
                best_b, best_margin = b, margin
        if best_margin <= -1e-9:
            raise RuntimeError(f"image partition lookup failed at {p}")  # pragma: no cover
        return PhasePoint((x - omg[best_b]) % 1, y0)

    def symmetry_S(self, p) -> PhasePoint:
        x, y = p
        return PhasePoint((-x) % 1, y - self.eps * self.forcing.f(x))

    def local_symmetry_L(self, p) -> PhasePoint:
        # S o T computed in closed form so the y-coordinate is untouched
        x, y = p
        fam = self.family
        a = fam.index_at(x, self._admit_y(y, x=x))
        x1 = (x + fam.omega_at(y, a)) % 1
        return PhasePoint((-x1) % 1, y)

    def jacobian_step(self, p) -> np.ndarray:
        x, y = p
        fam = self.family
        a = fam.index_at(x, y)
        x1 = (x + fam.omega_at(y, a)) % 1
        dw = float(fam.omega_deriv(y, a))
        c = self.eps * self.forcing.df(x1)
        return np.array([[1.0, dw], [c, 1.0 + c * dw]])

    def y_dist(self, y1: float, y2: float) -> float:
        """|y1 - y2|, measured on the circle for wrap-period families."""
        d = abs(y1 - y2)
        w = self.family.wrap_y
        if w is not None:
            d = d % w
            d = min(d, w - d)
        return d

    def y_diff(self, y1: float, y2: float) -> float:
        """Signed y1 - y2, wrapped to (-w/2, w/2] for wrap-period families."""
        d = y1 - y2
        w = self.family.wrap_y
        if w is not None:
            d = d % w
            if d > w / 2:
                d -= w
        return d

    def distance_to_discontinuity(self, p) -> float:
        """Distance from x to the boundary of its subinterval at level y."""
        x, y = p
        fam = self.family
        lefts = list(fam.lefts_at(y)) + [1.0]
        a = fam.index_at(x, y)
        return float(min(x - float(lefts[a]), float(lefts[a + 1]) - x))

    # -- iteration ----------------------------------------------------------

    def iterate(self, p, n: int, record: bool = False) -> Trajectory:
        """n steps from p; on boundary escape the trajectory is truncated.

        Positions are always recorded (n+1 rows when nothing escapes);
        ``record`` additionally keeps the subinterval index of each step.
        """
        x, y = float(p[0]), float(p[1])
        fam = self.family
        xs, ys, als = [x], [y], []
        escaped = False
        for k in range(n):
            a = fam.index_at(x, y)
            x1 = (x + float(fam.omega_at(y, a))) % 1
            try:
                y1 = self._admit_y(y + self.eps * self.forcing.f(x1), step=k, x=x1)
            except BoundaryEscape:
                escaped = True
                break
            x, y = x1, y1
            xs.append(x)
            ys.append(y)
            als.append(a)
        return Trajectory(np.array(xs), np.array(ys), np.array(als, dtype=int) if record else None, escaped)

    def orbit_points(self, p, q: int) -> list[PhasePoint]:
        out = [PhasePoint(float(p[0]), float(p[1]))]
        for _ in range(q - 1):
            out.append(self.step(out[-1]))
        return out

    def orbit_itinerary(self, p, q: int) -> tuple[int, ...]:
        x, y = float(p[0]), float(p[1])
        y = self._admit_y(y, x=x)
        fam = self.family
        itin = []
        for _ in range(q):
            a = fam.index_at(x, y)
            itin.append(a)
            x = (x + float(fam.omega_at(y, a))) % 1
            y = self._admit_y(y + self.eps * self.forcing.f(x), x=x)
        return tuple(itin)

    # -- vectorized stepping (float fast path) ------------------------------

    def step_many(self, x: np.ndarray, y: np.ndarray):
        """One step for arrays of points; returns (x', y', alpha, alive).

        Escaped points are frozen in place with alive=False (wrap_y families
        never escape).
        """
        fam = self.family
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        yl = y if fam.wrap_y is None else float(fam.domain[0]) + (y - float(fam.domain[0])) % fam.wrap_y
        a = fam.index_many(x, yl)
        x1 = (x + fam.omega_many(yl, a)) % 1
        y1 = y + self.eps * self.forcing.f_many(x1)
        if fam.wrap_y is not None:
            y0f = float(fam.domain[0])
            y1 = y0f + (y1 - y0f) % fam.wrap_y
            alive = np.ones(x.shape, dtype=bool)
        else:
            alive = (y1 >= float(fam.domain[0])) & (y1 <= float(fam.domain[1]))
            x1 = np.where(alive, x1, x)
            y1 = np.where(alive, y1, y)
        return x1, y1, a, alive

    def __repr__(self):
        return f"PerturbedMap(eps={self.eps}, family={self.family!r}, forcing={self.forcing!r})"
