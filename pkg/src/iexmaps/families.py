"""One-parameter families of exchange maps.

A family keeps the reordering fixed and lets the lengths vary smoothly with an
action-like variable y in a closed interval P, so the map is

    F_y(x) = x + omega_alpha(y),   x in I_alpha(y).

The workhorse is the *linear* family lambda(y) = y*lambda1 + (1-y)*lambda0 on
[0, 1]; arbitrary smooth families are supported through a callback supplying
lambda(y) and its derivative.  A region of the (x, y) strip sweeping out the
same subinterval at every level is a Subregion.

Lengths may vanish exactly at the endpoints of P (several natural families
degenerate there); ``iem_at`` refuses those levels while lookups still work.
Families with ``wrap_y`` set are periodic in y with that period, which is how
the torus standard map fits the framework.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .iem import Iem, Lengths, Permutation, _is_exact

__all__ = ["Family", "Subregion"]


def _exact_seq(vals) -> bool:
    return all(_is_exact(v) or isinstance(v, str) for v in vals)


def _family_vec(vals) -> tuple:
    """Parse a lengths vector for a family endpoint: zeros allowed, sum 1.

    Unnormalized data is rescaled with a warning, mirroring the Lengths rule.
    """
    import warnings

    vals = list(vals)
    exact = _exact_seq(vals)
    vals = [Fraction(v) if exact else float(v) for v in vals]
    if any(v < 0 for v in vals):
        raise ValueError(f"lengths must be nonnegative, got {vals}")
    total = sum(vals)
    if total <= 0:
        raise ValueError("lengths sum must be positive")
    if (exact and total != 1) or (not exact and abs(total - 1.0) > 1e-12):
        warnings.warn(f"family lengths sum to {total}, normalizing to 1", stacklevel=3)
        vals = [v / total for v in vals]
    elif not exact:
        vals = [v / total for v in vals] if total != 1.0 else vals
    return tuple(vals)


class Family:
    """y-parameterized lengths with a fixed permutation on a domain P."""

    def __init__(self, perm: Permutation, kind: str, domain, *, lam0=None, lam1=None,
                 fn=None, dfn=None, wrap_y=None, _grid=1024):
        self.perm = perm
        self.kind = kind
        y0, y1 = domain
        if not (float(y0) < float(y1)):
            raise ValueError("domain must be a nondegenerate interval")
        self.domain = (y0, y1)
        self.wrap_y = wrap_y
        self._fn = fn
        self._dfn = dfn
        if kind == "linear":
            self.lam0 = _family_vec(lam0)
            self.lam1 = _family_vec(lam1)
            if len(self.lam0) != len(self.lam1) or len(self.lam0) != perm.d:
                raise ValueError("length vectors must match the permutation size")
            self._exact = _exact_seq(self.lam0) and _exact_seq(self.lam1)
            self._check_linear_positivity()
        elif kind == "callback":
            lam_mid = list(fn((float(y0) + float(y1)) / 2))
            if len(lam_mid) != perm.d:
                raise ValueError("callback returns wrong number of lengths")
            self._exact = False
            self._check_grid_positivity(_grid)
        else:
            raise ValueError(f"unknown family kind {kind!r}")
        self._affine_cache = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def linear(cls, perm, lam0, lam1, domain=(0, 1), wrap_y=None) -> "Family":
        return cls(perm, "linear", domain, lam0=lam0, lam1=lam1, wrap_y=wrap_y)

    @classmethod
    def constant(cls, perm, lengths, domain=(0, 1)) -> "Family":
        vals = Lengths(lengths).values
        return cls(perm, "linear", domain, lam0=vals, lam1=vals)

    @classmethod
    def from_callback(cls, perm, fn, dfn, domain, wrap_y=None, grid=1024) -> "Family":
        """Smooth family from user-supplied lambda(y) and lambda'(y).

        The evaluator must be pure and re-entrant; positivity and
        normalization are only checked on a sampling grid (a heuristic).
        """
        return cls(perm, "callback", domain, fn=fn, dfn=dfn, wrap_y=wrap_y, _grid=grid)

    # -- validation ---------------------------------------------------------

    def _check_linear_positivity(self):
        # positivity on the open interior follows from nonnegativity at the
        # endpoints; a length identically zero is rejected outright
        for i, (a, b) in enumerate(zip(self._lam_linear(self.domain[0]), self._lam_linear(self.domain[1]))):
            if a < 0 or b < 0 or (a == 0 and b == 0):
                raise ValueError(f"length {i} is not positive on the domain")

    def _check_grid_positivity(self, grid):
        y0, y1 = float(self.domain[0]), float(self.domain[1])
        ys = np.linspace(y0, y1, grid)
        for y in ys:
            lam = list(self._fn(y))
            if any(v < 0 for v in lam) or (y0 < y < y1 and any(v <= 0 for v in lam)):
                raise ValueError(f"callback lengths not positive at y={y}")
            if abs(sum(lam) - 1.0) > 1e-12:
                raise ValueError(f"callback lengths do not sum to 1 at y={y}")

    # -- basic accessors ----------------------------------------------------

    @property
    def d(self) -> int:
        return self.perm.d

    def _wrap(self, y):
        if self.wrap_y is None:
            return y
        y0 = self.domain[0]
        return y0 + (y - y0) % self.wrap_y

    def _require_in_domain(self, y):
        y0, y1 = self.domain
        if not (float(y0) <= float(y) <= float(y1)):
            raise ValueError(f"y={y} outside the family domain [{y0}, {y1}]")

    def _lam_linear(self, y):
        if self._exact and (_is_exact(y) or isinstance(y, str)):
            t = Fraction(y)
            return tuple(t * b + (1 - t) * a for a, b in zip(self.lam0, self.lam1))
        t = float(y)
        return tuple(t * float(b) + (1 - t) * float(a) for a, b in zip(self.lam0, self.lam1))

    def lambda_at(self, y) -> Lengths:
        y = self._wrap(y)
        self._require_in_domain(y)
        if self.kind == "linear":
            vals = self._lam_linear(y)
            if any(v <= 0 for v in vals):
                raise ValueError(f"length vanishes at y={y}")
            mode = "rational" if _exact_seq(vals) and all(isinstance(v, Fraction) for v in vals) else "float"
            return Lengths(vals, mode=mode)
        return Lengths([float(v) for v in self._fn(float(y))], mode="float")

    def lambda_deriv(self, y) -> tuple:
        y = self._wrap(y)
        self._require_in_domain(y)
        if self.kind == "linear":
            return tuple(b - a for a, b in zip(self.lam0, self.lam1))
        return tuple(float(v) for v in self._dfn(float(y)))

    def iem_at(self, y) -> Iem:
        return Iem(self.perm, self.lambda_at(y))

    # -- derived geometry ---------------------------------------------------

    def lefts_at(self, y) -> tuple:
        lam = self._lam_raw(y)
        out = [lam[0] * 0]
        for v in lam[:-1]:
            out.append(out[-1] + v)
        return tuple(out)

    def _lam_raw(self, y):
        """Lengths without the positivity gate (zeros allowed at endpoints)."""
        y = self._wrap(y)
        self._require_in_domain(y)
        if self.kind == "linear":
            return self._lam_linear(y)
        return tuple(float(v) for v in self._fn(float(y)))

    def midpoints(self, y) -> tuple:
        lam = self._lam_raw(y)
        lefts = self.lefts_at(y)
        return tuple(l + v / 2 for l, v in zip(lefts, lam))

    def midpoint_deriv(self, y) -> tuple:
        dl = self.lambda_deriv(y)
        out = []
        acc = dl[0] * 0
        for v in dl:
            out.append(acc + v / 2)
            acc = acc + v
        return tuple(out)

    def omega_all(self, y) -> tuple:
        lam = self._lam_raw(y)
        t0 = self.perm._targets0
        d = self.d
        image_lefts = [sum(lam[b] for b in range(d) if t0[b] < t0[a]) for a in range(d)]
        lefts = self.lefts_at(y)
        return tuple(image_lefts[a] - lefts[a] for a in range(d))

    def omega_at(self, y, alpha: int):
        return self.omega_all(y)[alpha]

    def omega_deriv_all(self, y) -> tuple:
        # the offset formula is linear in the lengths, so the derivative is
        # the same formula applied to lambda'(y)
        dl = self.lambda_deriv(y)
        t0 = self.perm._targets0
        d = self.d
        img = [sum(dl[b] for b in range(d) if t0[b] < t0[a]) for a in range(d)]
        dom = [sum(dl[b] for b in range(a)) for a in range(d)]
        return tuple(i - o for i, o in zip(img, dom))

    def omega_deriv(self, y, alpha: int):
        return self.omega_deriv_all(y)[alpha]

    def index_at(self, x, y) -> int:
        """Subregion membership: the closed-left subinterval containing x."""
        if not (0 <= x < 1):
            x = x % 1
        lefts = self.lefts_at(y)
        idx = 0
        for j in range(1, self.d):
            if x >= lefts[j]:
                idx = j
            else:
                break
        return idx

    def subregion(self, alpha: int) -> "Subregion":
        return Subregion(alpha, self)

    # -- float fast path ----------------------------------------------------

    def affine_float(self):
        """(Lc, Ls, Oc, Os): lefts = Lc + Ls*y and omega = Oc + Os*y (linear kind)."""
        if self.kind != "linear":
            raise ValueError("affine coefficients exist only for linear families")
        if self._affine_cache is None:
            lam0 = np.array([float(v) for v in self.lam0])
            lam1 = np.array([float(v) for v in self.lam1])
            dl = lam1 - lam0

            def lefts(lam):
                return np.concatenate([[0.0], np.cumsum(lam)[:-1]])

            t0 = np.array(self.perm._targets0)
            d = self.d

            def omg(lam):
                img = np.array([lam[[b for b in range(d) if t0[b] < t0[a]]].sum() for a in range(d)])
                return img - lefts(lam)

            Lc, Ls = lefts(lam0), lefts(lam1) - lefts(lam0)
            Oc, Os = omg(lam0), omg(lam1) - omg(lam0)
            self._affine_cache = (Lc, Ls, Oc, Os)
        return self._affine_cache

    def lefts_many(self, y: np.ndarray) -> np.ndarray:
        if self.kind == "linear":
            Lc, Ls, _, _ = self.affine_float()
            return Lc[None, :] + Ls[None, :] * np.asarray(y, dtype=float)[:, None]
        return np.array([self.lefts_at(float(v)) for v in np.asarray(y)], dtype=float)

    def index_many(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        lefts = self.lefts_many(y)
        x = np.asarray(x, dtype=float)
        return np.maximum((x[:, None] >= lefts).sum(axis=1) - 1, 0)

    def omega_many(self, y: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        if self.kind == "linear":
            _, _, Oc, Os = self.affine_float()
            return Oc[alpha] + Os[alpha] * np.asarray(y, dtype=float)
        return np.array([self.omega_at(float(v), int(a)) for v, a in zip(np.asarray(y), np.asarray(alpha))])

    def __repr__(self):
        return f"Family(kind={self.kind!r}, d={self.d}, domain={self.domain}, perm={list(self.perm.final_order)})"


@dataclass(frozen=True)
class Subregion:
    """The set of (x, y) with x in the alpha-th subinterval of F_y."""

    alpha: int
    family: Family

    def __contains__(self, point) -> bool:
        x, y = point
        return self.family.index_at(x, y) == self.alpha

    def slice_at(self, y) -> tuple:
        lefts = self.family.lefts_at(y)
        lam = self.family._lam_raw(y)
        return (lefts[self.alpha], lefts[self.alpha] + lam[self.alpha])
