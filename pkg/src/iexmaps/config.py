"""Experiment configuration: a flat, sectioned key=value text format.

Sections and keys are fixed (unknown ones are rejected so that a typo cannot
silently fall back to a default); values are plain tokens, lists are
space-separated, rationals may be written p/q.  A canonicalized copy of the
resolved configuration (defaults included) is echoed into every output
directory, which keeps runs diffable and reproducible.
"""

from __future__ import annotations

import configparser
import io
from fractions import Fraction

from .families import Family
from .iem import Permutation
from .perturbed import Forcing

__all__ = ["ConfigError", "ExperimentConfig", "load_config"]


class ConfigError(ValueError):
    pass


_KNOWN = {
    "family": {"perm", "kind", "lambda0", "lambda1", "domain", "wrap_y"},
    "forcing": {"terms"},
    "run": {"eps", "mode", "out", "threads"},
    "iterate": {"seeds", "seeds_random", "seed_rng", "steps"},
    "symmetry-lines": {"i_max", "samples"},
    "find-periodic": {"q_max", "samples", "predict_harmonics", "predict_eps"},
    "sweep": {"eps_grid", "seed", "q", "delta_seed"},
    "oracle": {"q_max", "m_max", "y"},
    "verify": {"i_max", "q_max", "points", "rng"},
    "tolerances": {"tol_line", "tol_orbit", "tol_transv", "tol_bal", "tol_res",
                   "y_res", "tol_g", "tol_sym"},
}

_DEFAULTS = {
    "run": {"eps": "0", "mode": "float", "out": "out", "threads": "1"},
    "iterate": {"seeds": "", "seeds_random": "0", "seed_rng": "0", "steps": "1000"},
    "symmetry-lines": {"i_max": "7", "samples": "401"},
    "find-periodic": {"q_max": "2", "samples": "401", "predict_harmonics": "", "predict_eps": ""},
    "sweep": {"eps_grid": "", "seed": "", "q": "2", "delta_seed": "1e-3"},
    "oracle": {"q_max": "3", "m_max": "5", "y": "1/2"},
    "verify": {"i_max": "3", "q_max": "2", "points": "1000", "rng": "20250810"},
    "tolerances": {"tol_line": "1e-9", "tol_orbit": "1e-10", "tol_transv": "1e-10",
                   "tol_bal": "1e-9", "tol_res": "1e-12", "y_res": "1e-6",
                   "tol_g": "1e-12", "tol_sym": "1e-8"},
}


def _scalar(tok: str):
    tok = tok.strip()
    if "/" in tok:
        return Fraction(tok)
    return float(tok)


def _scalar_list(text: str):
    return [_scalar(t) for t in text.replace(",", " ").split()]


class ExperimentConfig:
    """Validated configuration with constructed family and forcing."""

    def __init__(self, cp: configparser.ConfigParser, path: str = "<config>"):
        for sec in cp.sections():
            if sec not in _KNOWN:
                raise ConfigError(f"{path}: unknown section [{sec}]")
            for key in cp[sec]:
                if key not in _KNOWN[sec]:
                    raise ConfigError(f"{path}: unknown key {key!r} in [{sec}]")
        if "family" not in cp or "forcing" not in cp:
            raise ConfigError(f"{path}: sections [family] and [forcing] are required")
        self._cp = cp
        self.path = path
        for sec, defaults in _DEFAULTS.items():
            if sec not in cp:
                cp.add_section(sec)
            for k, v in defaults.items():
                cp[sec].setdefault(k, v)
        try:
            self.family = self._build_family()
            self.forcing = self._build_forcing()
        except (ValueError, KeyError) as e:
            raise ConfigError(f"{path}: {e}") from e

    # -- constructors ------------------------------------------------------

    def _build_family(self) -> Family:
        sec = self._cp["family"]
        perm_spec = sec.get("perm", "").split()
        if not perm_spec:
            raise ConfigError(f"{self.path}: family.perm is required")
        if perm_spec[0] == "reversing":
            perm = Permutation.reversing(int(perm_spec[1]))
        else:
            perm = Permutation([int(v) for v in perm_spec])
        kind = sec.get("kind", "linear")
        if kind != "linear":
            raise ConfigError(f"{self.path}: config files support only linear families, got {kind!r}")
        mode = self._cp["run"].get("mode", "float")
        lam0 = self._parse_lengths(sec.get("lambda0", ""), mode)
        lam1 = self._parse_lengths(sec.get("lambda1", "") or sec.get("lambda0", ""), mode)
        domain = _scalar_list(sec.get("domain", "0 1"))
        if len(domain) != 2:
            raise ConfigError(f"{self.path}: family.domain needs two values")
        wrap = sec.get("wrap_y", "").strip()
        return Family.linear(perm, lam0, lam1, domain=tuple(domain),
                             wrap_y=float(wrap) if wrap else None)

    def _parse_lengths(self, text: str, mode: str):
        vals = text.split()
        if not vals:
            raise ConfigError(f"{self.path}: family length vectors are required")
        if mode == "rational":
            return [Fraction(v) for v in vals]
        return [float(Fraction(v)) if "/" in v else float(v) for v in vals]

    def _build_forcing(self) -> Forcing:
        toks = self._cp["forcing"].get("terms", "").split()
        if not toks:
            raise ConfigError(f"{self.path}: forcing.terms is required (e.g. '1:1.0')")
        terms = []
        for t in toks:
            l, _, a = t.partition(":")
            terms.append((int(l), float(a) if a else 1.0))
        return Forcing(terms)

    # -- typed access ------------------------------------------------------

    def get(self, sec: str, key: str) -> str:
        return self._cp[sec][key]

    def getfloat(self, sec: str, key: str) -> float:
        return float(Fraction(self.get(sec, key))) if "/" in self.get(sec, key) else float(self.get(sec, key))

    def getint(self, sec: str, key: str) -> int:
        return int(self.get(sec, key))

    @property
    def eps(self) -> float:
        return self.getfloat("run", "eps")

    @property
    def mode(self) -> str:
        return self.get("run", "mode")

    def tol(self, name: str) -> float:
        return self.getfloat("tolerances", name)

    def seeds(self):
        """Explicit seeds plus reproducible random ones."""
        import numpy as np

        out = []
        text = self.get("iterate", "seeds").strip()
        if text:
            for pair in text.split(";"):
                x, y = (float(Fraction(v)) if "/" in v else float(v) for v in pair.split(","))
                out.append((x, y))
        n = self.getint("iterate", "seeds_random")
        if n:
            rng = np.random.default_rng(self.getint("iterate", "seed_rng"))
            y0, y1 = (float(v) for v in self.family.domain)
            span = y1 - y0
            for _ in range(n):
                out.append((float(rng.random()), y0 + 0.05 * span + 0.9 * span * float(rng.random())))
        return out

    def eps_grid(self):
        spec = self.get("sweep", "eps_grid").strip()
        if not spec:
            raise ConfigError(f"{self.path}: sweep.eps_grid is required (start:stop:step)")
        import numpy as np

        start, stop, step = (float(v) for v in spec.split(":"))
        return np.arange(start, stop + step / 2, step)

    def canonical_text(self) -> str:
        buf = io.StringIO()
        for sec in sorted(self._cp.sections()):
            buf.write(f"[{sec}]\n")
            for key in sorted(self._cp[sec]):
                buf.write(f"{key} = {self._cp[sec][key]}\n")
            buf.write("\n")
        return buf.getvalue()


def load_config(path: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from e
    return ExperimentConfig(cp, path)
