"""Render iexmaps CLI exports into figures.

Strictly a consumer of the exported files (trajectory/symmetry-line/subregion
CSVs and sweep CSV + events JSON): no dynamics is ever recomputed here, so
the simulation package stays fully runnable without this one.

Figure kinds
------------
portrait       trajectories as colored dots, optional black symmetry lines
               (the primary ones, indices 0 and 1, drawn bold) and optional
               shaded elemental subregions
lines-overlay  symmetry lines and shading only
sweep-diagram  continuation diagram: x0 against eps, colored by stability,
               with event positions marked

Renders are pure functions of their inputs: a fixed style, a fixed dpi and
scrubbed image metadata make re-runs byte-identical.
"""

from __future__ import annotations

import csv
import glob
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["PlotSpec", "SchemaError", "render", "load_spec"]

_COLORS = ["tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple",
           "tab:brown", "tab:pink", "tab:gray", "tab:olive", "tab:cyan"]
_CLASS_COLORS = {
    "elliptic": "tab:blue",
    "hyperbolic": "tab:red",
    "hyperbolic-with-reflection": "tab:purple",
    "parabolic": "tab:gray",
}
_SHADE = ["#d0e4f5", "#fde2c8", "#d7ecd2", "#f5d4d4", "#e3d6ef", "#efe8c8"]


class SchemaError(ValueError):
    """An input file does not match the documented CSV/JSON schema."""


@dataclass
class PlotSpec:
    kind: str
    out: str
    trajectories: list = field(default_factory=list)
    lines: str | None = None
    subregions: str | None = None
    sweep: str | None = None
    events: str | None = None
    shade_subregions: bool = True
    axes: dict = field(default_factory=dict)
    title: str = ""
    dpi: int = 150

    @classmethod
    def from_dict(cls, doc: dict, base: Path | None = None) -> "PlotSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise SchemaError(f"unknown spec fields: {sorted(unknown)}")
        if "kind" not in doc or "out" not in doc:
            raise SchemaError("spec needs at least 'kind' and 'out'")
        spec = cls(**doc)
        if spec.kind not in ("portrait", "lines-overlay", "sweep-diagram"):
            raise SchemaError(f"unknown figure kind {spec.kind!r}")
        if base is not None:
            def loc(p):
                return str(base / p) if p and not Path(p).is_absolute() else p

            spec.trajectories = [loc(p) for p in spec.trajectories]
            spec.lines = loc(spec.lines)
            spec.subregions = loc(spec.subregions)
            spec.sweep = loc(spec.sweep)
            spec.events = loc(spec.events)
            spec.out = loc(spec.out)
        return spec


def load_spec(path: str) -> PlotSpec:
    with open(path) as fh:
        doc = json.load(fh)
    return PlotSpec.from_dict(doc, base=Path(path).resolve().parent)


def _read_csv(path: str, columns: tuple[str, ...]) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {','.join(columns)}")
        for col in columns:
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        idx = {c: header.index(c) for c in columns}
        rows = list(reader)
    out = {}
    for c in columns:
        try:
            out[c] = np.array([float(r[idx[c]]) if r[idx[c]] != "" else np.nan for r in rows])
        except ValueError:
            # non-numeric column (stability class, event labels)
            out[c] = np.array([r[idx[c]] for r in rows], dtype=object)
    return out


def _shade(ax, path: str):
    data = _read_csv(path, ("y", "index", "left", "right"))
    ys = np.unique(data["y"])
    if len(ys) < 2:
        return
    dy = np.diff(ys).min()
    for yv, iv, lv, rv in zip(data["y"], data["index"], data["left"], data["right"]):
        ax.add_patch(plt.Rectangle((lv, yv - dy / 2), rv - lv, dy,
                                   facecolor=_SHADE[int(iv) % len(_SHADE)],
                                   edgecolor="none", zorder=0))


def _draw_lines(ax, path: str):
    data = _read_csv(path, ("line_index", "branch", "segment", "y_param", "x", "y"))
    key = np.stack([data["line_index"], data["branch"], data["segment"]]).T
    if len(key) == 0:
        return
    uniq = sorted({tuple(r) for r in key.tolist()})
    for li, br, seg in uniq:
        mask = (data["line_index"] == li) & (data["branch"] == br) & (data["segment"] == seg)
        xs, ys = data["x"][mask], data["y"][mask]
        bold = int(li) in (0, 1)  # primary symmetry lines
        ax.plot(xs, ys, ".", color="black", ms=1.8 if bold else 0.7, zorder=3)


def _axes_ranges(ax, spec: PlotSpec, default=((0, 1), (0, 1))):
    xr = spec.axes.get("x", default[0])
    yr = spec.axes.get("y", default[1])
    ax.set_xlim(*xr)
    ax.set_ylim(*yr)


def _new_fig():
    plt.rcParams["svg.hashsalt"] = "plotkit"
    return plt.subplots(figsize=(7.0, 7.0))


def _save(fig, spec: PlotSpec):
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    meta = {"Software": None} if out.suffix == ".png" else {"Date": None}
    fig.savefig(out, dpi=spec.dpi, metadata=meta)
    plt.close(fig)
    return out


def _render_portrait(spec: PlotSpec):
    fig, ax = _new_fig()
    if spec.subregions and spec.shade_subregions:
        _shade(ax, spec.subregions)
    paths = []
    for pattern in spec.trajectories:
        hits = sorted(glob.glob(pattern))
        paths.extend(hits if hits else [pattern])
    for k, path in enumerate(paths):
        data = _read_csv(path, ("step", "x", "y", "alpha"))
        ax.plot(data["x"], data["y"], ".", ms=0.8, color=_COLORS[k % len(_COLORS)], zorder=2)
    if spec.lines:
        _draw_lines(ax, spec.lines)
    _axes_ranges(ax, spec)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if spec.title:
        ax.set_title(spec.title)
    return _save(fig, spec)


def _render_lines_overlay(spec: PlotSpec):
    fig, ax = _new_fig()
    if spec.subregions and spec.shade_subregions:
        _shade(ax, spec.subregions)
    if not spec.lines:
        raise SchemaError("lines-overlay needs a 'lines' input")
    _draw_lines(ax, spec.lines)
    _axes_ranges(ax, spec)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if spec.title:
        ax.set_title(spec.title)
    return _save(fig, spec)


def _render_sweep(spec: PlotSpec):
    if not spec.sweep:
        raise SchemaError("sweep-diagram needs a 'sweep' input")
    data = _read_csv(spec.sweep, ("eps", "q", "x0", "y0", "residue", "class", "event"))
    fig, ax = plt.subplots(figsize=(7.5, 5.0))
    plt.rcParams["svg.hashsalt"] = "plotkit"
    classes = data["class"] if data["class"].dtype == object else np.array(["?"] * len(data["eps"]))
    for cls in sorted(set(classes.tolist())):
        mask = classes == cls
        ax.plot(data["eps"][mask], data["x0"][mask], ".", ms=2.5,
                color=_CLASS_COLORS.get(cls, "black"), label=cls)
    if spec.events:
        with open(spec.events) as fh:
            for ev in json.load(fh):
                if "eps" not in ev or "kind" not in ev:
                    raise SchemaError(f"{spec.events}: events need 'eps' and 'kind'")
                if ev["kind"] == "pitchfork":
                    ax.axvline(ev["eps"], color="gray", ls="--", lw=0.8)
    if len(data["eps"]):
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("eps")
    ax.set_ylabel("x0")
    if spec.title:
        ax.set_title(spec.title)
    if spec.axes:
        _axes_ranges(ax, spec, default=(ax.get_xlim(), ax.get_ylim()))
    return _save(fig, spec)


def render(spec) -> Path:
    """Render a PlotSpec (or a spec dict / path to a spec JSON) to its image."""
    if isinstance(spec, (str, Path)):
        spec = load_spec(str(spec))
    elif isinstance(spec, dict):
        spec = PlotSpec.from_dict(spec)
    if spec.kind == "portrait":
        return _render_portrait(spec)
    if spec.kind == "lines-overlay":
        return _render_lines_overlay(spec)
    return _render_sweep(spec)
