"""Figures from iexmaps CLI exports: phase portraits, symmetry-line overlays
and continuation diagrams.  See :func:`plotkit.render`."""

from .render import PlotSpec, SchemaError, load_spec, render

__version__ = "0.1.0"
