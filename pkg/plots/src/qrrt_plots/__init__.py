"""Offline figure rendering for planner CSV artifacts."""

from .curves import build_figure as build_curves_figure
from .curves import render as render_curves
from .terrain import build_figure as build_terrain_figure
from .terrain import render as render_terrain

__all__ = [
    "build_curves_figure",
    "build_terrain_figure",
    "render_curves",
    "render_terrain",
]
