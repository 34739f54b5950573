"""Figure regeneration from leadfollow CSV outputs.

Reads only the published CSV schemas (densities, diagnostics, convergence
tables) and draws the four figure kinds used by the experiment write-ups:
space-time heatmaps, mass curves, density snapshots, and convergence plots.
Rendering is a pure function of the CSV bytes and the job options.
"""

from .render import (
    FigureJob,
    SchemaError,
    render,
    render_convergence,
    render_heatmap,
    render_mass_curves,
    render_snapshots,
)

__version__ = "0.1.0"
