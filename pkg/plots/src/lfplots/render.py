"""Drawing routines for the four figure kinds.

All functions are deterministic: fixed styles, no clocks, no randomness, and
PNG output carries a pinned metadata block so two renders of the same inputs
are byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

#: pinned PNG metadata: no library version strings, no timestamps
_PNG_METADATA = {"Software": "lfplots"}

_FOLLOWER_COLOR = "#1f77b4"
_LEADER_COLOR = "#d62728"


class SchemaError(ValueError):
    """Input CSV is missing a required column or has no data rows."""


@dataclass(frozen=True)
class FigureJob:
    kind: str  # heatmap | mass-curves | snapshots | convergence
    csv_paths: tuple
    output: Path
    times: Optional[tuple] = None  # snapshot times (defaults to 4 even frames)


def read_table(path, required: Sequence[str]) -> dict:
    """Load a CSV into named float columns, checking the required names."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        for name in required:
            if name not in header:
                raise SchemaError(f"{path}: missing column {name!r}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    return {name: data[:, header.index(name)] for name in required}


def _save(fig, output):
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, metadata=_PNG_METADATA)
    plt.close(fig)


def render_heatmap(densities_csv, output):
    """Total density over the space-time domain (one panel)."""
    cols = read_table(densities_csv, ["t", "x", "nu"])
    times = np.unique(cols["t"])
    xs = np.unique(cols["x"])
    grid = np.full((times.size, xs.size), np.nan)
    t_idx = np.searchsorted(times, cols["t"])
    x_idx = np.searchsorted(xs, cols["x"])
    grid[t_idx, x_idx] = cols["nu"]
    fig, ax = plt.subplots(figsize=(5.0, 4.0), dpi=120)
    mesh = ax.pcolormesh(xs, times, grid, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="total density")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    _save(fig, output)


def render_mass_curves(diagnostics_csv, output):
    """Follower and leader mass trajectories."""
    cols = read_table(diagnostics_csv, ["t", "massF", "massL"])
    fig, ax = plt.subplots(figsize=(5.0, 4.0), dpi=120)
    ax.plot(cols["t"], cols["massF"], color=_FOLLOWER_COLOR, label="followers")
    ax.plot(cols["t"], cols["massL"], color=_LEADER_COLOR, label="leaders")
    ax.set_xlabel("t")
    ax.set_ylabel("mass")
    ax.set_ylim(bottom=0.0)
    ax.legend(loc="center right")
    _save(fig, output)


def _snapshot_times(all_times: np.ndarray, requested) -> np.ndarray:
    if requested is not None:
        picks = []
        for t in requested:
            picks.append(all_times[np.argmin(np.abs(all_times - t))])
        return np.array(picks)
    idx = np.linspace(0, all_times.size - 1, 4).round().astype(int)
    return all_times[idx]


def render_snapshots(densities_csv, output, times=None):
    """Follower and leader density profiles at a few frames, one panel each."""
    cols = read_table(densities_csv, ["t", "x", "muF", "muL"])
    all_times = np.unique(cols["t"])
    picks = _snapshot_times(all_times, times)
    fig, axes = plt.subplots(
        1, picks.size, figsize=(2.8 * picks.size, 3.2), dpi=120, sharey=True
    )
    axes = np.atleast_1d(axes)
    for ax, t in zip(axes, picks):
        sel = cols["t"] == t
        order = np.argsort(cols["x"][sel])
        xs = cols["x"][sel][order]
        ax.plot(xs, cols["muF"][sel][order], color=_FOLLOWER_COLOR, label="followers")
        ax.plot(xs, cols["muL"][sel][order], color=_LEADER_COLOR, label="leaders")
        ax.set_title(f"t = {t:g}")
        ax.set_xlabel("x")
    axes[0].set_ylabel("density")
    axes[0].legend(loc="upper left", fontsize="small")
    fig.tight_layout()
    _save(fig, output)


def render_convergence(aggregate_csv, output):
    """Mean error vs particle count on log-log axes, with the reference bound."""
    cols = read_table(aggregate_csv, ["N", "mean", "stderr", "theta_ref"])
    order = np.argsort(cols["N"])
    n = cols["N"][order]
    fig, ax = plt.subplots(figsize=(5.0, 4.0), dpi=120)
    ax.errorbar(
        n,
        cols["mean"][order],
        yerr=cols["stderr"][order],
        fmt="o-",
        color=_FOLLOWER_COLOR,
        capsize=3,
        label="mean W1 error",
    )
    ax.plot(
        n,
        cols["theta_ref"][order],
        "--",
        color="gray",
        label="reference bound (uncalibrated)",
    )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("error")
    ax.legend()
    _save(fig, output)


_RENDERERS = {
    "heatmap": render_heatmap,
    "mass-curves": render_mass_curves,
    "snapshots": render_snapshots,
    "convergence": render_convergence,
}

KINDS = tuple(sorted(_RENDERERS))


def render(job: FigureJob):
    """Dispatch a figure job to its renderer."""
    if job.kind not in _RENDERERS:
        raise SchemaError(f"unknown figure kind {job.kind!r}; valid: {', '.join(KINDS)}")
    if len(job.csv_paths) != 1:
        raise SchemaError(f"{job.kind} takes exactly one CSV input")
    if job.kind == "snapshots":
        render_snapshots(job.csv_paths[0], job.output, job.times)
    else:
        _RENDERERS[job.kind](job.csv_paths[0], job.output)
