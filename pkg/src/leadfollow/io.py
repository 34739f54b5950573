"""CSV and JSON emission for solver outputs.

Schemas (exact column order, header row first):

* densities.csv       -- t, cell_index, x, muF, muL, nu
* diagnostics.csv     -- t, massF, massL, varianceF, varianceL,
                         target_variance, alphaF, alphaL, cluster_count
* micro.csv           -- t, seed, N, sigmaF [, w1_to_macro]
* particles.csv       -- t, i, x, label            (optional dump)
* convergence_raw.csv -- N, seed, t, w1_space, w1_label
* convergence_agg.csv -- N, mean, stderr, theta_ref

Floats are written with 17 significant digits, which round-trips doubles
exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Optional

from .harness import ConvergenceReport
from .macro import TimeSeries
from .micro import MicroSeries


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_rows(path: Path, header: Iterable[str], rows: Iterable[Iterable]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_densities_csv(path: Path, series: TimeSeries):
    """Per-frame, per-cell densities of a grid-based series."""

    def rows():
        for frame in series.frames:
            centers = frame.muF.cell_centers()
            nu = frame.muF.cell_avg + frame.muL.cell_avg
            for idx, x in enumerate(centers):
                yield (
                    frame.t,
                    idx,
                    float(x),
                    float(frame.muF.cell_avg[idx]),
                    float(frame.muL.cell_avg[idx]),
                    float(nu[idx]),
                )

    _write_rows(path, ["t", "cell_index", "x", "muF", "muL", "nu"], rows())


def write_diagnostics_csv(path: Path, series: TimeSeries):
    def rows():
        for frame in series.frames:
            d = frame.diagnostics
            yield (
                d.t,
                d.mass_F,
                d.mass_L,
                d.variance_F,
                d.variance_L,
                d.target_variance,
                d.alpha_F,
                d.alpha_L,
                d.cluster_count,
            )

    _write_rows(
        path,
        [
            "t",
            "massF",
            "massL",
            "varianceF",
            "varianceL",
            "target_variance",
            "alphaF",
            "alphaL",
            "cluster_count",
        ],
        rows(),
    )


def write_micro_csv(
    path: Path, series: MicroSeries, w1_to_macro: Optional[dict] = None
):
    """Summary trace of one particle run; w1_to_macro maps t -> distance."""
    header = ["t", "seed", "N", "sigmaF"]
    if w1_to_macro is not None:
        header.append("w1_to_macro")

    def rows():
        for frame in series.frames:
            row = [frame.t, series.seed, series.n_particles, frame.sigma.p_F]
            if w1_to_macro is not None:
                row.append(w1_to_macro.get(frame.t, math.nan))
            yield row

    _write_rows(path, header, rows())


def write_particles_csv(path: Path, series: MicroSeries):
    """Full per-frame particle dump (positions and labels)."""
    names = {0: "F", 1: "L"}

    def rows():
        for frame in series.frames:
            pos = frame.nu.positions
            for i in range(pos.shape[0]):
                yield (frame.t, i, float(pos[i, 0]), names[int(frame.labels[i])])

    _write_rows(path, ["t", "i", "x", "label"], rows())


def write_convergence_csvs(raw_path: Path, agg_path: Path, report: ConvergenceReport):
    _write_rows(
        raw_path,
        ["N", "seed", "t", "w1_space", "w1_label"],
        ((r.N, r.seed, r.t, r.w1_space, r.w1_label) for r in report.rows),
    )
    _write_rows(
        agg_path,
        ["N", "mean", "stderr", "theta_ref"],
        ((a.N, a.mean_error, a.stderr, a.theta_ref) for a in report.aggregates),
    )


def write_convergence_summary(path: Path, report: ConvergenceReport):
    payload = {
        "Ns": list(report.Ns),
        "n_seeds": len(report.seeds),
        "sampling": report.sampling,
        "slopes": {
            _fmt(t): {"slope": s, "ci_low": lo, "ci_high": hi}
            for t, (s, lo, hi) in report.slopes.items()
        },
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
