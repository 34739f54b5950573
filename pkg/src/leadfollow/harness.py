"""Mean-field convergence studies: particle runs against an over-resolved
macroscopic reference, error aggregation, and log-log decay-rate fits."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import ConfigMismatch
from .macro import MacroConfig, TimeSeries, nu_sigma_solve
from .measures import (
    GridMeasure,
    grid_to_discrete,
    label_w1,
    w1_distance_1d,
)
from .micro import MicroConfig, MicroSeries, simulate


def theta_bound(N: int, K1: float = 1.0, K2: float = 1.0, d: int = 1) -> float:
    """Reference decay bound for the expected empirical-measure error,

        K1 (N^(-1/2) + N^(-2/3)) + K2^(1/(2d)) (N^(-1/(4d)) + N^(-1/(3d))).

    K1 and K2 are report-only constants (not calibrated); defaults 1.0.
    """
    if N < 1 or d < 1:
        raise ValueError("need N >= 1 and d >= 1")
    if K1 <= 0 or K2 <= 0:
        raise ValueError("constants must be positive")
    label_part = K1 * (N ** (-0.5) + N ** (-2.0 / 3.0))
    space_part = K2 ** (1.0 / (2.0 * d)) * (
        N ** (-1.0 / (4.0 * d)) + N ** (-1.0 / (3.0 * d))
    )
    return label_part + space_part


def _series_tol(times: np.ndarray) -> float:
    if times.size < 2:
        return np.inf
    return float(np.median(np.diff(times))) / 2.0


def micro_macro_gap(
    micro_series: MicroSeries, macro_series: TimeSeries, t: float
) -> Tuple[float, float]:
    """(w1_space, w1_label) between the nearest frames of the two series at t.

    Frames match within half their own recording spacing; the macroscopic
    grid is converted to atoms at cell centers.
    """
    mf = micro_series.frame_at(t, _series_tol(micro_series.times()))
    gf = macro_series.frame_at(t, _series_tol(macro_series.times()))
    nu_grid = GridMeasure(
        gf.muF.x_min, gf.muF.x_max, gf.muF.cell_avg + gf.muL.cell_avg
    )
    w1_space = w1_distance_1d(mf.nu, grid_to_discrete(nu_grid))
    w1_label = label_w1(mf.sigma, gf.sigma)
    return w1_space, w1_label


@dataclass(frozen=True)
class ErrorRow:
    N: int
    seed: int
    t: float
    w1_space: float
    w1_label: float


@dataclass(frozen=True)
class AggregateRow:
    N: int
    t: float
    mean_error: float
    stderr: float
    theta_ref: float


@dataclass
class ConvergenceReport:
    rows: List[ErrorRow]
    aggregates: List[AggregateRow]
    #: per checkpoint: (slope, ci_low, ci_high) of log mean-error vs log N
    slopes: Dict[float, Tuple[float, float, float]]
    Ns: Tuple[int, ...]
    seeds: Tuple[int, ...]
    sampling: str

    def aggregate(self, N: int, t: float) -> AggregateRow:
        for row in self.aggregates:
            if row.N == N and row.t == t:
                return row
        raise KeyError((N, t))


def _fit_slope(log_n: np.ndarray, log_err: np.ndarray) -> float:
    a = np.vstack([log_n, np.ones_like(log_n)]).T
    coef, *_ = np.linalg.lstsq(a, log_err, rcond=None)
    return float(coef[0])


def _slope_with_jackknife(
    errors: np.ndarray, Ns: Sequence[int]
) -> Tuple[float, float, float]:
    """OLS slope of log mean-error vs log N with a leave-one-seed-out CI.

    ``errors`` has shape (n_N, n_seeds).
    """
    log_n = np.log(np.asarray(Ns, dtype=float))
    slope = _fit_slope(log_n, np.log(errors.mean(axis=1)))
    n_seeds = errors.shape[1]
    if n_seeds < 2:
        return slope, slope, slope
    left_out = np.array(
        [
            _fit_slope(
                log_n,
                np.log(np.delete(errors, i, axis=1).mean(axis=1)),
            )
            for i in range(n_seeds)
        ]
    )
    se = np.sqrt((n_seeds - 1) / n_seeds * ((left_out - left_out.mean()) ** 2).sum())
    return slope, slope - 2.0 * se, slope + 2.0 * se


def _match_physics(macro_cfg: MacroConfig, micro_cfg: MicroConfig):
    pairs = [
        ("kernel_F", macro_cfg.kernel_F, micro_cfg.kernel_F),
        ("kernel_L", macro_cfg.kernel_L, micro_cfg.kernel_L),
        ("rate_F", macro_cfg.rate_F, micro_cfg.rate_F),
        ("rate_L", macro_cfg.rate_L, micro_cfg.rate_L),
        ("initial", macro_cfg.initial, micro_cfg.initial),
        ("x_min", macro_cfg.x_min, micro_cfg.x_min),
        ("x_max", macro_cfg.x_max, micro_cfg.x_max),
    ]
    for name, a, b in pairs:
        if a != b:
            raise ConfigMismatch(f"macro and micro disagree on {name}: {a} != {b}")


def _one_micro_error(args) -> Tuple[int, int, List[Tuple[float, float, float]]]:
    micro_cfg, N, seed, checkpoints, ref_frames = args
    series = simulate(replace(micro_cfg, n_particles=N, seed=seed))
    out = []
    for t in checkpoints:
        w1s, w1l = micro_macro_gap(series, ref_frames, t)
        out.append((t, w1s, w1l))
    return N, seed, out


#: reference over-resolution factors (grid and time step)
REFERENCE_REFINEMENT = 4


def reference_solution(macro_cfg: MacroConfig) -> TimeSeries:
    """Stand-in for the exact mean-field solution: the total-distribution
    scheme at 4x the grid resolution and 4x finer time step, recorded on the
    original step grid."""
    ref_cfg = replace(
        macro_cfg,
        n_cells=REFERENCE_REFINEMENT * macro_cfg.n_cells,
        dt=macro_cfg.dt / REFERENCE_REFINEMENT,
        record_every=REFERENCE_REFINEMENT,
    )
    return nu_sigma_solve(ref_cfg)


def convergence_study(
    macro_cfg: MacroConfig,
    micro_cfg_template: MicroConfig,
    Ns: Sequence[int],
    seeds: Sequence[int],
    checkpoints: Sequence[float],
    threads: int = 1,
) -> ConvergenceReport:
    """Quantify W1(nu^N, nu) + W1(sigma^N, sigma) across N and seeds.

    For every (N, seed) the particle system runs once; errors against the
    over-resolved reference are recorded at each checkpoint, aggregated into
    means and standard errors per N, and the decay rate is fitted by least
    squares on (log N, log mean-error) with a jackknife CI over seeds.
    """
    _match_physics(macro_cfg, micro_cfg_template)
    if any(t > macro_cfg.t_final + 1e-9 for t in checkpoints):
        raise ConfigMismatch("checkpoint beyond t_final")
    ref = reference_solution(macro_cfg)

    micro_cfg = replace(micro_cfg_template, record_every=1)
    jobs = [
        (micro_cfg, N, seed, tuple(checkpoints), ref)
        for N in Ns
        for seed in seeds
    ]
    if threads <= 1 or len(jobs) == 1:
        results = [_one_micro_error(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_one_micro_error, jobs))

    by_key = {(N, seed): vals for N, seed, vals in results}
    rows: List[ErrorRow] = []
    for N in Ns:
        for seed in seeds:
            for t, w1s, w1l in by_key[(N, seed)]:
                rows.append(ErrorRow(N, seed, t, w1s, w1l))

    aggregates: List[AggregateRow] = []
    slopes: Dict[float, Tuple[float, float, float]] = {}
    n_seeds = len(seeds)
    for t in checkpoints:
        errs = np.array(
            [
                [
                    next(
                        r.w1_space + r.w1_label
                        for r in rows
                        if r.N == N and r.seed == seed and r.t == t
                    )
                    for seed in seeds
                ]
                for N in Ns
            ]
        )
        for i, N in enumerate(Ns):
            aggregates.append(
                AggregateRow(
                    N=N,
                    t=t,
                    mean_error=float(errs[i].mean()),
                    stderr=float(errs[i].std(ddof=1) / np.sqrt(n_seeds))
                    if n_seeds > 1
                    else 0.0,
                    theta_ref=theta_bound(N),
                )
            )
        if len(Ns) >= 2:
            slopes[t] = _slope_with_jackknife(errs, Ns)
    return ConvergenceReport(
        rows=rows,
        aggregates=aggregates,
        slopes=slopes,
        Ns=tuple(Ns),
        seeds=tuple(seeds),
        sampling=micro_cfg_template.sampling,
    )
