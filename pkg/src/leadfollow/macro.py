"""Deterministic solvers for the macroscopic leader-follower dynamics.

Three equivalent discretizations of the same system:

* ``fv_solve``                -- first-order finite-volume scheme for the
  coupled (muF, muL) densities: upwind transport with zero-flux boundaries,
  then the reaction half-step
      muF <- muF* - dt (aF muF* - aL muL*),
      muL <- muL* + dt (aF muF* - aL muL*),
  with rates evaluated at the post-transport state.  Total mass is conserved
  exactly (telescoping fluxes, antisymmetric sources).

* ``euler_pushforward_solve`` -- the atomic explicit-Euler scheme: reweight
  atoms by the reaction terms, then push every atom one Euler step of the
  velocity field frozen at the pre-step state.  Both populations live on one
  shared position set, so the reaction exchanges weights without growing the
  atom count.

* ``nu_sigma_solve``          -- the total-distribution form: an explicit
  Euler step of the label ODE  sigma' = A(nu, sigma) sigma  followed by upwind
  transport of nu with the freshly updated sigma weighting the velocity.
  sigma(F) + sigma(L) = 1 is enforced exactly at every step.

``equivalence_check`` quantifies the defect of the bijection
mu_i = sigma(i) nu between the first and third discretizations, in the flat
metric, for proportional initial data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import (
    CflViolation,
    FrameMissing,
    H1Violation,
    NegativeWeight,
    PositivityLoss,
)
from .initial import InitialCondition, initial_grids
from .kernels import KernelSpec, SteeringDrift, convolve, coupled_velocity
from .measures import (
    DiscreteMeasure,
    GridMeasure,
    LabelDist,
    flat_distance,
    grid_to_discrete,
)
from .rates import (
    RateSpec,
    TargetVarianceSigmoid,
    eval_rates,
    rate_bound,
    target_variance,
    transition_matrix,
    variance,
)

#: cells count as occupied (and constrain the CFL check) above this fraction
#: of the peak density
OCCUPANCY_FLOOR = 1e-12

#: per-cell negativity tolerance of the positivity check
POSITIVITY_TOL = -1e-12


@dataclass(frozen=True)
class MacroConfig:
    """Discretization plus physics for one macroscopic run."""

    x_min: float
    x_max: float
    n_cells: int
    dt: float
    t_final: float
    kernel_F: KernelSpec
    kernel_L: KernelSpec
    rate_F: RateSpec
    rate_L: RateSpec
    initial: InitialCondition
    cfl_limit: float = 0.9
    record_every: Optional[int] = None

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("n_cells must be positive")
        if self.dt <= 0 or self.t_final <= 0:
            raise ValueError("dt and t_final must be positive")
        if not 0 < self.cfl_limit <= 1.0:
            raise ValueError("cfl_limit must lie in (0, 1]")
        m_alpha = max(rate_bound(self.rate_F), rate_bound(self.rate_L))
        if self.dt * m_alpha >= 1.0:
            raise ValueError(
                f"dt * M_alpha = {self.dt * m_alpha} >= 1 breaks positivity"
            )

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def n_steps(self) -> int:
        return max(1, round(self.t_final / self.dt))

    def resolved_record_every(self, n_steps: Optional[int] = None) -> int:
        if self.record_every is not None:
            return self.record_every
        steps = self.n_steps if n_steps is None else n_steps
        return max(1, math.ceil(steps / 400))

    def initial_populations(self) -> Tuple[GridMeasure, GridMeasure]:
        return initial_grids(self.initial, self.x_min, self.x_max, self.n_cells)


@dataclass(frozen=True)
class GridState:
    t: float
    muF: GridMeasure
    muL: GridMeasure

    @property
    def nu(self) -> GridMeasure:
        return GridMeasure(
            self.muF.x_min, self.muF.x_max, self.muF.cell_avg + self.muL.cell_avg
        )


@dataclass(frozen=True)
class AtomicState:
    """Shared-position atomic state: populations exchange weight in place."""

    t: float
    positions: np.ndarray  # (n, 1)
    wF: np.ndarray
    wL: np.ndarray

    @property
    def muF(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.positions, self.wF)

    @property
    def muL(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.positions, self.wL)


@dataclass(frozen=True)
class NuSigmaState:
    t: float
    nu: GridMeasure
    sigma: LabelDist


@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    mass_F: float
    mass_L: float
    variance_F: float
    variance_L: float
    target_variance: float
    alpha_F: float
    alpha_L: float
    cluster_count: int


@dataclass(frozen=True)
class Frame:
    t: float
    muF: Union[GridMeasure, DiscreteMeasure]
    muL: Union[GridMeasure, DiscreteMeasure]
    sigma: LabelDist
    diagnostics: DiagnosticsRow


@dataclass
class TimeSeries:
    scheme: str
    frames: List[Frame]

    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.frames])

    def frame_at(self, t: float, tol: float) -> Frame:
        times = self.times()
        idx = int(np.argmin(np.abs(times - t)))
        if abs(times[idx] - t) > tol:
            raise FrameMissing(f"no frame within {tol} of t={t}")
        return self.frames[idx]


def _steering_target(cfg: MacroConfig) -> float:
    for spec in (cfg.rate_F, cfg.rate_L):
        if isinstance(spec, TargetVarianceSigmoid):
            return spec.x_hat
    if isinstance(cfg.kernel_L, SteeringDrift):
        return cfg.kernel_L.x_hat
    return math.nan


def _diagnostics(
    cfg: MacroConfig, t: float, muF, muL, nu_grid: GridMeasure
) -> DiagnosticsRow:
    aF, aL = eval_rates(cfg.rate_F, cfg.rate_L, muF, muL)
    x_hat = _steering_target(cfg)
    return DiagnosticsRow(
        t=t,
        mass_F=muF.mass,
        mass_L=muL.mass,
        variance_F=variance(muF),
        variance_L=variance(muL),
        target_variance=(
            target_variance(muF, x_hat) if not math.isnan(x_hat) else math.nan
        ),
        alpha_F=aF,
        alpha_L=aL,
        cluster_count=cluster_count(nu_grid, 0.1),
    )


# ---------------------------------------------------------------------------
# finite-volume scheme for the coupled (muF, muL) system
# ---------------------------------------------------------------------------
def _coupled_interface_velocity(cfg: MacroConfig, muF, muL, points) -> np.ndarray:
    """K^F * muF + K^L * muL at the given points (steering enters mass-weighted)."""
    return convolve(cfg.kernel_F, muF, points) + convolve(cfg.kernel_L, muL, points)


def _check_cfl(cfg: MacroConfig, v_if: np.ndarray, occupied: np.ndarray, t: float):
    """Positivity-grade CFL: per-cell outflow Courant number on occupied cells.

    Interfaces draining effectively empty cells (below OCCUPANCY_FLOOR of the
    peak) do not constrain the step.
    """
    lam = cfg.dt / cfg.dx
    out_right = np.maximum(v_if[1:], 0.0)  # outflow through the right face
    out_left = np.maximum(-v_if[:-1], 0.0)  # outflow through the left face
    courant = lam * (out_right + out_left)
    worst = float(courant[occupied].max(initial=0.0))
    if worst > cfg.cfl_limit:
        raise CflViolation(
            f"Courant number {worst:.4f} exceeds limit {cfg.cfl_limit} at t={t:.6f}"
        )


def _upwind_step(avg: np.ndarray, v_if: np.ndarray, lam: float) -> np.ndarray:
    """One conservative upwind transport step with zero-flux boundaries."""
    interior_v = v_if[1:-1]
    upw = np.where(interior_v < 0.0, avg[1:], avg[:-1])
    flux = np.zeros(avg.size + 1)
    flux[1:-1] = interior_v * upw
    return avg - lam * np.diff(flux)


def _check_positive(cell_avg: np.ndarray, t: float, label: str):
    low = float(cell_avg.min(initial=0.0))
    if low < POSITIVITY_TOL:
        raise PositivityLoss(f"{label} reached {low} at t={t:.6f}")


def fv_step(state: GridState, cfg: MacroConfig) -> GridState:
    """One transport + reaction splitting step of the finite-volume scheme."""
    muF, muL = state.muF, state.muL
    lam = cfg.dt / cfg.dx
    edges = muF.cell_edges()
    v_if = _coupled_interface_velocity(cfg, muF, muL, edges)
    total = muF.cell_avg + muL.cell_avg
    occupied = total > OCCUPANCY_FLOOR * float(total.max(initial=0.0))
    _check_cfl(cfg, v_if, occupied, state.t)

    starF = _upwind_step(muF.cell_avg, v_if, lam)
    starL = _upwind_step(muL.cell_avg, v_if, lam)

    # rates are evaluated at the post-transport state
    gridF = GridMeasure(cfg.x_min, cfg.x_max, starF)
    gridL = GridMeasure(cfg.x_min, cfg.x_max, starL)
    aF, aL = eval_rates(cfg.rate_F, cfg.rate_L, gridF, gridL)
    exchange = cfg.dt * (aF * starF - aL * starL)
    newF = starF - exchange
    newL = starL + exchange

    t = state.t + cfg.dt
    _check_positive(starF, t, "post-transport follower density")
    _check_positive(starL, t, "post-transport leader density")
    _check_positive(newF, t, "follower density")
    _check_positive(newL, t, "leader density")
    return GridState(
        t=t,
        muF=GridMeasure(cfg.x_min, cfg.x_max, newF),
        muL=GridMeasure(cfg.x_min, cfg.x_max, newL),
    )


def _grid_frame(cfg: MacroConfig, state: GridState) -> Frame:
    nu = state.nu
    sigma = LabelDist.from_masses(state.muF.mass, state.muL.mass)
    return Frame(
        t=state.t,
        muF=state.muF,
        muL=state.muL,
        sigma=sigma,
        diagnostics=_diagnostics(cfg, state.t, state.muF, state.muL, nu),
    )


def fv_solve(cfg: MacroConfig, record_every: Optional[int] = None) -> TimeSeries:
    """Run the finite-volume scheme to t_final, recording every few steps."""
    muF0, muL0 = cfg.initial_populations()
    state = GridState(0.0, muF0, muL0)
    cadence = record_every or cfg.resolved_record_every()
    frames = [_grid_frame(cfg, state)]
    for step in range(1, cfg.n_steps + 1):
        state = fv_step(state, cfg)
        if step % cadence == 0 or step == cfg.n_steps:
            frames.append(_grid_frame(cfg, state))
    return TimeSeries("fv", frames)


# ---------------------------------------------------------------------------
# atomic explicit-Euler push-forward scheme
# ---------------------------------------------------------------------------
def euler_pushforward_step(state: AtomicState, dt_sub: float, cfg: MacroConfig) -> AtomicState:
    """Reaction reweighting followed by one Euler flow step of the frozen field.

    The follower atoms keep weight (1 - dt aF) and gain the leader atoms'
    weight scaled by dt aL, and symmetrically; the velocity is evaluated at
    the pre-step state and applied to the shared position set.
    """
    muF, muL = state.muF, state.muL
    aF, aL = eval_rates(cfg.rate_F, cfg.rate_L, muF, muL)
    if dt_sub * max(aF, aL) >= 1.0:
        raise NegativeWeight(
            f"dt * alpha = {dt_sub * max(aF, aL)} >= 1 at t={state.t:.6f}"
        )
    wF = (1.0 - dt_sub * aF) * state.wF + dt_sub * aL * state.wL
    wL = dt_sub * aF * state.wF + (1.0 - dt_sub * aL) * state.wL

    v = _coupled_interface_velocity(cfg, muF, muL, state.positions)
    return AtomicState(
        t=state.t + dt_sub,
        positions=state.positions + dt_sub * v,
        wF=wF,
        wL=wL,
    )


def rasterize(atoms_pos: np.ndarray, weights: np.ndarray, cfg: MacroConfig) -> GridMeasure:
    """Bin atomic mass onto the config grid as cell averages (for diagnostics)."""
    idx = np.floor((atoms_pos[:, 0] - cfg.x_min) / cfg.dx).astype(int)
    idx = np.clip(idx, 0, cfg.n_cells - 1)
    avg = np.bincount(idx, weights=weights, minlength=cfg.n_cells) / cfg.dx
    return GridMeasure(cfg.x_min, cfg.x_max, avg)


def _atomic_frame(cfg: MacroConfig, state: AtomicState) -> Frame:
    muF, muL = state.muF, state.muL
    nu_grid = rasterize(state.positions, state.wF + state.wL, cfg)
    sigma = LabelDist.from_masses(muF.mass, muL.mass)
    return Frame(
        t=state.t,
        muF=muF,
        muL=muL,
        sigma=sigma,
        diagnostics=_diagnostics(cfg, state.t, muF, muL, nu_grid),
    )


def euler_pushforward_solve(
    cfg: MacroConfig, k: int, record_every: Optional[int] = None
) -> TimeSeries:
    """Run the atomic scheme with dt = t_final / 2^k from grid-sampled atoms."""
    m_alpha = max(rate_bound(cfg.rate_F), rate_bound(cfg.rate_L))
    dt_sub = cfg.t_final / 2**k
    if dt_sub * m_alpha >= 1.0:
        raise ValueError("refinement too coarse: dt * M_alpha >= 1")
    muF0, muL0 = cfg.initial_populations()
    centers = muF0.cell_centers()[:, None]
    wF = muF0.dx * muF0.cell_avg
    wL = muL0.dx * muL0.cell_avg
    keep = (wF > 0.0) | (wL > 0.0)
    state = AtomicState(0.0, centers[keep], wF[keep], wL[keep])

    n_steps = 2**k
    cadence = record_every or cfg.resolved_record_every(n_steps)
    frames = [_atomic_frame(cfg, state)]
    for step in range(1, n_steps + 1):
        state = euler_pushforward_step(state, dt_sub, cfg)
        if step % cadence == 0 or step == n_steps:
            frames.append(_atomic_frame(cfg, state))
    return TimeSeries("euler", frames)


# ---------------------------------------------------------------------------
# total-distribution (nu, sigma) scheme
# ---------------------------------------------------------------------------
def reconstruct_populations(
    nu: GridMeasure, sigma: LabelDist
) -> Tuple[GridMeasure, GridMeasure]:
    """Populations muF = sigma(F) nu and muL = sigma(L) nu; their sum is nu."""
    return nu.scaled(sigma.p_F), nu.scaled(sigma.p_L)


def nu_sigma_step(state: NuSigmaState, cfg: MacroConfig) -> NuSigmaState:
    """One label-ODE Euler step, then upwind transport with the fresh sigma."""
    nu, sigma = state.nu, state.sigma
    muF, muL = reconstruct_populations(nu, sigma)
    aF, aL = eval_rates(cfg.rate_F, cfg.rate_L, muF, muL)
    gen = transition_matrix(aF, aL)
    pF = sigma.p_F + cfg.dt * float(gen[0] @ sigma.as_array())
    # the generator's columns sum to zero; pin the complement so the pair
    # stays exactly normalized in floating point
    sigma_new = LabelDist(pF, 1.0 - pF)

    lam = cfg.dt / cfg.dx
    edges = nu.cell_edges()
    v_if = coupled_velocity(cfg.kernel_F, cfg.kernel_L, nu, sigma_new, edges)
    occupied = nu.cell_avg > OCCUPANCY_FLOOR * float(nu.cell_avg.max(initial=0.0))
    _check_cfl(cfg, v_if, occupied, state.t)
    new_avg = _upwind_step(nu.cell_avg, v_if, lam)
    t = state.t + cfg.dt
    _check_positive(new_avg, t, "total density")
    return NuSigmaState(t, GridMeasure(cfg.x_min, cfg.x_max, new_avg), sigma_new)


def _nu_sigma_frame(cfg: MacroConfig, state: NuSigmaState) -> Frame:
    muF, muL = reconstruct_populations(state.nu, state.sigma)
    return Frame(
        t=state.t,
        muF=muF,
        muL=muL,
        sigma=state.sigma,
        diagnostics=_diagnostics(cfg, state.t, muF, muL, state.nu),
    )


def nu_sigma_solve(cfg: MacroConfig, record_every: Optional[int] = None) -> TimeSeries:
    """Run the (nu, sigma) scheme to t_final."""
    muF0, muL0 = cfg.initial_populations()
    nu0 = GridMeasure(cfg.x_min, cfg.x_max, muF0.cell_avg + muL0.cell_avg)
    sigma0 = LabelDist.from_masses(muF0.mass, muL0.mass)
    state = NuSigmaState(0.0, nu0, sigma0)
    cadence = record_every or cfg.resolved_record_every()
    frames = [_nu_sigma_frame(cfg, state)]
    for step in range(1, cfg.n_steps + 1):
        state = nu_sigma_step(state, cfg)
        if step % cadence == 0 or step == cfg.n_steps:
            frames.append(_nu_sigma_frame(cfg, state))
    return TimeSeries("nu-sigma", frames)


# ---------------------------------------------------------------------------
# equivalence of the coupled and total-distribution forms
# ---------------------------------------------------------------------------
def check_proportional_initial(cfg: MacroConfig, tol: float = 1e-10):
    """Raise H1Violation unless muF_0 and muL_0 are proportional within tol."""
    muF0, muL0 = cfg.initial_populations()
    total = muF0.cell_avg + muL0.cell_avg
    total_mass = muF0.mass + muL0.mass
    if total_mass <= 0:
        raise H1Violation("empty initial data")
    sigmaF = muF0.mass / total_mass
    defect = np.abs(muF0.cell_avg - sigmaF * total)
    scale = max(float(total.max()), 1.0)
    if float(defect.max()) > tol * scale:
        raise H1Violation(
            f"initial populations not proportional: defect {defect.max():.3e}"
        )


def equivalence_check(cfg: MacroConfig, record_every: Optional[int] = None) -> float:
    """Max over recorded frames of the flat-distance gap between the coupled
    finite-volume run and the reconstructed populations of the (nu, sigma) run.

    Requires proportional initial data; both solvers share the grid, the time
    step and the recording cadence, so the gap isolates the discretization
    defect of the bijection mu_i = sigma(i) nu.
    """
    check_proportional_initial(cfg)
    cadence = record_every or cfg.resolved_record_every()
    fv = fv_solve(cfg, record_every=cadence)
    ns = nu_sigma_solve(cfg, record_every=cadence)
    if len(fv.frames) != len(ns.frames):  # pragma: no cover - same cadence
        raise RuntimeError("recording cadence mismatch")
    gap = 0.0
    for f_fv, f_ns in zip(fv.frames, ns.frames):
        gap = max(
            gap,
            flat_distance(grid_to_discrete(f_fv.muF), grid_to_discrete(f_ns.muF))
            + flat_distance(grid_to_discrete(f_fv.muL), grid_to_discrete(f_ns.muL)),
        )
    return gap


def cluster_count(g: GridMeasure, rel_threshold: float = 0.1) -> int:
    """Number of strict local maxima above rel_threshold * peak.

    Plateau runs count once; a plateau touching the domain boundary counts if
    it exceeds its single inner neighbor.
    """
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must lie in (0, 1)")
    avg = g.cell_avg
    peak = float(avg.max(initial=0.0))
    if peak <= 0.0:
        return 0
    cutoff = rel_threshold * peak
    count = 0
    i = 0
    n = avg.size
    while i < n:
        j = i
        while j + 1 < n and avg[j + 1] == avg[i]:
            j += 1
        left_lower = i == 0 or avg[i - 1] < avg[i]
        right_lower = j == n - 1 or avg[j + 1] < avg[i]
        if left_lower and right_lower and avg[i] > cutoff:
            count += 1
        i = j + 1
    return count
