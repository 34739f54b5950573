"""N-particle system: interaction ODE for positions, jump process for labels.

Each particle carries a position in R^d and a label in {F, L}.  Positions
follow the empirical velocity field (the same coupled field the macroscopic
solvers use, evaluated against the empirical measure); labels flip with the
global rates through per-step Bernoulli thinning,

    P(flip in [t, t + dt]) = 1 - exp(-alpha dt),

with alpha chosen by the current label.  Velocities and rates are evaluated
from the pre-step state (synchronous update).

Randomness is counter-based (Philox): the per-step uniforms are drawn from a
counter block indexed by the step, one lane per particle, so a trajectory is
a pure function of (config, seed) regardless of scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import FrameMissing
from .initial import InitialCondition, initial_grids
from .kernels import KernelSpec, ZeroKernel, coupled_velocity
from .measures import DiscreteMeasure, LabelDist
from .rates import RateSpec, eval_rates, rate_bound

LABEL_F = 0
LABEL_L = 1


@dataclass(frozen=True)
class MicroConfig:
    """Particle-run configuration; shares the physics vocabulary of MacroConfig."""

    n_particles: int
    dt: float
    t_final: float
    kernel_F: KernelSpec
    kernel_L: KernelSpec
    rate_F: RateSpec
    rate_L: RateSpec
    initial: InitialCondition
    seed: int
    x_min: float = -1.0
    x_max: float = 1.0
    n_cells: int = 80
    sampling: str = "quota"  # "quota" (stratified) or "iid"
    record_every: Optional[int] = None

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if self.sampling not in ("quota", "iid"):
            raise ValueError("sampling must be 'quota' or 'iid'")
        m_alpha = max(rate_bound(self.rate_F), rate_bound(self.rate_L))
        if self.dt * m_alpha >= 1.0:
            raise ValueError("dt * M_alpha >= 1")

    @property
    def n_steps(self) -> int:
        return max(1, round(self.t_final / self.dt))

    def resolved_record_every(self) -> int:
        if self.record_every is not None:
            return self.record_every
        return max(1, math.ceil(self.n_steps / 400))


@dataclass(frozen=True)
class ParticleState:
    positions: np.ndarray  # (N, d)
    labels: np.ndarray  # (N,) int8, LABEL_F or LABEL_L
    t: float

    @property
    def n(self) -> int:
        return self.positions.shape[0]


def empirical(state: ParticleState) -> Tuple[DiscreteMeasure, LabelDist]:
    """Empirical spatial measure (uniform 1/N weights) and label distribution."""
    n = state.n
    nu = DiscreteMeasure(state.positions, np.full(n, 1.0 / n))
    p_F = float(np.count_nonzero(state.labels == LABEL_F)) / n
    return nu, LabelDist(p_F, 1.0 - p_F)


def _philox_keys(seed: int) -> Tuple[np.ndarray, np.ndarray]:
    words = np.random.SeedSequence(seed).generate_state(4, np.uint64)
    return words[:2], words[2:]


def _step_uniforms(step_key: np.ndarray, step: int, n: int) -> np.ndarray:
    """n uniforms from the counter block of the given step (order-independent)."""
    bitgen = np.random.Philox(key=step_key, counter=np.array([0, step, 0, 0], np.uint64))
    return np.random.Generator(bitgen).random(n)


def sample_initial(cfg: MicroConfig) -> ParticleState:
    """Draw (X_0, Y_0) ~ nu_bar x sigma_bar from the grid-projected initial law.

    Positions come from the inverse CDF of the normalized total density;
    "quota" sampling stratifies the CDF levels and pins the label counts at
    round(N sigma(F)), "iid" draws everything independently.  A seeded
    permutation decorrelates stratified positions from labels.
    """
    muF0, muL0 = initial_grids(cfg.initial, cfg.x_min, cfg.x_max, cfg.n_cells)
    total = muF0.cell_avg + muL0.cell_avg
    sigma_F = muF0.mass / (muF0.mass + muL0.mass)
    edges = muF0.cell_edges()
    cdf = np.concatenate([[0.0], np.cumsum(total)])
    cdf /= cdf[-1]

    init_key, _ = _philox_keys(cfg.seed)
    rng = np.random.Generator(np.random.Philox(key=init_key))
    n = cfg.n_particles
    if cfg.sampling == "quota":
        levels = (np.arange(n) + 0.5) / n
        n_F = round(n * sigma_F)
        labels = np.full(n, LABEL_L, dtype=np.int8)
        labels[:n_F] = LABEL_F
        labels = labels[rng.permutation(n)]
    else:
        levels = rng.random(n)
        labels = np.where(rng.random(n) < sigma_F, LABEL_F, LABEL_L).astype(np.int8)
    positions = np.interp(levels, cdf, edges)[:, None]
    return ParticleState(positions=positions, labels=labels, t=0.0)


def particle_step(
    state: ParticleState, dt: float, cfg: MicroConfig, uniforms: np.ndarray
) -> ParticleState:
    """Synchronous explicit-Euler move plus Bernoulli-thinned label flips.

    ``uniforms`` supplies one draw per particle for the flip decision.
    """
    nu, sigma = empirical(state)
    muF = nu.scaled(sigma.p_F)
    muL = nu.scaled(sigma.p_L)
    aF, aL = eval_rates(cfg.rate_F, cfg.rate_L, muF, muL)

    if isinstance(cfg.kernel_F, ZeroKernel) and isinstance(cfg.kernel_L, ZeroKernel):
        new_pos = state.positions
    else:
        v = coupled_velocity(cfg.kernel_F, cfg.kernel_L, nu, sigma, state.positions)
        new_pos = state.positions + dt * v

    p_flip = np.where(
        state.labels == LABEL_F, 1.0 - np.exp(-aF * dt), 1.0 - np.exp(-aL * dt)
    )
    flip = uniforms < p_flip
    new_labels = np.where(flip, 1 - state.labels, state.labels).astype(np.int8)
    return ParticleState(positions=new_pos, labels=new_labels, t=state.t + dt)


@dataclass(frozen=True)
class MicroFrame:
    t: float
    nu: DiscreteMeasure
    sigma: LabelDist
    labels: np.ndarray


@dataclass
class MicroSeries:
    seed: int
    n_particles: int
    frames: List[MicroFrame]

    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.frames])

    def frame_at(self, t: float, tol: float) -> MicroFrame:
        times = self.times()
        idx = int(np.argmin(np.abs(times - t)))
        if abs(times[idx] - t) > tol:
            raise FrameMissing(f"no micro frame within {tol} of t={t}")
        return self.frames[idx]


def simulate(cfg: MicroConfig) -> MicroSeries:
    """Run one trajectory; bitwise deterministic in (cfg, seed)."""
    state = sample_initial(cfg)
    _, step_key = _philox_keys(cfg.seed)
    cadence = cfg.resolved_record_every()

    def snapshot(s: ParticleState) -> MicroFrame:
        nu, sigma = empirical(s)
        return MicroFrame(t=s.t, nu=nu, sigma=sigma, labels=s.labels.copy())

    frames = [snapshot(state)]
    for step in range(1, cfg.n_steps + 1):
        uniforms = _step_uniforms(step_key, step, cfg.n_particles)
        state = particle_step(state, cfg.dt, cfg, uniforms)
        if step % cadence == 0 or step == cfg.n_steps:
            frames.append(snapshot(state))
    return MicroSeries(seed=cfg.seed, n_particles=cfg.n_particles, frames=frames)


def _run_with_seed(args) -> MicroSeries:
    cfg, seed = args
    return simulate(replace(cfg, seed=seed))


def ensemble_run(
    cfg: MicroConfig, seeds: Sequence[int], threads: int = 1
) -> List[MicroSeries]:
    """Independent runs, one per seed; results ordered like the seed list."""
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    jobs = [(cfg, s) for s in seeds]
    if threads <= 1 or len(jobs) == 1:
        return [_run_with_seed(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_with_seed, jobs))
