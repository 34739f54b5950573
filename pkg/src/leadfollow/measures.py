"""Measure representations and the metrics used throughout the package.

Three containers:

* :class:`DiscreteMeasure` -- finite positive atomic measure on R^d,
* :class:`GridMeasure`     -- cell-averaged density on a uniform 1D grid,
* :class:`LabelDist`       -- probability vector on the two-point label set {F, L}.

Two metrics:

* ``w1_distance_1d`` -- classical Wasserstein-1 between equal-mass 1D measures,
  via the closed-form integral of the CDF difference;
* ``flat_distance``  -- the flat (bounded-Lipschitz / generalized Wasserstein
  with unit transport, creation and destruction costs) distance between
  positive measures of possibly different mass.  Transport costs
  min(|x - y|, 2) per unit, unmatched mass costs 1 per unit; moving mass
  farther than 2 is never cheaper than destroying and recreating it, which
  turns the optimization into a finite min-cost-flow LP.

All containers are immutable values; every operation here is pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Union

import numpy as np
from scipy.optimize import linprog

from .errors import DimensionError, MassMismatch, TooLarge

#: absolute tolerance on the equal-mass precondition of w1_distance_1d
MASS_TOL = 1e-12

#: transport cost cap of the flat metric (2 = destroy + create)
FLAT_COST_CAP = 2.0


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite positive atomic measure: positions (n, d) and nonnegative weights (n,).

    Atoms with exactly zero weight are dropped on construction; positions are
    stored at full precision and never snapped.
    """

    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pos = np.array(np.atleast_2d(np.asarray(self.positions, dtype=float)))
        w = np.array(np.asarray(self.weights, dtype=float).ravel())
        if pos.shape[0] != w.shape[0]:
            raise ValueError(
                f"{pos.shape[0]} positions but {w.shape[0]} weights"
            )
        if w.size and w.min() < 0.0:
            raise ValueError(f"negative atom weight {w.min()}")
        keep = w > 0.0
        if not keep.all():
            pos, w = pos[keep], w[keep]
        pos.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_1d(cls, xs, ws) -> "DiscreteMeasure":
        xs = np.asarray(xs, dtype=float).ravel()
        return cls(xs[:, None], ws)

    @classmethod
    def point(cls, x, w: float = 1.0) -> "DiscreteMeasure":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cls(x[None, :], np.array([w]))

    @classmethod
    def empty(cls, dim: int = 1) -> "DiscreteMeasure":
        return cls(np.zeros((0, dim)), np.zeros(0))

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def scaled(self, factor: float) -> "DiscreteMeasure":
        if factor < 0:
            raise ValueError("scale factor must be nonnegative")
        return DiscreteMeasure(self.positions, factor * self.weights)


@dataclass(frozen=True)
class GridMeasure:
    """Cell-averaged nonnegative density on a uniform grid over [x_min, x_max].

    ``cell_avg[l]`` is the average density on cell l, so the mass is
    ``dx * sum(cell_avg)``.
    """

    x_min: float
    x_max: float
    cell_avg: np.ndarray

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        avg = np.ascontiguousarray(np.asarray(self.cell_avg, dtype=float).ravel())
        if avg.size == 0:
            raise ValueError("grid needs at least one cell")
        if not np.isfinite(avg).all():
            raise ValueError("non-finite cell average")
        avg.flags.writeable = False
        object.__setattr__(self, "cell_avg", avg)

    @property
    def n_cells(self) -> int:
        return self.cell_avg.size

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    def cell_centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    def cell_edges(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx

    @property
    def mass(self) -> float:
        return float(self.dx * self.cell_avg.sum())

    def scaled(self, factor: float) -> "GridMeasure":
        return GridMeasure(self.x_min, self.x_max, factor * self.cell_avg)


@dataclass(frozen=True)
class LabelDist:
    """Probability vector (p_F, p_L) on the two-point label set."""

    p_F: float
    p_L: float

    def __post_init__(self):
        if self.p_F < -MASS_TOL or self.p_L < -MASS_TOL:
            raise ValueError("label probabilities must be nonnegative")
        if abs(self.p_F + self.p_L - 1.0) > MASS_TOL:
            raise ValueError(
                f"label distribution not normalized: p_F + p_L = {self.p_F + self.p_L}"
            )

    @classmethod
    def from_masses(cls, mass_F: float, mass_L: float) -> "LabelDist":
        """Normalize a raw nonnegative mass pair into a LabelDist."""
        if mass_F < 0 or mass_L < 0:
            raise ValueError("masses must be nonnegative")
        total = mass_F + mass_L
        if total <= 0:
            raise ValueError("cannot normalize a zero mass pair")
        p = mass_F / total
        return cls(p, 1.0 - p)

    def as_array(self) -> np.ndarray:
        return np.array([self.p_F, self.p_L])


Measure = Union[DiscreteMeasure, GridMeasure]


def mass(m: Measure) -> float:
    """Total mass |m|; zero for the empty measure."""
    return m.mass


def grid_to_discrete(g: GridMeasure) -> DiscreteMeasure:
    """One atom per cell, at the cell center, carrying the cell's mass."""
    return DiscreteMeasure.from_1d(g.cell_centers(), g.dx * g.cell_avg)


def pushforward(m: DiscreteMeasure, f: Callable[[np.ndarray], np.ndarray]) -> DiscreteMeasure:
    """Image measure of ``m`` under ``f``.

    ``f`` must accept the full (n, d) position array and return an array of
    the same shape; weights are untouched, so the mass is invariant.
    """
    if m.n_atoms == 0:
        return m
    moved = np.asarray(f(m.positions), dtype=float)
    if moved.shape != m.positions.shape:
        raise ValueError("map must preserve the (n, d) position shape")
    return DiscreteMeasure(moved, m.weights)


def _require_1d(m: DiscreteMeasure, name: str):
    if m.dim != 1:
        raise DimensionError(f"{name} must be 1D, got dim={m.dim}")


def w1_distance_1d(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    """Wasserstein-1 distance between equal-mass atomic measures on the line.

    Computed as the integral of |F_a - F_b| over the merged support, the 1D
    closed form of the optimal-transport problem.  Requires equal masses
    (within MASS_TOL) and positive mass.
    """
    _require_1d(a, "a")
    _require_1d(b, "b")
    ma, mb = a.mass, b.mass
    if abs(ma - mb) > MASS_TOL:
        raise MassMismatch(f"masses differ: {ma} vs {mb}")
    if ma <= 0.0:
        raise MassMismatch("w1 needs positive mass")
    xs = np.concatenate([a.positions[:, 0], b.positions[:, 0]])
    # signed weights: +w for a, -w for b; CDF difference is their running sum
    ws = np.concatenate([a.weights, -b.weights])
    order = np.argsort(xs, kind="stable")
    xs, ws = xs[order], ws[order]
    cdf_diff = np.cumsum(ws)[:-1]
    gaps = np.diff(xs)
    return float(np.abs(cdf_diff) @ gaps)


def _flat_cost_matrix(a: DiscreteMeasure, b: DiscreteMeasure) -> np.ndarray:
    diff = a.positions[:, None, :] - b.positions[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    return np.minimum(dist, FLAT_COST_CAP)


def flat_distance(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    """Flat distance between positive atomic measures (possibly unequal mass).

    Solves the partial-transport LP

        min  sum_ij c_ij f_ij + (|a| - sum f) + (|b| - sum f)
        s.t. sum_j f_ij <= a_i,  sum_i f_ij <= b_j,  f >= 0

    with c_ij = min(|x_i - y_j|, 2), via the HiGHS solver.  Equivalently a
    min-cost flow with a unit-cost destruction sink on the a side and a
    unit-cost creation source on the b side.
    """
    if a.dim != b.dim:
        raise DimensionError(f"dims differ: {a.dim} vs {b.dim}")
    if a.n_atoms == 0 or b.n_atoms == 0:
        return a.mass + b.mass
    cost = _flat_cost_matrix(a, b)
    n, m = cost.shape
    # objective: (c_ij - 2) f_ij  shifted by the all-unmatched baseline |a|+|b|
    c_vec = (cost - FLAT_COST_CAP).ravel()
    row_idx = np.repeat(np.arange(n), m)
    col_idx = np.tile(np.arange(m), n)
    a_ub = np.zeros((n + m, n * m))
    a_ub[row_idx, np.arange(n * m)] = 1.0
    a_ub[n + col_idx, np.arange(n * m)] = 1.0
    b_ub = np.concatenate([a.weights, b.weights])
    res = linprog(c_vec, A_ub=a_ub, b_ub=b_ub, bounds=(0, None), method="highs")
    if not res.success:  # pragma: no cover - HiGHS does not fail on these LPs
        raise RuntimeError(f"flat-distance LP failed: {res.message}")
    return max(float(a.mass + b.mass + res.fun), 0.0)


#: oracle cap: vertex enumeration is exponential in the atom count
ORACLE_MAX_ATOMS = 4


def flat_distance_oracle(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    """Exact flat distance by exhaustive vertex enumeration (test oracle).

    Writes the partial-transport LP in standard form with destruction and
    creation slacks, enumerates every basis of the equality system, keeps the
    feasible ones and returns the minimum cost.  Independent of the HiGHS
    route used by :func:`flat_distance`; capped at ORACLE_MAX_ATOMS atoms
    per measure.
    """
    if a.dim != b.dim:
        raise DimensionError(f"dims differ: {a.dim} vs {b.dim}")
    if a.n_atoms > ORACLE_MAX_ATOMS or b.n_atoms > ORACLE_MAX_ATOMS:
        raise TooLarge(
            f"oracle capped at {ORACLE_MAX_ATOMS} atoms, "
            f"got {a.n_atoms} x {b.n_atoms}"
        )
    if a.n_atoms == 0 or b.n_atoms == 0:
        return a.mass + b.mass
    n, m = a.n_atoms, b.n_atoms
    cost = _flat_cost_matrix(a, b)
    # variables: [f_11..f_nm, s_1..s_n (destroyed), t_1..t_m (created)]
    # equalities: sum_j f_ij + s_i = a_i ; sum_i f_ij + t_j = b_j
    n_flow = n * m
    n_var = n_flow + n + m
    n_eq = n + m
    A = np.zeros((n_eq, n_var))
    row_idx = np.repeat(np.arange(n), m)
    col_idx = np.tile(np.arange(m), n)
    A[row_idx, np.arange(n_flow)] = 1.0
    A[n + col_idx, np.arange(n_flow)] = 1.0
    A[np.arange(n), n_flow + np.arange(n)] = 1.0
    A[n + np.arange(m), n_flow + n + np.arange(m)] = 1.0
    rhs = np.concatenate([a.weights, b.weights])
    c_vec = np.concatenate([cost.ravel(), np.ones(n + m)])

    best = np.inf
    chunk = []
    # A is a 0/1 incidence matrix, so bases are integral: |det| is 0 or >= 1
    for basis in combinations(range(n_var), n_eq):
        chunk.append(basis)
        if len(chunk) < 50_000:
            continue
        best = min(best, _best_vertex_cost(A, rhs, c_vec, np.array(chunk)))
        chunk = []
    if chunk:
        best = min(best, _best_vertex_cost(A, rhs, c_vec, np.array(chunk)))
    if not np.isfinite(best):  # pragma: no cover - polytope is never empty
        raise RuntimeError("no feasible vertex found")
    return max(float(best), 0.0)


def _best_vertex_cost(A, rhs, c_vec, bases) -> float:
    """Minimum objective over the feasible vertices among the given bases."""
    mats = A[:, bases].transpose(1, 0, 2)  # (n_bases, n_eq, n_eq)
    ok = np.abs(np.linalg.det(mats)) > 0.5
    if not ok.any():
        return np.inf
    n_eq = A.shape[0]
    rhs_stack = np.tile(rhs, (int(ok.sum()), 1))[:, :, None]
    sols = np.linalg.solve(mats[ok], rhs_stack)[:, :, 0]
    feasible = (sols >= -1e-9).all(axis=1)
    if not feasible.any():
        return np.inf
    costs = (sols[feasible] * c_vec[bases[ok][feasible]]).sum(axis=1)
    return float(costs.min())


def label_w1(s1: LabelDist, s2: LabelDist) -> float:
    """Wasserstein-1 on {F, L} under the discrete metric: |p_F - p_F'|."""
    return abs(s1.p_F - s2.p_F)
