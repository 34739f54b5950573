"""Initial-condition library for the experiment presets.

A density shape integrates exactly onto grid cells; an initial descriptor
splits a shape (or two independent shapes) into the follower and leader
populations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.special import erf

from .measures import GridMeasure, LabelDist


@dataclass(frozen=True)
class UniformDensity:
    """Uniform probability density on the computational domain."""

    def cell_averages(self, x_min: float, x_max: float, n_cells: int) -> np.ndarray:
        return np.full(n_cells, 1.0 / (x_max - x_min))


@dataclass(frozen=True)
class TwoPlateauDensity:
    """Symmetric pair of plateaus on [-u/2, -d/2] and [d/2, u/2], total mass 1."""

    d: float
    u: float

    def __post_init__(self):
        if not 0 <= self.d < self.u:
            raise ValueError("need 0 <= d < u")

    def cell_averages(self, x_min: float, x_max: float, n_cells: int) -> np.ndarray:
        edges = x_min + np.arange(n_cells + 1) * (x_max - x_min) / n_cells
        lo, hi = edges[:-1], edges[1:]
        height = 1.0 / (self.u - self.d)

        def overlap(a, b):
            return np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)

        covered = overlap(-self.u / 2, -self.d / 2) + overlap(self.d / 2, self.u / 2)
        return covered * height / (hi - lo)


@dataclass(frozen=True)
class GaussianMixDensity:
    """Weighted sum of coeff * (2 pi s2)^(-1/2) exp(-(x - c)^2 / s2) bumps.

    components: tuple of (center, s2, coeff).  The exponent uses s2 without
    the conventional factor 2, so a single bump with coeff 1 carries total
    mass 1/sqrt(2) over the whole line.
    """

    components: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        for _, s2, _ in self.components:
            if s2 <= 0:
                raise ValueError("Gaussian shape parameter must be positive")

    def cell_averages(self, x_min: float, x_max: float, n_cells: int) -> np.ndarray:
        edges = x_min + np.arange(n_cells + 1) * (x_max - x_min) / n_cells
        dx = (x_max - x_min) / n_cells
        total = np.zeros(n_cells)
        for center, s2, coeff in self.components:
            s = np.sqrt(s2)
            cdf = 0.5 / np.sqrt(2.0) * erf((edges - center) / s)
            total += coeff * np.diff(cdf) / dx
        return total


Density = Union[UniformDensity, TwoPlateauDensity, GaussianMixDensity]


@dataclass(frozen=True)
class ProportionalInit:
    """Both populations share one spatial shape, split by sigma0 (H1 data)."""

    shape: Density
    sigma0: LabelDist


@dataclass(frozen=True)
class SeparateInit:
    """Independent follower and leader shapes (mass scales included)."""

    shape_F: Density
    shape_L: Density


InitialCondition = Union[ProportionalInit, SeparateInit]


def initial_grids(
    init: InitialCondition, x_min: float, x_max: float, n_cells: int
) -> Tuple[GridMeasure, GridMeasure]:
    """Project the initial descriptor onto a grid: (muF_0, muL_0)."""
    if isinstance(init, ProportionalInit):
        nu = init.shape.cell_averages(x_min, x_max, n_cells)
        return (
            GridMeasure(x_min, x_max, init.sigma0.p_F * nu),
            GridMeasure(x_min, x_max, init.sigma0.p_L * nu),
        )
    return (
        GridMeasure(x_min, x_max, init.shape_F.cell_averages(x_min, x_max, n_cells)),
        GridMeasure(x_min, x_max, init.shape_L.cell_averages(x_min, x_max, n_cells)),
    )
