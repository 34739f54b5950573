"""Transition-rate functionals and the birth-death transition matrix.

Rates are scalar functionals of the global state (muF, muL), never of the
position, and always land in [0, M_alpha].  Concrete families:

* :class:`ConstantRate`
* :class:`VarianceSigmoid`        -- switch on the spread of one population,
* :class:`MassSigmoid`            -- switch on one population's mass fraction,
* :class:`TargetVarianceSigmoid`  -- switch on the mean squared distance of
                                     one population to a target point,
* :class:`MollifiedMassThreshold` -- countercyclical ramp: high value while
                                     the watched mass fraction is small.

The spread functional is

    variance(mu) = (1/mass^2) * integral integral |x - y|^2 dmu dmu,

with the denominator clamped at a small guard so the quotient stays Lipschitz
as the mass degenerates.  ``target_variance`` normalizes by a single power of
the mass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from .errors import DegeneratePair
from .measures import (
    DiscreteMeasure,
    GridMeasure,
    Measure,
    flat_distance,
    mass,
)

#: default clamp on mass denominators inside variance quotients
DEFAULT_MASS_GUARD = 1e-6

#: sigmoid steepness used by all experiment presets
DEFAULT_STEEPNESS = 1000.0

#: exponent clamp before exp() to avoid overflow
_EXP_CAP = 500.0


def _moments(m: Measure) -> Tuple[float, np.ndarray, float]:
    """(mass, first moment vector, second moment) of a measure."""
    if isinstance(m, GridMeasure):
        pos = m.cell_centers()[:, None]
        w = m.dx * m.cell_avg
    else:
        pos, w = m.positions, m.weights
    m0 = float(w.sum())
    if w.size == 0:
        return 0.0, np.zeros(1), 0.0
    m1 = w @ pos
    m2 = float(w @ (pos * pos).sum(axis=1))
    return m0, m1, m2


def variance(m: Measure, guard: float = DEFAULT_MASS_GUARD) -> float:
    """Mass-normalized quadratic spread (1/mass^2) * iint |x-y|^2 dmu dmu.

    The double integral expands to 2 (m0 * m2 - |m1|^2) in terms of moments.
    Below ``guard`` the denominator is clamped to guard^2.
    """
    m0, m1, m2 = _moments(m)
    double_int = 2.0 * (m0 * m2 - float(m1 @ m1))
    denom = max(m0, guard) ** 2
    return max(double_int, 0.0) / denom


def target_variance(m: Measure, x_hat, guard: float = DEFAULT_MASS_GUARD) -> float:
    """Mean squared distance to x_hat, (1/mass) * int |x_hat - x|^2 dmu.

    Note the single (not squared) mass normalization.
    """
    if isinstance(m, GridMeasure):
        pos = m.cell_centers()[:, None]
        w = m.dx * m.cell_avg
    else:
        pos, w = m.positions, m.weights
    if w.size == 0:
        return 0.0
    x_hat = np.atleast_1d(np.asarray(x_hat, dtype=float))
    diff = pos - x_hat[None, :]
    integral = float(w @ (diff * diff).sum(axis=1))
    return integral / max(float(w.sum()), guard)


def sigmoid_switch(delta: float, steepness: float, v: float) -> float:
    """Overflow-safe logistic switch 1 / (1 + exp(c * (delta - v)))."""
    expo = np.clip(steepness * (delta - v), -_EXP_CAP, _EXP_CAP)
    return float(1.0 / (1.0 + np.exp(expo)))


@dataclass(frozen=True)
class ConstantRate:
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("rate must be nonnegative")


@dataclass(frozen=True)
class VarianceSigmoid:
    """Switch on variance(mu_on): active once the watched spread exceeds delta."""

    on: str  # "F" or "L"
    delta: float
    steepness: float = DEFAULT_STEEPNESS
    mass_guard: float = DEFAULT_MASS_GUARD

    def __post_init__(self):
        _check_population(self.on)
        if self.delta <= 0 or self.steepness <= 0 or self.mass_guard <= 0:
            raise ValueError("delta, steepness and mass_guard must be positive")


@dataclass(frozen=True)
class MassSigmoid:
    """Switch on the watched population's mass fraction."""

    on: str
    delta: float
    steepness: float = DEFAULT_STEEPNESS

    def __post_init__(self):
        _check_population(self.on)
        if self.delta <= 0 or self.steepness <= 0:
            raise ValueError("delta and steepness must be positive")


@dataclass(frozen=True)
class TargetVarianceSigmoid:
    """Switch on target_variance(mu_on, x_hat)."""

    x_hat: float
    delta: float
    steepness: float = DEFAULT_STEEPNESS
    mass_guard: float = DEFAULT_MASS_GUARD
    on: str = "F"

    def __post_init__(self):
        _check_population(self.on)
        if self.delta <= 0 or self.steepness <= 0 or self.mass_guard <= 0:
            raise ValueError("delta, steepness and mass_guard must be positive")


@dataclass(frozen=True)
class MollifiedMassThreshold:
    """Countercyclical ramp: 1 while the watched mass fraction is below eps,
    decaying linearly to c_bar across [eps, eps + width]."""

    eps: float
    c_bar: float
    width: float
    on: str = "L"

    def __post_init__(self):
        _check_population(self.on)
        if self.eps <= 0 or self.width <= 0:
            raise ValueError("eps and width must be positive")
        if not 0 <= self.c_bar < 1:
            raise ValueError("c_bar must lie in [0, 1)")


RateSpec = Union[
    ConstantRate, VarianceSigmoid, MassSigmoid, TargetVarianceSigmoid,
    MollifiedMassThreshold,
]


def _check_population(which: str):
    if which not in ("F", "L"):
        raise ValueError(f"population must be 'F' or 'L', got {which!r}")


def rate_bound(spec: RateSpec) -> float:
    """Smallest M_alpha valid for the spec (H4-style cap)."""
    if isinstance(spec, ConstantRate):
        return spec.value
    return 1.0


def _pick(which: str, muF: Measure, muL: Measure) -> Measure:
    return muF if which == "F" else muL


def _eval_one(spec: RateSpec, muF: Measure, muL: Measure) -> float:
    if isinstance(spec, ConstantRate):
        return spec.value
    if isinstance(spec, VarianceSigmoid):
        v = variance(_pick(spec.on, muF, muL), spec.mass_guard)
        return sigmoid_switch(spec.delta, spec.steepness, v)
    if isinstance(spec, MassSigmoid):
        total = mass(muF) + mass(muL)
        frac = mass(_pick(spec.on, muF, muL)) / total if total > 0 else 0.0
        return sigmoid_switch(spec.delta, spec.steepness, frac)
    if isinstance(spec, TargetVarianceSigmoid):
        v = target_variance(_pick(spec.on, muF, muL), spec.x_hat, spec.mass_guard)
        return sigmoid_switch(spec.delta, spec.steepness, v)
    if isinstance(spec, MollifiedMassThreshold):
        total = mass(muF) + mass(muL)
        frac = mass(_pick(spec.on, muF, muL)) / total if total > 0 else 0.0
        ramp = np.clip((frac - spec.eps) / spec.width, 0.0, 1.0)
        return float(1.0 - (1.0 - spec.c_bar) * ramp)
    raise TypeError(f"unknown rate spec {type(spec).__name__}")


def eval_rates(
    specF: RateSpec, specL: RateSpec, muF: Measure, muL: Measure
) -> Tuple[float, float]:
    """(alpha_F, alpha_L) for the current global state.

    The rates of leader creation (alpha_F, applied to followers) and follower
    creation (alpha_L, applied to leaders).  Deterministic, position-free, and
    bounded by the specs' rate_bound.
    """
    return _eval_one(specF, muF, muL), _eval_one(specL, muF, muL)


def transition_matrix(alpha_F: float, alpha_L: float) -> np.ndarray:
    """Birth-death generator [[-aF, aL], [aF, -aL]]; columns sum to zero."""
    if alpha_F < 0 or alpha_L < 0:
        raise ValueError("rates must be nonnegative")
    return np.array([[-alpha_F, alpha_L], [alpha_F, -alpha_L]])


PairOfPairs = Tuple[
    Tuple[DiscreteMeasure, DiscreteMeasure], Tuple[DiscreteMeasure, DiscreteMeasure]
]


def lipschitz_probe(
    specF: RateSpec,
    specL: RateSpec,
    sample_pairs: Sequence[PairOfPairs],
    zero_tol: float = 1e-12,
    mismatch_tol: float = 1e-9,
) -> float:
    """Empirical Lipschitz ratio of the rates in the flat metric.

    Each sample is a pair of states ((muF, muL), (nuF, nuL)) with matching
    total mass and common support radius; the probe returns

        max over pairs, i in {F, L} of |alpha_i(mu) - alpha_i(nu)| / D

    with D = flat(muF, nuF) + flat(muL, nuL).  Pairs at D < zero_tol are
    skipped when the rate gap is also negligible, otherwise they expose a
    non-Lipschitz spec and raise DegeneratePair.
    """
    worst = 0.0
    for (muF, muL), (nuF, nuL) in sample_pairs:
        d = flat_distance(muF, nuF) + flat_distance(muL, nuL)
        gap = max(
            abs(_eval_one(specF, muF, muL) - _eval_one(specF, nuF, nuL)),
            abs(_eval_one(specL, muF, muL) - _eval_one(specL, nuF, nuL)),
        )
        if d < zero_tol:
            if gap > mismatch_tol:
                raise DegeneratePair(
                    f"rate gap {gap} across flat distance {d}"
                )
            continue
        worst = max(worst, gap / d)
    return worst
