"""Interaction kernels and their convolutions against measures.

Every kernel is radial, K(z) = a(|z|) z, described by a small frozen spec
with the coefficient profile a(r):

* :class:`HegselmannKrause` -- bounded-confidence indicator a(r) = 1_{r <= C},
  optionally mollified into a Lipschitz ramp of configurable width;
* :class:`PowerLawAttract`  -- a(r) = (eps + r)^c_A;
* :class:`PowerLawRepel`    -- a(r) = -ell_R / (eps + r)^c_R;
* :class:`CombinedPowerLaw` -- sum of the two power laws;
* :class:`SteeringDrift`    -- not a convolution kernel: a drift x_hat - x
  toward a target, weighted by the emitting population's mass;
* :class:`ZeroKernel`       -- no interaction (useful for pure-reaction tests).

Sign convention: with the ``attract`` flag set (the default), the convolution
returns sum_j w_j a(x - x_j) (x_j - x), i.e. positive profiles pull toward
the mass.  Clearing the flag keeps the literal sum_j w_j a(x - x_j)(x - x_j),
under which positive profiles push away.  The default reproduces the
consensus/aggregation behavior of all experiment presets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionError
from .measures import GridMeasure, LabelDist, Measure


@dataclass(frozen=True)
class HegselmannKrause:
    """Bounded-confidence kernel. C > 0 is the confidence radius.

    ``mollify_width`` > 0 replaces the sharp indicator by a linear ramp from 1
    to 0 across [C - w/2, C + w/2], making the profile Lipschitz with constant
    1/w.
    """

    C: float
    mollify_width: float = 0.0
    attract: bool = True

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("confidence radius must be positive")
        if self.mollify_width < 0:
            raise ValueError("mollify_width must be nonnegative")

    def profile(self, r: np.ndarray) -> np.ndarray:
        if self.mollify_width == 0.0:
            return (r <= self.C).astype(float)
        w = self.mollify_width
        return np.clip((self.C + 0.5 * w - r) / w, 0.0, 1.0)


@dataclass(frozen=True)
class PowerLawAttract:
    c_A: float
    eps: float = 1e-3
    attract: bool = True

    def __post_init__(self):
        if self.eps <= 0 or self.c_A < 0:
            raise ValueError("need eps > 0 and c_A >= 0")

    def profile(self, r: np.ndarray) -> np.ndarray:
        return (self.eps + r) ** self.c_A


@dataclass(frozen=True)
class PowerLawRepel:
    ell_R: float
    c_R: float
    eps: float = 1e-3
    attract: bool = True

    def __post_init__(self):
        if self.eps <= 0 or self.ell_R <= 0 or self.c_R < 0:
            raise ValueError("need eps > 0, ell_R > 0 and c_R >= 0")

    def profile(self, r: np.ndarray) -> np.ndarray:
        return -self.ell_R / (self.eps + r) ** self.c_R


@dataclass(frozen=True)
class CombinedPowerLaw:
    """Short-range repulsion plus long-range attraction."""

    c_A: float
    ell_R: float
    c_R: float
    eps: float = 1e-3
    attract: bool = True

    def __post_init__(self):
        if self.eps <= 0 or self.ell_R <= 0 or min(self.c_A, self.c_R) < 0:
            raise ValueError("need eps > 0, ell_R > 0 and exponents >= 0")

    def profile(self, r: np.ndarray) -> np.ndarray:
        re = self.eps + r
        return re**self.c_A - self.ell_R / re**self.c_R


@dataclass(frozen=True)
class SteeringDrift:
    """Drift toward the target position x_hat, weighted by the emitter's mass."""

    x_hat: float
    attract: bool = True


@dataclass(frozen=True)
class ZeroKernel:
    attract: bool = True


KernelSpec = Union[
    HegselmannKrause, PowerLawAttract, PowerLawRepel, CombinedPowerLaw,
    SteeringDrift, ZeroKernel,
]

#: chunk size for pairwise evaluations, bounds temp arrays to ~chunk * n floats
_CHUNK = 512


def eval_kernel(spec: KernelSpec, z) -> np.ndarray:
    """Raw kernel value K(z) = a(|z|) z (no orientation applied).

    For :class:`SteeringDrift` the kernel is position-based, K(z) = x_hat - z.
    """
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if isinstance(spec, SteeringDrift):
        out = spec.x_hat - z
    elif isinstance(spec, ZeroKernel):
        out = np.zeros_like(z)
    else:
        r = np.sqrt((z * z).sum(axis=-1)) if z.ndim > 1 else np.abs(z)
        out = spec.profile(r)[..., None] * z if z.ndim > 1 else spec.profile(r) * z
    return float(out[0]) if scalar else out


def _as_points(x, dim: int):
    """Normalize x to (k, dim); returns (points, restore) where restore maps
    a (k, dim) result back to the caller's layout (scalar, (k,), (d,), (k, d))."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        if dim != 1:
            raise DimensionError(f"scalar point but measure has dim {dim}")
        return arr.reshape(1, 1), lambda out: float(out[0, 0])
    if arr.ndim == 1:
        if dim == 1:
            return arr[:, None], lambda out: out[:, 0]
        if arr.shape[0] != dim:
            raise DimensionError(f"point has dim {arr.shape[0]}, measure has {dim}")
        return arr[None, :], lambda out: out[0]
    if arr.shape[1] != dim:
        raise DimensionError(f"points have dim {arr.shape[1]}, measure has {dim}")
    return arr, lambda out: out


def _source_atoms(m: Measure):
    if isinstance(m, GridMeasure):
        return m.cell_centers()[:, None], m.dx * m.cell_avg, 1
    return m.positions, m.weights, m.dim


def _hk_sum_1d(spec: HegselmannKrause, src: np.ndarray, w: np.ndarray, pts: np.ndarray):
    """Sharp bounded-confidence sums via sorted prefix sums, O((n+k) log n).

    sum_{|x - x_j| <= C} w_j (x_j - x) = S1(window) - x S0(window), with the
    window located by binary search; both endpoints inclusive, matching the
    indicator r <= C.
    """
    order = np.argsort(src, kind="stable")
    xs = src[order]
    ws = w[order]
    w_cum = np.concatenate([[0.0], np.cumsum(ws)])
    wx_cum = np.concatenate([[0.0], np.cumsum(ws * xs)])
    lo = np.searchsorted(xs, pts - spec.C, side="left")
    hi = np.searchsorted(xs, pts + spec.C, side="right")
    s0 = w_cum[hi] - w_cum[lo]
    s1 = wx_cum[hi] - wx_cum[lo]
    toward = s1 - pts * s0
    return toward if spec.attract else -toward


def convolve(spec: KernelSpec, m: Measure, x) -> np.ndarray:
    """(K * m)(x) under the spec's orientation.

    Atomic measures: the exact weighted sum over atoms.  Grid measures:
    midpoint quadrature, sum_l dx * avg_l * K(x - x_l) over cell centers.
    For :class:`SteeringDrift`, returns mass(m) * (x_hat - x), the
    mass-weighted drift that replaces the convolution.

    ``x`` may be a scalar, a point, or a stack of points (k, d); the result
    matches the input layout.
    """
    src, w, dim = _source_atoms(m)
    pts, restore = _as_points(x, dim)
    if isinstance(spec, ZeroKernel) or w.size == 0:
        out = np.zeros_like(pts)
    elif isinstance(spec, SteeringDrift):
        out = float(w.sum()) * (spec.x_hat - pts)
    elif (
        isinstance(spec, HegselmannKrause)
        and spec.mollify_width == 0.0
        and dim == 1
    ):
        out = _hk_sum_1d(spec, src[:, 0], w, pts[:, 0])[:, None]
    else:
        out = np.empty_like(pts)
        sign = -1.0 if spec.attract else 1.0
        for lo in range(0, pts.shape[0], _CHUNK):
            blk = pts[lo:lo + _CHUNK]
            diff = blk[:, None, :] - src[None, :, :]  # x - x_j
            r = np.abs(diff[:, :, 0]) if dim == 1 else np.sqrt((diff * diff).sum(axis=2))
            coeff = spec.profile(r) * w[None, :]
            out[lo:lo + _CHUNK] = sign * np.einsum("kj,kjd->kd", coeff, diff)
    return restore(out)


def coupled_velocity(
    kF: KernelSpec,
    kL: KernelSpec,
    nu: Measure,
    sigma: LabelDist,
    x,
) -> np.ndarray:
    """Velocity field of the total-distribution form.

    sigma(F) * (K^F * nu)(x) + sigma(L) * (K^L * nu)(x); when the leader
    kernel is a steering drift the second term is sigma(L) * (x_hat - x)
    with no convolution and no mass factor.
    """
    _, _, dim = _source_atoms(nu)
    pts, restore = _as_points(x, dim)
    first = sigma.p_F * np.atleast_2d(convolve(kF, nu, pts))
    if isinstance(kL, SteeringDrift):
        second = sigma.p_L * (kL.x_hat - pts)
    else:
        second = sigma.p_L * np.atleast_2d(convolve(kL, nu, pts))
    return restore(first + second)
