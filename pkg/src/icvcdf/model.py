"""Step distribution functions and fitted conditional-CDF models."""

import enum
from dataclasses import dataclass

import numpy as np


class Order(enum.Enum):
    ICV = "icv"
    ICX = "icx"
    FSD = "fsd"
    ECDF = "ecdf"


@dataclass(frozen=True)
class StepCdf:
    """Right-continuous step CDF with jumps at ``jumps``.

    ``cum[j]`` is the CDF value on ``[jumps[j], jumps[j+1])``; the value is 0
    left of ``jumps[0]`` and ``cum[-1]`` is exactly 1. Zero-mass jump points
    are allowed.
    """

    jumps: np.ndarray
    cum: np.ndarray

    def __post_init__(self):
        jumps = np.asarray(self.jumps, dtype=np.float64)
        cum = np.asarray(self.cum, dtype=np.float64)
        if jumps.ndim != 1 or jumps.size == 0 or jumps.shape != cum.shape:
            raise ValueError("jumps and cum must be non-empty 1-d arrays of equal length")
        if not (np.all(np.isfinite(jumps)) and np.all(np.isfinite(cum))):
            raise ValueError("jumps and cum must be finite")
        if np.any(np.diff(jumps) <= 0):
            raise ValueError("jump points must be strictly increasing")
        if np.any(np.diff(cum) < 0) or cum[0] < 0 or cum[-1] != 1.0:
            raise ValueError("cumulative probabilities must be nondecreasing in [0, 1] and end at 1")
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "cum", cum)

    @classmethod
    def dirac(cls, at):
        return cls(np.array([at], dtype=np.float64), np.array([1.0]))

    def __call__(self, y):
        idx = np.searchsorted(self.jumps, y, side="right") - 1
        return np.where(idx >= 0, self.cum[np.maximum(idx, 0)], 0.0)

    @property
    def masses(self):
        return np.diff(self.cum, prepend=0.0)

    def quantile(self, gamma):
        """Generalized inverse ``inf{y : F(y) >= gamma}``."""
        return quantile_on_grid(self.jumps, self.cum, gamma)

    def compressed(self):
        """Equivalent StepCdf without zero-mass jump points."""
        keep = self.masses > 0
        return StepCdf(self.jumps[keep], self.cum[keep])

    def __eq__(self, other):
        if not isinstance(other, StepCdf):
            return NotImplemented
        return np.array_equal(self.jumps, other.jumps) and np.array_equal(self.cum, other.cum)

    __hash__ = None


# Estimated CDF levels carry rounding from the two regression stages; a level
# within this distance of gamma counts as reaching it.
QUANTILE_TOL = 1e-9


def quantile_on_grid(grid, cum, gamma):
    gamma = np.asarray(gamma, dtype=np.float64)
    if np.any(~(gamma > 0) | ~(gamma < 1)):
        raise ValueError("gamma must lie in (0, 1)")
    idx = np.searchsorted(cum, gamma - QUANTILE_TOL, side="left")
    return grid[np.minimum(idx, len(grid) - 1)]


@dataclass(frozen=True)
class FittedModel:
    """Per-design-point step CDFs on a common grid.

    ``cum[i, j]`` is the estimated CDF at design point ``design_points[i]``
    evaluated at ``grid[j]``. Outside ``[x_1, x_d]`` predictions are clamped
    to the boundary design points; in between the two neighbouring CDFs are
    mixed linearly.
    """

    order: Order
    design_points: np.ndarray
    grid: np.ndarray
    cum: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "order", Order(self.order))
        x = np.asarray(self.design_points, dtype=np.float64)
        grid = np.asarray(self.grid, dtype=np.float64)
        cum = np.asarray(self.cum, dtype=np.float64)
        if x.ndim != 1 or x.size == 0 or np.any(np.diff(x) <= 0):
            raise ValueError("design points must be strictly increasing and non-empty")
        if cum.shape != (x.size, grid.size):
            raise ValueError("cum must have shape (len(design_points), len(grid))")
        object.__setattr__(self, "design_points", x)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "cum", cum)
        if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing and non-empty")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(cum))):
            raise ValueError("grid and cum must be finite")
        if np.any(np.diff(cum, axis=1) < 0) or np.any(cum[:, 0] < 0) or np.any(cum[:, -1] != 1.0):
            raise ValueError("each row of cum must be a valid step CDF")

    def cdf(self, i):
        return StepCdf(self.grid, self.cum[i])

    @property
    def cdfs(self):
        return [self.cdf(i) for i in range(self.design_points.size)]

    def _mixture_weights(self, x):
        """Row indices and weights ``(lo, hi, lam)`` such that the CDF at
        ``x`` is ``(1 - lam) * cum[lo] + lam * cum[hi]``."""
        x = np.asarray(x, dtype=np.float64)
        if not np.all(np.isfinite(x)):
            raise ValueError("x must be finite")
        xs = self.design_points
        hi = np.clip(np.searchsorted(xs, x, side="right"), 1, max(xs.size - 1, 1))
        lo = hi - 1
        if xs.size == 1:
            return np.zeros_like(x, dtype=int), np.zeros_like(x, dtype=int), np.zeros_like(x)
        lam = np.clip((x - xs[lo]) / (xs[hi] - xs[lo]), 0.0, 1.0)
        return lo, hi, lam

    def cdf_rows(self, x):
        """CDF values on the model grid at each covariate value in ``x``."""
        lo, hi, lam = self._mixture_weights(np.atleast_1d(x))
        lam = lam[:, None]
        rows = np.minimum((1.0 - lam) * self.cum[lo] + lam * self.cum[hi], 1.0)
        rows[:, -1] = 1.0
        return rows

    def cdf_at(self, x):
        """StepCdf of the (possibly interpolated) conditional law at ``x``."""
        return StepCdf(self.grid, self.cdf_rows(x)[0])

    def predict_cdf(self, x, y):
        if not (np.isfinite(x) and np.isfinite(y)):
            raise ValueError("x and y must be finite")
        return float(self.cdf_at(x)(y))

    def predict_quantile(self, x, gamma):
        if not 0.0 < gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        return float(quantile_on_grid(self.grid, self.cdf_rows(x)[0], gamma))

    def __eq__(self, other):
        if not isinstance(other, FittedModel):
            return NotImplemented
        return (
            self.order is other.order
            and np.array_equal(self.design_points, other.design_points)
            and np.array_equal(self.grid, other.grid)
            and np.array_equal(self.cum, other.cum)
        )

    __hash__ = None


def lower_integrals(grid, cum):
    """``integral_{-inf}^{t_l} F`` at each grid point, exact for step CDFs."""
    steps = cum[..., :-1] * np.diff(grid)
    zero = np.zeros(cum.shape[:-1] + (1,))
    return np.concatenate((zero, np.cumsum(steps, axis=-1)), axis=-1)


def upper_integrals(grid, cum):
    """``integral_{t_l}^{inf} (1 - F)`` at each grid point."""
    steps = (1.0 - cum[..., :-1]) * np.diff(grid)
    zero = np.zeros(cum.shape[:-1] + (1,))
    tail = np.cumsum(steps[..., ::-1], axis=-1)[..., ::-1]
    return np.concatenate((tail, zero), axis=-1)


def order_violation(model):
    """Largest violation of the model's order constraint across design points.

    Zero (or rounding-level) for a model satisfying its constraint; ``0.0``
    for the unconstrained stratified ECDF.
    """
    grid, cum = model.grid, model.cum
    if model.design_points.size < 2 or model.order is Order.ECDF:
        return 0.0
    if model.order is Order.ICV:
        step = np.diff(lower_integrals(grid, cum), axis=0)
    elif model.order is Order.ICX:
        step = -np.diff(upper_integrals(grid, cum), axis=0)
    else:
        step = np.diff(cum, axis=0)
    return float(max(np.max(step), 0.0))
