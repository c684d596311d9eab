"""Conditional CDF estimators under stochastic order constraints.

The increasing concave (icv) estimator runs two series of monotone
regressions. For each grid point ``t`` the group means of ``(t - Y)_+`` are
regressed antitonically across the ordered design points, which estimates
the integrated CDFs ``M_x(t) = E[(t - Y)_+ | X = x]``. For each design point
the chord slopes of ``t -> M_x(t)`` are then regressed isotonically with the
grid spacings as weights; these are the right-hand slopes of the greatest
convex minorant and form the estimated CDF on the grid.

The increasing convex (icx) estimator is the icv estimator applied to
``(-X, -Y)`` and reflected back.
"""

import enum
from dataclasses import dataclass

import numpy as np

from icvcdf.model import FittedModel, Order
from icvcdf.monotone import Direction, monotone_fit_rows


class InvariantError(ValueError):
    """Input violates a structural requirement of the estimator."""


@dataclass(frozen=True)
class GroupedSample:
    """Observations grouped by distinct covariate value.

    ``index[j]`` is the group of observation ``j`` and ``y[j]`` its
    response; ``weights`` are the group sizes.
    """

    design_points: np.ndarray
    index: np.ndarray
    y: np.ndarray
    weights: np.ndarray
    responses: np.ndarray

    @property
    def n(self):
        return int(self.y.size)

    @property
    def d(self):
        return int(self.design_points.size)

    @property
    def groups(self):
        order = np.lexsort((self.y, self.index))
        ys = self.y[order]
        bounds = np.cumsum(self.weights)[:-1]
        return np.split(ys, bounds)

    def reflected(self):
        """The sample of ``(-X, -Y)``."""
        d = self.d
        return GroupedSample(
            design_points=-self.design_points[::-1],
            index=d - 1 - self.index,
            y=-self.y,
            weights=self.weights[::-1].copy(),
            responses=-self.responses[::-1],
        )


def group_xy(x, y):
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size == 0 or x.shape != y.shape:
        raise ValueError("x and y must be non-empty and of equal length")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("x and y must be finite")
    design, index, counts = np.unique(x, return_inverse=True, return_counts=True)
    return GroupedSample(
        design_points=design,
        index=index.ravel(),
        y=y,
        weights=counts.astype(np.int64),
        responses=np.unique(y),
    )


def group(pairs):
    """Group ``(x, y)`` pairs by exact equality of the covariate."""
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no observations")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pairs must have shape (n, 2)")
    return group_xy(arr[:, 0], arr[:, 1])


class GridMode(enum.Enum):
    OBSERVED = "observed"
    INTEGER = "integer"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class GridSpec:
    mode: GridMode = GridMode.OBSERVED
    points: tuple = ()

    @classmethod
    def observed(cls):
        return cls(GridMode.OBSERVED)

    @classmethod
    def integer(cls):
        return cls(GridMode.INTEGER)

    @classmethod
    def explicit(cls, points):
        return cls(GridMode.EXPLICIT, tuple(float(p) for p in points))

    def reflected(self):
        if self.mode is GridMode.EXPLICIT:
            return GridSpec.explicit([-p for p in reversed(self.points)])
        return self

    def build(self, sample):
        y = sample.responses
        if self.mode is GridMode.OBSERVED:
            return y.copy()
        if self.mode is GridMode.INTEGER:
            r = np.round(y)
            if np.any(np.abs(y - r) > 1e-9):
                raise InvariantError("integer grid requires integer-valued responses")
            return np.arange(r[0], r[-1] + 1.0)
        grid = np.asarray(self.points, dtype=np.float64)
        if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
            raise InvariantError("explicit grid must be a non-empty finite vector")
        if np.any(np.diff(grid) <= 0):
            raise InvariantError("explicit grid must be strictly increasing")
        if grid[0] != y[0] or grid[-1] != y[-1]:
            raise InvariantError(
                f"explicit grid must start at the smallest response {y[0]!r} "
                f"and end at the largest {y[-1]!r}"
            )
        return grid


def _counts_and_integrals(sample, grid):
    """Group counts of ``Y <= t_j`` and group means of ``(t_j - Y)_+``.

    The integrated ECDF is accumulated from per-interval increments
    (``c_j * width_j`` plus the partial contribution of points inside the
    interval), which keeps chord slopes accurate on fine grids.
    """
    d, k = sample.d, grid.size
    pos = np.searchsorted(grid, sample.y, side="left")
    inside = pos < k
    first = np.zeros((d, k))
    np.add.at(first, (sample.index[inside], pos[inside]), 1.0)
    counts = np.cumsum(first, axis=1)

    below = pos == 0
    start = np.zeros(d)
    np.add.at(start, sample.index[below], grid[0] - sample.y[below])

    between = inside & (pos > 0)
    partial = np.zeros((d, max(k - 1, 0)))
    np.add.at(partial, (sample.index[between], pos[between] - 1),
              grid[pos[between]] - sample.y[between])

    widths = np.diff(grid)
    inc = counts[:, :-1] * widths + partial
    sums = np.concatenate((start[:, None], inc), axis=1)
    w = sample.weights.astype(np.float64)[:, None]
    return counts / w, np.cumsum(sums, axis=1) / w


def integrated_estimate(sample, grid):
    """Antitonic estimate of ``M_x(t) = E[(t - Y)_+ | X = x]`` on ``grid``.

    Returns the ``(d, k)`` matrix of fitted values at the design points.
    """
    _, h = _counts_and_integrals(sample, grid)
    return monotone_fit_rows(h.T, sample.weights, Direction.DECREASING).T


def slope_stage(mtilde, grid):
    """CDF values on ``grid`` from right-hand slopes of the convex minorants."""
    d, k = mtilde.shape
    cum = np.ones((d, k))
    if k > 1:
        widths = np.diff(grid)
        slopes = np.diff(mtilde, axis=1) / widths
        cum[:, :-1] = np.clip(monotone_fit_rows(slopes, widths, Direction.INCREASING), 0.0, 1.0)
    return cum


def fit_icv(sample, grid=GridSpec()):
    t = grid.build(sample)
    cum = slope_stage(integrated_estimate(sample, t), t)
    return FittedModel(Order.ICV, sample.design_points, t, cum)


def fit_icx(sample, grid=GridSpec()):
    """Increasing convex estimator by reflection of the icv estimator.

    If ``G`` is the icv fit for ``(-X, -Y)``, the icx CDF is
    ``F(y) = 1 - G((-y)-)``; on the grid the left limit at a jump is the
    cumulative value at the preceding jump.
    """
    t = grid.build(sample)
    mirror = fit_icv(sample.reflected(), grid.reflected())
    g = mirror.cum[::-1, ::-1]
    cum = np.ones_like(g)
    cum[:, :-1] = np.maximum(1.0 - g[:, 1:], 0.0)
    return FittedModel(Order.ICX, sample.design_points, t, cum)


def fit_icx_direct(sample, grid=GridSpec()):
    """Increasing convex estimator built without reflection.

    ``N_x(t) = E[(Y - t)_+ | X = x]`` is regressed isotonically across the
    design points; the CDF is one plus the right-hand slope of the convex
    minorant of the fitted (convex, decreasing) function.
    """
    t = grid.build(sample)
    d, k = sample.d, t.size
    upper = np.empty((d, k))
    for i, ys in enumerate(sample.groups):
        # accumulate from the right: on (t_j, t_j+1] add the points above
        # t_j+1 times the width plus y - t_j for points inside
        pos = np.searchsorted(t, ys, side="left")
        beyond = pos >= k
        inc = np.zeros(k)
        inc[-1] = np.sum(ys[beyond] - t[-1])
        inside = ~beyond & (pos > 0)
        np.add.at(inc, pos[inside] - 1, ys[inside] - t[pos[inside] - 1])
        above = ys.size - np.searchsorted(ys, t[1:], side="right")
        inc[:-1] += above * np.diff(t)
        upper[i] = np.cumsum(inc[::-1])[::-1] / ys.size
    ntilde = monotone_fit_rows(upper.T, sample.weights, Direction.INCREASING).T
    cum = np.ones((d, k))
    if k > 1:
        widths = np.diff(t)
        slopes = monotone_fit_rows(np.diff(ntilde, axis=1) / widths, widths, Direction.INCREASING)
        cum[:, :-1] = np.clip(1.0 + slopes, 0.0, 1.0)
    return FittedModel(Order.ICX, sample.design_points, t, cum)


def fit_fsd(sample, grid=GridSpec()):
    """First order stochastic dominance estimator: antitonic regression of
    the indicators ``1{Y <= t}`` across design points at every grid point."""
    t = grid.build(sample)
    ecdf, _ = _counts_and_integrals(sample, t)
    cum = monotone_fit_rows(ecdf.T, sample.weights, Direction.DECREASING).T
    cum = np.clip(np.maximum.accumulate(cum, axis=1), 0.0, 1.0)
    cum[:, -1] = 1.0
    return FittedModel(Order.FSD, sample.design_points, t, cum)


def fit_ecdf(sample, grid=GridSpec()):
    """Empirical CDFs stratified by covariate value."""
    t = grid.build(sample)
    ecdf, _ = _counts_and_integrals(sample, t)
    ecdf[:, -1] = 1.0
    return FittedModel(Order.ECDF, sample.design_points, t, ecdf)


def two_sample_closed_form(sample, grid=GridSpec()):
    """Two-sample icv estimator through the explicit pooling rule.

    With integrated ECDFs ``m1, m2`` and ``alpha = n1 / n``, the antitonic
    estimate keeps ``m1, m2`` where ``m1 >= m2`` and replaces both by
    ``alpha * m1 + (1 - alpha) * m2`` elsewhere.
    """
    if sample.d != 2:
        raise ValueError("the closed form applies to exactly two design points")
    t = grid.build(sample)
    m = np.empty((2, t.size))
    for i, ys in enumerate(sample.groups):
        below = np.searchsorted(ys, t, side="right")
        head = np.concatenate(([0.0], np.cumsum(ys)))
        m[i] = (below * t - head[below]) / ys.size
    alpha = sample.weights[0] / sample.n
    pooled = alpha * m[0] + (1.0 - alpha) * m[1]
    ordered = m[0] >= m[1]
    mtilde = np.where(ordered, m, pooled)
    return FittedModel(Order.ICV, sample.design_points, t, slope_stage(mtilde, t))


_FITTERS = {
    Order.ICV: fit_icv,
    Order.ICX: fit_icx,
    Order.FSD: fit_fsd,
    Order.ECDF: fit_ecdf,
}


def fit(sample, order, grid=GridSpec()):
    return _FITTERS[Order(order)](sample, grid)
