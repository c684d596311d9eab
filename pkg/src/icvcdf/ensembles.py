"""Subsample aggregation of fitted conditional CDFs.

Each subsample is drawn from its own counter-based stream
(Philox keyed by ``SeedSequence([seed, r])``), so subsample ``r`` does not
depend on how many others are drawn or in which order they are fitted.
Sampling without replacement uses numpy's Fisher-Yates permutation.
"""

import enum
from dataclasses import dataclass

import numpy as np

from icvcdf.estimators import GridMode, GridSpec, fit, group_xy
from icvcdf.model import FittedModel, Order


class EnsembleMode(enum.Enum):
    SUBSAMPLE = "subsample"
    PARTITION = "partition"


@dataclass(frozen=True)
class EnsembleConfig:
    """Subagging setup.

    ``subsample_size`` defaults to ``floor(fraction * n)``. In partition
    mode the data are shuffled once and cut into ``n_subsamples`` disjoint
    blocks of ``subsample_size`` observations.
    """

    n_subsamples: int = 50
    subsample_size: int | None = None
    fraction: float = 0.5
    mode: EnsembleMode = EnsembleMode.SUBSAMPLE
    seed: int = 0

    def size_for(self, n):
        m = self.subsample_size if self.subsample_size is not None else int(self.fraction * n)
        if self.n_subsamples < 1:
            raise ValueError("n_subsamples must be positive")
        if m < 2:
            raise ValueError("subsample size must be at least 2")
        if m > n:
            raise ValueError(f"subsample size {m} exceeds sample size {n}")
        if EnsembleMode(self.mode) is EnsembleMode.PARTITION and self.n_subsamples * m > n:
            raise ValueError("partition mode needs n_subsamples * subsample_size <= n")
        return m


def stream(seed, replicate):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, replicate])))


def subsample_indices(n, config):
    """Index arrays of all subsamples, each sorted."""
    m = config.size_for(n)
    if EnsembleMode(config.mode) is EnsembleMode.PARTITION:
        perm = stream(config.seed, 0).permutation(n)
        return [np.sort(perm[r * m:(r + 1) * m]) for r in range(config.n_subsamples)]
    return [np.sort(stream(config.seed, r).permutation(n)[:m]) for r in range(config.n_subsamples)]


def _subsample_grid(grid, y):
    if grid.mode is not GridMode.EXPLICIT:
        return grid
    lo, hi = y.min(), y.max()
    pts = np.asarray(grid.points)
    return GridSpec.explicit(np.union1d([lo, hi], pts[(pts > lo) & (pts < hi)]))


def average_models(models, order=None):
    """Pointwise average of the CDFs of several fitted models.

    The result lives on the union of all grids and all design points; each
    component contributes its own prediction (interpolated or clamped in the
    covariate, right-continuous in the response).
    """
    design = np.unique(np.concatenate([m.design_points for m in models]))
    grid = np.unique(np.concatenate([m.grid for m in models]))
    total = np.zeros((design.size, grid.size))
    for m in models:
        rows = m.cdf_rows(design)
        idx = np.searchsorted(m.grid, grid, side="right") - 1
        total += np.where(idx >= 0, rows[:, np.maximum(idx, 0)], 0.0)
    cum = np.minimum(total / len(models), 1.0)
    cum[:, -1] = 1.0
    return FittedModel(order if order is not None else models[0].order, design, grid, cum)


def ensemble_fit(x, y, order, grid=GridSpec(), config=EnsembleConfig()):
    """Fit ``order`` on every subsample and average the conditional CDFs."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    models = []
    for idx in subsample_indices(x.size, config):
        sample = group_xy(x[idx], y[idx])
        models.append(fit(sample, order, _subsample_grid(grid, y[idx])))
    return average_models(models, Order(order))
