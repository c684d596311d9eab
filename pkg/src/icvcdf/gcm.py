"""Piecewise-linear functions and their greatest convex minorants.

The minorant is represented through its right-hand slopes, obtained as the
isotonic regression of the chord slopes weighted by the knot spacings.
"""

from dataclasses import dataclass

import numpy as np

from icvcdf.monotone import Direction, monotone_fit


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """Linear interpolation of ``values`` at strictly increasing ``knots``.

    Outside the knot range the function is constant at ``values[0]`` on the
    left when ``left_constant`` is set, and continues with
    ``right_slope`` on the right.
    """

    knots: np.ndarray
    values: np.ndarray
    left_constant: bool = True
    right_slope: float = 0.0

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if knots.ndim != 1 or knots.shape != values.shape:
            raise ValueError("knots and values must be 1-d of equal length")
        if knots.size < 2:
            raise ValueError("at least two knots are required")
        if not (np.all(np.isfinite(knots)) and np.all(np.isfinite(values))):
            raise ValueError("knots and values must be finite")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    def __call__(self, y):
        y = np.asarray(y, dtype=np.float64)
        out = np.interp(y, self.knots, self.values)
        right = y > self.knots[-1]
        out = np.where(right, self.values[-1] + self.right_slope * (y - self.knots[-1]), out)
        if not self.left_constant:
            first = (self.values[1] - self.values[0]) / (self.knots[1] - self.knots[0])
            left = y < self.knots[0]
            out = np.where(left, self.values[0] + first * (y - self.knots[0]), out)
        return out

    def chord_slopes(self):
        return np.diff(self.values) / np.diff(self.knots)


def gcm_slopes(f):
    """Right-hand slopes of the greatest convex minorant of ``f``.

    Returns ``(slopes, weights)``: the slope on each interval
    ``[t_j, t_{j+1})`` and the interval widths used as regression weights.
    """
    widths = np.diff(f.knots)
    slopes = monotone_fit(f.chord_slopes(), widths, Direction.INCREASING)
    return slopes, widths


def gcm_knot_values(f):
    """Values of the greatest convex minorant at the knots of ``f``."""
    slopes, widths = gcm_slopes(f)
    return f.values[0] + np.concatenate(([0.0], np.cumsum(slopes * widths)))


def gcm_evaluate(f, y):
    """Evaluate the greatest convex minorant of ``f`` on ``[t_1, t_k]``.

    The minorant always touches ``f`` at the left endpoint, which anchors
    the integration of the slopes.
    """
    y = np.asarray(y, dtype=np.float64)
    if np.any(y < f.knots[0]) or np.any(y > f.knots[-1]):
        raise ValueError("evaluation points must lie within the knot range")
    return np.interp(y, f.knots, gcm_knot_values(f))


def is_convex(f, rtol=1e-12):
    s = f.chord_slopes()
    scale = max(1.0, float(np.max(np.abs(s))))
    return bool(np.all(np.diff(s) >= -rtol * scale))


def marshall_gap(f, h):
    """Sup-norm distances of ``f`` and of its convex minorant to convex ``h``.

    Both functions must share the same endpoints. Since all three functions
    are piecewise linear, the supremum is attained on the union of knots.
    Returns ``(gap_f, gap_gcm)``; Marshall's inequality guarantees
    ``gap_gcm <= gap_f``.
    """
    if not is_convex(h):
        raise ValueError("h must be convex")
    if f.knots[0] != h.knots[0] or f.knots[-1] != h.knots[-1]:
        raise ValueError("f and h must be defined on the same interval")
    grid = np.union1d(f.knots, h.knots)
    hv = h(grid)
    gap_f = float(np.max(np.abs(f(grid) - hv)))
    gap_gcm = float(np.max(np.abs(gcm_evaluate(f, grid) - hv)))
    return gap_f, gap_gcm
