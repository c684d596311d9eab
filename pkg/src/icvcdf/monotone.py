"""Weighted monotone least-squares regression.

The production path is the pool-adjacent-violators algorithm (PAVA). A
compiled kernel is used when available; setting ``ICVCDF_PURE_PYTHON=1``
before import forces the pure-Python implementation.
"""

import enum
import os

import numpy as np

from icvcdf import _pava_py

if os.environ.get("ICVCDF_PURE_PYTHON", "") not in ("", "0"):
    _kernels = _pava_py
else:
    try:
        from icvcdf import _pava as _kernels
    except ImportError:  # extension not built
        _kernels = _pava_py

BACKEND = "compiled" if _kernels is not _pava_py else "python"


class Direction(enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"


def _validate(values, weights):
    z = np.ascontiguousarray(values, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("values must be a non-empty 1-d sequence")
    if weights is None:
        w = np.ones_like(z)
    else:
        w = np.ascontiguousarray(weights, dtype=np.float64)
        if w.shape != z.shape:
            raise ValueError("values and weights must have equal length")
    if not np.all(np.isfinite(z)):
        raise ValueError("values must be finite")
    if not (np.all(np.isfinite(w)) and np.all(w > 0)):
        raise ValueError("weights must be finite and strictly positive")
    return z, w


def monotone_fit(values, weights=None, direction=Direction.INCREASING):
    """Weighted least-squares projection onto monotone sequences.

    Parameters
    ----------
    values : array_like, shape (d,)
    weights : array_like, shape (d,), optional
        Strictly positive weights; unit weights if omitted.
    direction : Direction
        ``INCREASING`` for isotonic, ``DECREASING`` for antitonic regression.

    Returns
    -------
    numpy.ndarray
        The unique minimizer of ``sum(w * (eta - values)**2)`` over monotone
        ``eta``.
    """
    z, w = _validate(values, weights)
    return _kernels.pava(z, w, Direction(direction) is Direction.INCREASING)


def monotone_fit_rows(values, weights, direction):
    """Apply :func:`monotone_fit` to every row of a 2-d array.

    No validation beyond shapes; callers pass arrays they built themselves.
    """
    z = np.ascontiguousarray(values, dtype=np.float64)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if z.ndim != 2 or w.shape != (z.shape[1],):
        raise ValueError("shape mismatch between rows and weights")
    return _kernels.pava_rows(z, w, Direction(direction) is Direction.INCREASING)


def minmax_fit(values, weights=None, direction=Direction.DECREASING):
    """Monotone regression through the explicit min-max formula.

    For the antitonic case, element ``i`` is the minimum over ``k <= i`` of
    the maximum over ``j >= k`` of the weighted mean of ``values[k..j]``.
    The isotonic case follows by negation. Quadratic cost; a reference only.
    """
    z, w = _validate(values, weights)
    if Direction(direction) is Direction.INCREASING:
        return -minmax_fit(-z, w, Direction.DECREASING)
    d = z.size
    cw = np.concatenate(([0.0], np.cumsum(w)))
    cwz = np.concatenate(([0.0], np.cumsum(w * z)))
    best_from = np.empty(d)
    for k in range(d):
        j = np.arange(k, d)
        best_from[k] = np.max((cwz[j + 1] - cwz[k]) / (cw[j + 1] - cw[k]))
    return np.minimum.accumulate(best_from)
