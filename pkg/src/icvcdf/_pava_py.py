"""Pure-Python pool-adjacent-violators kernels (fallback for ``_pava``)."""

import math

import numpy as np


def _pava_line(z, w, increasing):
    mean = []
    wsum = []
    size = []
    for zi, wi in zip(z, w):
        mean.append(zi)
        wsum.append(wi)
        size.append(1)
        while len(mean) > 1:
            if increasing:
                if not mean[-2] > mean[-1]:
                    break
            elif not mean[-2] < mean[-1]:
                break
            ww = wsum[-2] + wsum[-1]
            m = (wsum[-2] * mean[-2] + wsum[-1] * mean[-1]) / ww
            s = size[-2] + size[-1]
            del mean[-1], wsum[-1], size[-1]
            mean[-1] = m
            wsum[-1] = ww
            size[-1] = s
    # recompute each pooled block's mean in one exactly rounded pass so the
    # result does not depend on the order in which the block was merged
    out = []
    pos = 0
    for m, s in zip(mean, size):
        if s > 1:
            m = math.fsum(wi * zi for wi, zi in zip(w[pos:pos + s], z[pos:pos + s]))
            m /= math.fsum(w[pos:pos + s])
        # adjacent blocks can be tied up to rounding; keep the output monotone
        if out and (m < out[-1] if increasing else m > out[-1]):
            m = out[-1]
        out.extend([m] * s)
        pos += s
    return out


def pava(values, weights, increasing):
    """Weighted isotonic (or antitonic) regression of a single sequence."""
    z = np.asarray(values, dtype=np.float64).tolist()
    w = np.asarray(weights, dtype=np.float64).tolist()
    return np.array(_pava_line(z, w, bool(increasing)), dtype=np.float64)


def pava_rows(values, weights, increasing):
    """Row-wise PAVA on a matrix sharing one weight vector."""
    values = np.asarray(values, dtype=np.float64)
    out = np.empty_like(values)
    w = np.asarray(weights, dtype=np.float64).tolist()
    for i, row in enumerate(values.tolist()):
        out[i] = _pava_line(row, w, bool(increasing))
    return out
