"""Conditional distribution estimation under increasing concave and
increasing convex stochastic order constraints."""

from icvcdf.monotone import BACKEND, Direction, minmax_fit, monotone_fit

__version__ = "0.1.0"
