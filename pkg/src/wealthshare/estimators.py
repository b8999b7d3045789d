"""Estimators for the Pareto exponent of a weighted tail."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import TailView
from .errors import ConfigurationError, DegenerateTailError, InsufficientDataError

__all__ = ["AlphaEstimate", "METHODS", "alpha_wijk", "alpha_ml", "alpha_reg", "estimate"]

METHODS = ("ml", "reg", "reg_intercept", "wijk")

GAP_WARNING = "estimator assumes a gap-free tail, but the data combines disjoint sources"


@dataclass(frozen=True)
class AlphaEstimate:
    alpha: float
    method: str
    w_min: float
    tail_count: float
    intercept: float | None = None
    warning: str | None = None


def _gap_flag(tail):
    return GAP_WARNING if tail.gapped else None


def alpha_wijk(tail: TailView) -> AlphaEstimate:
    """Invert van der Wijk's law using the weighted tail mean."""
    v, n = tail.values, tail.weights
    if np.count_nonzero(v > tail.w_min) == 0:
        raise DegenerateTailError("all tail mass sits at w_min")
    mass = math.fsum(v * n)
    ratio = tail.w_min * tail.n_min / mass
    if not ratio < 1:
        raise DegenerateTailError("tail mean does not exceed w_min")
    return AlphaEstimate(1.0 / (1.0 - ratio), "wijk", tail.w_min, tail.n_min,
                         warning=_gap_flag(tail))


def alpha_ml(tail: TailView) -> AlphaEstimate:
    """Weighted maximum likelihood (Hill type) estimate.

    Each value counts as if observed ``n(w_i)`` times, so aggregated and
    repeated encodings of the same households give the same result.
    """
    v, n = tail.values, tail.weights
    mean_log = math.fsum(n * np.log(v / tail.w_min)) / tail.n_min
    if not mean_log > 0:
        raise DegenerateTailError("all tail values equal w_min")
    return AlphaEstimate(1.0 / mean_log, "ml", tail.w_min, tail.n_min)


def alpha_reg(tail: TailView, intercept: bool = False) -> AlphaEstimate:
    """Least-squares slope of the log-log empirical CCDF.

    With ``intercept=False`` the line is forced through the origin, which is
    what the Pareto CCDF implies; ``intercept=True`` fits an ordinary
    two-parameter line and returns minus its slope.
    """
    v = tail.values
    if np.count_nonzero(v > tail.w_min) < 2:
        raise InsufficientDataError("need at least 2 distinct values above w_min")
    x = np.log(v / tail.w_min)
    y = np.log(tail.counts / tail.n_min)
    if intercept:
        xm, ym = x.mean(), y.mean()
        dx = x - xm
        slope = np.dot(dx, y - ym) / np.dot(dx, dx)
        return AlphaEstimate(-float(slope), "reg_intercept", tail.w_min, tail.n_min,
                             intercept=float(ym - slope * xm), warning=_gap_flag(tail))
    alpha = -np.dot(x, y) / np.dot(x, x)
    return AlphaEstimate(float(alpha), "reg", tail.w_min, tail.n_min, warning=_gap_flag(tail))


def estimate(tail: TailView, method: str) -> AlphaEstimate:
    """Dispatch by method name (``ml``, ``reg``, ``reg_intercept``, ``wijk``)."""
    method = method.replace("-", "_")
    if method == "ml":
        return alpha_ml(tail)
    if method == "reg":
        return alpha_reg(tail, intercept=False)
    if method == "reg_intercept":
        return alpha_reg(tail, intercept=True)
    if method == "wijk":
        return alpha_wijk(tail)
    raise ConfigurationError(f"unknown estimator {method!r}; choose from {METHODS}")
