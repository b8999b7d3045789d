"""Goodness-of-fit of a Pareto tail and data-driven choice of ``w_min``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import WeightedSample, tail_view
from .errors import (
    ConfigurationError,
    DegenerateTailError,
    InsufficientDataError,
)
from .estimators import AlphaEstimate, estimate

__all__ = ["GofResult", "CRITERIA", "ks_stat", "cm_stat", "gof", "select_wmin", "WminScan", "scan_wmin"]

CRITERIA = ("ks", "cm")


@dataclass(frozen=True)
class GofResult:
    criterion: str
    value: float
    w_min: float
    alpha: float


def _ccdf_gap(tail, alpha):
    fit = (tail.values / tail.w_min) ** (-alpha)
    emp = tail.counts / tail.n_min
    return fit - emp


def ks_stat(tail, alpha) -> GofResult:
    """Largest distance between fitted and empirical CCDF at the tail nodes."""
    d = np.abs(_ccdf_gap(tail, alpha))
    return GofResult("ks", float(d.max()), tail.w_min, float(alpha))


def cm_stat(tail, alpha, normalized=True) -> GofResult:
    """Trapezoid-rule Cramer-von Mises area over consecutive tail nodes.

    The squared CCDF gap is weighted by the fitted Pareto density
    ``alpha * w_min**alpha * w**-(alpha+1)``. With ``normalized=False`` the
    bare power ``w**-(alpha+1)`` is used instead; that variant is not scale
    invariant and favours high thresholds when scanning ``w_min``.
    """
    v = tail.values
    if v.size < 2:
        raise InsufficientDataError("CM needs at least 2 tail values")
    if normalized:
        dens = alpha / tail.w_min * (v / tail.w_min) ** (-(alpha + 1.0))
    else:
        dens = v ** (-(alpha + 1.0))
    g = _ccdf_gap(tail, alpha) ** 2 * dens
    value = float(np.sum(np.diff(v) * (g[:-1] + g[1:]) * 0.5))
    return GofResult("cm", value, tail.w_min, float(alpha))


def gof(tail, alpha, criterion, cm_normalized=True) -> GofResult:
    criterion = criterion.lower()
    if criterion == "ks":
        return ks_stat(tail, alpha)
    if criterion == "cm":
        return cm_stat(tail, alpha, cm_normalized)
    raise ConfigurationError(f"unknown criterion {criterion!r}; choose from {CRITERIA}")


@dataclass(frozen=True, eq=False)
class WminScan:
    """Criterion value for every candidate threshold (NaN where the fit failed)."""

    candidates: np.ndarray
    alphas: np.ndarray
    values: np.ndarray
    criterion: str
    method: str

    def best_index(self, rtol=1e-9, atol=1e-15) -> int:
        ok = np.isfinite(self.values)
        if not ok.any():
            raise DegenerateTailError("no candidate threshold produced a valid fit")
        best = self.values[ok].min()
        # ties, up to rounding, go to the smallest threshold
        hit = ok & (self.values <= best + atol + rtol * abs(best))
        return int(np.flatnonzero(hit)[0])


def _default_range(sample):
    lo = sample.weighted_median()
    hi = sample.values[-2] if len(sample) >= 2 else sample.values[-1]
    return lo, hi


def scan_wmin(sample: WeightedSample, method="ml", criterion="ks", search_range=None,
              min_points=10) -> WminScan:
    """Evaluate the criterion at every distinct value in ``search_range``.

    The default range runs from the weighted median to the second largest
    value.
    """
    lo, hi = _default_range(sample) if search_range is None else search_range
    i = sample.index_at_or_above(lo)
    j = sample.index_above(hi)
    cands = np.array(sample.values[i:j])
    if cands.size == 0:
        raise ConfigurationError(f"no candidate thresholds in [{lo:g}, {hi:g}]")
    if cands.size < min_points:
        raise ConfigurationError(
            f"search range holds {cands.size} data points, fewer than {min_points}"
        )
    alphas = np.full(cands.size, np.nan)
    values = np.full(cands.size, np.nan)
    for k, w in enumerate(cands):
        tail = tail_view(sample, w)
        try:
            a = estimate(tail, method).alpha
            values[k] = gof(tail, a, criterion).value
        except (DegenerateTailError, InsufficientDataError, ZeroDivisionError):
            continue
        alphas[k] = a
    return WminScan(cands, alphas, values, criterion.lower(), method)


def select_wmin(sample: WeightedSample, method="ml", criterion="ks", search_range=None,
                min_points=10) -> tuple[float, AlphaEstimate, GofResult]:
    """Threshold among observed values with the best goodness of fit."""
    scan = scan_wmin(sample, method, criterion, search_range, min_points)
    k = scan.best_index()
    w = float(scan.candidates[k])
    tail = tail_view(sample, w)
    est = estimate(tail, method)
    return w, est, gof(tail, est.alpha, criterion)
