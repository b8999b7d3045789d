"""Composite wealth distribution: empirical body below ``w0``, Pareto tail above.

A point exactly at ``w0`` always belongs to the body.

Top shares use the wealth-weighted body sums ``sum w_i n(w_i) / N``, so the
closed forms equal the ratio of first-moment integrals over the composite
distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .data import RichList, WeightedSample
from .density import KernelDensity
from .errors import (
    ConfigurationError,
    DegenerateTailError,
    DomainError,
    InfeasibleRescaleError,
    InfiniteMeanError,
    InsufficientDataError,
    NoRootError,
)
from .pareto import ParetoTail, partial_mean, quantile, tail_mass

__all__ = [
    "NORMALIZATIONS",
    "CompositeModel",
    "ShareResult",
    "normalize_bach",
    "normalize_eckerstorfer",
    "normalize_richlist",
    "build_model",
    "continuity_gap",
    "solve_w0",
    "w0_trace",
    "percentile",
    "top_share",
]

NORMALIZATIONS = ("bach", "eckerstorfer", "richlist")


@dataclass(frozen=True, eq=False)
class CompositeModel:
    """Body sample (``w <= w0``), Pareto tail, and the household total.

    ``total`` is ``N`` for the survey-based normalizations and ``N'`` for
    the rich-list normalization.
    """

    body: WeightedSample | None
    tail: ParetoTail
    total: float
    normalization: str
    beta_prime: float | None = None

    @property
    def w0(self) -> float:
        return self.tail.w0

    @property
    def alpha(self) -> float:
        return self.tail.alpha

    @property
    def body_weight(self) -> float:
        return 0.0 if self.body is None else self.body.total_weight

    @property
    def body_mass(self) -> float:
        return 0.0 if self.body is None else math.fsum(self.body.mass)

    def tail_probability(self) -> float:
        return float(tail_mass(self.tail, self.tail.w0))

    def total_probability(self) -> float:
        return self.body_weight / self.total + self.tail_probability()

    def households_above(self, w):
        """Modelled number of households richer than ``w >= w0``."""
        return self.total * tail_mass(self.tail, w)

    def mean(self) -> float:
        return self.body_mass / self.total + float(partial_mean(self.tail, self.tail.w0))

    def with_w_max(self, w_max) -> "CompositeModel":
        return CompositeModel(self.body, self.tail.with_w_max(w_max), self.total,
                              self.normalization, self.beta_prime)


def _log_c(alpha, w, frac):
    return math.log(alpha) + alpha * math.log(w) + math.log(frac)


def normalize_bach(sample: WeightedSample, alpha, w0, w_max=None) -> CompositeModel:
    """Tail mass equals the survey weight strictly above ``w0``."""
    above = sample.weight_above(w0)
    if above <= 0:
        raise DegenerateTailError(f"no weight above w0={w0:g}")
    n = sample.total_weight
    c = math.exp(_log_c(alpha, w0, above / n))
    return CompositeModel(sample.restrict(hi=w0), ParetoTail(alpha, c, w0, w_max), n, "bach")


def normalize_eckerstorfer(sample: WeightedSample, alpha, w_min, w0, w_max=None) -> CompositeModel:
    """Tail fixed by the weight above ``w_min``; low body weights rescaled by beta'.

    Weights at or below ``w_min`` are multiplied by beta' so the modelled
    household total stays ``N``; weights in ``(w_min, w0]`` are kept.
    """
    if w0 < w_min:
        raise ConfigurationError("eckerstorfer normalization needs w_min <= w0")
    n = sample.total_weight
    above_min = sample.weight_above(w_min)
    if above_min <= 0:
        raise DegenerateTailError(f"no weight above w_min={w_min:g}")
    low = sample.weight_at_or_below(w_min)
    above_w0 = sample.weight_above(w0)
    ratio = (w_min / w0) ** alpha
    if low <= 0:
        raise InfeasibleRescaleError("no body weight at or below w_min to rescale")
    # N - sum_(w_min, w0] n = low + above_w0
    beta = 1.0 + (above_w0 - ratio * above_min) / low
    if not beta > 0:
        raise InfeasibleRescaleError(f"beta'={beta:g}: tail needs more households than the body holds")
    c = math.exp(_log_c(alpha, w_min, above_min / n))
    body = sample.restrict(hi=w0)
    if body is not None:
        scaled = np.where(body.values <= w_min, body.weights * beta, body.weights)
        body = WeightedSample(body.values, scaled)
    return CompositeModel(body, ParetoTail(alpha, c, w0, w_max), n, "eckerstorfer", beta)


def normalize_richlist(sample: WeightedSample, rich: RichList, alpha, w0, w_max=None) -> CompositeModel:
    """Tail anchored to the rich-list household count; total grows to ``N'``."""
    n_tilde = rich.n_tilde
    if n_tilde <= 0:
        raise InsufficientDataError("rich list has no households above w1_count")
    w1 = rich.w1_scale
    if not w0 < w1:
        raise ConfigurationError(f"w0={w0:g} must lie below the rich-list threshold {w1:g}")
    body = sample.restrict(hi=w0)
    body_weight = 0.0 if body is None else body.total_weight
    n_prime = body_weight + n_tilde * (w1 / w0) ** alpha
    c = math.exp(_log_c(alpha, w1, n_tilde / n_prime))
    return CompositeModel(body, ParetoTail(alpha, c, w0, w_max), n_prime, "richlist")


def build_model(sample, alpha, w0, normalization, w_min=None, rich=None, w_max=None) -> CompositeModel:
    if normalization == "bach":
        return normalize_bach(sample, alpha, w0, w_max)
    if normalization == "eckerstorfer":
        if w_min is None:
            raise ConfigurationError("eckerstorfer normalization needs w_min")
        return normalize_eckerstorfer(sample, alpha, w_min, w0, w_max)
    if normalization == "richlist":
        if rich is None:
            raise ConfigurationError("richlist normalization needs a rich list")
        return normalize_richlist(sample, rich, alpha, w0, w_max)
    raise ConfigurationError(f"unknown normalization {normalization!r}; choose from {NORMALIZATIONS}")


# --- transition threshold -----------------------------------------------------------


def continuity_gap(sample: WeightedSample, alpha, w_min, normalization,
                   kde: KernelDensity, rich: RichList | None = None):
    """``h(w) = f_kern(w) - C(w) w**-(alpha+1)`` as a vectorized callable.

    ``C`` is re-derived for every candidate ``w0 = w`` under the chosen
    normalization. For ``bach`` it jumps whenever ``w`` crosses a data point.
    """
    n = sample.total_weight
    a = alpha
    if normalization == "bach":
        counts = np.concatenate([sample.tail_counts, [0.0]])

        def pareto(w):
            above = counts[np.searchsorted(sample.values, w, side="right")]
            return a * above / (n * w)
    elif normalization == "eckerstorfer":
        above_min = sample.weight_above(w_min)
        log_c = _log_c(a, w_min, above_min / n)

        def pareto(w):
            return np.exp(log_c - (a + 1.0) * np.log(w))
    elif normalization == "richlist":
        if rich is None:
            raise ConfigurationError("richlist normalization needs a rich list")
        n_tilde, w1 = rich.n_tilde, rich.w1_scale
        cum = np.concatenate([[0.0], np.cumsum(sample.weights)])

        def pareto(w):
            body = cum[np.searchsorted(sample.values, w, side="right")]
            n_prime = body + n_tilde * (w1 / w) ** a
            return np.exp(np.log(a * n_tilde / n_prime) + a * math.log(w1) - (a + 1.0) * np.log(w))
    else:
        raise ConfigurationError(f"unknown normalization {normalization!r}")

    def gap(w):
        w = np.asarray(w, dtype=float)
        out = kde.evaluate(w) - pareto(w)
        return out if out.ndim else float(out)

    return gap


def _scan_limits(sample, w_min, normalization, rich, w_hi):
    hi = float(sample.values[-1]) if w_hi is None else float(w_hi)
    if normalization == "richlist" and rich is not None:
        hi = min(hi, rich.w1_scale * (1 - 1e-12))
    if not hi > w_min:
        raise NoRootError(f"empty scan interval ({w_min:g}, {hi:g}]")
    return float(w_min), hi


def w0_trace(sample, alpha, w_min, normalization, kde, rich=None, step=None, w_hi=None):
    """Grid of candidate thresholds and the continuity gap on it."""
    lo, hi = _scan_limits(sample, w_min, normalization, rich, w_hi)
    step = kde.bandwidth / 4.0 if step is None else step
    grid = lo + step * np.arange(int(math.floor((hi - lo) / step)) + 1)
    gap = continuity_gap(sample, alpha, w_min, normalization, kde, rich)
    return grid, gap(grid)


def solve_w0(sample: WeightedSample, alpha, w_min, normalization, kde: KernelDensity,
             rich: RichList | None = None, step=None, w_hi=None, rtol=1e-9, block=4096) -> float:
    """Smallest ``w0 > w_min`` where the kernel density meets the Pareto density.

    The gap is scanned from ``w_min`` upward on a grid of ``bandwidth / 4``
    (or ``step``) until its sign changes; the bracket is then refined by
    Brent's method.
    """
    lo, hi = _scan_limits(sample, w_min, normalization, rich, w_hi)
    step = kde.bandwidth / 4.0 if step is None else float(step)
    gap = continuity_gap(sample, alpha, w_min, normalization, kde, rich)
    n_steps = int(math.floor((hi - lo) / step))
    prev_w, prev_h = None, None
    for s in range(0, n_steps + 1, block):
        grid = lo + step * np.arange(s, min(s + block, n_steps + 1))
        h = gap(grid)
        if prev_w is not None:
            grid = np.concatenate([[prev_w], grid])
            h = np.concatenate([[prev_h], h])
        sgn = np.sign(h)
        for k in range(sgn.size - 1):
            if grid[k] <= lo and sgn[k] == 0:
                continue
            if sgn[k + 1] == 0 and grid[k + 1] > lo:
                return float(grid[k + 1])
            if sgn[k] * sgn[k + 1] < 0:
                a, b = grid[k], grid[k + 1]
                return float(brentq(gap, a, b, xtol=rtol * a, rtol=max(rtol, 4.5e-16)))
        prev_w, prev_h = grid[-1], h[-1]
    raise NoRootError(
        f"continuity gap keeps one sign on ({lo:g}, {hi:g}]; widen the scan or fix w0 manually"
    )


# --- percentiles and shares -----------------------------------------------------------


@dataclass(frozen=True)
class ShareResult:
    p: float
    w_p: float
    share: float
    branch: str


def _body_cut(model, p):
    """Index of the first body value in the top ``p`` group (empirical branch)."""
    body = model.body
    if body is None:
        return 0
    before = np.concatenate([[0.0], np.cumsum(body.weights)[:-1]])
    return int(np.searchsorted(before, (1.0 - p) * model.total, side="left"))


def percentile(model: CompositeModel, p) -> tuple[float, str]:
    """Wealth ``w_p`` exceeded by a fraction ``p`` of households."""
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1)")
    if model.tail_probability() >= p:
        return float(quantile(model.tail, p)), "pareto"
    j = _body_cut(model, p)
    if model.body is None or j >= len(model.body):
        return model.w0, "empirical"
    return float(model.body.values[j]), "empirical"


def top_share(model: CompositeModel, p) -> ShareResult:
    """Share of total wealth held by the richest fraction ``p`` of households."""
    if model.alpha <= 1:
        raise InfiniteMeanError("alpha <= 1: total wealth is infinite")
    w_p, branch = percentile(model, p)
    tail_part = float(partial_mean(model.tail, model.w0))
    denom = model.body_mass / model.total + tail_part
    if branch == "pareto":
        num = float(partial_mean(model.tail, w_p))
    else:
        j = _body_cut(model, p)
        top = 0.0 if model.body is None else math.fsum(model.body.mass[j:])
        num = top / model.total + tail_part
    return ShareResult(float(p), w_p, num / denom, branch)
