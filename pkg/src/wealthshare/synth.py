"""Synthetic survey-shaped data with a known Pareto tail.

Real household survey microdata are confidential; these generators produce
files of the same shape (weighted households, five implicates, a top-coded
maximum, a separate rich list) so the whole pipeline can be exercised.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import RichList, SurveyTable, WeightedSample
from .pareto import sample as pareto_sample

__all__ = [
    "exact_ccdf_tail",
    "exact_pareto_sample",
    "SurveySpec",
    "synth_survey",
    "synth_richlist",
    "write_survey_csv",
    "composite_draws",
]


def exact_ccdf_tail(alpha, w_star, n_points=200, ratio=1.05, total=1.0):
    """Nodes ``w_star * ratio**k`` with weights making ``N(w)/N(w_star)`` exactly Pareto."""
    w = w_star * ratio ** np.arange(n_points)
    counts = total * (w / w_star) ** (-alpha)
    weights = counts - np.append(counts[1:], 0.0)
    return w, weights


def exact_pareto_sample(alpha, w_star, n_tail=200, ratio=1.05, n_body=400, tail_total=1000.0,
                        seed=0) -> WeightedSample:
    """Exact-CCDF tail from ``w_star`` on, with a noisy non-Pareto body below.

    The body holds about three quarters of all weight so the weighted median
    lies well below ``w_star``.
    """
    rng = np.random.default_rng(seed)
    tw, tn = exact_ccdf_tail(alpha, w_star, n_tail, ratio, tail_total)
    bw = np.sort(rng.uniform(0.05 * w_star, 0.999 * w_star, n_body))
    bn = rng.uniform(0.5, 1.5, n_body) * (3 * tail_total / n_body)
    return WeightedSample(np.concatenate([bw, tw]), np.concatenate([bn, tn]))


def composite_draws(n, alpha, w0, body_lo, body_level, rng):
    """Draws from a uniform body on ``[body_lo, w0]`` plus a Pareto tail above ``w0``.

    ``body_level`` is the body density relative to the Pareto density at
    ``w0``; values below one put a downward step at the transition.
    Returns ``(draws, tail_fraction)``.
    """
    # tail density at w0 is alpha * q / w0 when the tail carries mass q
    body_mass_per_q = body_level * alpha * (w0 - body_lo) / w0
    q = 1.0 / (1.0 + body_mass_per_q)
    in_tail = rng.random(n) < q
    k = int(in_tail.sum())
    draws = np.empty(n)
    draws[in_tail] = pareto_sample(alpha, w0, k, rng)
    draws[~in_tail] = rng.uniform(body_lo, w0, n - k)
    return draws, q


@dataclass(frozen=True)
class SurveySpec:
    n_households: int = 4000
    population: float = 4.0e7
    alpha: float = 1.5
    w_tail: float = 5.0e5
    tail_fraction: float = 0.05
    body_median: float = 5.0e4
    body_sigma: float = 1.4
    oversample: float = 0.35
    topcode: float | None = 7.6e7
    implicates: int = 5
    imputed_fraction: float = 0.2
    imputation_noise: float = 0.15
    undercount: float = 1.0
    seed: int = 0


def _body_draws(spec, n, rng):
    out = np.empty(0)
    while out.size < n:
        x = spec.body_median * np.exp(spec.body_sigma * rng.standard_normal(2 * n))
        out = np.concatenate([out, x[x < spec.w_tail]])
    return out[:n]


def _tail_draws(spec, n, rng):
    x = pareto_sample(spec.alpha, spec.w_tail, n, rng)
    if spec.topcode is not None:
        bad = x > spec.topcode
        while bad.any():
            x[bad] = pareto_sample(spec.alpha, spec.w_tail, int(bad.sum()), rng)
            bad = x > spec.topcode
    return x


def synth_survey(spec: SurveySpec = SurveySpec()):
    """Implicate tables of an oversampled, weighted survey.

    Tail households (above ``w_tail``) are oversampled and get smaller
    weights. ``undercount < 1`` scales their weights down, mimicking
    differential non-response of the rich.
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(0,)))
    n_tail = int(round(spec.oversample * spec.n_households))
    n_body = spec.n_households - n_tail
    wealth = np.concatenate([_body_draws(spec, n_body, rng), _tail_draws(spec, n_tail, rng)])
    pop_tail = spec.population * spec.tail_fraction
    weights = np.concatenate([
        np.full(n_body, (spec.population - pop_tail) / n_body),
        np.full(n_tail, pop_tail * spec.undercount / n_tail),
    ])
    weights *= rng.uniform(0.7, 1.3, weights.size)
    ids = tuple(f"h{k:06d}" for k in range(wealth.size))
    imputed = rng.random(wealth.size) < spec.imputed_fraction
    tables = []
    for m in range(spec.implicates):
        noise = np.where(imputed, np.exp(spec.imputation_noise * rng.standard_normal(wealth.size)), 1.0)
        w = wealth * noise
        if spec.topcode is not None:
            w = np.minimum(w, spec.topcode)
        tables.append(SurveyTable(ids, w, weights.copy()))
    return tables


def synth_richlist(spec: SurveySpec = SurveySpec(), w1=5.0e8, rounding=1.0e7) -> RichList:
    """Rich list consistent with the population tail of ``spec``.

    Wealth is rounded to ``rounding`` and households sharing a value are
    aggregated into one entry.
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(1,)))
    expected = spec.population * spec.tail_fraction * (w1 / spec.w_tail) ** (-spec.alpha)
    k = max(int(rng.poisson(expected)), 1)
    x = np.maximum(np.round(pareto_sample(spec.alpha, w1, k, rng) / rounding) * rounding, w1)
    vals, counts = np.unique(x, return_counts=True)
    return RichList(vals, counts, w1_count=w1)


def write_survey_csv(tables, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["household", "implicate", "wealth", "weight"])
        for m, t in enumerate(tables, start=1):
            for h, w, n in zip(t.households, t.wealth, t.weights):
                out.writerow([h, m, repr(float(w)), repr(float(n))])
