"""Weighted wealth samples, survey implicates and rich lists.

All containers are immutable once built. Wealth values are kept sorted and
unique; duplicate values are merged by summing their household weights,
because every downstream formula only sees ``(w_i, n(w_i))`` pairs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    AlignmentError,
    ConfigurationError,
    EmptyTailError,
    ParseError,
    ValidationError,
)

__all__ = [
    "WeightedSample",
    "SurveyTable",
    "ImplicateSet",
    "RichList",
    "TailView",
    "load_weighted_csv",
    "write_weighted_csv",
    "read_survey_tables",
    "load_survey",
    "load_richlist_csv",
    "write_richlist_csv",
    "average_implicates",
    "tail_view",
    "combine_survey_richlist",
]


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _merge(values, weights):
    values = np.asarray(values, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    if values.shape != weights.shape:
        raise ValidationError("values and weights differ in length")
    if values.size == 0:
        raise ValidationError("sample is empty")
    if not np.all(np.isfinite(values)):
        raise ValidationError("wealth values must be finite")
    if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
        raise ValidationError("weights must be finite and positive")
    uniq, inverse = np.unique(values, return_inverse=True)
    if uniq.size == values.size:
        order = np.argsort(values, kind="stable")
        return values[order], weights[order]
    merged = np.zeros(uniq.size)
    np.add.at(merged, inverse, weights)
    return uniq, merged


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """Sorted unique wealth values with positive household weights.

    Parameters
    ----------
    values : array_like
        Wealth values. Need not be sorted or unique.
    weights : array_like, optional
        Household weights ``n(w_i)``; defaults to one per value.
    gapped : bool
        Marks data assembled from disjoint sources (survey plus rich list),
        for which only the maximum likelihood exponent estimate is sound.
    """

    values: np.ndarray
    weights: np.ndarray = None
    gapped: bool = False

    def __post_init__(self):
        w = np.ones(np.size(self.values)) if self.weights is None else self.weights
        values, weights = _merge(self.values, w)
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "weights", _readonly(weights))

    def __len__(self):
        return self.values.size

    @cached_property
    def total_weight(self) -> float:
        return math.fsum(self.weights)

    @cached_property
    def tail_counts(self) -> np.ndarray:
        """``N(w_i) = sum_{w_j >= w_i} n(w_j)`` for every stored value."""
        # accumulate from the top so that small tail counts stay exact
        counts = np.cumsum(self.weights[::-1])[::-1]
        return _readonly(counts)

    @cached_property
    def mass(self) -> np.ndarray:
        """Wealth mass ``w_i * n(w_i)``."""
        return _readonly(self.values * self.weights)

    def index_at_or_above(self, w) -> int:
        return int(np.searchsorted(self.values, w, side="left"))

    def index_above(self, w) -> int:
        return int(np.searchsorted(self.values, w, side="right"))

    def weight_above(self, w, inclusive=False) -> float:
        i = self.index_at_or_above(w) if inclusive else self.index_above(w)
        return math.fsum(self.weights[i:])

    def weight_at_or_below(self, w) -> float:
        return math.fsum(self.weights[: self.index_above(w)])

    def restrict(self, lo=-np.inf, hi=np.inf) -> "WeightedSample | None":
        """Sub-sample with ``lo <= w <= hi``; ``None`` when nothing is left."""
        i = self.index_at_or_above(lo)
        j = self.index_above(hi)
        if j <= i:
            return None
        return WeightedSample(self.values[i:j], self.weights[i:j], gapped=self.gapped)

    def weighted_median(self) -> float:
        cum = np.cumsum(self.weights)
        return float(self.values[np.searchsorted(cum, 0.5 * cum[-1], side="left")])

    def expanded(self) -> np.ndarray:
        """Repeat each value ``n(w_i)`` times; weights must be integers."""
        reps = np.rint(self.weights).astype(int)
        if not np.allclose(reps, self.weights):
            raise ValidationError("expanded() requires integer weights")
        return np.repeat(self.values, reps)


@dataclass(frozen=True, eq=False)
class TailView:
    """The part of a sample at or above ``w_min`` with its tail counts."""

    source: WeightedSample
    w_min: float
    start: int

    @property
    def values(self) -> np.ndarray:
        return self.source.values[self.start:]

    @property
    def weights(self) -> np.ndarray:
        return self.source.weights[self.start:]

    @property
    def counts(self) -> np.ndarray:
        return self.source.tail_counts[self.start:]

    @property
    def n_min(self) -> float:
        """``N(w_min)``."""
        return float(self.source.tail_counts[self.start])

    @property
    def gapped(self) -> bool:
        return self.source.gapped

    def __len__(self):
        return self.source.values.size - self.start

    def count(self, w) -> float:
        """``N(w)`` for arbitrary ``w >= w_min`` (right-continuous step)."""
        i = self.source.index_at_or_above(w)
        if i >= len(self.source):
            return 0.0
        return float(self.source.tail_counts[i])


def tail_view(sample: WeightedSample, w_min) -> TailView:
    """Tail of ``sample`` with ``w_i >= w_min``, inclusive at the threshold."""
    i = sample.index_at_or_above(w_min)
    if i >= len(sample):
        raise EmptyTailError(f"no values at or above w_min={w_min!r}")
    return TailView(sample, float(w_min), i)


# --- survey implicates --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SurveyTable:
    """One imputed data set, one row per household, in file order."""

    households: tuple
    wealth: np.ndarray
    weights: np.ndarray

    def to_sample(self) -> WeightedSample:
        return WeightedSample(self.wealth, self.weights)


@dataclass(frozen=True, eq=False)
class ImplicateSet:
    implicates: tuple
    averaged: WeightedSample

    def __len__(self):
        return len(self.implicates)

    def variants(self):
        """``(label, sample)`` pairs: each implicate, then the average."""
        out = [(str(i + 1), s) for i, s in enumerate(self.implicates)]
        out.append(("avg", self.averaged))
        return out


def average_implicates(tables) -> ImplicateSet:
    """Average each household's wealth over all implicates.

    Households are matched by identifier. Weights must agree across implicates
    since imputation only touches wealth.
    """
    tables = list(tables)
    if not tables:
        raise ValidationError("no implicate tables given")
    ref = tables[0]
    order = {h: k for k, h in enumerate(ref.households)}
    if len(order) != len(ref.households):
        raise AlignmentError("duplicate household identifiers in implicate 1")
    stacked = np.empty((len(tables), len(ref.households)))
    for t, table in enumerate(tables):
        if len(table.households) != len(order) or set(table.households) != set(order):
            raise AlignmentError(f"implicate {t + 1} covers a different household set")
        idx = np.array([order[h] for h in table.households])
        w = np.empty(len(order))
        w[idx] = table.weights
        if not np.allclose(w, ref.weights, rtol=1e-12, atol=0):
            raise AlignmentError(f"implicate {t + 1} carries different household weights")
        stacked[t, idx] = table.wealth
    averaged = WeightedSample(stacked.mean(axis=0), ref.weights)
    return ImplicateSet(tuple(t.to_sample() for t in tables), averaged)


# --- rich list ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RichList:
    """Externally compiled list of the wealthiest households.

    ``w1_count`` is the threshold at which households are counted and
    ``w1_scale`` the wealth used in the ``w_1**alpha`` factor of the
    normalization; a conservative choice puts ``w1_scale`` a gap below
    ``w1_count``.
    """

    wealth: np.ndarray
    households: np.ndarray
    w1_count: float = None
    w1_scale: float = None

    def __post_init__(self):
        wealth = np.asarray(self.wealth, dtype=float).ravel()
        hh = np.asarray(self.households, dtype=float).ravel()
        if wealth.shape != hh.shape:
            raise ValidationError("wealth and households differ in length")
        if wealth.size and (np.any(wealth <= 0) or not np.all(np.isfinite(wealth))):
            raise ValidationError("rich-list wealth must be positive")
        if hh.size and (np.any(hh <= 0) or not np.allclose(hh, np.rint(hh))):
            raise ValidationError("household counts must be positive integers")
        order = np.argsort(-wealth, kind="stable")
        object.__setattr__(self, "wealth", _readonly(wealth[order]))
        object.__setattr__(self, "households", _readonly(np.rint(hh[order])))
        w1c = self.w1_count
        if w1c is None:
            w1c = float(wealth.min()) if wealth.size else 0.0
        w1s = w1c if self.w1_scale is None else self.w1_scale
        if w1s > w1c:
            raise ValidationError("w1_scale must not exceed w1_count")
        object.__setattr__(self, "w1_count", float(w1c))
        object.__setattr__(self, "w1_scale", float(w1s))

    def __len__(self):
        return self.wealth.size

    @property
    def counted(self):
        """Entries with wealth >= ``w1_count`` as ``(wealth, households)``."""
        keep = self.wealth >= self.w1_count
        return self.wealth[keep], self.households[keep]

    @property
    def n_tilde(self) -> float:
        """Number of households with wealth >= ``w1_count``."""
        return math.fsum(self.counted[1])

    def w_max_estimate(self) -> float:
        """Highest value plus half the distance to the second highest."""
        if self.wealth.size == 0:
            raise ValidationError("rich list is empty")
        if self.wealth.size == 1:
            return float(self.wealth[0])
        top, second = self.wealth[0], self.wealth[1]
        return float(top + 0.5 * (top - second))

    def with_thresholds(self, w1_count, w1_scale=None) -> "RichList":
        return RichList(self.wealth, self.households, w1_count, w1_scale)

    def to_sample(self) -> WeightedSample | None:
        w, hh = self.counted
        if w.size == 0:
            return None
        return WeightedSample(w, hh)


def combine_survey_richlist(survey: TailView, rich: RichList) -> WeightedSample:
    """Concatenate a survey tail with the counted rich-list households.

    The rich list must lie entirely above the survey; a gap in between is
    expected. The result is flagged ``gapped``.
    """
    sv, sw = survey.values, survey.weights
    rw, rh = rich.counted
    if rw.size == 0:
        return WeightedSample(sv, sw, gapped=survey.gapped)
    if rw.min() < sv.max():
        raise ConfigurationError(
            f"rich list (min {rw.min():g}) overlaps survey range (max {sv.max():g})"
        )
    return WeightedSample(np.concatenate([sv, rw]), np.concatenate([sw, rh]), gapped=True)


# --- CSV I/O -------------------------------------------------------------------


def _open_rows(path):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: file is empty") from None
        header = [h.strip().lower() for h in header]
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            rows.append((reader.line_num, row))
    return header, rows


def _column(header, name, required=True):
    if name is None:
        return None
    if name in header:
        return header.index(name)
    if required:
        raise ValidationError(f"missing column {name!r} (have {header})")
    return None


def _float(row, idx, line, name):
    try:
        v = float(row[idx])
    except (IndexError, ValueError):
        raise ParseError(f"cannot parse {name} from {row!r}", line) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite {name} {row[idx]!r}", line)
    return v


def read_survey_tables(path, wealth_col="wealth", weight_col="weight",
                       implicate_col="implicate", household_col="household"):
    """Read a survey CSV into one :class:`SurveyTable` per implicate.

    Without a household column, rows are matched across implicates by
    their order of appearance within each implicate.
    """
    header, rows = _open_rows(path)
    iw = _column(header, wealth_col)
    iwt = _column(header, weight_col, required=False)
    iimp = _column(header, implicate_col, required=False)
    ihh = _column(header, household_col, required=False)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    groups = {}
    for line, row in rows:
        w = _float(row, iw, line, wealth_col)
        n = 1.0 if iwt is None else _float(row, iwt, line, weight_col)
        if n <= 0:
            raise ValidationError(f"line {line}: non-positive weight {n!r}")
        imp = 1
        if iimp is not None:
            try:
                imp = int(row[iimp])
            except (IndexError, ValueError):
                raise ParseError(f"bad implicate index in {row!r}", line) from None
        g = groups.setdefault(imp, ([], [], []))
        hh = row[ihh].strip() if ihh is not None else len(g[0])
        g[0].append(hh)
        g[1].append(w)
        g[2].append(n)
    return [
        SurveyTable(tuple(h), np.asarray(w), np.asarray(n))
        for _, (h, w, n) in sorted(groups.items())
    ]


def load_survey(path, **kwargs) -> ImplicateSet:
    """Load a survey file; a file without implicates yields a one-element set."""
    return average_implicates(read_survey_tables(path, **kwargs))


def load_weighted_csv(path, wealth_col="wealth", weight_col="weight") -> WeightedSample:
    """Load ``wealth[,weight]`` rows into a merged, sorted sample."""
    tables = read_survey_tables(path, wealth_col, weight_col, implicate_col=None, household_col=None)
    t = tables[0]
    return WeightedSample(t.wealth, t.weights)


def write_weighted_csv(sample: WeightedSample, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["wealth", "weight"])
        for w, n in zip(sample.values, sample.weights):
            out.writerow([repr(float(w)), repr(float(n))])


def load_richlist_csv(path, w1_count=None, w1_scale=None) -> RichList:
    header, rows = _open_rows(path)
    iw = _column(header, "wealth")
    ih = _column(header, "households")
    wealth, hh = [], []
    for line, row in rows:
        wealth.append(_float(row, iw, line, "wealth"))
        h = _float(row, ih, line, "households")
        if h <= 0 or h != int(h):
            raise ValidationError(f"line {line}: households must be a positive integer")
        hh.append(h)
    return RichList(np.asarray(wealth), np.asarray(hh), w1_count, w1_scale)


def write_richlist_csv(rich: RichList, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["wealth", "households"])
        for w, h in zip(rich.wealth, rich.households):
            out.writerow([repr(float(w)), int(h)])
