"""Closed-form mathematics of a (possibly truncated) Pareto upper tail.

The tail density is ``c * w**-(alpha + 1)`` on ``(w0, w_max]``. ``c`` is not
forced to normalize the tail to one: in the composite model the tail carries
only the probability mass that lies above ``w0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfiniteMeanError, ValidationError

__all__ = [
    "ParetoTail",
    "density",
    "tail_mass",
    "partial_mean",
    "quantile",
    "sample",
    "wijk_mean",
]

# beyond this exponent * log(w), powers are formed in log space
_LOG_SWITCH = 600.0


def _scaled_power(c, w, e):
    """``c * w**(-e)`` without overflow in either factor."""
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore"):
        lw = np.log(w)
    if np.all(np.abs(e * lw) <= _LOG_SWITCH):
        out = c * w ** (-e)
    else:
        out = np.exp(math.log(c) - e * lw)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ParetoTail:
    alpha: float
    c: float
    w0: float
    w_max: float | None = None

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValidationError(f"alpha must be positive, got {self.alpha!r}")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValidationError(f"c must be positive, got {self.c!r}")
        if not self.w0 > 0:
            raise ValidationError(f"w0 must be positive, got {self.w0!r}")
        if self.w_max is not None and not self.w_max > self.w0:
            raise ValidationError("w_max must exceed w0")

    @classmethod
    def normalized(cls, alpha, w0, mass=1.0, w_max=None):
        """Tail whose untruncated mass above ``w0`` equals ``mass``."""
        return cls(alpha, alpha * mass * w0 ** alpha, w0, w_max)

    @property
    def truncated(self) -> bool:
        return self.w_max is not None

    def untruncated(self) -> "ParetoTail":
        return ParetoTail(self.alpha, self.c, self.w0)

    def with_w_max(self, w_max) -> "ParetoTail":
        return ParetoTail(self.alpha, self.c, self.w0, w_max)


def density(tail: ParetoTail, w):
    """Tail density; zero outside ``(w0, w_max]``."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("density requires w > 0")
    inside = w > tail.w0
    if tail.w_max is not None:
        inside &= w <= tail.w_max
    out = np.where(inside, _scaled_power(tail.c, w, tail.alpha + 1.0), 0.0)
    return out if out.ndim else float(out)


def tail_mass(tail: ParetoTail, w):
    """Probability mass of the tail above ``w``."""
    w = np.asarray(w, dtype=float)
    if np.any(w < tail.w0):
        raise DomainError(f"tail_mass requires w >= w0={tail.w0:g}")
    k = tail.c / tail.alpha
    out = _scaled_power(k, w, tail.alpha)
    if tail.w_max is not None:
        out = np.where(w < tail.w_max, out - _scaled_power(k, tail.w_max, tail.alpha), 0.0)
        out = out if np.ndim(out) else float(out)
    return out


def partial_mean(tail: ParetoTail, w):
    """Wealth mass ``int_w^{w_max} x f(x) dx`` held above ``w``."""
    if tail.alpha <= 1:
        raise InfiniteMeanError(f"alpha={tail.alpha} <= 1: the mean is infinite")
    w = np.asarray(w, dtype=float)
    if np.any(w < tail.w0):
        raise DomainError(f"partial_mean requires w >= w0={tail.w0:g}")
    e = tail.alpha - 1.0
    k = tail.c / e
    out = _scaled_power(k, w, e)
    if tail.w_max is not None:
        out = np.where(w < tail.w_max, out - _scaled_power(k, tail.w_max, e), 0.0)
        out = out if np.ndim(out) else float(out)
    return out


def quantile(tail: ParetoTail, p):
    """Wealth ``w_p`` above which the tail holds probability mass ``p``."""
    p = np.asarray(p, dtype=float)
    top = tail_mass(tail, tail.w0)
    if np.any(p <= 0) or np.any(p > top * (1 + 1e-12)):
        raise DomainError(f"p must lie in (0, {top:g}]")
    a = tail.alpha
    # solve (c/a) * (w**-a - w_max**-a) = p in log space
    log_k = math.log(tail.c / a)
    x = np.log(p) - log_k
    if tail.w_max is not None:
        x = np.logaddexp(x, -a * math.log(tail.w_max))
    w = np.exp(-x / a)
    w = np.maximum(w, tail.w0)
    return w if w.ndim else float(w)


def sample(alpha, w_min_gen, n, seed=None):
    """Draw ``n`` Pareto(alpha) values above ``w_min_gen`` by inverse transform.

    ``seed`` may be an int, a :class:`numpy.random.SeedSequence` or a
    :class:`numpy.random.Generator`.
    """
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    if n < 1:
        raise ValidationError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = 1.0 - rng.random(n)  # (0, 1]
    return w_min_gen * u ** (-1.0 / alpha)


def wijk_mean(tail: ParetoTail, w):
    """Mean wealth above ``w``: ``alpha / (alpha - 1) * w``."""
    if tail.alpha <= 1:
        raise InfiniteMeanError(f"alpha={tail.alpha} <= 1: the mean is infinite")
    if tail.w_max is not None:
        raise DomainError("van der Wijk's law holds for untruncated tails only")
    w = np.asarray(w, dtype=float)
    if np.any(w < tail.w0):
        raise DomainError(f"wijk_mean requires w >= w0={tail.w0:g}")
    out = tail.alpha / (tail.alpha - 1.0) * w
    return out if out.ndim else float(out)
