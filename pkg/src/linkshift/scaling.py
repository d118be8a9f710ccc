"""Top-K tail extraction and power-law / log-normal fitting.

The primary fit reproduces a rank-value construction: ordinary least
squares on (log2 rank, log2 value) with exponent = -slope. A Clauset-style
maximum-likelihood estimator is provided as a clearly separate secondary
estimator for robustness comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import stats

from .detector import TransitionRecord
from .ingest import Link


class TailDirection(Enum):
    MOST_NEGATIVE = "most-negative"
    MOST_POSITIVE = "most-positive"


@dataclass(frozen=True)
class TailSelection:
    values: tuple[float, ...]       # absolute values, descending
    links: tuple[tuple[int, Link], ...]  # (eval_year, link) aligned with values
    direction: TailDirection
    truncated: bool                 # True when fewer than k records existed


@dataclass(frozen=True)
class TailFit:
    k: int
    exponent: float
    intercept: float
    r2: float
    direction: TailDirection | None = None


@dataclass(frozen=True)
class MleTailFit:
    alpha: float
    xmin: float
    n: int


@dataclass(frozen=True)
class LognormalFit:
    mu: float
    sigma: float
    quantile_r2: float


class DegenerateTailError(ValueError):
    pass


def top_tail(
    records: Sequence[TransitionRecord],
    k: int,
    direction: TailDirection = TailDirection.MOST_NEGATIVE,
    field: str = "u",
) -> TailSelection:
    """The k records with the most negative (or most positive) value.

    Returned as absolute values sorted descending; ties broken by canonical
    (eval_year, citing, cited) order. Asking for more records than exist
    returns the whole tail with the truncated flag set.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    sign = 1.0 if direction is TailDirection.MOST_NEGATIVE else -1.0
    keyed = sorted(records, key=lambda r: (sign * getattr(r, field), r.eval_year, r.link))
    truncated = k > len(keyed)
    chosen = keyed[: min(k, len(keyed))]
    return TailSelection(
        values=tuple(abs(getattr(r, field)) for r in chosen),
        links=tuple((r.eval_year, r.link) for r in chosen),
        direction=direction,
        truncated=truncated,
    )


def fit_powerlaw(
    values: Sequence[float],
    direction: TailDirection | None = None,
) -> TailFit:
    """OLS on (log2 rank, log2 value); exponent is the slope magnitude."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 10:
        raise ValueError("tail must contain at least 10 values")
    if np.any(arr <= 0):
        raise ValueError("tail values must be positive")
    x = np.log2(np.arange(1, arr.size + 1, dtype=float))
    y = np.log2(arr)
    xm = x.mean()
    ym = y.mean()
    dx = x - xm
    dy = y - ym
    sxx = float(np.dot(dx, dx))
    slope = float(np.dot(dx, dy)) / sxx
    intercept = ym - slope * xm
    resid = dy - slope * dx
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(dy, dy))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return TailFit(k=arr.size, exponent=-slope, intercept=float(intercept), r2=r2, direction=direction)


def fit_powerlaw_mle(values: Sequence[float], xmin: float | None = None) -> MleTailFit:
    """Continuous maximum-likelihood exponent: alpha = 1 + n / sum(ln(x/xmin)).

    Secondary estimator; not comparable to the rank-value exponent, which
    describes the rank-size construction rather than the density.
    """
    arr = np.asarray(values, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("values must be positive")
    if xmin is None:
        xmin = float(arr.min())
    tail = arr[arr >= xmin]
    if tail.size < 10:
        raise ValueError("too few values at or above xmin")
    log_ratio = np.log(tail / xmin)
    s = float(log_ratio.sum())
    if s <= 0:
        raise DegenerateTailError("all values equal xmin; exponent undefined")
    alpha = 1.0 + tail.size / s
    return MleTailFit(alpha=alpha, xmin=xmin, n=int(tail.size))


def fit_lognormal(values: Sequence[float]) -> LognormalFit:
    """Moment fit of a log-normal: mu, sigma from the natural logs, plus the
    r^2 of a Q-Q regression of empirical against model quantiles."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 10:
        raise ValueError("tail must contain at least 10 values")
    if np.any(arr <= 0):
        raise ValueError("values must be positive")
    logs = np.log(arr)
    mu = float(logs.mean())
    sigma = float(logs.std(ddof=1))
    if sigma <= 1e-12 * max(1.0, abs(mu)) or not math.isfinite(sigma):
        raise DegenerateTailError("zero variance in logs; log-normal fit is degenerate")
    n = arr.size
    probs = (np.arange(1, n + 1) - 0.5) / n
    model_q = stats.norm.ppf(probs, loc=mu, scale=sigma)
    empirical_q = np.sort(logs)
    slope, intercept, r, _, _ = stats.linregress(model_q, empirical_q)
    return LognormalFit(mu=mu, sigma=sigma, quantile_r2=float(r * r))
