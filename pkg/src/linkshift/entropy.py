"""Information-theoretic core: Shannon entropy, KL divergence, and the
forward/backward path-dependency indicators.

All logarithms are base 2; results are in bits. The per-cell indicators for
a triple of relative frequencies (p, p', q) are

    u = q*log2(q/p') + p'*log2(p'/p) - q*log2(q/p)
    v = p*log2(p/p') + p'*log2(p'/q) - p*log2(p/q)

with u < 0 flagging a critical (path-dependent) transition along the arrow
of time and v < 0 the same against it. Both are algebraically equivalent to
closed forms u = (p'-q)*log2(p'/p) and v = (p'-p)*log2(p'/q), and both are
negative exactly when (p, p', q) is strictly monotone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

SUM_TOL = 1e-9

MBIT = 1e-3  # one millibit, in bits


class Monotone(Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    NON_MONOTONE = "non-monotone"
    TIED = "tied"


@dataclass(frozen=True)
class CellIndicators:
    """All per-cell divergence terms for one (p, p', q) triple, in bits."""

    i_qp: float       # q*log2(q/p)
    i_qpp: float      # q*log2(q/p')
    i_ppp: float      # p'*log2(p'/p)
    i_pq: float       # p*log2(p/q)
    i_ppq: float      # p'*log2(p'/q)
    i_ppr: float      # p*log2(p/p')
    u: float
    v: float
    improve_fwd: float  # q*log2(p'/p)
    improve_bwd: float  # p*log2(p'/q)


@dataclass(frozen=True)
class Classification:
    critical_fwd: bool
    critical_bwd: bool
    improved_fwd: bool
    improved_bwd: bool
    monotone: Monotone


def shannon_entropy(dist: Sequence[float]) -> float:
    """H = -sum(p*log2 p) in bits; zero terms contribute nothing."""
    arr = np.asarray(dist, dtype=float)
    if np.any(arr < 0):
        raise ValueError("probabilities must be non-negative")
    total = float(arr.sum())
    if abs(total - 1.0) > SUM_TOL:
        raise ValueError(f"distribution sums to {total}, not 1")
    nz = arr[arr > 0]
    return float(-(nz * np.log2(nz)).sum())


def kl_divergence(q: Sequence[float], p: Sequence[float]) -> float:
    """I(q:p) = sum(q*log2(q/p)) in bits.

    q is the posterior, p the prior; the aggregate is non-negative even
    though individual terms can be negative. Undefined (raises) where
    q > 0 with p = 0.
    """
    q_arr = np.asarray(q, dtype=float)
    p_arr = np.asarray(p, dtype=float)
    if q_arr.shape != p_arr.shape:
        raise ValueError("distributions must have the same length")
    if np.any(q_arr < 0) or np.any(p_arr < 0):
        raise ValueError("probabilities must be non-negative")
    for arr, name in ((q_arr, "posterior"), (p_arr, "prior")):
        total = float(arr.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"{name} sums to {total}, not 1")
    support = q_arr > 0
    if np.any(p_arr[support] == 0):
        raise ValueError("divergence undefined: posterior has mass where prior is zero")
    qs = q_arr[support]
    return float((qs * np.log2(qs / p_arr[support])).sum())


def _check_open_unit(value: float, name: str) -> None:
    if not (0.0 < value < 1.0):
        raise ValueError(f"{name} must lie strictly between 0 and 1, got {value}")


def cell_indicators(p: float, p_prime: float, q: float) -> CellIndicators:
    """All divergence terms for one cell's triple of relative frequencies."""
    _check_open_unit(p, "p")
    _check_open_unit(p_prime, "p_prime")
    _check_open_unit(q, "q")
    log2 = math.log2
    i_qp = q * log2(q / p)
    i_qpp = q * log2(q / p_prime)
    i_ppp = p_prime * log2(p_prime / p)
    i_pq = p * log2(p / q)
    i_ppq = p_prime * log2(p_prime / q)
    i_ppr = p * log2(p / p_prime)
    return CellIndicators(
        i_qp=i_qp,
        i_qpp=i_qpp,
        i_ppp=i_ppp,
        i_pq=i_pq,
        i_ppq=i_ppq,
        i_ppr=i_ppr,
        u=i_qpp + i_ppp - i_qp,
        v=i_ppr + i_ppq - i_pq,
        improve_fwd=q * log2(p_prime / p),
        improve_bwd=p * log2(p_prime / q),
    )


def u_closed_form(p: float, p_prime: float, q: float) -> float:
    """(p'-q)*log2(p'/p); algebraically equal to the three-term u."""
    return (p_prime - q) * math.log2(p_prime / p)


def v_closed_form(p: float, p_prime: float, q: float) -> float:
    """(p'-p)*log2(p'/q); algebraically equal to the three-term v."""
    return (p_prime - p) * math.log2(p_prime / q)


def classify(
    ind: CellIndicators,
    p: float,
    p_prime: float,
    q: float,
    tie_eps: float = 1e-12,
) -> Classification:
    """Sign-based classification of one cell.

    Ties (any pair of frequencies within tie_eps) are non-critical and
    non-improving; all other comparisons are strict.
    """
    if tie_eps < 0:
        raise ValueError("tie_eps must be non-negative")
    tied = (
        abs(p - p_prime) <= tie_eps
        or abs(p_prime - q) <= tie_eps
        or abs(p - q) <= tie_eps
    )
    if tied:
        return Classification(False, False, False, False, Monotone.TIED)
    if p + tie_eps < p_prime and p_prime + tie_eps < q:
        monotone = Monotone.INCREASING
    elif q + tie_eps < p_prime and p_prime + tie_eps < p:
        monotone = Monotone.DECREASING
    else:
        monotone = Monotone.NON_MONOTONE
    return Classification(
        critical_fwd=ind.u < 0,
        critical_bwd=ind.v < 0,
        improved_fwd=ind.improve_fwd > 0,
        improved_bwd=ind.improve_bwd > 0,
        monotone=monotone,
    )


def indicator_arrays(p: np.ndarray, p_prime: np.ndarray, q: np.ndarray):
    """Vectorized (u, v, improve_fwd, improve_bwd) over aligned arrays.

    Uses the same three-term expressions as cell_indicators, so scalar and
    vector paths agree bit for bit.
    """
    p = np.asarray(p, dtype=float)
    pp = np.asarray(p_prime, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any((p <= 0) | (p >= 1) | (pp <= 0) | (pp >= 1) | (q <= 0) | (q >= 1)):
        raise ValueError("all frequencies must lie strictly between 0 and 1")
    u = q * np.log2(q / pp) + pp * np.log2(pp / p) - q * np.log2(q / p)
    v = p * np.log2(p / pp) + pp * np.log2(pp / q) - p * np.log2(p / q)
    improve_fwd = q * np.log2(pp / p)
    improve_bwd = p * np.log2(pp / q)
    return u, v, improve_fwd, improve_bwd
