"""Spectral-efficiency metrics computed from cell statistics.

Every function here takes :class:`~biaspower.partition.CellStats` and a user
count ``m``. ``approx=True`` swaps the exact ``E[1{M>0}/M]`` sum for the
constant-time ``E[1/(M+1)]`` surrogate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .occupancy import (
    expected_inverse_occupancy,
    expected_inverse_occupancy_approx,
    occupied_indicator_covariance,
)
from .partition import CellStats

VARIANCE_CLAMP = 1e-10


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class MetricSet:
    m: int
    mu_m: float
    sigma_m: float
    mu_u_m: float
    sigma_u_m: float
    mu_bar: float
    c_bar: float
    approximate: bool = False


def _inverse_occupancy(stats: CellStats, m: int, approx: bool) -> np.ndarray:
    out = np.zeros(stats.n)
    for i, p in enumerate(stats.p):
        if p == 0:
            continue
        if approx:
            out[i] = expected_inverse_occupancy_approx(m, float(p))
        else:
            out[i] = expected_inverse_occupancy(m, float(p))
    return out


def _miss(stats: CellStats, m: int) -> np.ndarray:
    """``(1 - p_i)^m``: probability that cell ``i`` is empty."""
    return (1.0 - stats.p) ** m


def _clamped_sqrt(var: float, what: str) -> float:
    if var < -VARIANCE_CLAMP:
        raise MetricError(f"{what} variance is {var!r}; statistics are inconsistent")
    return math.sqrt(max(var, 0.0))


def mean_total_se(stats: CellStats, m: int) -> float:
    return float(np.sum((1.0 - _miss(stats, m)) * stats.psi1))


def variance_total_se(stats: CellStats, m: int, approx: bool = False) -> float:
    psi, psi2, p = stats.psi1, stats.psi2, stats.p
    miss = _miss(stats, m)
    var = math.fsum((psi2 - psi**2) * _inverse_occupancy(stats, m, approx))
    var += math.fsum(psi**2 * (1.0 - miss) * miss)
    cross = []
    for i in range(stats.n):
        for j in range(i + 1, stats.n):
            if psi[i] and psi[j]:
                cov = occupied_indicator_covariance(m, float(p[i]), float(p[j]))
                cross.append(psi[i] * psi[j] * cov)
    return var + 2.0 * math.fsum(cross)


def std_total_se(stats: CellStats, m: int, approx: bool = False) -> float:
    return _clamped_sqrt(variance_total_se(stats, m, approx), "total SE")


def mean_typical_se(stats: CellStats, m: int) -> float:
    return mean_total_se(stats, m) / m


def variance_typical_se(stats: CellStats, m: int, approx: bool = False) -> float:
    psi, psi2 = stats.psi1, stats.psi2
    miss = _miss(stats, m)
    first = math.fsum(psi2 * _inverse_occupancy(stats, m, approx)) / m
    second = math.fsum(psi**2 * (1.0 - miss) ** 2) / m**2
    cross = []
    for i in range(stats.n):
        for j in range(i + 1, stats.n):
            # P(M_i > 0) P(M_j > 0)
            both = 1.0 + ((1.0 - stats.p[i]) * (1.0 - stats.p[j])) ** m - miss[i] - miss[j]
            cross.append(psi[i] * psi[j] * both)
    return first - second - 2.0 * math.fsum(cross) / m**2


def std_typical_se(stats: CellStats, m: int, approx: bool = False) -> float:
    return _clamped_sqrt(variance_typical_se(stats, m, approx), "typical-user SE")


def jain_fairness(values) -> float:
    """Chiu-Jain index ``(sum x)^2 / (m sum x^2)`` of a nonnegative vector."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("fairness of an empty vector is undefined")
    if np.any(x < 0):
        raise ValueError("fairness is defined for nonnegative vectors only")
    sq = float(np.dot(x, x))
    if sq == 0.0:
        raise ValueError("fairness of the all-zero vector is undefined")
    return float(x.sum()) ** 2 / (x.size * sq)


def asymptotic_fairness(stats: CellStats) -> float:
    """Large-``m`` limit of the Chiu-Jain fairness of the per-user SE vector."""
    occupied = stats.p > 0
    num = float(np.sum(stats.psi1[occupied])) ** 2
    if num == 0.0:
        raise MetricError("asymptotic fairness needs at least one cell with positive rate")
    den = math.fsum(stats.psi2[occupied] / stats.p[occupied])
    return num / den


def metric_set(stats: CellStats, m: int, approx: bool = False) -> MetricSet:
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    m = int(m)
    mu = mean_total_se(stats, m)
    return MetricSet(
        m=m,
        mu_m=mu,
        sigma_m=std_total_se(stats, m, approx),
        mu_u_m=mu / m,
        sigma_u_m=std_typical_se(stats, m, approx),
        mu_bar=float(np.sum(stats.psi1)),
        c_bar=asymptotic_fairness(stats),
        approximate=approx,
    )
