"""Binomial and multinomial occupancy functionals.

``M ~ bin(m, p)`` counts the users landing in one cell. The quantity that
drives the variance formulas is ``E[I]`` with ``I = 1{M > 0} / M``.
The recurrences for ``f = E[m I]`` and ``w = E[(m I)^2]`` are kept as
independent cross-checks of the direct sum.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import binom


def _check(m: int, p: float) -> None:
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")


def _pmf_tail(m: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(1, m + 1)
    return k, binom.pmf(k, m, p)


def expected_inverse_occupancy(m: int, p: float) -> float:
    """Exact ``E[1{M > 0} / M]`` for ``M ~ bin(m, p)``, in O(m)."""
    _check(m, p)
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0 / m
    k, pmf = _pmf_tail(int(m), p)
    return math.fsum(pmf / k)


def expected_inverse_occupancy_approx(m: int, p: float) -> float:
    """Constant-time surrogate ``E[1 / (M + 1)] = (1 - (1-p)^(m+1)) / (p (m+1))``."""
    _check(m, p)
    if p == 0.0:
        raise ValueError("the E[1/(M+1)] surrogate is undefined at p = 0")
    # -expm1(...) is 1 - (1-p)^(m+1) without cancellation at small p
    return -math.expm1((m + 1) * math.log1p(-p)) / (p * (m + 1)) if p < 1 else 1.0 / (m + 1)


def expected_squared_scaled_inverse(m: int, p: float) -> float:
    """Exact ``E[(m I)^2]``, the direct-sum counterpart of :func:`w_recurrence`."""
    _check(m, p)
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    k, pmf = _pmf_tail(int(m), p)
    return math.fsum(pmf * (m / k) ** 2)


def f_sequence(m: int, p: float) -> np.ndarray:
    """``f^(1..m)`` from ``f^(k) = 1 - q^k + k/(k-1) q f^(k-1)``, ``f^(1) = p``."""
    _check(m, p)
    q = 1.0 - p
    f = np.empty(int(m))
    f[0] = p
    for k in range(2, int(m) + 1):
        f[k - 1] = 1.0 - q**k + k / (k - 1) * q * f[k - 2]
    return f


def f_recurrence(m: int, p: float) -> float:
    """``f^(m) = E[m I]`` via the occupancy recurrence."""
    return float(f_sequence(m, p)[-1])


def w_recurrence(m: int, p: float) -> float:
    """``w^(m) = E[(m I)^2]`` via ``w^(k) = q (k/(k-1))^2 w^(k-1) + f^(k)``."""
    f = f_sequence(m, p)
    q = 1.0 - p
    w = p
    for k in range(2, int(m) + 1):
        w = q * (k / (k - 1)) ** 2 * w + f[k - 1]
    return float(w)


def _check_pair(p_i: float, p_j: float) -> None:
    if p_i < 0 or p_j < 0:
        raise ValueError("cell probabilities must be nonnegative")
    if p_i + p_j > 1.0 + 1e-12:
        raise ValueError(f"p_i + p_j = {p_i + p_j!r} exceeds 1")


def joint_occupied_probability(m: int, p_i: float, p_j: float) -> float:
    """``P(M_i > 0, M_j > 0)`` for two distinct cells of a multinomial."""
    _check_pair(p_i, p_j)
    rest = max(0.0, 1.0 - (p_i + p_j))
    value = 1.0 - ((1.0 - p_i) ** m + (1.0 - p_j) ** m) + rest**m
    return min(1.0, max(0.0, value))


def occupied_indicator_covariance(m: int, p_i: float, p_j: float) -> float:
    """``Cov(1{M_i > 0}, 1{M_j > 0})``; never positive."""
    _check_pair(p_i, p_j)
    rest = max(0.0, 1.0 - (p_i + p_j))
    return rest**m - ((1.0 - p_i) * (1.0 - p_j)) ** m


def crossing_point(p: float, m_max: int = 10_000) -> int | None:
    """Smallest ``m`` from which the exact ``E[I]`` stays above the surrogate.

    Returns None if the exact value is not above the surrogate at ``m_max``.
    """
    last_below = None
    for m in range(1, m_max + 1):
        if expected_inverse_occupancy(m, p) <= expected_inverse_occupancy_approx(m, p):
            last_below = m
    if last_below == m_max:
        return None
    return 1 if last_below is None else last_below + 1
