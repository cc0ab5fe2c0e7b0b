import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from biaspower.occupancy import (
    crossing_point,
    expected_inverse_occupancy,
    expected_inverse_occupancy_approx,
    expected_squared_scaled_inverse,
    f_recurrence,
    f_sequence,
    joint_occupied_probability,
    occupied_indicator_covariance,
    w_recurrence,
)


def exact_binomial_moment(m, p, g):
    """E[g(M)] for M ~ bin(m, p) in rational arithmetic."""
    p = Fraction(p)
    return sum(math.comb(m, k) * p**k * (1 - p) ** (m - k) * g(k) for k in range(m + 1))


def inv(k):
    return Fraction(1, k) if k else Fraction(0)


@pytest.mark.parametrize("p", [0.01, 0.25, 0.5, 0.75, 0.999])
@pytest.mark.parametrize("m", [1, 2, 3, 7, 40])
def test_inverse_occupancy_matches_rational_sum(m, p):
    ref = exact_binomial_moment(m, p, inv)
    assert expected_inverse_occupancy(m, p) == pytest.approx(float(ref), rel=1e-13)


@pytest.mark.parametrize("p", [0.1, 0.25, 0.75])
@pytest.mark.parametrize("m", [1, 5, 30])
def test_surrogate_is_expected_inverse_of_m_plus_one(m, p):
    ref = exact_binomial_moment(m, p, lambda k: Fraction(1, k + 1))
    assert expected_inverse_occupancy_approx(m, p) == pytest.approx(float(ref), rel=1e-13)


def test_degenerate_probabilities():
    assert expected_inverse_occupancy(10, 0.0) == 0.0
    assert expected_inverse_occupancy(10, 1.0) == pytest.approx(1 / 10)
    assert expected_inverse_occupancy_approx(10, 1.0) == pytest.approx(1 / 11)
    assert expected_squared_scaled_inverse(10, 1.0) == 1.0
    with pytest.raises(ValueError):
        expected_inverse_occupancy_approx(10, 0.0)


@pytest.mark.parametrize("bad", [(0, 0.5), (3, -0.1), (3, 1.5), (2.5, 0.5)])
def test_invalid_arguments(bad):
    with pytest.raises(ValueError):
        expected_inverse_occupancy(*bad)


def test_m_equals_one_is_p():
    for p in (0.1, 0.3, 0.9):
        assert expected_inverse_occupancy(1, p) == pytest.approx(p)
        assert f_recurrence(1, p) == pytest.approx(p)


@pytest.mark.parametrize("p", [0.001, 0.05, 0.25, 0.75, 0.99])
def test_f_recurrence_agrees_with_direct_sum(p):
    f = f_sequence(1000, p)
    for m in (1, 2, 10, 100, 500, 1000):
        assert f[m - 1] == pytest.approx(m * expected_inverse_occupancy(m, p), abs=1e-10, rel=1e-10)


@pytest.mark.parametrize("p", [0.01, 0.25, 0.75])
def test_w_recurrence_agrees_with_direct_sum(p):
    for m in (1, 2, 10, 200):
        assert w_recurrence(m, p) == pytest.approx(expected_squared_scaled_inverse(m, p), rel=1e-10)


@pytest.mark.parametrize("p", [0.25, 0.5, 0.75])
def test_large_m_limits(p):
    assert f_recurrence(10_000, p) == pytest.approx(1 / p, rel=0.01)
    assert w_recurrence(10_000, p) == pytest.approx(1 / p**2, rel=0.01)


def test_small_p_is_stable():
    # naive 1 - (1-p)^(m+1) loses every digit at p = 1e-17
    p = 1e-17
    assert expected_inverse_occupancy_approx(5, p) == pytest.approx(1.0, rel=1e-12)
    assert expected_inverse_occupancy(5, p) == pytest.approx(5 * p, rel=1e-12)


def multinomial_enumeration(m, probs):
    """All placements of m users into len(probs) cells with their probabilities."""
    for cells in itertools.product(range(len(probs)), repeat=m):
        weight = Fraction(1)
        for c in cells:
            weight *= probs[c]
        yield cells, weight


@pytest.mark.parametrize("m", range(1, 7))
def test_joint_occupancy_against_enumeration(m):
    probs = [Fraction(1, 5), Fraction(1, 3), Fraction(7, 15)]
    both = Fraction(0)
    occ = [Fraction(0)] * 3
    for cells, w in multinomial_enumeration(m, probs):
        present = set(cells)
        if 0 in present and 1 in present:
            both += w
        for i in range(3):
            if i in present:
                occ[i] += w
    pi, pj = float(probs[0]), float(probs[1])
    assert joint_occupied_probability(m, pi, pj) == pytest.approx(float(both), abs=1e-12)
    cov = both - occ[0] * occ[1]
    assert occupied_indicator_covariance(m, pi, pj) == pytest.approx(float(cov), abs=1e-12)


def test_covariance_is_never_positive():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b = rng.dirichlet([1, 1, 1])[:2]
        m = int(rng.integers(1, 300))
        assert occupied_indicator_covariance(m, a, b) <= 1e-15


def test_pair_probabilities_must_fit():
    with pytest.raises(ValueError):
        joint_occupied_probability(3, 0.7, 0.6)
    # two cells covering everything: rest is zero
    assert joint_occupied_probability(2, 0.5, 0.5) == pytest.approx(0.5)


def test_curves_decay_like_one_over_m():
    for p in (0.25, 0.75):
        for fn in (expected_inverse_occupancy, expected_inverse_occupancy_approx):
            scaled = [m * fn(m, p) for m in (100, 1000, 10_000)]
            assert scaled[-1] == pytest.approx(1 / p, rel=0.01)


@pytest.mark.parametrize("p", [0.25, 0.75])
def test_crossing_point_is_finite_and_exact_stays_above(p):
    mc = crossing_point(p, 1000)
    assert mc is not None
    for m in range(mc, 1001, 7):
        assert expected_inverse_occupancy(m, p) > expected_inverse_occupancy_approx(m, p)
    if mc > 1:
        assert expected_inverse_occupancy(mc - 1, p) <= expected_inverse_occupancy_approx(mc - 1, p)
