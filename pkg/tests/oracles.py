"""Brute-force reference computations shared by the test modules."""

import itertools
import math
from fractions import Fraction

import numpy as np

from biaspower.partition import CellStats


def discrete_cells(p, values, weights):
    """Cell stats for rates drawn from a finite law inside each cell."""
    psi1 = [float(np.dot(w, v)) for v, w in zip(values, weights)]
    psi2 = [float(np.dot(w, np.square(v))) for v, w in zip(values, weights)]
    return CellStats(np.array(p), np.array(psi1), np.array(psi2))


def enumerate_metrics(m, p, values, weights):
    """Exact mean/std of total SE and of a typical user's SE by full enumeration."""
    outcomes = [(i, v, p[i] * w) for i in range(len(p)) for v, w in zip(values[i], weights[i])]
    outcomes = [o for o in outcomes if o[2] > 0]
    cells = np.array([o[0] for o in outcomes])
    rates = np.array([o[1] for o in outcomes])
    probs = np.array([o[2] for o in outcomes])
    idx = np.array(list(itertools.product(range(len(outcomes)), repeat=m)))
    c = cells[idx]
    r = rates[idx]
    prob = np.prod(probs[idx], axis=1)
    counts = np.stack([(c == i).sum(axis=1) for i in range(len(p))], axis=1)
    x = r / np.take_along_axis(counts, c, axis=1)
    total = x.sum(axis=1)
    sq = (x * x).sum(axis=1)
    mean = float(np.dot(prob, total))
    var = float(np.dot(prob, (total - mean) ** 2))
    typ_mean = mean / m
    typ_var = float(np.dot(prob, sq)) / m - typ_mean**2
    return mean, math.sqrt(var), typ_mean, math.sqrt(typ_var)


def multinomial_occupancy(m, probs):
    """Exact P(M_0 > 0, M_1 > 0) and Cov(1{M_0 > 0}, 1{M_1 > 0}) by enumeration."""
    probs = [Fraction(p) for p in probs]
    both = Fraction(0)
    occ = [Fraction(0), Fraction(0)]
    for cells in itertools.product(range(len(probs)), repeat=m):
        w = Fraction(1)
        for c in cells:
            w *= probs[c]
        present = set(cells)
        both += w * (0 in present and 1 in present)
        occ[0] += w * (0 in present)
        occ[1] += w * (1 in present)
    return both, both - occ[0] * occ[1]
