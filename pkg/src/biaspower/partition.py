"""Biased-SINR cell partition of a discretized arena and per-cell rate moments.

The arena is sampled with a uniform midpoint grid. Grid points within
``delta`` (closed disk) of any station are removed from the arena, so they
count towards neither the arena measure nor any cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .model import ControlPoint, Scenario, ScenarioError

DEADZONE = -1

_LN2 = math.log(2.0)

CASE_NAMES = {1: "i", 2: "ii", 3: "iii", 4: "iv", 5: "v"}


@dataclass(frozen=True, eq=False)
class CellPartition:
    """Grid assignment of arena points to stations.

    ``assignment[k]`` is the owning station of ``points[k]``, or ``DEADZONE``.
    """

    points: np.ndarray
    assignment: np.ndarray
    cell_measures: np.ndarray
    arena_measure: float
    grid_cell_measure: float


@dataclass(frozen=True, eq=False)
class CellStats:
    """Association probabilities ``p`` and rate moments ``psi1``, ``psi2``."""

    p: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray

    def __post_init__(self):
        p, psi1, psi2 = (np.asarray(v, dtype=float) for v in (self.p, self.psi1, self.psi2))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "psi1", psi1)
        object.__setattr__(self, "psi2", psi2)
        if not (p.shape == psi1.shape == psi2.shape and p.ndim == 1):
            raise ValueError("p, psi1 and psi2 must be vectors of equal length")
        if np.any(p < 0) or np.any(psi1 < 0) or np.any(psi2 < 0):
            raise ValueError("cell statistics must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"association probabilities sum to {p.sum()!r}, not 1")
        if np.any((p == 0) & ((psi1 != 0) | (psi2 != 0))):
            raise ValueError("an empty cell (p = 0) must carry zero rate moments")
        # rounding slack: psi2 - psi1**2 is a difference of two grid averages
        if np.any(psi2 < psi1**2 * (1 - 1e-12)):
            raise ValueError("rate moments violate psi2 >= psi1**2")

    @property
    def n(self) -> int:
        return self.p.size

    def swapped(self, order: Sequence[int]) -> "CellStats":
        order = list(order)
        return CellStats(self.p[order], self.psi1[order], self.psi2[order])


def _axis_midpoints(lower: float, upper: float, resolution: int) -> np.ndarray:
    # centred form keeps the grid exactly mirror-symmetric when lower == -upper
    h = (upper - lower) / resolution
    centre = 0.5 * (lower + upper)
    return centre + (np.arange(resolution) - 0.5 * (resolution - 1)) * h


@dataclass(frozen=True, eq=False)
class _Grid:
    points: np.ndarray  # (K, dim) every grid midpoint
    valid: np.ndarray  # (K,) bool, outside all deadzones
    gains: np.ndarray  # (n, K_valid) pathloss ||y_i - y||^-alpha at valid points


@lru_cache(maxsize=16)
def _grid(arena, locations: tuple, alpha: float, delta: float) -> _Grid:
    axis = _axis_midpoints(arena.lower, arena.upper, arena.resolution)
    if arena.dim == 1:
        points = axis[:, None]
    else:
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        points = np.column_stack([xx.ravel(), yy.ravel()])
    locs = np.array(locations, dtype=float)
    dist = np.sqrt(((points[None, :, :] - locs[:, None, :]) ** 2).sum(axis=2))
    valid = np.all(dist > delta, axis=0)
    gains = dist[:, valid] ** (-alpha)
    points.setflags(write=False)
    valid.setflags(write=False)
    gains.setflags(write=False)
    return _Grid(points, valid, gains)


def _scenario_grid(s: Scenario) -> _Grid:
    return _grid(s.arena, tuple(st.location for st in s.stations), float(s.alpha), float(s.delta))


def _sinr_matrix(gains: np.ndarray, powers: np.ndarray, eta: float) -> np.ndarray:
    """SINR of every station at every column of ``gains``; shape ``(n, K)``."""
    rx = powers[:, None] * gains
    n = rx.shape[0]
    out = np.empty_like(rx)
    for i in range(n):
        interference = np.full(rx.shape[1], float(eta))
        for j in range(n):
            if j != i:
                interference += rx[j]
        out[i] = rx[i] / interference
    return out


def associate(sinr: np.ndarray, biases: np.ndarray) -> np.ndarray:
    """Index of the station with the largest biased SINR; ties go to the lowest index."""
    # np.argmax returns the first maximum, which is the lowest-index tie-break
    return np.argmax(biases[:, None] * sinr, axis=0)


def _evaluate(s: Scenario, c: ControlPoint) -> tuple[_Grid, np.ndarray, np.ndarray]:
    if len(c.powers) != s.n:
        raise ScenarioError(f"control has {len(c.powers)} entries for {s.n} stations")
    grid = _scenario_grid(s)
    sinr = _sinr_matrix(grid.gains, np.asarray(c.powers), s.eta)
    owner = associate(sinr, np.asarray(c.biases))
    owner_sinr = np.take_along_axis(sinr, owner[None, :], axis=0)[0]
    return grid, owner, owner_sinr


def sinr_at(s: Scenario, c: ControlPoint, station: int, point: Sequence[float]) -> float:
    """SINR from ``station`` at ``point``; raises inside any deadzone."""
    y = np.atleast_1d(np.asarray(point, dtype=float))
    dist = np.linalg.norm(s.locations - y[None, :], axis=1)
    if np.any(dist <= s.delta):
        raise ScenarioError(f"pathloss undefined at {tuple(y)}: point lies in a deadzone")
    rx = np.asarray(c.powers) * dist ** (-s.alpha)
    interference = s.eta + sum(rx[j] for j in range(s.n) if j != station)
    return float(rx[station] / interference)


def rate(sinr):
    """Shannon spectral efficiency ``log2(1 + sinr)`` in bps/Hz."""
    return np.log1p(sinr) / _LN2


def compute_partition(s: Scenario, c: ControlPoint) -> CellPartition:
    grid, owner, _ = _evaluate(s, c)
    assignment = np.full(grid.valid.shape, DEADZONE, dtype=np.int64)
    assignment[grid.valid] = owner
    dA = s.arena.cell_measure
    counts = np.bincount(owner, minlength=s.n)
    return CellPartition(
        points=grid.points,
        assignment=assignment,
        cell_measures=counts * dA,
        arena_measure=int(grid.valid.sum()) * dA,
        grid_cell_measure=dA,
    )


def _stats_from_owner(n: int, owner: np.ndarray, owner_sinr: np.ndarray) -> CellStats:
    r = rate(owner_sinr)
    total = owner.size
    p = np.zeros(n)
    psi1 = np.zeros(n)
    psi2 = np.zeros(n)
    for i in range(n):
        ri = r[owner == i]
        if ri.size == 0:
            continue
        p[i] = ri.size / total
        psi1[i] = ri.mean()
        psi2[i] = np.mean(ri * ri)
    return CellStats(p, psi1, psi2)


def compute_cell_stats(s: Scenario, c: ControlPoint, part: CellPartition | None = None) -> CellStats:
    """Midpoint-rule ``p``, ``psi1`` and ``psi2`` on the scenario grid.

    ``part`` is accepted for interface symmetry; the assignment is recomputed
    from the cached grid, and must agree with ``part`` when one is given.
    """
    grid, owner, owner_sinr = _evaluate(s, c)
    if part is not None and not np.array_equal(part.assignment[grid.valid], owner):
        raise ValueError("partition was computed for a different scenario or control")
    return _stats_from_owner(s.n, owner, owner_sinr)


def cell_stats(s: Scenario, c: ControlPoint) -> CellStats:
    """Partition and moments in one pass (the sweep hot path)."""
    _, owner, owner_sinr = _evaluate(s, c)
    return _stats_from_owner(s.n, owner, owner_sinr)


# --- closed form for two stations at -1 and +1 -------------------------------


@dataclass(frozen=True)
class TwoBsBoundary:
    sigma: float
    gamma: float | None
    y_minus: float | None
    y_plus: float | None
    case: int

    @property
    def case_name(self) -> str:
        return CASE_NAMES[self.case]


def h_threshold(d: float) -> float:
    """Value of ``|sigma|`` at which a boundary root reaches the arena edge ``d``."""
    return 2.0 * math.log((d + 1.0) / (d - 1.0))


def two_bs_boundary(tau: float, beta: float, alpha: float, d1: float, d2: float) -> TwoBsBoundary:
    """Cell boundary points of the two-station line and the topology case (1-5)."""
    if alpha < 1 or d1 <= 1 or d2 <= 1:
        raise ValueError("need alpha >= 1 and d1, d2 > 1")
    sigma = (2.0 * tau + beta) / alpha
    if sigma == 0.0:
        return TwoBsBoundary(0.0, None, None, None, 3)
    # gamma +- sqrt(gamma^2 - 1) with gamma = coth(sigma/2) reduces to
    # tanh(sigma/4) and coth(sigma/4); this form avoids the cancellation.
    q = math.tanh(sigma / 4.0)
    gamma = 1.0 / math.tanh(sigma / 2.0)
    if sigma > 0:
        y_minus, y_plus = q, 1.0 / q
        case = 5 if sigma >= h_threshold(d2) else 4
    else:
        y_minus, y_plus = 1.0 / q, q
        case = 1 if sigma <= -h_threshold(d1) else 2
    return TwoBsBoundary(sigma, gamma, y_minus, y_plus, case)


def two_bs_cell_intervals(
    b: TwoBsBoundary, d1: float, d2: float
) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    """Cells of stations 1 and 2 as lists of open intervals."""
    lo, hi = -d1, d2
    ym, yp = b.y_minus, b.y_plus
    if b.case == 1:
        return [(ym, yp)], [(lo, ym), (yp, hi)]
    if b.case == 2:
        return [(lo, yp)], [(yp, hi)]
    if b.case == 3:
        return [(lo, 0.0)], [(0.0, hi)]
    if b.case == 4:
        return [(lo, ym)], [(ym, hi)]
    return [(lo, ym), (yp, hi)], [(ym, yp)]


def two_bs_cell_lengths(b: TwoBsBoundary, d1: float, d2: float) -> tuple[float, float]:
    total = d1 + d2
    if b.case == 3:
        return d1, d2
    width = b.y_plus - b.y_minus
    if b.case == 1:
        return width, total - width
    if b.case == 2:
        return b.y_plus + d1, d2 - b.y_plus
    if b.case == 4:
        return b.y_minus + d1, d2 - b.y_minus
    return total - width, width


def intervals_measure(intervals, exclude=()) -> float:
    """Total length of ``intervals`` after removing the ``exclude`` intervals.

    Both arguments are lists of ``(lo, hi)``; ``exclude`` must be disjoint.
    """
    total = 0.0
    for lo, hi in intervals:
        length = hi - lo
        for elo, ehi in exclude:
            length -= max(0.0, min(hi, ehi) - max(lo, elo))
        total += length
    return total
