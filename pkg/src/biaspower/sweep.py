"""Control-grid sweeps: metric bullets and their Pareto-efficient frontiers.

Cell statistics depend on the control but not on the user count, so a sweep
computes them once per grid point (:func:`precompute_stats_map`) and every
bullet for any ``m`` is then a cheap map over that table.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .metrics import asymptotic_fairness, mean_total_se, std_total_se, std_typical_se
from .model import ReparamControl, Scenario, controls_from_reparam, validate_scenario
from .partition import CellStats, cell_stats

MODES = ("joint", "power_only", "bias_only")
KINDS = ("M_total", "M_typical", "F")


@dataclass(frozen=True)
class ControlGrid:
    tau_values: tuple[float, ...]
    beta_values: tuple[float, ...]
    mode: str = "joint"

    def __post_init__(self):
        object.__setattr__(self, "tau_values", tuple(float(v) for v in self.tau_values))
        object.__setattr__(self, "beta_values", tuple(float(v) for v in self.beta_values))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("tau_values", "beta_values"):
            vals = getattr(self, name)
            if not vals:
                raise ValueError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        if self.mode == "power_only" and 0.0 not in self.beta_values:
            raise ValueError("power_only grids fix beta = 0, which must be in beta_values")
        if self.mode == "bias_only" and 0.0 not in self.tau_values:
            raise ValueError("bias_only grids fix tau = 0, which must be in tau_values")

    @classmethod
    def linspace(cls, lo: float, hi: float, count: int, mode: str = "joint",
                 beta: tuple[float, float, int] | None = None) -> "ControlGrid":
        """Evenly spaced grid; ``beta`` defaults to the same ``(lo, hi, count)``."""
        taus = _linspace(lo, hi, count)
        betas = _linspace(*beta) if beta is not None else taus
        if mode == "power_only" and 0.0 not in betas:
            betas = (0.0,)
        if mode == "bias_only" and 0.0 not in taus:
            taus = (0.0,)
        return cls(taus, betas, mode)

    def controls(self) -> list[ReparamControl]:
        if self.mode == "power_only":
            return [ReparamControl(t, 0.0) for t in self.tau_values]
        if self.mode == "bias_only":
            return [ReparamControl(0.0, b) for b in self.beta_values]
        return [ReparamControl(t, b) for t in self.tau_values for b in self.beta_values]


def _linspace(lo: float, hi: float, count: int) -> tuple[float, ...]:
    vals = np.linspace(lo, hi, int(count))
    # snap the centre of symmetric grids to an exact zero
    vals[np.abs(vals) < 1e-12 * max(abs(lo), abs(hi), 1.0)] = 0.0
    return tuple(float(v) for v in vals)


@dataclass(frozen=True)
class BulletPoint:
    control: ReparamControl
    x: float
    y: float
    stats: CellStats = field(compare=False, repr=False)


@dataclass(frozen=True)
class Frontier:
    """Non-dominated subset of a bullet.

    ``candidates`` is the control set of the whole bullet, kept so that
    :func:`dominance_check` can verify grid containment.
    """

    kind: str
    points: tuple[BulletPoint, ...]
    efficient_controls: tuple[ReparamControl, ...]
    candidates: frozenset = field(default=frozenset(), repr=False)


StatsMap = dict  # ReparamControl -> CellStats, in grid order


def precompute_stats_map(s: Scenario, grid: ControlGrid, workers: int = 1) -> StatsMap:
    validate_scenario(s)
    controls = grid.controls()

    def one(rc: ReparamControl) -> CellStats:
        return cell_stats(s, controls_from_reparam(s, rc))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(one, controls))
    else:
        stats = [one(rc) for rc in controls]
    return dict(zip(controls, stats))


def bullet_coordinates(stats: CellStats, m: int, kind: str, approx: bool = False) -> tuple[float, float]:
    if kind == "M_total":
        return std_total_se(stats, m, approx), mean_total_se(stats, m)
    if kind == "M_typical":
        return std_typical_se(stats, m, approx), mean_total_se(stats, m) / m
    if kind == "F":
        return asymptotic_fairness(stats), float(np.sum(stats.psi1))
    raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def build_bullet(stats_map: StatsMap, m: int, kind: str, approx: bool = False) -> list[BulletPoint]:
    """One ``(x, y)`` point per grid control; ``m`` is ignored for the F kind."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    out = []
    for rc, st in stats_map.items():
        x, y = bullet_coordinates(st, m, kind, approx)
        out.append(BulletPoint(rc, x, y, st))
    return out


def _minimises_x(kind: str) -> bool:
    if kind in ("M_total", "M_typical"):
        return True
    if kind == "F":
        return False
    raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def dominates(a: BulletPoint | tuple, b: BulletPoint | tuple, kind: str) -> bool:
    """Strict dominance on both axes."""
    ax, ay = (a.x, a.y) if isinstance(a, BulletPoint) else a
    bx, by = (b.x, b.y) if isinstance(b, BulletPoint) else b
    if _minimises_x(kind):
        return ax < bx and ay > by
    return ax > bx and ay > by


def _sort_key(pt: BulletPoint):
    return (pt.x, pt.y, pt.control.tau, pt.control.beta)


def pareto_frontier(points: Sequence[BulletPoint], kind: str) -> Frontier:
    """Keep every point with no rival strictly better on both axes.

    Sort by ``x`` (best first), then scan groups of equal ``x`` while tracking
    the largest ``y`` seen among strictly better ``x`` values.
    """
    if not points:
        raise ValueError("cannot take the frontier of an empty bullet")
    minimise = _minimises_x(kind)
    ordered = sorted(points, key=lambda p: p.x, reverse=not minimise)
    kept = []
    best_y = -np.inf
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j].x == ordered[i].x:
            j += 1
        group = ordered[i:j]
        kept.extend(p for p in group if not p.y < best_y)
        best_y = max(best_y, max(p.y for p in group))
        i = j
    kept.sort(key=_sort_key)
    return Frontier(
        kind=kind,
        points=tuple(kept),
        efficient_controls=tuple(p.control for p in kept),
        candidates=frozenset(p.control for p in points),
    )


def pareto_frontier_bruteforce(points: Sequence[BulletPoint], kind: str) -> Frontier:
    """O(k^2) pairwise reference for :func:`pareto_frontier`."""
    kept = [p for p in points if not any(dominates(q, p, kind) for q in points)]
    kept.sort(key=_sort_key)
    return Frontier(kind, tuple(kept), tuple(p.control for p in kept),
                    frozenset(p.control for p in points))


@dataclass(frozen=True)
class DominanceReport:
    kind: str
    weakly_dominated: bool
    undominated_points: tuple[BulletPoint, ...]
    strict_count: int
    max_gap_x: float
    max_gap_y: float


def dominance_check(joint: Frontier, unilateral: Frontier, kind: str | None = None) -> DominanceReport:
    """Check that every unilateral frontier point is weakly dominated by the joint frontier.

    The gaps are the largest improvement, per axis, that some joint frontier
    point offers over a unilateral frontier point it weakly dominates.
    """
    kind = kind or joint.kind
    if joint.kind != kind or unilateral.kind != kind:
        raise ValueError("frontiers must share the requested kind")
    if not unilateral.candidates <= joint.candidates:
        raise ValueError("unilateral grid is not contained in the joint grid")
    minimise = _minimises_x(kind)
    missing = []
    strict = 0
    gap_x = gap_y = 0.0
    for u in unilateral.points:
        found = False
        for j in joint.points:
            better_x = (u.x - j.x) if minimise else (j.x - u.x)
            better_y = j.y - u.y
            if better_x >= 0 and better_y >= 0:
                found = True
                gap_x = max(gap_x, better_x)
                gap_y = max(gap_y, better_y)
        if not found:
            missing.append(u)
        if any(dominates(j, u, kind) for j in joint.points):
            strict += 1
    return DominanceReport(kind, not missing, tuple(missing), strict, gap_x, gap_y)


EXTREME_LABELS = "abcdefghi"


def extreme_labels(grid: ControlGrid) -> dict[ReparamControl, str]:
    """Label the nine extreme/centre controls of a joint grid ``a`` to ``i``.

    ``tau`` varies slowest: a=(lo, lo), b=(lo, mid), ..., i=(hi, hi).
    """
    if grid.mode != "joint":
        return {}

    def picks(vals):
        return (vals[0], vals[len(vals) // 2], vals[-1])

    out = {}
    k = 0
    for t in picks(grid.tau_values):
        for b in picks(grid.beta_values):
            rc = ReparamControl(t, b)
            if rc not in out:
                out[rc] = EXTREME_LABELS[k]
            k += 1
    return out


def sweep(s: Scenario, grid: ControlGrid, ms: Iterable[int], kinds: Iterable[str] = KINDS,
          approx: bool = False, workers: int = 1):
    """Convenience driver: ``{(kind, m): (bullet, frontier)}`` for one grid.

    F-kind entries use ``m = None`` since that bullet does not depend on ``m``.
    """
    stats_map = precompute_stats_map(s, grid, workers)
    out = {}
    for kind in kinds:
        for m in ([None] if kind == "F" else ms):
            bullet = build_bullet(stats_map, m or 1, kind, approx)
            out[(kind, m)] = (bullet, pareto_frontier(bullet, kind))
    return stats_map, out
