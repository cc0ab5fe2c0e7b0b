"""Scenario and control types for the biased-SINR downlink model.

All lengths are in normalized units (half the base-station separation of
the two-station preset). Powers and biases are stored in linear scale; the
``(tau, beta)`` log-ratio view is produced by :func:`controls_from_reparam`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ScenarioError(ValueError):
    """Raised when a scenario or control violates a model invariant."""


@dataclass(frozen=True)
class Arena:
    """Bounded network arena, either an interval or a square.

    ``lower``/``upper`` are the interval end points, or the common per-axis
    bounds of the square ``[lower, upper]^2``. ``resolution`` is the number
    of midpoint-rule grid cells per axis.
    """

    kind: str
    lower: float
    upper: float
    resolution: int

    @classmethod
    def interval(cls, d1: float, d2: float, resolution: int = 2001) -> "Arena":
        return cls("interval", -float(d1), float(d2), int(resolution))

    @classmethod
    def square(cls, delta: float, resolution: int = 501) -> "Arena":
        return cls("rectangle", -float(delta), float(delta), int(resolution))

    @property
    def dim(self) -> int:
        return 1 if self.kind == "interval" else 2

    @property
    def measure(self) -> float:
        return (self.upper - self.lower) ** self.dim

    @property
    def cell_measure(self) -> float:
        """Length (1D) or area (2D) of a single grid cell."""
        return ((self.upper - self.lower) / self.resolution) ** self.dim

    def contains(self, point: Sequence[float]) -> bool:
        return all(self.lower <= x <= self.upper for x in point)


@dataclass(frozen=True)
class BaseStation:
    location: tuple[float, ...]
    power: float = 1.0
    bias: float = 1.0


@dataclass(frozen=True)
class Scenario:
    arena: Arena
    stations: tuple[BaseStation, ...]
    alpha: float = 3.0
    delta: float = 0.0
    eta: float = 0.0

    @property
    def n(self) -> int:
        return len(self.stations)

    @property
    def locations(self) -> np.ndarray:
        """Station locations as an ``(n, dim)`` array."""
        return np.array([s.location for s in self.stations], dtype=float).reshape(
            self.n, self.arena.dim
        )

    def default_control(self) -> "ControlPoint":
        return ControlPoint(
            tuple(s.power for s in self.stations), tuple(s.bias for s in self.stations)
        )

    def with_resolution(self, resolution: int) -> "Scenario":
        arena = Arena(self.arena.kind, self.arena.lower, self.arena.upper, resolution)
        return Scenario(arena, self.stations, self.alpha, self.delta, self.eta)


@dataclass(frozen=True)
class ControlPoint:
    powers: tuple[float, ...]
    biases: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "powers", tuple(float(v) for v in self.powers))
        object.__setattr__(self, "biases", tuple(float(v) for v in self.biases))
        if len(self.powers) != len(self.biases):
            raise ScenarioError("powers and biases must have the same length")
        for name, vec in (("power", self.powers), ("bias", self.biases)):
            for v in vec:
                if not (math.isfinite(v) and v > 0):
                    raise ScenarioError(f"every {name} must be positive and finite, got {v}")


@dataclass(frozen=True)
class ReparamControl:
    """Log power ratio ``tau`` and log bias ratio ``beta`` (natural logs)."""

    tau: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.tau) and math.isfinite(self.beta)):
            raise ScenarioError("tau and beta must be finite")


def validate_scenario(s: Scenario) -> Scenario:
    """Return ``s`` unchanged if every invariant holds, else raise ScenarioError."""
    a = s.arena
    if a.kind not in ("interval", "rectangle"):
        raise ScenarioError(f"unknown arena kind {a.kind!r}")
    if a.resolution < 3:
        raise ScenarioError(f"resolution must be >= 3, got {a.resolution}")
    if a.kind == "interval":
        if not (a.lower < -1 and a.upper > 1):
            raise ScenarioError("interval arena needs Delta1 > 1 and Delta2 > 1")
    else:
        if not (a.upper > 1 and a.lower == -a.upper):
            raise ScenarioError("rectangle arena must be [-Delta, +Delta]^2 with Delta > 1")
    if s.n < 1:
        raise ScenarioError("scenario needs at least one station")
    if not s.alpha >= 1:
        raise ScenarioError(f"pathloss exponent must be >= 1, got {s.alpha}")
    if not s.delta >= 0:
        raise ScenarioError(f"deadzone radius must be >= 0, got {s.delta}")
    if not s.eta >= 0:
        raise ScenarioError(f"noise power must be >= 0, got {s.eta}")
    if s.n == 1 and s.eta == 0:
        raise ScenarioError("a single station with zero noise has infinite SIR")
    for i, st in enumerate(s.stations):
        if len(st.location) != a.dim:
            raise ScenarioError(f"station {i} location has wrong dimension")
        if not (st.power > 0 and st.bias > 0):
            raise ScenarioError(f"station {i} power and bias must be positive")
        for x in st.location:
            if x - s.delta < a.lower or x + s.delta > a.upper:
                raise ScenarioError(f"station {i} deadzone is not inside the arena")
    locs = s.locations
    for i in range(s.n):
        for j in range(i + 1, s.n):
            dist = float(np.linalg.norm(locs[i] - locs[j]))
            if dist <= 2 * s.delta:
                raise ScenarioError(
                    f"deadzones of stations {i} and {j} overlap "
                    f"(separation {dist:g} <= 2*delta = {2 * s.delta:g})"
                )
    return s


def two_bs_scenario(
    d1: float = 5.0,
    d2: float = 5.0,
    delta: float = 0.1,
    alpha: float = 3.0,
    eta: float = 0.0,
    resolution: int = 2001,
) -> Scenario:
    """Two stations at -1 and +1 on the interval ``[-d1, +d2]``."""
    stations = (BaseStation((-1.0,)), BaseStation((1.0,)))
    return validate_scenario(
        Scenario(Arena.interval(d1, d2, resolution), stations, alpha, delta, eta)
    )


def quincunx_scenario(
    half_width: float = 3.0,
    delta: float = 0.0,
    alpha: float = 3.0,
    eta: float = 0.0,
    resolution: int = 501,
) -> Scenario:
    """Central station at the origin plus four corner stations at (+-1, +-1)."""
    locs = [(0.0, 0.0), (-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
    stations = tuple(BaseStation(loc) for loc in locs)
    return validate_scenario(
        Scenario(Arena.square(half_width, resolution), stations, alpha, delta, eta)
    )


def reparam_layout(s: Scenario) -> str | None:
    """Return ``"two_bs"`` or ``"quincunx"`` if ``s`` has that station layout."""
    locs = s.locations
    if s.arena.kind == "interval" and s.n == 2:
        if np.array_equal(locs[:, 0], [-1.0, 1.0]):
            return "two_bs"
    if s.arena.kind == "rectangle" and s.n == 5:
        if np.array_equal(locs[0], [0.0, 0.0]) and all(
            abs(x) == 1.0 and abs(y) == 1.0 for x, y in locs[1:]
        ):
            return "quincunx"
    return None


def controls_from_reparam(s: Scenario, rc: ReparamControl) -> ControlPoint:
    """Map ``(tau, beta)`` to linear powers and biases for the preset layouts.

    Station 1 (index 0) carries ``e^tau`` and ``e^beta``; every other
    station is held at unit power and bias.
    """
    if reparam_layout(s) is None:
        raise ScenarioError(
            "(tau, beta) controls are only defined for the two-station line "
            "and the five-station quincunx layouts"
        )
    rest = (1.0,) * (s.n - 1)
    return ControlPoint((math.exp(rc.tau),) + rest, (math.exp(rc.beta),) + rest)


def reparam_from_controls(c: ControlPoint) -> ReparamControl:
    """Inverse of :func:`controls_from_reparam` (ratios against station 2)."""
    return ReparamControl(
        math.log(c.powers[0] / c.powers[1]), math.log(c.biases[0] / c.biases[1])
    )
