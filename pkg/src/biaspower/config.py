"""Run configuration: presets, JSON config files, and their schema."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import jsonschema

from .model import Arena, BaseStation, Scenario, quincunx_scenario, two_bs_scenario, validate_scenario

GridSpec = tuple[float, float, int]

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "biaspower run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "preset": {"enum": ["two_bs_i", "two_bs_ii", "two_bs_iii", "quincunx"]},
        "scenario": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "d1": {"type": "number"},
                "d2": {"type": "number"},
                "half_width": {"type": "number"},
                "alpha": {"type": "number"},
                "delta": {"type": "number"},
                "eta": {"type": "number"},
                "resolution": {"type": "integer"},
                "arena": {
                    "type": "object",
                    "required": ["kind", "lower", "upper"],
                    "properties": {
                        "kind": {"enum": ["interval", "rectangle"]},
                        "lower": {"type": "number"},
                        "upper": {"type": "number"},
                        "resolution": {"type": "integer"},
                    },
                },
                "stations": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["location"],
                        "properties": {
                            "location": {"type": "array", "items": {"type": "number"}},
                            "power": {"type": "number"},
                            "bias": {"type": "number"},
                        },
                    },
                },
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tau": {"$ref": "#/$defs/range"},
                "beta": {"$ref": "#/$defs/range"},
                "unilateral_count": {"type": "integer", "minimum": 1},
            },
        },
        "m": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "mc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "trials": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
            },
        },
        "approx_occupancy": {"type": "boolean"},
    },
    "$defs": {
        "range": {
            "type": "array",
            "prefixItems": [{"type": "number"}, {"type": "number"}, {"type": "integer", "minimum": 1}],
            "minItems": 3,
            "maxItems": 3,
        }
    },
}


@dataclass(frozen=True)
class Preset:
    scenario_kwargs: dict
    kind: str  # "two_bs" or "quincunx"
    tau: GridSpec
    beta: GridSpec
    unilateral_count: int
    m: tuple[int, ...]


PRESETS = {
    "two_bs_i": Preset(dict(d1=5.0, d2=5.0, delta=0.1, alpha=3.0), "two_bs",
                       (-10.0, 10.0, 51), (-10.0, 10.0, 51), 101, (50,)),
    "two_bs_ii": Preset(dict(d1=5.0, d2=5.0, delta=0.5, alpha=3.0), "two_bs",
                        (-10.0, 10.0, 51), (-10.0, 10.0, 51), 101, (50,)),
    "two_bs_iii": Preset(dict(d1=2.0, d2=8.0, delta=0.1, alpha=3.0), "two_bs",
                         (-10.0, 10.0, 51), (-10.0, 10.0, 51), 101, (50,)),
    "quincunx": Preset(dict(half_width=3.0, delta=0.0, alpha=3.0), "quincunx",
                       (-3.0, 3.0, 25), (-3.0, 3.0, 25), 25, (100,)),
}


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    tau: GridSpec
    beta: GridSpec
    unilateral_count: int
    m: tuple[int, ...]
    trials: int = 10_000
    seed: int = 0
    approx_occupancy: bool = False
    preset: str | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def describe(self) -> dict:
        """JSON-ready summary of the resolved configuration."""
        s = self.scenario
        return {
            "preset": self.preset,
            "scenario": {
                "arena": {"kind": s.arena.kind, "lower": s.arena.lower, "upper": s.arena.upper,
                          "resolution": s.arena.resolution},
                "stations": [{"location": list(st.location), "power": st.power, "bias": st.bias}
                             for st in s.stations],
                "alpha": s.alpha,
                "delta": s.delta,
                "eta": s.eta,
            },
            "grid": {"tau": list(self.tau), "beta": list(self.beta),
                     "unilateral_count": self.unilateral_count},
            "m": list(self.m),
            "mc": {"trials": self.trials, "seed": self.seed},
            "approx_occupancy": self.approx_occupancy,
        }


def parse_range(text: str) -> GridSpec:
    """Parse ``lo:hi:count`` (a single value ``v`` means ``v:v:1``)."""
    parts = text.split(":")
    if len(parts) == 1:
        v = float(parts[0])
        return (v, v, 1)
    if len(parts) != 3:
        raise ValueError(f"expected lo:hi:count, got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1 or (count == 1 and lo != hi) or (count > 1 and hi <= lo):
        raise ValueError(f"invalid grid range {text!r}")
    return (lo, hi, count)


def _build_scenario(preset: Preset | None, fields: dict) -> Scenario:
    if "stations" in fields or "arena" in fields:
        if "stations" not in fields or "arena" not in fields:
            raise ValueError("an explicit scenario needs both 'arena' and 'stations'")
        a = fields["arena"]
        arena = Arena(a["kind"], float(a["lower"]), float(a["upper"]),
                      int(a.get("resolution", 2001 if a["kind"] == "interval" else 501)))
        stations = tuple(
            BaseStation(tuple(float(x) for x in st["location"]), float(st.get("power", 1.0)),
                        float(st.get("bias", 1.0)))
            for st in fields["stations"]
        )
        return validate_scenario(Scenario(arena, stations, float(fields.get("alpha", 3.0)),
                                          float(fields.get("delta", 0.0)), float(fields.get("eta", 0.0))))
    if preset is None:
        raise ValueError("either a preset or an explicit scenario is required")
    kwargs = dict(preset.scenario_kwargs)
    kwargs.update(fields)
    if preset.kind == "two_bs":
        return two_bs_scenario(**kwargs)
    return quincunx_scenario(**kwargs)


def load_config(preset_name: str | None = None, config_path: str | Path | None = None) -> RunConfig:
    doc: dict = {}
    if config_path is not None:
        doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
        jsonschema.validate(doc, CONFIG_SCHEMA)
    name = preset_name or doc.get("preset")
    if name is None and "scenario" not in doc:
        name = "two_bs_i"
    preset = PRESETS[name] if name else None
    scenario = _build_scenario(preset, doc.get("scenario", {}))
    grid = doc.get("grid", {})
    fallback = preset or PRESETS["two_bs_i"]
    mc = doc.get("mc", {})
    return RunConfig(
        scenario=scenario,
        tau=tuple(grid.get("tau", fallback.tau)),
        beta=tuple(grid.get("beta", fallback.beta)),
        unilateral_count=int(grid.get("unilateral_count", fallback.unilateral_count)),
        m=tuple(doc.get("m", fallback.m)),
        trials=int(mc.get("trials", 10_000)),
        seed=int(mc.get("seed", 0)),
        approx_occupancy=bool(doc.get("approx_occupancy", False)),
        preset=name,
    )


def override(cfg: RunConfig, **changes) -> RunConfig:
    """Apply command-line overrides; ``None`` values are ignored."""
    changes = {k: v for k, v in changes.items() if v is not None}
    if "resolution" in changes:
        changes["scenario"] = validate_scenario(cfg.scenario.with_resolution(changes.pop("resolution")))
    return replace(cfg, **changes)
