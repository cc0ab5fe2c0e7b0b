"""Downlink spectral-efficiency statistics under joint cell-bias and power control."""

from .metrics import MetricSet, asymptotic_fairness, jain_fairness, metric_set
from .model import (
    Arena,
    BaseStation,
    ControlPoint,
    ReparamControl,
    Scenario,
    ScenarioError,
    controls_from_reparam,
    quincunx_scenario,
    two_bs_scenario,
    validate_scenario,
)
from .partition import CellStats, compute_cell_stats, compute_partition, two_bs_boundary

__all__ = [
    "Arena",
    "BaseStation",
    "CellStats",
    "ControlPoint",
    "MetricSet",
    "ReparamControl",
    "Scenario",
    "ScenarioError",
    "asymptotic_fairness",
    "compute_cell_stats",
    "compute_partition",
    "controls_from_reparam",
    "jain_fairness",
    "metric_set",
    "quincunx_scenario",
    "two_bs_boundary",
    "two_bs_scenario",
    "validate_scenario",
]
