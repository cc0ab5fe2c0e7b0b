"""Command-line entry point: ``biaspower partition|sweep|mc|occupancy``."""

from __future__ import annotations

import functools
import json
import logging
import math
from pathlib import Path

import click

from . import export
from .config import PRESETS, RunConfig, load_config, override, parse_range
from .metrics import metric_set
from .model import ScenarioError, controls_from_reparam, reparam_layout
from .montecarlo import McConfig, estimate
from .occupancy import crossing_point, expected_inverse_occupancy, expected_inverse_occupancy_approx
from .partition import (
    cell_stats,
    compute_partition,
    h_threshold,
    two_bs_boundary,
    two_bs_cell_lengths,
)
from .sweep import (
    KINDS,
    ControlGrid,
    build_bullet,
    dominance_check,
    extreme_labels,
    pareto_frontier,
    precompute_stats_map,
)

log = logging.getLogger("biaspower")

MC_TOLERANCE_SE = 4.0
MODE_NAMES = {"joint": "joint", "power": "power_only", "bias": "bias_only"}


def _tag(v: float) -> str:
    return format(v, "+.6g")


def _common_options(f):
    @click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None,
                  help="Named scenario (default two_bs_i unless --config names one).")
    @click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
                  help="JSON run configuration; see the README for its schema.")
    @click.option("--grid-tau", default=None, help="tau grid as lo:hi:count.")
    @click.option("--grid-beta", default=None, help="beta grid as lo:hi:count.")
    @click.option("--resolution", type=int, default=None, help="Grid cells per arena axis.")
    @click.option("--out", "out_dir", type=click.Path(file_okay=False), default="out", show_default=True)
    @click.option("--format", "fmt", type=click.Choice(export.FORMATS), default="csv", show_default=True)
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        return f(*args, **kwargs)

    return wrapper


def _resolve(preset, config_path, grid_tau, grid_beta, resolution, **extra) -> RunConfig:
    try:
        cfg = load_config(preset, config_path)
        cfg = override(
            cfg,
            tau=parse_range(grid_tau) if grid_tau else None,
            beta=parse_range(grid_beta) if grid_beta else None,
            resolution=resolution,
            **extra,
        )
    except (ValueError, KeyError, ScenarioError) as exc:
        raise click.ClickException(str(exc)) from exc
    return cfg


def _joint_grid(cfg: RunConfig) -> ControlGrid:
    return ControlGrid.linspace(*cfg.tau, beta=cfg.beta)


def _write(out_dir, name, columns, rows, fmt) -> Path:
    path = export.write_table(Path(out_dir) / name, columns, rows, fmt)
    log.info("wrote %s", path)
    return path


def _write_config(out_dir, cfg: RunConfig):
    path = Path(out_dir) / "config.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(cfg.describe(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _controls(cfg: RunConfig, grid: ControlGrid):
    """(label, reparam or None, ControlPoint) triples for the scenario."""
    s = cfg.scenario
    if reparam_layout(s) is None:
        return [("default", None, s.default_control())]
    return [(f"tau{_tag(rc.tau)}_beta{_tag(rc.beta)}", rc, controls_from_reparam(s, rc))
            for rc in grid.controls()]


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log every file written.")
def main(verbose):
    """Downlink spectral-efficiency statistics under joint bias and power control.

    Every subcommand writes tables (CSV or JSON) into --out. Floats carry
    17 significant digits. JSON tables are {"columns": [...], "rows": [[...]]}
    with the same columns as the CSV form. Station indices are 0-based and
    -1 marks a deadzone point.
    """
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s")


@main.command()
@_common_options
def partition(preset, config_path, grid_tau, grid_beta, resolution, out_dir, fmt):
    """Cell assignment maps, one file per (tau, beta).

    \b
    partition_<control>: x[,y],station
    boundary (two-station line only):
        tau,beta,sigma,gamma,y_minus,y_plus,case,len_1,len_2,h_1,h_2
    """
    cfg = _resolve(preset, config_path, grid_tau, grid_beta, resolution)
    s = cfg.scenario
    dims = ["x", "y"][: s.arena.dim]
    for label, _, c in _controls(cfg, _joint_grid(cfg)):
        part = compute_partition(s, c)
        rows = [[*map(float, pt), int(a)] for pt, a in zip(part.points, part.assignment)]
        _write(out_dir, f"partition_{label}", dims + ["station"], rows, fmt)
    if reparam_layout(s) == "two_bs":
        d1, d2 = -s.arena.lower, s.arena.upper
        rows = []
        for rc in _joint_grid(cfg).controls():
            b = two_bs_boundary(rc.tau, rc.beta, s.alpha, d1, d2)
            len1, len2 = two_bs_cell_lengths(b, d1, d2)
            rows.append([rc.tau, rc.beta, b.sigma, b.gamma, b.y_minus, b.y_plus, b.case_name,
                         float(len1), float(len2), h_threshold(d1), h_threshold(d2)])
        _write(out_dir, "boundary",
               ["tau", "beta", "sigma", "gamma", "y_minus", "y_plus", "case", "len_1", "len_2", "h_1", "h_2"],
               rows, fmt)
    _write_config(out_dir, cfg)


def _stats_rows(stats_map, n):
    columns = ["tau", "beta"] + [f"{name}_{i}" for name in ("p", "psi1", "psi2") for i in range(n)]
    rows = [[rc.tau, rc.beta, *map(float, st.p), *map(float, st.psi1), *map(float, st.psi2)]
            for rc, st in stats_map.items()]
    return columns, rows


@main.command()
@_common_options
@click.option("--mode", "modes", type=click.Choice(sorted(MODE_NAMES)), multiple=True,
              help="Control mode (repeatable); default all three.")
@click.option("--m", "ms", type=int, multiple=True, help="Number of users (repeatable).")
@click.option("--unilateral-count", type=int, default=None,
              help="Grid points for the power-only and bias-only sweeps.")
@click.option("--approx-occupancy", is_flag=True, default=None,
              help="Use the constant-time E[1/(M+1)] surrogate (approximate output).")
@click.option("--workers", type=int, default=1, show_default=True)
def sweep(preset, config_path, grid_tau, grid_beta, resolution, out_dir, fmt, modes, ms,
          unilateral_count, approx_occupancy, workers):
    """Metric bullets and Pareto frontiers over a control grid.

    \b
    stats_<mode>:                   tau,beta,p_i...,psi1_i...,psi2_i...
    bullet_<mode>_<kind>[_m<m>]:    tau,beta,x,y,on_frontier,label
    frontier_<mode>_<kind>[_m<m>]:  tau,beta,x,y,label
    dominance:                      mode,kind,m,weakly_dominated,strict_count,max_gap_x,max_gap_y
    kind is M_total (x=sigma, y=mu), M_typical (x=sigma_u, y=mu_u) or
    F (x=c_bar, y=mu_bar; m-independent, no _m suffix). Labels a-i mark the
    nine extreme/centre controls of the joint grid.
    """
    cfg = _resolve(preset, config_path, grid_tau, grid_beta, resolution,
                   m=tuple(ms) or None, unilateral_count=unilateral_count,
                   approx_occupancy=approx_occupancy)
    s = cfg.scenario
    if reparam_layout(s) is None:
        raise click.ClickException("sweeps need the two-station or quincunx layout")
    joint = _joint_grid(cfg)
    grids = {
        "joint": joint,
        "power_only": ControlGrid.linspace(cfg.tau[0], cfg.tau[1], cfg.unilateral_count, "power_only"),
        "bias_only": ControlGrid.linspace(cfg.beta[0], cfg.beta[1], cfg.unilateral_count, "bias_only"),
    }
    selected = [MODE_NAMES[m] for m in modes] if modes else list(grids)
    labels = extreme_labels(joint)
    frontiers = {}
    for mode in selected:
        stats_map = precompute_stats_map(s, grids[mode], workers)
        _write(out_dir, f"stats_{mode}", *_stats_rows(stats_map, s.n), fmt)
        for kind in KINDS:
            for m in ([None] if kind == "F" else cfg.m):
                bullet = build_bullet(stats_map, m or 1, kind, cfg.approx_occupancy)
                front = pareto_frontier(bullet, kind)
                frontiers[(mode, kind, m)] = front
                on = set(front.efficient_controls)
                suffix = f"{mode}_{kind}" + (f"_m{m}" if m else "")
                _write(out_dir, f"bullet_{suffix}", ["tau", "beta", "x", "y", "on_frontier", "label"],
                       [[p.control.tau, p.control.beta, p.x, p.y, int(p.control in on),
                         labels.get(p.control) if mode == "joint" else None] for p in bullet], fmt)
                _write(out_dir, f"frontier_{suffix}", ["tau", "beta", "x", "y", "label"],
                       [[p.control.tau, p.control.beta, p.x, p.y,
                         labels.get(p.control) if mode == "joint" else None] for p in front.points], fmt)
    rows = []
    for (mode, kind, m), front in frontiers.items():
        j = frontiers.get(("joint", kind, m))
        if mode == "joint" or j is None:
            continue
        if not front.candidates <= j.candidates:
            log.warning("skipping %s dominance check: grid not contained in the joint grid", mode)
            continue
        rep = dominance_check(j, front, kind)
        rows.append([mode, kind, m, int(rep.weakly_dominated), rep.strict_count, rep.max_gap_x, rep.max_gap_y])
    if rows:
        _write(out_dir, "dominance",
               ["mode", "kind", "m", "weakly_dominated", "strict_count", "max_gap_x", "max_gap_y"], rows, fmt)
    _write_config(out_dir, cfg)


@main.command()
@_common_options
@click.option("--m", "ms", type=int, multiple=True, help="Number of users (repeatable).")
@click.option("--trials", type=int, default=None, help="Monte Carlo drops per control and m.")
@click.option("--seed", type=int, default=None)
@click.option("--approx-occupancy", is_flag=True, default=None)
@click.option("--workers", type=int, default=1, show_default=True)
def mc(preset, config_path, grid_tau, grid_beta, resolution, out_dir, fmt, ms, trials, seed,
       approx_occupancy, workers):
    """Analytic metrics against Monte Carlo estimates.

    \b
    mc_report: tau,beta,m,metric,analytic,estimate,std_error,z,pass
    pass is 1/0 at |z| <= 4 standard errors, empty when no tolerance
    applies (fairness at finite m, or a single trial). Exits nonzero if
    any row fails. Without --grid-tau/--grid-beta only (0, 0) is run.
    """
    cfg = _resolve(preset, config_path, grid_tau or "0", grid_beta or "0", resolution,
                   m=tuple(ms) or None, trials=trials, seed=seed, approx_occupancy=approx_occupancy)
    s = cfg.scenario
    rows = []
    failures = 0
    for _, rc, c in _controls(cfg, _joint_grid(cfg)):
        stats = cell_stats(s, c)
        for m in cfg.m:
            ms_ = metric_set(stats, m, cfg.approx_occupancy)
            est = estimate(s, c, McConfig(m, cfg.trials, cfg.seed), workers)
            checks = [
                ("mean_total", ms_.mu_m, est.mean_total, est.se_mean_total, True),
                ("std_total", ms_.sigma_m, est.std_total, est.se_std_total, True),
                ("mean_typical", ms_.mu_u_m, est.mean_typical, est.se_mean_typical, True),
                ("std_typical", ms_.sigma_u_m, est.std_typical, est.se_std_typical, True),
            ]
            users = m * cfg.trials
            for i, (p, ph) in enumerate(zip(stats.p, est.p_hat)):
                se = math.sqrt(p * (1 - p) / users) if cfg.trials > 1 else None
                checks.append((f"p_{i}", float(p), ph, se, True))
            checks.append(("fairness", ms_.c_bar, est.mean_fairness, est.se_mean_fairness, False))
            for name, analytic, value, se, gated in checks:
                z = (value - analytic) / se if se else None
                ok = None
                if gated and z is not None:
                    ok = abs(z) <= MC_TOLERANCE_SE
                    failures += not ok
                elif gated and se == 0.0:
                    ok = value == analytic
                    failures += not ok
                tau = rc.tau if rc else None
                beta = rc.beta if rc else None
                rows.append([tau, beta, m, name, analytic, value, se, z, None if ok is None else int(ok)])
    _write(out_dir, "mc_report",
           ["tau", "beta", "m", "metric", "analytic", "estimate", "std_error", "z", "pass"], rows, fmt)
    _write_config(out_dir, cfg)
    if failures:
        raise click.ClickException(f"{failures} Monte Carlo check(s) outside {MC_TOLERANCE_SE:g} standard errors")


@main.command()
@click.option("--p", "ps", type=float, multiple=True, help="Cell probability (repeatable); default 1/4 and 3/4.")
@click.option("--m-max", type=int, default=1000, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="out", show_default=True)
@click.option("--format", "fmt", type=click.Choice(export.FORMATS), default="csv", show_default=True)
def occupancy(ps, m_max, out_dir, fmt):
    """Exact E[1{M>0}/M] against the E[1/(M+1)] surrogate.

    \b
    occupancy: m,p,exact,approx,relative_error   (relative_error = approx/exact - 1)
    crossing:  p,m_crossing   (first m after which exact stays above approx)
    """
    ps = ps or (0.25, 0.75)
    rows = []
    cross = []
    for p in ps:
        if not 0 < p <= 1:
            raise click.ClickException(f"p must lie in (0, 1], got {p}")
        for m in range(1, m_max + 1):
            exact = expected_inverse_occupancy(m, p)
            approx = expected_inverse_occupancy_approx(m, p)
            rows.append([m, p, exact, approx, approx / exact - 1.0])
        cross.append([p, crossing_point(p, m_max)])
    _write(out_dir, "occupancy", ["m", "p", "exact", "approx", "relative_error"], rows, fmt)
    _write(out_dir, "crossing", ["p", "m_crossing"], cross, fmt)


if __name__ == "__main__":
    main()
