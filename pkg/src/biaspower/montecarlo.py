"""Monte Carlo oracle: drop users uniformly, associate them, measure their SE.

Rates are evaluated with the exact SINR at each sampled location, never on
the quadrature grid, so the estimates are independent of the partition code.

Random streams
--------------
Trial ``t`` of a run with seed ``s`` draws from
``Philox(key=(s mod 2**64, 0), counter=(0, 0, t, 0))``. Philox is
counter-based, so each trial owns a disjoint stream and results do not depend
on how trials are chunked or spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .metrics import jain_fairness
from .model import ControlPoint, Scenario, validate_scenario
from .partition import associate, rate

_CHUNK_USERS = 2_000_000


@dataclass(frozen=True)
class McConfig:
    m: int
    trials: int
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.trials < 1:
            raise ValueError("m and trials must be positive")


@dataclass(frozen=True)
class McEstimates:
    m: int
    trials: int
    mean_total: float
    std_total: float
    mean_typical: float
    std_typical: float
    mean_fairness: float
    se_mean_total: float | None
    se_std_total: float | None
    se_mean_typical: float | None
    se_std_typical: float | None
    se_mean_fairness: float | None
    p_hat: tuple[float, ...]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    key = int(seed) % 2**64
    return np.random.Generator(np.random.Philox(key=[key, 0], counter=[0, 0, int(trial), 0]))


def sample_users(s: Scenario, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` i.i.d. uniform locations in the arena minus the deadzones, shape ``(m, dim)``."""
    a = s.arena
    locs = s.locations
    out = rng.uniform(a.lower, a.upper, size=(m, a.dim))
    while True:
        d = np.sqrt(((out[:, None, :] - locs[None, :, :]) ** 2).sum(axis=2))
        bad = np.flatnonzero(np.any(d <= s.delta, axis=1))
        if bad.size == 0:
            return out
        out[bad] = rng.uniform(a.lower, a.upper, size=(bad.size, a.dim))


def _user_sinr(s: Scenario, c: ControlPoint, users: np.ndarray) -> np.ndarray:
    """SINR of every station at every user; shape ``(n, U)``."""
    locs = s.locations
    d = np.sqrt(((users[None, :, :] - locs[:, None, :]) ** 2).sum(axis=2))
    rx = np.asarray(c.powers)[:, None] * d ** (-s.alpha)
    out = np.empty_like(rx)
    for i in range(s.n):
        interference = np.full(rx.shape[1], float(s.eta))
        for j in range(s.n):
            if j != i:
                interference += rx[j]
        out[i] = rx[i] / interference
    return out


def _trial_batch(s: Scenario, c: ControlPoint, users: np.ndarray):
    """Per-user SE and cell index for a ``(T, m, dim)`` batch of user drops."""
    T, m, dim = users.shape
    sinr = _user_sinr(s, c, users.reshape(T * m, dim))
    cell = associate(sinr, np.asarray(c.biases))
    r = rate(np.take_along_axis(sinr, cell[None, :], axis=0)[0])
    flat = np.repeat(np.arange(T), m) * s.n + cell
    counts = np.bincount(flat, minlength=T * s.n)
    x = r / counts[flat]
    return x.reshape(T, m), cell.reshape(T, m)


def simulate_trial(s: Scenario, c: ControlPoint, users: np.ndarray):
    """Per-user SE vector, total SE and Chiu-Jain fairness for one drop."""
    users = np.asarray(users, dtype=float).reshape(-1, s.arena.dim)
    x, _ = _trial_batch(s, c, users[None])
    x = x[0]
    return x, float(x.sum()), jain_fairness(x)


def _run_chunk(s, c, cfg, start, stop):
    users = np.stack([sample_users(s, cfg.m, trial_rng(cfg.seed, t)) for t in range(start, stop)])
    x, cell = _trial_batch(s, c, users)
    total = x.sum(axis=1)
    sq = (x * x).sum(axis=1)
    fairness = total**2 / (cfg.m * sq)
    cell_counts = np.bincount(cell.ravel(), minlength=s.n)
    return total, sq, fairness, cell_counts


def run_trials(s: Scenario, c: ControlPoint, cfg: McConfig, workers: int = 1):
    """Per-trial total SE, sum of squared per-user SE, fairness, and cell counts."""
    validate_scenario(s)
    step = max(1, _CHUNK_USERS // cfg.m)
    bounds = [(a, min(a + step, cfg.trials)) for a in range(0, cfg.trials, step)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _run_chunk(s, c, cfg, *b), bounds))
    else:
        parts = [_run_chunk(s, c, cfg, *b) for b in bounds]
    total = np.concatenate([p[0] for p in parts])
    sq = np.concatenate([p[1] for p in parts])
    fairness = np.concatenate([p[2] for p in parts])
    counts = np.sum([p[3] for p in parts], axis=0)
    return total, sq, fairness, counts


def _std_and_se(samples: np.ndarray):
    """Sample std and its delta-method standard error ``sqrt((m4 - s^4) / (4 s^2 T))``."""
    T = samples.size
    mean = samples.mean()
    dev = samples - mean
    var = float(np.mean(dev * dev)) * T / (T - 1)
    std = math.sqrt(var)
    m4 = float(np.mean(dev**4))
    se = math.sqrt(max(m4 - var * var, 0.0) / (4.0 * var * T)) if var > 0 else 0.0
    return std, se


def estimate(s: Scenario, c: ControlPoint, cfg: McConfig, workers: int = 1) -> McEstimates:
    """Sample means and standard deviations of the SE metrics over ``cfg.trials`` drops.

    The typical-user estimators average over all ``m`` users of each drop
    rather than one sampled user: ``E[X_U] = E[X]/m`` and
    ``E[X_U^2] = E[sum_u x_u^2]/m``, which have lower variance and the same
    expectation.
    """
    total, sq, fairness, counts = run_trials(s, c, cfg, workers)
    m, T = cfg.m, cfg.trials
    typ_mean = total / m
    typ_sq = sq / m
    mean_typ = float(typ_mean.mean())
    var_typ = float(typ_sq.mean()) - mean_typ**2
    p_hat = tuple(float(v) for v in counts / counts.sum())

    if T == 1:
        return McEstimates(m, T, float(total[0]), 0.0, mean_typ, math.sqrt(max(var_typ, 0.0)),
                           float(fairness[0]), None, None, None, None, None, p_hat)

    std_total, se_std_total = _std_and_se(total)
    std_typ = math.sqrt(max(var_typ, 0.0))
    # delta method on g(a, b) = a - b^2 with a = mean(typ_sq), b = mean(typ_mean)
    cov = np.cov(np.vstack([typ_sq, typ_mean]))
    grad = np.array([1.0, -2.0 * mean_typ])
    se_var_typ = math.sqrt(max(float(grad @ cov @ grad), 0.0) / T)
    se_std_typ = se_var_typ / (2.0 * std_typ) if std_typ > 0 else 0.0
    root_t = math.sqrt(T)
    return McEstimates(
        m=m,
        trials=T,
        mean_total=float(total.mean()),
        std_total=std_total,
        mean_typical=mean_typ,
        std_typical=std_typ,
        mean_fairness=float(fairness.mean()),
        se_mean_total=float(total.std(ddof=1)) / root_t,
        se_std_total=se_std_total,
        se_mean_typical=float(typ_mean.std(ddof=1)) / root_t,
        se_std_typical=se_std_typ,
        se_mean_fairness=float(fairness.std(ddof=1)) / root_t,
        p_hat=p_hat,
    )
