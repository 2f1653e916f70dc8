"""Averaged drifts: stationary-weighted, per-class, and ergodic-estimate.

The invariant measure of the frozen fast equation is never represented
explicitly; its drift average is estimated by time-averaging one long frozen
trajectory per replication (exponential mixing makes time averages far cheaper
than ensembles at a fixed time), with batch-means standard errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import RngStream
from .spectral import FieldState, SpectralOperator
from .stable_noise import NoiseWeights
from .switching import ClassPartition
from .engine import solve_frozen_fast


def nu_average_drift(drift, nu: np.ndarray, x: FieldState) -> FieldState:
    """Stationary-weighted drift sum_i nu_i b(x, i)."""
    nu = np.asarray(nu, dtype=float)
    if nu.size != drift.n_regimes:
        raise ValueError("weight vector length must match the regime count")
    return sum(nu[i] * drift(x, i) for i in range(nu.size))


def make_nu_averaged(drift, nu: np.ndarray):
    nu = np.asarray(nu, dtype=float)
    return lambda x: nu_average_drift(drift, nu, x)


def class_average_drift(
    drift,
    partition: ClassPartition,
    mu_blocks: list[np.ndarray],
    y: FieldState,
    class_idx: int,
) -> FieldState:
    """Within-class stationary average sum_j mu_ij b(y, s_ij)."""
    states = partition.classes[class_idx]
    mu = np.asarray(mu_blocks[class_idx], dtype=float)
    if mu.size != len(states):
        raise ValueError("block weight length must match the class size")
    return sum(mu[j] * drift(y, s) for j, s in enumerate(states))


def make_class_averaged(drift, partition: ClassPartition, mu_blocks: list[np.ndarray]):
    return lambda y, i: class_average_drift(drift, partition, mu_blocks, y, i)


@dataclass(frozen=True)
class ErgodicEstimatorConfig:
    """Burn-in / horizon in units of time; defaults derive from the mixing rate.

    The default burn-in is three e-folds of the exponential-mixing decay and
    the default horizon ten times that, so roughly ten mixing times of data
    survive the transient.
    """

    dt: float = 0.05
    burn_in: float | None = None
    horizon: float | None = None
    n_reps: int = 4
    n_batches: int = 10

    def resolve(self, mixing_rate: float) -> tuple[float, float]:
        if mixing_rate <= 0:
            raise ValueError("mixing rate must be positive")
        burn = self.burn_in if self.burn_in is not None else 3.0 / mixing_rate
        horizon = self.horizon if self.horizon is not None else 30.0 / mixing_rate
        if horizon <= burn:
            raise ValueError("averaging horizon must exceed the burn-in")
        return burn, horizon


def estimate_ergodic_drift(
    z: FieldState,
    fast_drift,
    observable,
    op_b: SpectralOperator,
    w_z: NoiseWeights,
    beta: float,
    config: ErgodicEstimatorConfig,
    rng: RngStream,
    y0: FieldState | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Estimate int b(z, u) pi_z(du) by time-averaging frozen-fast trajectories.

    ``observable`` is called as b(z, y).  Returns (estimate, standard error)
    per mode; the SE combines batch means within replications across
    independent replications.
    """
    mixing = op_b.lambda_1 - fast_drift.grad_y_bound
    burn, horizon = config.resolve(mixing)
    z = np.asarray(z, dtype=float)
    if y0 is None:
        y0 = np.zeros(op_b.k_trunc)
    n_steps = int(np.ceil(horizon / config.dt))
    grid = np.linspace(0.0, n_steps * config.dt, n_steps + 1)
    keep = grid > burn

    rep_means = []
    batch_vars = []
    for rep in range(config.n_reps):
        rec = solve_frozen_fast(z, y0, fast_drift, op_b, w_z, beta, grid, rng.substream(rep))
        values = np.array([observable(z, y) for y in rec.states[keep]])
        rep_means.append(values.mean(axis=0))
        batches = np.array_split(values, config.n_batches, axis=0)
        bm = np.array([b.mean(axis=0) for b in batches])
        batch_vars.append(bm.var(axis=0, ddof=1) / config.n_batches)
    rep_means = np.array(rep_means)
    estimate = rep_means.mean(axis=0)
    se = np.sqrt(np.mean(batch_vars, axis=0) / config.n_reps)
    return estimate, se


def ergodic_decay_probe(
    z: FieldState,
    y: FieldState,
    fast_drift,
    observable,
    op_b: SpectralOperator,
    w_z: NoiseWeights,
    beta: float,
    t_grid,
    n_paths: int,
    rng: RngStream,
    bbar: np.ndarray | None = None,
) -> np.ndarray:
    """|E b(z, Y_z(t; y)) - bbar(z)|_H over the grid, by ensemble averaging.

    ``t_grid`` doubles as the stepping grid (must start at 0).  If ``bbar`` is
    not supplied it is estimated first.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0:
        raise ValueError("t_grid must start at 0")
    z = np.asarray(z, dtype=float)
    if bbar is None:
        bbar, _ = estimate_ergodic_drift(
            z, fast_drift, observable, op_b, w_z, beta, ErgodicEstimatorConfig(), rng.substream(10**6)
        )
    acc = np.zeros((t_grid.size, np.asarray(bbar).size))
    for j in range(n_paths):
        rec = solve_frozen_fast(z, y, fast_drift, op_b, w_z, beta, t_grid, rng.substream(j))
        acc += np.array([observable(z, yy) for yy in rec.states])
    mean_obs = acc / n_paths
    return np.linalg.norm(mean_obs - bbar, axis=1)


def fit_decay_rate(t_grid, values) -> float:
    """Exponential decay rate from least squares on (t, log value)."""
    t = np.asarray(t_grid, dtype=float)
    v = np.asarray(values, dtype=float)
    mask = v > 0
    if mask.sum() < 2:
        raise ValueError("need at least two positive values to fit a decay rate")
    slope, _ = np.polyfit(t[mask], np.log(v[mask]), 1)
    return float(-slope)


def lipschitz_probe(fn, pairs) -> float:
    """Max sampled difference quotient |f(z1) - f(z2)| / |z1 - z2| over pairs."""
    worst = 0.0
    seen = False
    for z1, z2 in pairs:
        z1 = np.asarray(z1, dtype=float)
        z2 = np.asarray(z2, dtype=float)
        dz = np.linalg.norm(z1 - z2)
        if dz == 0:
            raise ValueError("degenerate pair with identical inputs")
        seen = True
        worst = max(worst, float(np.linalg.norm(fn(z1) - fn(z2)) / dz))
    if not seen:
        raise ValueError("no sample pairs supplied")
    return worst
