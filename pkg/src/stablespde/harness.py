"""Experiment orchestration: assumption checks, coupled eps-sweeps, rate fits.

Coupling convention: for every trajectory index j, the two members of a pair
(the eps-system and its averaged limit) run on the identical slow-noise
substream, so their difference isolates the drift discrepancy.  The same
trajectory streams are reused across the eps grid (common random numbers),
which makes the error columns strongly positively correlated and the monotone
decrease visible at desk scale.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .averaging import (
    ErgodicEstimatorConfig,
    estimate_ergodic_drift,
    ergodic_decay_probe,
    fit_decay_rate,
    make_class_averaged,
    make_nu_averaged,
)
from .config import ExperimentConfig
from .engine import (
    solve_averaged_spde,
    solve_fast_slow,
    solve_switching_spde,
)
from .rng import RngStream
from .spectral import admissibility, h_norm
from .switching import (
    aggregate_generator,
    aggregate_path,
    block_diagonal,
    occupation_fractions,
    simulate_chain,
    stationary_distribution,
)

_ESTIMATOR_STREAM = 900_000  # stream id reserved for averaged-drift estimation


class ConditionError(RuntimeError):
    """An assumption check failed; experiments refuse to start (exit code 1)."""


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ErrorTable:
    """Rows of the coupled eps-sweep: (eps, p, error, se, n_paths)."""

    eps: np.ndarray
    p: float
    errors: np.ndarray
    ses: np.ndarray
    n_paths: int

    def rows(self):
        for e, err, se in zip(self.eps, self.errors, self.ses):
            yield float(e), self.p, float(err), float(se), self.n_paths


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    theoretical_exponent: float


def theoretical_rate_exponent(alpha: float, p: float, theta: float) -> float:
    """rho * theta with rho at 95% of its admissible supremum (alpha-p)/(alpha-p+p*theta*alpha)."""
    rho = 0.95 * (alpha - p) / (alpha - p + p * theta * alpha)
    return rho * theta


def rate_fit(table: ErrorTable, theoretical: float) -> RateFit:
    """OLS of log error on log eps.  Positive slope = error shrinks with eps."""
    if table.eps.size < 3:
        raise ValueError("rate fit needs at least 3 grid points")
    if np.any(table.errors <= 0):
        raise ValueError("rate fit needs positive errors")
    x = np.log(table.eps)
    y = np.log(table.errors)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 0.0
    return RateFit(float(slope), float(intercept), float(r2), theoretical)


def p_moment(values: np.ndarray, p: float, n_batches: int = 10) -> tuple[float, float]:
    """(E v^p)^(1/p) with a batch-means standard error (delta method for the root)."""
    v = np.asarray(values, dtype=float) ** p
    m = v.mean()
    if m == 0:
        return 0.0, 0.0
    batches = np.array_split(v, min(n_batches, v.size))
    bm = np.array([b.mean() for b in batches])
    se_m = bm.std(ddof=1) / math.sqrt(len(batches))
    return float(m ** (1.0 / p)), float(se_m / p * m ** (1.0 / p - 1.0))


# ----------------------------------------------------------------------
# condition checks
# ----------------------------------------------------------------------


def run_check(cfg: ExperimentConfig):
    """Machine-check every standing assumption; returns (admissibility, checks)."""
    checks: list[ConditionCheck] = []

    def add(name, passed, detail=""):
        checks.append(ConditionCheck(name, bool(passed), detail))

    at = cfg.alpha * cfg.theta
    add("alpha-theta in (0,1)", 0 < at < 1, f"alpha*theta = {at:g}")
    add("p in (1, alpha)", 1 < cfg.p < cfg.alpha, f"p = {cfg.p:g}, alpha = {cfg.alpha:g}")

    op_a = cfg.op_a()
    w_l = cfg.weights_l()
    fast = cfg.scenario == "fast-slow"
    report = admissibility(
        op_a,
        w_l,
        cfg.alpha,
        cfg.theta,
        op_b=cfg.op_b() if fast else None,
        w_z=cfg.weights_z() if fast else None,
        beta=cfg.beta if fast else None,
    )
    add(
        "noise admissibility",
        report.passed,
        f"delta = {report.delta_partial:.6g} (+tail <= {report.delta_tail_bound})",
    )

    if cfg.scenario in ("switching-single", "switching-multiclass"):
        try:
            qt, qh = cfg.generator_pair()
            add("generator validity", True, f"n = {qt.n_states}")
        except Exception as exc:
            add("generator validity", False, str(exc))
            qt = None
        if qt is not None and cfg.scenario == "switching-single":
            try:
                nu = stationary_distribution(qt)
                add("weak irreducibility", True, f"nu = {np.round(nu, 6).tolist()}")
            except ValueError as exc:
                add("weak irreducibility", False, str(exc))
        if qt is not None and cfg.scenario == "switching-multiclass":
            try:
                for i, blk in enumerate(cfg.qtilde_blocks()):
                    stationary_distribution(blk)
                add("block irreducibility", True, f"{cfg.class_partition().n_classes} classes")
            except ValueError as exc:
                add("block irreducibility", False, str(exc))
        drift = cfg.regime_drift()
        lips = np.asarray(drift.lipschitz, dtype=float)
        add(
            "drift Lipschitz declared",
            lips.size == qt.n_states if qt is not None else False,
            f"K = {lips.tolist()}",
        )

    if fast:
        mu1 = cfg.op_b().lambda_1
        k3 = cfg.fast_coupled_drift().grad_y_bound
        add("ergodicity condition K3 < mu_1", k3 < mu1, f"K3 = {k3:g}, mu_1 = {mu1:g}")
        bound = cfg.slow_coupled_drift().bound_for(cfg.k_trunc)
        add("slow drift uniformly bounded", np.isfinite(bound), f"M = {bound:.6g}")
        add(
            "kappa2 finite",
            report.kappa2_partial is not None and np.isfinite(report.kappa2_partial),
            f"kappa2 = {report.kappa2_partial}",
        )

    return report, checks


def require_pass(checks: list[ConditionCheck]) -> None:
    bad = [c for c in checks if not c.passed]
    if bad:
        lines = "; ".join(f"{c.name}: {c.detail}" for c in bad)
        raise ConditionError(f"condition check failed: {lines}")


# ----------------------------------------------------------------------
# coupled convergence experiments
# ----------------------------------------------------------------------


def _time_grid(cfg: ExperimentConfig) -> np.ndarray:
    n = int(round(cfg.T / cfg.dt))
    return np.linspace(0.0, cfg.T, n + 1)


def _checkpoint_idx(grid: np.ndarray, n_checkpoints: int) -> np.ndarray:
    return np.unique(np.linspace(1, grid.size - 1, n_checkpoints).astype(int))


def _converge_switching_single(cfg, eps, grid, chk):
    qt, qh = cfg.generator_pair()
    drift = cfg.regime_drift()
    nu = stationary_distribution(qt)
    averaged = make_nu_averaged(drift, nu)
    op_a, w_l, x0 = cfg.op_a(), cfg.weights_l(), cfg.initial_state()
    r0 = cfg.r0 - 1

    def one_path(j: int) -> tuple[float, float]:
        rng = RngStream(cfg.seed, j)
        chain = simulate_chain(qt, qh, eps, r0, cfg.T, rng.substream(1))
        rec_eps = solve_switching_spde(x0, drift, op_a, w_l, cfg.alpha, chain, grid, rng)
        rec_bar = solve_averaged_spde(x0, averaged, op_a, w_l, cfg.alpha, grid, rng)
        diff = rec_eps.states - rec_bar.states
        norms = np.linalg.norm(diff[chk], axis=1)
        return float(norms[-1]), float(norms.max())

    return one_path


def _converge_switching_multiclass(cfg, eps, grid, chk):
    qt, qh = cfg.generator_pair()
    part = cfg.class_partition()
    blocks = cfg.qtilde_blocks()
    drift = cfg.regime_drift()
    mu_blocks = [stationary_distribution(b) for b in blocks]
    class_drift = make_class_averaged(drift, part, mu_blocks)
    op_a, w_l, x0 = cfg.op_a(), cfg.weights_l(), cfg.initial_state()
    r0 = cfg.r0 - 1

    def one_path(j: int) -> tuple[float, float]:
        rng = RngStream(cfg.seed, j)
        chain = simulate_chain(qt, qh, eps, r0, cfg.T, rng.substream(1))
        rec_eps = solve_switching_spde(x0, drift, op_a, w_l, cfg.alpha, chain, grid, rng)
        # the averaged equation rides the aggregated chain of the same path:
        # a concrete coupling of the limit chain, as the class process of the
        # eps-chain converges weakly to it
        agg = aggregate_path(chain, part)
        rec_bar = solve_switching_spde(x0, class_drift, op_a, w_l, cfg.alpha, agg, grid, rng)
        diff = rec_eps.states - rec_bar.states
        norms = np.linalg.norm(diff[chk], axis=1)
        return float(norms[-1]), float(norms.max())

    return one_path


def averaged_fast_slow_drift(cfg: ExperimentConfig, rng: RngStream):
    """Averaged slow drift for the fast-slow scenario.

    The fast drift does not depend on the slow state, so the frozen invariant
    measure is a single law pi and the averaged drift separates into
    gain_x tanh(z) + gain_y * m + offset with m = int tanh(u) pi(du), which is
    estimated once.  Returns (callable, m, se(m)).
    """
    est_cfg = ErgodicEstimatorConfig(
        dt=cfg.est_dt, burn_in=cfg.est_burn_in, horizon=cfg.est_horizon, n_reps=cfg.est_reps
    )
    m, se = estimate_ergodic_drift(
        np.zeros(cfg.k_trunc),
        cfg.fast_coupled_drift(),
        lambda z, u: np.tanh(u),
        cfg.op_b(),
        cfg.weights_z(),
        cfg.beta,
        est_cfg,
        rng,
    )
    slow = cfg.slow_coupled_drift()

    def averaged(x):
        return slow.gain_x * np.tanh(x) + slow.gain_y * m + slow.offset

    return averaged, m, se


def _converge_fast_slow(cfg, eps, grid, chk, averaged):
    op_a, op_b = cfg.op_a(), cfg.op_b()
    w_l, w_z = cfg.weights_l(), cfg.weights_z()
    x0, y0 = cfg.initial_state(), cfg.initial_fast_state()
    slow, fast = cfg.slow_coupled_drift(), cfg.fast_coupled_drift()

    def one_path(j: int) -> tuple[float, float]:
        rng = RngStream(cfg.seed, j)
        rec_eps = solve_fast_slow(
            x0, y0, slow, fast, op_a, op_b, w_l, w_z, cfg.alpha, cfg.beta, eps, grid, rng,
            c_sub=cfg.c_sub,
        )
        rec_bar = solve_averaged_spde(x0, averaged, op_a, w_l, cfg.alpha, grid, rng)
        diff = rec_eps.states - rec_bar.states
        norms = np.linalg.norm(diff[chk], axis=1)
        return float(norms[-1]), float(norms.max())

    return one_path


def run_converge(cfg: ExperimentConfig, n_paths: int | None = None):
    """Coupled eps-sweep; returns (ErrorTable, checkpoint ErrorTable, RateFit|None, notice)."""
    report, checks = run_check(cfg)
    require_pass(checks)
    n_paths = n_paths or cfg.n_paths
    grid = _time_grid(cfg)
    chk = _checkpoint_idx(grid, cfg.checkpoints)

    averaged = None
    if cfg.scenario == "fast-slow":
        averaged, _, _ = averaged_fast_slow_drift(cfg, RngStream(cfg.seed, _ESTIMATOR_STREAM))

    terminal_errs, terminal_ses = [], []
    sup_errs, sup_ses = [], []
    for eps in cfg.eps_grid:
        if cfg.scenario == "switching-single":
            one_path = _converge_switching_single(cfg, eps, grid, chk)
        elif cfg.scenario == "switching-multiclass":
            one_path = _converge_switching_multiclass(cfg, eps, grid, chk)
        else:
            one_path = _converge_fast_slow(cfg, eps, grid, chk, averaged)
        results = np.array([one_path(j) for j in range(n_paths)])
        err, se = p_moment(results[:, 0], cfg.p, cfg.n_batches)
        terminal_errs.append(err)
        terminal_ses.append(se)
        err_s, se_s = p_moment(results[:, 1], cfg.p, cfg.n_batches)
        sup_errs.append(err_s)
        sup_ses.append(se_s)

    eps_arr = np.asarray(cfg.eps_grid, dtype=float)
    table = ErrorTable(eps_arr, cfg.p, np.array(terminal_errs), np.array(terminal_ses), n_paths)
    sup_table = ErrorTable(eps_arr, cfg.p, np.array(sup_errs), np.array(sup_ses), n_paths)

    theo = theoretical_rate_exponent(cfg.alpha, cfg.p, cfg.theta)
    fit, notice = None, ""
    if eps_arr.size < 3:
        notice = "rate fit refused: fewer than 3 grid points"
    elif np.any(table.errors <= 0):
        notice = "rate fit refused: nonpositive errors in the table"
    else:
        fit = rate_fit(table, theo)
    return table, sup_table, fit, notice


def monotone_with_inversions(table: ErrorTable, se_factor: float = 2.0) -> tuple[bool, int]:
    """Decreasing error column, tolerating inversions within se_factor combined SEs.

    Returns (acceptable, n_inversions) where acceptable means at most one
    inversion and every inversion within the combined-SE band.
    """
    inversions = 0
    ok = True
    for i in range(table.errors.size - 1):
        gap = table.errors[i + 1] - table.errors[i]
        if gap > 0:
            inversions += 1
            band = se_factor * math.hypot(table.ses[i], table.ses[i + 1])
            if gap > band:
                ok = False
    return ok and inversions <= 1, inversions


# ----------------------------------------------------------------------
# frozen-equation / aggregation / single-trajectory runs
# ----------------------------------------------------------------------


def run_freeze(cfg: ExperimentConfig):
    """Averaged-drift estimates over a grid of slow states, plus the decay probe."""
    report, checks = run_check(cfg)
    require_pass(checks)
    op_b, w_z = cfg.op_b(), cfg.weights_z()
    fast = cfg.fast_coupled_drift()
    slow = cfg.slow_coupled_drift()
    observable = lambda z, u: slow(z, u)
    est_cfg = ErgodicEstimatorConfig(
        dt=cfg.est_dt, burn_in=cfg.est_burn_in, horizon=cfg.est_horizon, n_reps=cfg.est_reps
    )
    x0 = cfg.initial_state()
    z_grid = [np.zeros(cfg.k_trunc), x0, 2.0 * x0]

    rows = []  # (z_id, component, bbar, se)
    for z_id, z in enumerate(z_grid):
        est, se = estimate_ergodic_drift(
            z, fast, observable, op_b, w_z, cfg.beta, est_cfg,
            RngStream(cfg.seed, _ESTIMATOR_STREAM + z_id),
        )
        for k in range(est.size):
            rows.append((z_id, k, float(est[k]), float(se[k])))

    # initial-condition insensitivity at z = x0: re-estimate from a displaced y0
    y_alt = np.ones(cfg.k_trunc)
    est_a, se_a = estimate_ergodic_drift(
        x0, fast, observable, op_b, w_z, cfg.beta, est_cfg,
        RngStream(cfg.seed, _ESTIMATOR_STREAM + 50),
    )
    est_b, se_b = estimate_ergodic_drift(
        x0, fast, observable, op_b, w_z, cfg.beta, est_cfg,
        RngStream(cfg.seed, _ESTIMATOR_STREAM + 51), y0=y_alt,
    )
    comb = np.sqrt(se_a**2 + se_b**2)
    y0_gap_in_se = float(np.max(np.abs(est_a - est_b) / np.where(comb > 0, comb, np.inf)))

    mixing = op_b.lambda_1 - fast.grad_y_bound
    t_grid = np.linspace(0.0, 3.0 / mixing, 31)
    decay = ergodic_decay_probe(
        x0, y_alt * 2.0, fast, observable, op_b, w_z, cfg.beta, t_grid, 400,
        RngStream(cfg.seed, _ESTIMATOR_STREAM + 60), bbar=est_a,
    )
    rate = fit_decay_rate(t_grid, decay)
    return rows, (t_grid, decay), {"y0_gap_in_combined_se": y0_gap_in_se, "decay_rate": rate}


def run_aggregate(cfg: ExperimentConfig):
    """Aggregation diagnostics: empirical class rates and occupations vs the limit.

    Pools transition counts and occupation times over ``n_paths`` independent
    chains (equivalent to one chain of horizon n_paths * T), which tightens the
    empirical-rate estimate without changing eps.
    """
    report, checks = run_check(cfg)
    require_pass(checks)
    qt, qh = cfg.generator_pair()
    part = cfg.class_partition()
    blocks = cfg.qtilde_blocks()
    qbar = aggregate_generator(blocks, qh, part)
    eps = float(min(cfg.eps_grid))
    counts = np.zeros((part.n_classes, part.n_classes))
    class_time = np.zeros(part.n_classes)
    occ = np.zeros(qt.n_states)
    for j in range(cfg.n_paths):
        chain = simulate_chain(
            qt, qh, eps, cfg.r0 - 1, cfg.T, RngStream(cfg.seed, j).substream(1)
        )
        agg = aggregate_path(chain, part)
        np.add.at(counts, (agg.states[:-1], agg.states[1:]), 1.0)
        class_time += occupation_fractions(agg, part.n_classes) * cfg.T
        occ += occupation_fractions(chain, qt.n_states) / cfg.n_paths
    rows = []
    for i in range(part.n_classes):
        for j in range(part.n_classes):
            if i != j:
                emp = counts[i, j] / class_time[i] if class_time[i] > 0 else 0.0
                rows.append((i + 1, j + 1, float(emp), float(qbar.rates[i, j])))
    per_class = {}
    for i, blk in enumerate(part.classes):
        blk_occ = occ[list(blk)]
        total = blk_occ.sum()
        mu = stationary_distribution(blocks[i])
        per_class[str(i + 1)] = {
            "occupation": float(total),
            "within_class_empirical": (blk_occ / total).tolist() if total > 0 else None,
            "within_class_stationary": mu.tolist(),
        }
    return qbar, rows, per_class


def run_simulate(cfg: ExperimentConfig):
    """One seeded trajectory of the configured scenario, for inspection."""
    report, checks = run_check(cfg)
    require_pass(checks)
    grid = _time_grid(cfg)
    rng = RngStream(cfg.seed, 0)
    if cfg.scenario == "switching-single":
        qt, qh = cfg.generator_pair()
        chain = simulate_chain(qt, qh, cfg.eps_grid[0], cfg.r0 - 1, cfg.T, rng.substream(1))
        rec = solve_switching_spde(
            cfg.initial_state(), cfg.regime_drift(), cfg.op_a(), cfg.weights_l(), cfg.alpha,
            chain, grid, rng,
        )
    elif cfg.scenario == "switching-multiclass":
        qt, qh = cfg.generator_pair()
        chain = simulate_chain(qt, qh, cfg.eps_grid[0], cfg.r0 - 1, cfg.T, rng.substream(1))
        rec = solve_switching_spde(
            cfg.initial_state(), cfg.regime_drift(), cfg.op_a(), cfg.weights_l(), cfg.alpha,
            chain, grid, rng,
        )
    else:
        rec = solve_fast_slow(
            cfg.initial_state(), cfg.initial_fast_state(),
            cfg.slow_coupled_drift(), cfg.fast_coupled_drift(),
            cfg.op_a(), cfg.op_b(), cfg.weights_l(), cfg.weights_z(),
            cfg.alpha, cfg.beta, cfg.eps_grid[0], grid, rng, c_sub=cfg.c_sub,
        )
    return rec


def synthesize_point(coeffs: np.ndarray, x: float) -> float:
    """Evaluate the field at a spatial point in the sine eigenbasis on (0, pi)."""
    k = np.arange(1, coeffs.size + 1)
    basis = np.sqrt(2.0 / np.pi) * np.sin(k * x)
    return float(coeffs @ basis)


# ----------------------------------------------------------------------
# persistence
# ----------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_summary(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
