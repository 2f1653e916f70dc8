"""Diagonal dissipative operators in a fixed eigenbasis.

Operators act mode-wise through their eigenvalue sequence; states are plain
coefficient vectors (the H-norm is the Euclidean norm of the coefficients).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stable_noise import NoiseWeights, PowerLawRule

# H-valued states are carried as raw coefficient vectors in the shared basis.
FieldState = np.ndarray


def h_norm(x: FieldState) -> float:
    return float(np.linalg.norm(x))


@dataclass(frozen=True)
class SpectralOperator:
    """Self-adjoint operator with discrete spectrum 0 < lam_1 < lam_2 < ..."""

    eigenvalues: np.ndarray
    growth_rule: PowerLawRule | None = None

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", lam)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("eigenvalues must be a nonempty 1-d sequence")
        if lam[0] <= 0 or np.any(np.diff(lam) <= 0):
            raise ValueError("eigenvalues must be positive and strictly increasing")

    @classmethod
    def from_rule(cls, rule: PowerLawRule, k_trunc: int) -> "SpectralOperator":
        return cls(rule.values(k_trunc), growth_rule=rule)

    @property
    def k_trunc(self) -> int:
        return self.eigenvalues.size

    @property
    def lambda_1(self) -> float:
        return float(self.eigenvalues[0])


def rod_operator(k_trunc: int) -> SpectralOperator:
    """Dirichlet Laplacian on (0, pi): lambda_k = k^2."""
    return SpectralOperator.from_rule(PowerLawRule(1.0, 2.0), k_trunc)


def semigroup_apply(op: SpectralOperator, t: float, x: FieldState) -> FieldState:
    """Apply the contraction semigroup: (exp(-lam_k t) x_k)_k."""
    if t < 0:
        raise ValueError("semigroup time must be nonnegative")
    return np.exp(-op.eigenvalues * t) * np.asarray(x, dtype=float)


def fractional_power_apply(op: SpectralOperator, theta: float, x: FieldState) -> FieldState:
    """Apply the fractional power: (lam_k^theta x_k)_k.  Negative theta allowed."""
    return op.eigenvalues**theta * np.asarray(x, dtype=float)


def smoothing_bound_check(op: SpectralOperator, delta: float, t_grid) -> bool:
    """Check max_k lam_k^delta exp(-lam_k t) <= (delta/e)^delta t^-delta on the grid.

    The supremum of lam^delta exp(-lam t) over lam > 0 sits at lam = delta/t,
    so this is an analytic identity; a False return indicates a bug.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    lam = op.eigenvalues
    for t in np.atleast_1d(t_grid):
        if t <= 0:
            raise ValueError("t must be positive")
        lhs = np.max(lam**delta * np.exp(-lam * t))
        bound = np.exp(-delta) * delta**delta * t ** (-delta)
        if lhs > bound * (1 + 1e-12):
            return False
    return True


def hoelder_bound_check(op: SpectralOperator, delta: float, t_grid) -> bool:
    """Check max_k lam_k^-delta (1 - exp(-lam_k t)) <= t^delta on the grid.

    Constant 1 suffices since 1 - exp(-u) <= min(1, u) <= u^delta.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    lam = op.eigenvalues
    for t in np.atleast_1d(t_grid):
        if t < 0:
            raise ValueError("t must be nonnegative")
        lhs = np.max(lam ** (-delta) * -np.expm1(-lam * t))
        if lhs > t**delta * (1 + 1e-12):
            return False
    return True


@dataclass(frozen=True)
class AdmissibilityReport:
    """Summability diagnostics for the noise/operator pairing.

    ``delta`` sums beta_k^alpha / lam_k^(1 - alpha*theta) for the slow pair;
    ``kappa2`` sums q_k^beta / mu_k for the fast pair.  Tail bounds come from
    the integral test when both sequences carry power-law rules, else None.
    """

    delta_partial: float
    delta_tail_bound: float | None
    kappa1_partial: float
    kappa2_partial: float | None
    kappa2_tail_bound: float | None
    theta: float
    alpha_theta_ok: bool
    passed: bool
    reasons: tuple[str, ...] = ()


def _power_law_tail(coef: float, s: float, k_trunc: int) -> float | None:
    """Integral-test bound on sum_{k > k_trunc} coef * k^-s; None if divergent."""
    if s <= 1:
        return None
    return coef * k_trunc ** (1 - s) / (s - 1)


def _weighted_sum(
    weights: NoiseWeights, op: SpectralOperator, idx: float, lam_exp: float, k_trunc: int
):
    """Partial sum and tail bound of sum_k w_k^idx / lam_k^lam_exp."""
    partial = float(np.sum(weights.weights**idx / op.eigenvalues**lam_exp))
    tail = None
    if weights.decay_rule is not None and op.growth_rule is not None:
        wr, gr = weights.decay_rule, op.growth_rule
        coef = wr.c**idx / gr.c**lam_exp
        s = -wr.exponent * idx + gr.exponent * lam_exp
        tail = _power_law_tail(coef, s, k_trunc)
    return partial, tail


def admissibility(
    op_a: SpectralOperator,
    w_l: NoiseWeights,
    alpha: float,
    theta: float,
    op_b: SpectralOperator | None = None,
    w_z: NoiseWeights | None = None,
    beta: float | None = None,
) -> AdmissibilityReport:
    """Evaluate the summability conditions for the slow (and optionally fast) pair.

    Failure is reported through ``passed``/``reasons``, not raised: callers use
    the report to refuse a run, and a failing configuration is legitimate input.
    """
    if op_a.k_trunc != w_l.k_trunc:
        raise ValueError("operator and weights must share the truncation level")
    reasons: list[str] = []
    at_ok = 0 < alpha * theta < 1
    if not at_ok:
        reasons.append(f"alpha*theta = {alpha * theta:g} outside (0, 1)")

    delta_partial, delta_tail = _weighted_sum(w_l, op_a, alpha, 1 - alpha * theta, w_l.k_trunc)
    if w_l.decay_rule is not None and op_a.growth_rule is not None and delta_tail is None:
        reasons.append("delta tail sum divergent (integral test)")

    kappa2_partial = kappa2_tail = None
    if op_b is not None:
        if w_z is None or beta is None:
            raise ValueError("fast pair requires op_b, w_z and beta together")
        if op_b.k_trunc != w_z.k_trunc:
            raise ValueError("fast operator and weights must share the truncation level")
        kappa2_partial, kappa2_tail = _weighted_sum(w_z, op_b, beta, 1.0, w_z.k_trunc)
        if w_z.decay_rule is not None and op_b.growth_rule is not None and kappa2_tail is None:
            reasons.append("kappa2 tail sum divergent (integral test)")

    return AdmissibilityReport(
        delta_partial=delta_partial,
        delta_tail_bound=delta_tail,
        kappa1_partial=delta_partial,
        kappa2_partial=kappa2_partial,
        kappa2_tail_bound=kappa2_tail,
        theta=theta,
        alpha_theta_ok=at_ok,
        passed=not reasons,
        reasons=tuple(reasons),
    )
