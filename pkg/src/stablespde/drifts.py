"""Drift catalog for the steppers.

Two shapes of drift appear: regime drifts b(x, i) indexed by a finite chain
state, and coupled drifts b(x, y) / f(x, y) taking a second field argument.
Each drift declares its regularity constants (Lipschitz bounds, uniform bound,
directional-derivative bounds); the declarations are upper bounds that can be
spot-checked with randomized difference quotients via :func:`verify_lipschitz`.

The saturating nonlinearity is tanh: odd, bounded, 1-Lipschitz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinearRegimeDrift:
    """b(x, i) = c_i * x, one reaction coefficient per regime."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))

    def __call__(self, x: np.ndarray, regime: int) -> np.ndarray:
        return self.coeffs[regime] * x

    @property
    def n_regimes(self) -> int:
        return self.coeffs.size

    @property
    def lipschitz(self) -> np.ndarray:
        return np.abs(self.coeffs)

    bound = None  # unbounded


@dataclass(frozen=True)
class SaturatingRegimeDrift:
    """b(x, i) = a_i * tanh(x) + o_i, bounded and |a_i|-Lipschitz."""

    gains: np.ndarray
    offsets: np.ndarray  # shape (n_regimes, k_trunc) or (n_regimes,)

    def __post_init__(self):
        object.__setattr__(self, "gains", np.asarray(self.gains, dtype=float))
        object.__setattr__(self, "offsets", np.asarray(self.offsets, dtype=float))

    def __call__(self, x: np.ndarray, regime: int) -> np.ndarray:
        return self.gains[regime] * np.tanh(x) + self.offsets[regime]

    @property
    def n_regimes(self) -> int:
        return self.gains.size

    @property
    def lipschitz(self) -> np.ndarray:
        return np.abs(self.gains)

    def bound_for(self, k_trunc: int) -> float:
        off = np.atleast_2d(self.offsets)
        return float(
            np.max(np.abs(self.gains)) * np.sqrt(k_trunc)
            + np.max(np.linalg.norm(np.broadcast_to(off, (self.n_regimes, off.shape[-1])), axis=-1))
        )


@dataclass(frozen=True)
class TableRegimeDrift:
    """Arbitrary per-regime callables with declared Lipschitz constants (tests only)."""

    funcs: tuple
    lipschitz: np.ndarray

    def __call__(self, x: np.ndarray, regime: int) -> np.ndarray:
        return self.funcs[regime](x)

    @property
    def n_regimes(self) -> int:
        return len(self.funcs)

    bound = None


@dataclass(frozen=True)
class SaturatingCoupledDrift:
    """g(x, y) = gain_x * tanh(x) + gain_y * tanh(y) + offset.

    Directional-derivative bounds: |D_x g . h| <= |gain_x| |h| and
    |D_y g . h| <= |gain_y| |h| (tanh acts diagonally with derivative in (0, 1]).
    Uniformly bounded, so usable as the slow drift of the fast-slow system.
    """

    gain_x: float
    gain_y: float
    offset: float = 0.0

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.gain_x * np.tanh(x) + self.gain_y * np.tanh(y) + self.offset

    @property
    def grad_x_bound(self) -> float:
        return abs(self.gain_x)

    @property
    def grad_y_bound(self) -> float:
        return abs(self.gain_y)

    def bound_for(self, k_trunc: int) -> float:
        return (abs(self.gain_x) + abs(self.gain_y) + abs(self.offset)) * np.sqrt(k_trunc)


@dataclass(frozen=True)
class ZeroCoupledDrift:
    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.zeros(np.broadcast(x, y).shape)

    grad_x_bound = 0.0
    grad_y_bound = 0.0

    def bound_for(self, k_trunc: int) -> float:
        return 0.0


def verify_lipschitz(fn, declared: float, k_trunc: int, rng, n_pairs: int = 200) -> bool:
    """Spot-check a declared Lipschitz constant with randomized difference quotients."""
    gen = rng.generator()
    for _ in range(n_pairs):
        x1 = gen.normal(size=k_trunc) * 3.0
        x2 = x1 + gen.normal(size=k_trunc) * 0.5
        dx = np.linalg.norm(x1 - x2)
        if dx == 0:
            continue
        quot = np.linalg.norm(fn(x1) - fn(x2)) / dx
        if quot > declared * (1 + 1e-9):
            return False
    return True
