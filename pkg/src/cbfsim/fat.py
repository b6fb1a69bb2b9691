"""Trigonometric basis, truncated series evaluation, and the adaptive law.

The estimation-induced disturbance is modeled as an unknown function of
time expanded over a fixed Fourier-style basis; only the first N vector
coefficients are estimated online. The adaptive law below drives those
estimates from the barrier gradient and is shared by the relative-degree-1
and higher-relative-degree controllers (they differ only in which gradient
is supplied).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Vector = np.ndarray


@dataclass(frozen=True)
class FatConfig:
    """Series truncation N, fundamental frequency omega, residual bound E.

    omega defaults to 1 rad/s; any positive value is theoretically valid
    and no preset overrides it. E bounds the norm of the truncated tail.
    """

    N: int
    omega: float = 1.0
    E: float = 0.0

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.omega > 0:
            raise ValueError("omega must be > 0")
        if self.E < 0:
            raise ValueError("E must be >= 0")


@dataclass(frozen=True)
class AdaptiveState:
    """Coefficient estimates theta_hat (N x n) with their bounds and gains.

    theta_bar[i] bounds ||theta_i||; epsilon is the safety-margin split
    and mu the leak rate, both shared with the barrier constraint.
    """

    theta_hat: np.ndarray
    theta_bar: np.ndarray
    epsilon: float
    mu: float

    def __post_init__(self) -> None:
        th = np.asarray(self.theta_hat, dtype=float)
        tb = np.asarray(self.theta_bar, dtype=float)
        if th.ndim != 2:
            raise ValueError("theta_hat must be an (N, n) array")
        if tb.shape != (th.shape[0],):
            raise ValueError("theta_bar must have one entry per parameter vector")
        if not np.all(tb > 0):
            raise ValueError("all theta_bar entries must be > 0")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not self.mu > 0:
            raise ValueError("mu must be > 0")
        object.__setattr__(self, "theta_hat", th)
        object.__setattr__(self, "theta_bar", tb)


def basis(i: int, omega: float, t: float) -> float:
    """phi_i(t): 1 for i=0, cos(k omega t) for i=2k-1, sin(k omega t) for i=2k."""
    if i < 0:
        raise ValueError("i must be >= 0")
    if i == 0:
        return 1.0
    k = (i + 1) // 2
    if i % 2 == 1:
        return math.cos(k * omega * t)
    return math.sin(k * omega * t)


def basis_row(N: int, omega: float, t: float) -> Vector:
    """[phi_1(t), ..., phi_N(t)] as a dense row."""
    return np.array([basis(i, omega, t) for i in range(1, N + 1)])


def fat_eval(state: AdaptiveState, cfg: FatConfig, t: float) -> Vector:
    """Sum of theta_hat_i phi_i(t) over i = 1..N (the i=0 constant term is
    not part of the estimated series)."""
    if state.theta_hat.shape[0] != cfg.N:
        raise ValueError(f"state holds {state.theta_hat.shape[0]} parameter vectors, config says N={cfg.N}")
    return basis_row(cfg.N, cfg.omega, t) @ state.theta_hat


def adaptive_rhs(state: AdaptiveState, grad: Vector, cfg: FatConfig, t: float) -> np.ndarray:
    """d theta_hat_i / dt = -(theta_bar_i^2 / (2 epsilon)) grad phi_i(t) - mu theta_hat_i.

    grad is the gradient of the deflated barrier with respect to xhat,
    supplied by the barrier module. Returns an (N, n) array of stacked
    derivatives.
    """
    if state.epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    grad = np.asarray(grad, dtype=float)
    if grad.shape != (state.theta_hat.shape[1],):
        raise ValueError("grad length must match the parameter vector length")
    if state.theta_hat.shape[0] != cfg.N:
        raise ValueError(f"state holds {state.theta_hat.shape[0]} parameter vectors, config says N={cfg.N}")
    phis = basis_row(cfg.N, cfg.omega, t)
    gain = -(state.theta_bar ** 2) / (2.0 * state.epsilon)
    return (gain * phis)[:, None] * grad[None, :] - state.mu * state.theta_hat
