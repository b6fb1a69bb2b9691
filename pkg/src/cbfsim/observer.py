"""State observers paired with quantified estimation-error bounds.

An observer here is a vector field v so that dxhat/dt = v(xhat, y, u),
together with an ErrorBoundModel M(t) promising ||xhat(t) - x(t)|| <= M(t).
The bound is configuration data supplied with the observer, not something
derived from it; the simulation harness checks it post hoc and reports
violations instead of halting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Vector = np.ndarray
Matrix = np.ndarray


@dataclass(frozen=True)
class ErrorBoundModel:
    """Known bound M(t) on the estimation error norm, with its derivative.

    kind is one of "exponential", "constant", "interval". value and
    derivative must be consistent; the constructors below guarantee that.
    """

    kind: str
    value: Callable[[float], float]
    derivative: Callable[[float], float]

    @staticmethod
    def exponential(D: float, lam: float) -> "ErrorBoundModel":
        """M(t) = D exp(-lam t), taken literally for either sign of lam.

        A negative lam therefore makes the bound grow with time; both
        built-in example presets do exactly that (lam = -0.05, -0.15),
        trading conservatism for a bound that stays valid on the whole
        horizon.
        """
        if D < 0:
            raise ValueError("D must be >= 0")
        return ErrorBoundModel(
            kind="exponential",
            value=lambda t: D * np.exp(-lam * t),
            derivative=lambda t: -lam * D * np.exp(-lam * t),
        )

    @staticmethod
    def constant(beta: float) -> "ErrorBoundModel":
        """M(t) = beta. Covers bounds with no useful time structure."""
        if beta < 0:
            raise ValueError("beta must be >= 0")
        return ErrorBoundModel(kind="constant", value=lambda t: beta, derivative=lambda t: 0.0)

    @staticmethod
    def interval(
        width_fn: Callable[[float], float],
        width_derivative: Callable[[float], float] | None = None,
    ) -> "ErrorBoundModel":
        """M(t) supplied directly, e.g. half the width of an interval estimate.

        When no derivative is given it is approximated by a central finite
        difference (one-sided at t = 0).
        """
        if width_derivative is None:
            def width_derivative(t: float, _w=width_fn) -> float:
                step = 1e-6
                lo = t - step
                if lo < 0.0:
                    return (_w(t + step) - _w(t)) / step
                return (_w(t + step) - _w(lo)) / (2.0 * step)
        return ErrorBoundModel(kind="interval", value=width_fn, derivative=width_derivative)


def error_bound(model: ErrorBoundModel, t: float) -> float:
    """M(t). Only defined for t >= 0."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return float(model.value(t))


def interval_bound(x_upper: Vector, x_lower: Vector) -> float:
    """Half the Euclidean norm of (x_upper - x_lower).

    The error of any estimate taken inside a componentwise-valid interval
    [x_lower, x_upper] is bounded by this radius.
    """
    x_upper = np.asarray(x_upper, dtype=float)
    x_lower = np.asarray(x_lower, dtype=float)
    if np.any(x_upper < x_lower):
        raise ValueError("x_upper must dominate x_lower componentwise")
    return 0.5 * float(np.linalg.norm(x_upper - x_lower))


@dataclass(frozen=True)
class EeqObserver:
    """Observer field v with a quantified error bound.

    dim equals the plant state dimension. rhs(xhat, y, u, t) -> dxhat/dt.
    """

    dim: int
    rhs: Callable[[Vector, Vector, Vector, float], Vector]
    bound: ErrorBoundModel

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive")


def eval_observer_rhs(obs: EeqObserver, xhat: Vector, y: Vector, u: Vector, t: float) -> Vector:
    """v(xhat, y, u); t is passed through for time-varying observers."""
    xhat = np.asarray(xhat, dtype=float)
    if xhat.shape != (obs.dim,):
        raise ValueError(f"xhat has shape {xhat.shape}, expected ({obs.dim},)")
    out = np.asarray(obs.rhs(xhat, np.asarray(y, dtype=float), np.asarray(u, dtype=float), t), dtype=float)
    if out.shape != (obs.dim,):
        raise ValueError(f"observer rhs returned shape {out.shape}, expected ({obs.dim},)")
    return out


def make_luenberger(A: Matrix, B: Matrix, C: Matrix, gain: Matrix, bound: ErrorBoundModel) -> EeqObserver:
    """dxhat/dt = A xhat + B u + gain (y - C xhat)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    gain = np.asarray(gain, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("A must be square")
    if B.ndim != 2 or B.shape[0] != n:
        raise ValueError("B must be n x m")
    k = C.shape[0]
    if C.ndim != 2 or C.shape != (k, n):
        raise ValueError("C must be k x n")
    if gain.shape != (n, k):
        raise ValueError("gain must be n x k")

    def rhs(xhat: Vector, y: Vector, u: Vector, t: float) -> Vector:
        return A @ xhat + B @ u + gain @ (y - C @ xhat)

    return EeqObserver(dim=n, rhs=rhs, bound=bound)


def make_rossler_observer(
    q1: float, s1: float, r1: float,
    q2: float, s2: float, r2: float,
    m_exp: int,
    params: tuple[float, float, float],
    bound: ErrorBoundModel,
) -> EeqObserver:
    """Copy of the Rossler drift at xhat, corrected by powers of (y - xhat1).

    Each state equation gets a linear and an m_exp-th power innovation term
    with its own gain, plus the control applied componentwise:

        dxhat1/dt = -xhat2 - xhat3        + q1 e + q2 e^m + u1
        dxhat2/dt =  xhat1 + a xhat2      + s1 e + s2 e^m + u2
        dxhat3/dt =  b + xhat3 (xhat1 - c) + r1 e + r2 e^m + u3

    with e = y - xhat1. m_exp must be a positive odd integer so the
    correction is sign-preserving.
    """
    if m_exp < 1 or m_exp % 2 == 0:
        raise ValueError("m_exp must be a positive odd integer")
    a, b, c = (float(v) for v in params)

    def rhs(xhat: Vector, y: Vector, u: Vector, t: float) -> Vector:
        e = y[0] - xhat[0]
        em = e ** m_exp
        return np.array([
            -xhat[1] - xhat[2] + q1 * e + q2 * em + u[0],
            xhat[0] + a * xhat[1] + s1 * e + s2 * em + u[1],
            b + xhat[2] * (xhat[0] - c) + r1 * e + r2 * em + u[2],
        ])

    return EeqObserver(dim=3, rhs=rhs, bound=bound)
