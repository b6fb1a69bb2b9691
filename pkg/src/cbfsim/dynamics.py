"""Control-affine plants with output maps, plus the two built-in example systems.

A plant is dx/dt = f(x) + g(x) u with measurement y = l(x). Systems are
represented by plain callables evaluated pointwise; nothing symbolic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Vector = np.ndarray
Matrix = np.ndarray

# 3-state linear demo plant (example1 presets)
EXAMPLE1_A = np.array([[-1.0, 2.0, -2.0],
                       [0.0, -1.0, 1.0],
                       [1.0, 0.0, -1.0]])
EXAMPLE1_B = np.array([[0.0], [1.0], [1.0]])
EXAMPLE1_C = np.array([[1.0, 1.0, 0.0]])


@dataclass(frozen=True)
class ControlAffineSystem:
    """Plant dx/dt = f(x) + g(x) u, y = l(x).

    n, m, k are the state, input, and output dimensions. drift, input_map
    and output_map must be pure and accept any finite state of length n.
    """

    n: int
    m: int
    k: int
    drift: Callable[[Vector], Vector]
    input_map: Callable[[Vector], Matrix]
    output_map: Callable[[Vector], Vector]

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1 or self.k < 1:
            raise ValueError("dimensions n, m, k must be positive")


def _check_state(sys: ControlAffineSystem, x: Vector) -> Vector:
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.n,):
        raise ValueError(f"state has shape {x.shape}, expected ({sys.n},)")
    return x


def eval_drift(sys: ControlAffineSystem, x: Vector) -> Vector:
    """f(x)."""
    return np.asarray(sys.drift(_check_state(sys, x)), dtype=float)


def eval_input_matrix(sys: ControlAffineSystem, x: Vector) -> Matrix:
    """g(x), shaped (n, m)."""
    g = np.asarray(sys.input_map(_check_state(sys, x)), dtype=float)
    if g.shape != (sys.n, sys.m):
        raise ValueError(f"input map returned shape {g.shape}, expected ({sys.n}, {sys.m})")
    return g


def eval_output(sys: ControlAffineSystem, x: Vector) -> Vector:
    """l(x), shaped (k,)."""
    return np.asarray(sys.output_map(_check_state(sys, x)), dtype=float)


def make_example1_system() -> ControlAffineSystem:
    """Linear 3-state plant: dx/dt = A x + B u, y = C x."""
    return ControlAffineSystem(
        n=3, m=1, k=1,
        drift=lambda x: EXAMPLE1_A @ x,
        input_map=lambda x: EXAMPLE1_B,
        output_map=lambda x: EXAMPLE1_C @ x,
    )


def make_rossler_system(a: float, b: float, c: float) -> ControlAffineSystem:
    """Rossler plant with identity input map and output x1.

    Drift is [-x2 - x3, x1 + a x2, b + x3 (x1 - c)].
    """
    eye = np.eye(3)

    def drift(x: Vector) -> Vector:
        return np.array([-x[1] - x[2], x[0] + a * x[1], b + x[2] * (x[0] - c)])

    return ControlAffineSystem(
        n=3, m=3, k=1,
        drift=drift,
        input_map=lambda x: eye,
        output_map=lambda x: x[:1].copy(),
    )
