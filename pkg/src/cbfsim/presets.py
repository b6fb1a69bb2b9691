"""Built-in experiment presets.

Three ready-to-run closed-loop scenarios, fully parameterized:

* example1a: linear 3-state plant, Luenberger observer, relative-degree-1
  barrier x2 >= 1. The filter must hold the true state safe while only
  seeing an estimate whose error bound grows (lam < 0).
* example1b: same plant, barrier x1 >= 1 lifted through a degree-2 chain.
  The top chain level s1 has grad_s1 . B = 0 everywhere, so the assembled
  row never depends on u; the run demonstrates the infeasibility reporting
  rather than successful filtering (see the epsilon bound warning).
* example2: Rossler chaotic plant, nonlinear observer with cubic
  innovation terms, barrier x2 >= -1.

The nominal control in every preset is a constant push that drives the
barrier downward, so the filter's intervention (and the baseline's
failure) is visible in the traces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .barrier import BarrierChain, BarrierRd1
from .dynamics import (
    EXAMPLE1_A,
    EXAMPLE1_B,
    EXAMPLE1_C,
    make_example1_system,
    make_rossler_system,
)
from .fat import AdaptiveState, FatConfig
from .observer import ErrorBoundModel, make_luenberger, make_rossler_observer
from .simloop import SimConfig

Vector = np.ndarray

PRESET_NAMES = ("example1a", "example1b", "example2")

# Output-injection gain for the linear plant. Sign chosen so that
# A - gain C is Hurwitz (eigenvalues -2.146 +/- 1.057i, -0.747); the
# estimation error then decays and stays inside the exponential bound.
LUENBERGER_GAIN = np.array([[2.23029], [-0.190287], [-0.232326]])

ROSSLER_PARAMS = (0.2, 0.2, 5.0)
ROSSLER_GAINS = dict(q1=3.0, s1=-3.0, r1=3.0, q2=10.0, s2=10.0, r2=10.0, m_exp=3)


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    cfg: SimConfig
    u_d: Vector  # the constant nominal stored for reporting/overrides


def _const_u(values) -> tuple:
    vec = np.asarray(values, dtype=float)
    return vec, (lambda t, xhat: vec)


def _example1_observer(lam: float) -> tuple:
    bound = ErrorBoundModel.exponential(D=2.0, lam=lam)
    obs = make_luenberger(EXAMPLE1_A, EXAMPLE1_B, EXAMPLE1_C, LUENBERGER_GAIN, bound)
    return obs, bound


def _adaptive0(n: int, N: int, epsilon: float, mu: float) -> AdaptiveState:
    return AdaptiveState(
        theta_hat=np.zeros((N, n)),
        theta_bar=np.full(N, 0.5),
        epsilon=epsilon,
        mu=mu,
    )


def make_preset(name: str) -> ExperimentPreset:
    """Build one of the named presets; raises ValueError on unknown names."""
    if name == "example1a":
        obs, _ = _example1_observer(lam=-0.05)
        barrier = BarrierRd1(
            h=lambda x: x[1] - 1.0,
            grad_h=lambda x: np.array([0.0, 1.0, 0.0]),
            L=1.0,
        )
        u_d, u_fn = _const_u([-2.0])
        cfg = SimConfig(
            system=make_example1_system(),
            observer=obs,
            barrier=barrier,
            fat=FatConfig(N=3, omega=1.0, E=0.1),
            adaptive0=_adaptive0(n=3, N=3, epsilon=0.1, mu=3.5),
            x0=np.array([2.0, 2.2, 2.0]),
            xhat0=np.array([3.0, 3.5, 3.0]),
            u_nominal=u_fn,
        )
        return ExperimentPreset(name=name, cfg=cfg, u_d=u_d)

    if name == "example1b":
        obs, _ = _example1_observer(lam=-0.05)
        # s1 = (d/dt + lambda_1) s0 along the drift:
        #   grad_s0 . A x + 2 (x1 - 1) = x1 + 2 x2 - 2 x3 - 2.
        barrier = BarrierChain(
            r=2,
            s=(
                lambda x: x[0] - 1.0,
                lambda x: x[0] + 2.0 * x[1] - 2.0 * x[2] - 2.0,
            ),
            grad_s=(
                lambda x: np.array([1.0, 0.0, 0.0]),
                lambda x: np.array([1.0, 2.0, -2.0]),
            ),
            lam=(2.0,),
            L_k=(1.0, 3.0),  # exact gradient norms of s0, s1
        )
        u_d, u_fn = _const_u([-2.0])
        cfg = SimConfig(
            system=make_example1_system(),
            observer=obs,
            barrier=barrier,
            fat=FatConfig(N=3, omega=1.0, E=0.1),
            adaptive0=_adaptive0(n=3, N=3, epsilon=0.1, mu=10.0),
            x0=np.array([2.4, -3.0, -3.0]),
            xhat0=np.array([3.4, -2.0, -2.0]),
            u_nominal=u_fn,
        )
        return ExperimentPreset(name=name, cfg=cfg, u_d=u_d)

    if name == "example2":
        bound = ErrorBoundModel.exponential(D=2.0, lam=-0.15)
        obs = make_rossler_observer(
            ROSSLER_GAINS["q1"], ROSSLER_GAINS["s1"], ROSSLER_GAINS["r1"],
            ROSSLER_GAINS["q2"], ROSSLER_GAINS["s2"], ROSSLER_GAINS["r2"],
            ROSSLER_GAINS["m_exp"], ROSSLER_PARAMS, bound,
        )
        barrier = BarrierRd1(
            h=lambda x: x[1] + 1.0,
            grad_h=lambda x: np.array([0.0, 1.0, 0.0]),
            L=1.0,
        )
        u_d, u_fn = _const_u([-2.0, -2.0, -2.0])
        cfg = SimConfig(
            system=make_rossler_system(*ROSSLER_PARAMS),
            observer=obs,
            barrier=barrier,
            fat=FatConfig(N=3, omega=1.0, E=0.1),
            adaptive0=_adaptive0(n=3, N=3, epsilon=0.1, mu=2.5),
            x0=np.array([-0.5, 0.5, 3.0]),
            xhat0=np.array([0.2, 2.0, 3.0]),
            u_nominal=u_fn,
        )
        return ExperimentPreset(name=name, cfg=cfg, u_d=u_d)

    raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
