"""Closed-loop simulation of the safety-filtered system.

One augmented ODE carries the plant state x, the observer state xhat, and
the N stacked parameter estimates. The control is recomputed once per RK4
step (zero-order hold) by solving the halfspace QP on the barrier row, so
the run is a sampled-data approximation of the continuous statement; the
adaptive law integrates continuously inside the step.

Two controllers share the loop. "proposed" assembles the observer-aware
constraint (deflated barrier, series correction, margin terms) and adapts
the parameter estimates. "baseline" uses the plain zeroing-CBF row
grad_h . g u + grad_h . f + gamma h evaluated at the estimate, with the
estimates frozen; the filter one would write when trusting xhat as the
true state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .barrier import (
    Barrier,
    BarrierChain,
    BarrierRd1,
    ConstraintCoeffs,
    constraint_rd1,
    constraint_rdr,
    epsilon_bound_rd1,
    epsilon_bound_rdr,
)
from .dynamics import ControlAffineSystem, eval_drift, eval_input_matrix, eval_output
from .fat import AdaptiveState, FatConfig, adaptive_rhs
from .integrator import IntegrationError, OdeProblem, rk4_step, time_grid
from .observer import EeqObserver
from .qp import QpResult, solve_halfspace_qp

Vector = np.ndarray

CONTROLLERS = ("proposed", "baseline")
INFEASIBLE_MODES = ("nominal", "hold")


class RunError(RuntimeError):
    """Integration blow-up. Carries the last valid sample as a dict."""

    def __init__(self, message: str, last_sample: dict):
        super().__init__(message)
        self.last_sample = last_sample


@dataclass(frozen=True)
class SimConfig:
    system: ControlAffineSystem
    observer: EeqObserver
    barrier: Barrier
    fat: FatConfig
    adaptive0: AdaptiveState
    x0: Vector
    xhat0: Vector
    u_nominal: Callable[[float, Vector], Vector]
    t_end: float = 10.0
    dt: float = 1e-3
    controller: str = "proposed"
    baseline_gamma: float = 1.0
    strict_feasibility: bool = False
    on_infeasible: str = "nominal"  # or "hold": keep the last feasible u

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if self.controller not in CONTROLLERS:
            raise ValueError(f"controller must be one of {CONTROLLERS}")
        if self.on_infeasible not in INFEASIBLE_MODES:
            raise ValueError(f"on_infeasible must be one of {INFEASIBLE_MODES}")
        if not self.baseline_gamma > 0:
            raise ValueError("baseline_gamma must be > 0")
        x0 = np.asarray(self.x0, dtype=float)
        xhat0 = np.asarray(self.xhat0, dtype=float)
        n = self.system.n
        if x0.shape != (n,) or xhat0.shape != (n,):
            raise ValueError(f"x0 and xhat0 must have shape ({n},)")
        if self.observer.dim != n:
            raise ValueError("observer dimension must match the plant")
        if self.adaptive0.theta_hat.shape != (self.fat.N, n):
            raise ValueError(f"adaptive0.theta_hat must be ({self.fat.N}, {n})")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "xhat0", xhat0)


@dataclass(frozen=True)
class SimTrace:
    """Column-oriented record of one run; one row per accepted step."""

    t: np.ndarray
    x: np.ndarray
    xhat: np.ndarray
    u: np.ndarray
    h_true: np.ndarray
    h0: np.ndarray
    barrier_eps: np.ndarray
    residual: np.ndarray
    M: np.ndarray
    theta_norms: np.ndarray
    qp_active: np.ndarray
    qp_feasible: np.ndarray

    def __len__(self) -> int:
        return self.t.shape[0]

    def columns(self) -> dict[str, np.ndarray]:
        """Named scalar columns in trace-format order."""
        cols: dict[str, np.ndarray] = {"t": self.t}
        for j in range(self.x.shape[1]):
            cols[f"x{j + 1}"] = self.x[:, j]
        for j in range(self.xhat.shape[1]):
            cols[f"xhat{j + 1}"] = self.xhat[:, j]
        for j in range(self.u.shape[1]):
            cols[f"u{j + 1}"] = self.u[:, j]
        cols["h_true"] = self.h_true
        cols["h0"] = self.h0
        cols["barrier_eps"] = self.barrier_eps
        cols["residual"] = self.residual
        cols["M"] = self.M
        for j in range(self.theta_norms.shape[1]):
            cols[f"theta_norm_{j + 1}"] = self.theta_norms[:, j]
        cols["qp_active"] = self.qp_active
        cols["qp_feasible"] = self.qp_feasible
        return cols


@dataclass(frozen=True)
class SafetyReport:
    min_h_true: float
    min_h0: float
    first_violation_t: Optional[float]
    bound_violations: int
    infeasible_steps: int
    epsilon_bound: float
    epsilon_used: float
    epsilon_ok: bool


def _barrier_parts(barrier: Barrier):
    """(h, grad for adaptation, constraint assembler, base h, base grad)."""
    if isinstance(barrier, BarrierRd1):
        return barrier.h, barrier.grad_h, constraint_rd1, barrier.h, barrier.grad_h
    top = barrier.r - 1
    return barrier.s[top], barrier.grad_s[top], constraint_rdr, barrier.s[0], barrier.grad_s[0]


def compute_epsilon_bound(cfg: SimConfig) -> float:
    """Feasibility bound for epsilon at the configured initial data."""
    if isinstance(cfg.barrier, BarrierRd1):
        return epsilon_bound_rd1(cfg.barrier, cfg.xhat0, cfg.observer.bound, cfg.adaptive0, cfg.fat)
    return epsilon_bound_rdr(cfg.barrier, cfg.xhat0, cfg.observer.bound, cfg.adaptive0, cfg.fat)


def _epsilon_ok(bound: float, used: float) -> bool:
    return bound > 0 and used <= bound + 1e-12


def run_simulation(cfg: SimConfig) -> SimTrace:
    """Integrate one closed-loop run and return its trace.

    Raises ValueError when strict_feasibility is set and the epsilon check
    fails; raises RunError (carrying the last valid sample) if the state
    leaves the finite range.
    """
    if cfg.strict_feasibility:
        bound = compute_epsilon_bound(cfg)
        if not _epsilon_ok(bound, cfg.adaptive0.epsilon):
            raise ValueError(
                f"epsilon {cfg.adaptive0.epsilon} infeasible: bound is {bound:.6g}"
            )

    sys_ = cfg.system
    obs = cfg.observer
    fat_cfg = cfg.fat
    state0 = cfg.adaptive0
    n, m, N = sys_.n, sys_.m, fat_cfg.N
    _, grad_fn, assemble, base_h, base_grad = _barrier_parts(cfg.barrier)
    proposed = cfg.controller == "proposed"
    bound_model = obs.bound
    if isinstance(cfg.barrier, BarrierRd1):
        L_top = cfg.barrier.L
        top_s = cfg.barrier.h
    else:
        L_top = cfg.barrier.L_k[cfg.barrier.r - 1]
        top_s = cfg.barrier.s[cfg.barrier.r - 1]

    base_L = _base_L(cfg.barrier)
    times = time_grid(0.0, cfg.t_end, cfg.dt)
    S = times.shape[0]
    tr_x = np.empty((S, n)); tr_xhat = np.empty((S, n)); tr_u = np.empty((S, m))
    tr_h = np.empty(S); tr_h0 = np.empty(S); tr_eps = np.empty(S)
    tr_res = np.empty(S); tr_M = np.empty(S); tr_th = np.empty((S, N))
    tr_act = np.empty(S, dtype=bool); tr_feas = np.empty(S, dtype=bool)

    u_current = np.zeros(m)  # held control, rebound each step

    def rhs(t: float, z: Vector) -> Vector:
        x = z[:n]
        xhat = z[n:2 * n]
        dz = np.empty_like(z)
        dz[:n] = eval_drift(sys_, x) + eval_input_matrix(sys_, x) @ u_current
        dz[n:2 * n] = obs.rhs(xhat, eval_output(sys_, x), u_current, t)
        if proposed:
            st = replace(state0, theta_hat=z[2 * n:].reshape(N, n))
            dz[2 * n:] = adaptive_rhs(st, grad_fn(xhat), fat_cfg, t).ravel()
        else:
            dz[2 * n:] = 0.0
        return dz

    problem = OdeProblem(dim=2 * n + N * n, rhs=rhs)
    z = np.concatenate([cfg.x0, cfg.xhat0, state0.theta_hat.ravel()])
    last_feasible_u: Optional[Vector] = None

    for i, t in enumerate(times):
        t = float(t)
        x = z[:n]
        xhat = z[n:2 * n]
        theta = z[2 * n:].reshape(N, n)
        st = replace(state0, theta_hat=theta)
        u_d = np.asarray(cfg.u_nominal(t, xhat), dtype=float)
        if proposed:
            coeffs = assemble(cfg.barrier, sys_, xhat, t, bound_model, st, fat_cfg)
        else:
            g = base_grad(xhat)
            coeffs = ConstraintCoeffs(
                a=g @ eval_input_matrix(sys_, xhat),
                b=float(g @ eval_drift(sys_, xhat) + cfg.baseline_gamma * base_h(xhat)),
            )
        res = solve_halfspace_qp(u_d, coeffs)
        if res.feasible:
            u = res.u
            last_feasible_u = u
        elif cfg.on_infeasible == "hold" and last_feasible_u is not None:
            u = last_feasible_u
        else:
            u = u_d
        u_current = u

        M = float(bound_model.value(t))
        tr_x[i] = x; tr_xhat[i] = xhat; tr_u[i] = u
        tr_h[i] = base_h(x)
        tr_h0[i] = float(base_h(xhat)) - base_L * M
        tr_eps[i] = float(top_s(xhat)) - L_top * M - state0.epsilon
        tr_res[i] = coeffs.residual(u)
        tr_M[i] = M
        tr_th[i] = np.linalg.norm(theta, axis=1)
        tr_act[i] = res.active
        tr_feas[i] = res.feasible

        if i == S - 1:
            break
        try:
            z = rk4_step(problem, t, z, float(times[i + 1] - t))
        except IntegrationError as err:
            raise RunError(
                f"state became non-finite during the step starting at t={t:.6g}",
                _sample_dict(t, x, xhat, u),
            ) from err
        if not np.all(np.isfinite(z)):
            raise RunError(
                f"state became non-finite during the step starting at t={t:.6g}",
                _sample_dict(t, x, xhat, u),
            )

    return SimTrace(
        t=times.astype(float), x=tr_x, xhat=tr_xhat, u=tr_u, h_true=tr_h,
        h0=tr_h0, barrier_eps=tr_eps, residual=tr_res, M=tr_M,
        theta_norms=tr_th, qp_active=tr_act, qp_feasible=tr_feas,
    )


def _base_L(barrier: Barrier) -> float:
    return barrier.L if isinstance(barrier, BarrierRd1) else barrier.L_k[0]


def _sample_dict(t: float, x: Vector, xhat: Vector, u: Vector) -> dict:
    return {"t": t, "x": x.copy(), "xhat": xhat.copy(), "u": u.copy()}


def safety_report(trace: SimTrace, cfg: SimConfig) -> SafetyReport:
    """Aggregate minima, violations, and the epsilon feasibility verdict."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    viol = np.flatnonzero(trace.h_true < 0)
    err_norm = np.linalg.norm(trace.xhat - trace.x, axis=1)
    bound = compute_epsilon_bound(cfg)
    used = cfg.adaptive0.epsilon
    return SafetyReport(
        min_h_true=float(trace.h_true.min()),
        min_h0=float(trace.h0.min()),
        first_violation_t=float(trace.t[viol[0]]) if viol.size else None,
        bound_violations=int(np.count_nonzero(err_norm > trace.M)),
        infeasible_steps=int(np.count_nonzero(~trace.qp_feasible)),
        epsilon_bound=float(bound),
        epsilon_used=float(used),
        epsilon_ok=_epsilon_ok(bound, used),
    )


def run_pair(cfg: SimConfig) -> tuple[SimTrace, SimTrace]:
    """Run the proposed and baseline controllers on identical data."""
    proposed = run_simulation(replace(cfg, controller="proposed"))
    baseline = run_simulation(replace(cfg, controller="baseline"))
    return proposed, baseline
