"""Observer-aware control barrier function safety filters.

Closed-loop simulation of control-affine plants under state observers with
known estimation-error envelopes, function-approximation compensation of
unmodeled drift, and analytically solved safety-filter QPs.
"""

from .barrier import (
    Barrier,
    BarrierChain,
    BarrierRd1,
    ConstraintCoeffs,
    chain_s_eval,
    constraint_rd1,
    constraint_rdr,
    epsilon_bound_rd1,
    epsilon_bound_rdr,
    h0_eval,
    h_eps_eval,
    skm_eval,
)
from .cli import apply_overrides, emit_csv, emit_plot, main, parse_config, run_preset
from .dynamics import (
    ControlAffineSystem,
    eval_drift,
    eval_input_matrix,
    eval_output,
    make_example1_system,
    make_rossler_system,
)
from .fat import AdaptiveState, FatConfig, adaptive_rhs, basis, basis_row, fat_eval
from .integrator import IntegrationError, OdeProblem, integrate, rk4_step, time_grid
from .observer import (
    EeqObserver,
    ErrorBoundModel,
    error_bound,
    eval_observer_rhs,
    interval_bound,
    make_luenberger,
    make_rossler_observer,
)
from .presets import PRESET_NAMES, ExperimentPreset, make_preset
from .qp import QpResult, solve_boxed_qp, solve_halfspace_qp
from .simloop import (
    RunError,
    SafetyReport,
    SimConfig,
    SimTrace,
    compute_epsilon_bound,
    run_pair,
    run_simulation,
    safety_report,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveState",
    "Barrier",
    "BarrierChain",
    "BarrierRd1",
    "ConstraintCoeffs",
    "ControlAffineSystem",
    "EeqObserver",
    "ErrorBoundModel",
    "ExperimentPreset",
    "FatConfig",
    "IntegrationError",
    "OdeProblem",
    "PRESET_NAMES",
    "QpResult",
    "RunError",
    "SafetyReport",
    "SimConfig",
    "SimTrace",
    "adaptive_rhs",
    "apply_overrides",
    "basis",
    "basis_row",
    "chain_s_eval",
    "compute_epsilon_bound",
    "constraint_rd1",
    "constraint_rdr",
    "emit_csv",
    "emit_plot",
    "epsilon_bound_rd1",
    "epsilon_bound_rdr",
    "error_bound",
    "eval_drift",
    "eval_input_matrix",
    "eval_observer_rhs",
    "eval_output",
    "fat_eval",
    "h0_eval",
    "h_eps_eval",
    "integrate",
    "interval_bound",
    "main",
    "make_example1_system",
    "make_luenberger",
    "make_preset",
    "make_rossler_observer",
    "make_rossler_system",
    "parse_config",
    "rk4_step",
    "run_pair",
    "run_preset",
    "run_simulation",
    "safety_report",
    "skm_eval",
    "solve_boxed_qp",
    "solve_halfspace_qp",
    "time_grid",
]
