"""Command-line front end: presets, config files, CSV traces, SVG plots.

Config files are JSON: a required top-level "preset" plus flat override
keys. Traces are written as CSV with 12-significant-digit decimals and LF
line endings. Plots are self-contained hand-built SVG (no plotting
dependency), byte-deterministic for identical traces.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from typing import Optional

import numpy as np

from .presets import PRESET_NAMES, make_preset
from .simloop import RunError, SimConfig, SimTrace, compute_epsilon_bound, run_pair, safety_report

Vector = np.ndarray

# Override keys accepted in config documents and run_preset override maps.
_SCALAR_OVERRIDES = {
    "dt": ("dt must be > 0", lambda v: v > 0),
    "t_end": ("t_end must be >= 0", lambda v: v >= 0),
    "baseline_gamma": ("baseline_gamma must be > 0", lambda v: v > 0),
    "epsilon": ("epsilon must be > 0", lambda v: v > 0),
    "mu": ("mu must be > 0", lambda v: v > 0),
    "omega": ("omega must be > 0", lambda v: v > 0),
    "E": ("E must be >= 0", lambda v: v >= 0),
}
_VECTOR_OVERRIDES = ("x0", "xhat0", "u_d")
_BOOL_OVERRIDES = ("strict_feasibility",)
_ENUM_OVERRIDES = {"on_infeasible": ("nominal", "hold")}
CONFIG_KEYS = (
    ("preset",)
    + tuple(_SCALAR_OVERRIDES)
    + _VECTOR_OVERRIDES
    + _BOOL_OVERRIDES
    + tuple(_ENUM_OVERRIDES)
)


def _require_number(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"invalid value for '{key}': expected a number")
    return float(value)


def _require_vector(key: str, value, length: int) -> Vector:
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise ValueError(f"invalid value for '{key}': expected a list of {length} numbers")
    return np.array([_require_number(key, v) for v in value])


def apply_overrides(cfg: SimConfig, overrides: dict) -> SimConfig:
    """Apply flat override keys to a preset configuration."""
    for key in overrides:
        if key not in CONFIG_KEYS or key == "preset":
            raise ValueError(f"unknown config key '{key}'")
    changes: dict = {}
    for key in ("dt", "t_end", "baseline_gamma"):
        if key in overrides:
            msg, check = _SCALAR_OVERRIDES[key]
            v = _require_number(key, overrides[key])
            if not check(v):
                raise ValueError(f"invalid value for '{key}': {msg}")
            changes[key] = v
    for key in ("x0", "xhat0"):
        if key in overrides:
            changes[key] = _require_vector(key, overrides[key], cfg.system.n)
    if "u_d" in overrides:
        vec = _require_vector("u_d", overrides["u_d"], cfg.system.m)
        changes["u_nominal"] = lambda t, xhat: vec
    if "strict_feasibility" in overrides:
        v = overrides["strict_feasibility"]
        if not isinstance(v, bool):
            raise ValueError("invalid value for 'strict_feasibility': expected a boolean")
        changes["strict_feasibility"] = v
    if "on_infeasible" in overrides:
        v = overrides["on_infeasible"]
        if v not in _ENUM_OVERRIDES["on_infeasible"]:
            raise ValueError("invalid value for 'on_infeasible': expected 'nominal' or 'hold'")
        changes["on_infeasible"] = v

    adaptive = cfg.adaptive0
    for key in ("epsilon", "mu"):
        if key in overrides:
            msg, check = _SCALAR_OVERRIDES[key]
            v = _require_number(key, overrides[key])
            if not check(v):
                raise ValueError(f"invalid value for '{key}': {msg}")
            adaptive = replace(adaptive, **{key: v})
    if adaptive is not cfg.adaptive0:
        changes["adaptive0"] = adaptive

    fat = cfg.fat
    for key in ("omega", "E"):
        if key in overrides:
            msg, check = _SCALAR_OVERRIDES[key]
            v = _require_number(key, overrides[key])
            if not check(v):
                raise ValueError(f"invalid value for '{key}': {msg}")
            fat = replace(fat, **{key: v})
    if fat is not cfg.fat:
        changes["fat"] = fat

    return replace(cfg, **changes) if changes else cfg


def _parse_config_doc(text: str) -> tuple[str, dict]:
    """JSON text -> (preset name, override map), both validated."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(f"config parse error at line {err.lineno}, column {err.colno}: {err.msg}") from err
    if not isinstance(doc, dict):
        raise ValueError("config root must be a JSON object")
    if "preset" not in doc:
        raise ValueError("config must contain a 'preset' key")
    name = doc["preset"]
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    return name, {k: v for k, v in doc.items() if k != "preset"}


def parse_config(text: str) -> SimConfig:
    """Parse and validate a JSON config document into a SimConfig."""
    name, overrides = _parse_config_doc(text)
    return apply_overrides(make_preset(name).cfg, overrides)


def _fmt(value: float) -> str:
    return format(float(value), ".12g")


def emit_csv(trace: SimTrace) -> str:
    """Render a trace as CSV: 12 significant digits, booleans 0/1, LF rows."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    cols = trace.columns()
    names = list(cols)
    bool_cols = {name for name, col in cols.items() if col.dtype == np.bool_}
    lines = [",".join(names)]
    for i in range(len(trace)):
        fields = [
            ("1" if cols[name][i] else "0") if name in bool_cols else _fmt(cols[name][i])
            for name in names
        ]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")
_SVG_W, _SVG_H, _SVG_MARGIN = 800, 500, 60


def emit_plot(traces: list[tuple[str, SimTrace]], quantity: str) -> str:
    """Render quantity-vs-time polylines for the given traces as SVG.

    Fixed 800x500 canvas, 60 px margins, axes autoscaled to the data with
    5% padding, a horizontal zero gridline, and a legend. Deterministic:
    identical traces yield identical bytes.
    """
    if not traces:
        raise ValueError("at least one trace is required")
    series = []
    for label, trace in traces:
        cols = trace.columns()
        if quantity not in cols:
            raise ValueError(f"unknown quantity {quantity!r}; valid: {', '.join(cols)}")
        series.append((str(label), trace.t, np.asarray(cols[quantity], dtype=float)))

    x_lo = min(float(t.min()) for _, t, _ in series)
    x_hi = max(float(t.max()) for _, t, _ in series)
    y_lo = min(float(q.min()) for _, _, q in series)
    y_hi = max(float(q.max()) for _, _, q in series)
    y_lo, y_hi = min(y_lo, 0.0), max(y_hi, 0.0)  # keep the zero line in view
    x_pad = 0.05 * (x_hi - x_lo) or 0.5
    y_pad = 0.05 * (y_hi - y_lo) or 0.5
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    left, top = _SVG_MARGIN, _SVG_MARGIN
    right, bottom = _SVG_W - _SVG_MARGIN, _SVG_H - _SVG_MARGIN

    def px(v: float) -> float:
        return left + (v - x_lo) / (x_hi - x_lo) * (right - left)

    def py(v: float) -> float:
        return bottom - (v - y_lo) / (y_hi - y_lo) * (bottom - top)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect x="0" y="0" width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" '
        'fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    for tick in np.linspace(x_lo, x_hi, 6):
        x = px(float(tick))
        out.append(
            f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 5}" stroke="#333333"/>'
        )
        out.append(
            f'<text x="{x:.2f}" y="{bottom + 20}" font-size="11" text-anchor="middle" '
            f'fill="#333333">{tick:.4g}</text>'
        )
    for tick in np.linspace(y_lo, y_hi, 6):
        y = py(float(tick))
        out.append(
            f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="#333333"/>'
        )
        out.append(
            f'<text x="{left - 8}" y="{y + 4:.2f}" font-size="11" text-anchor="end" '
            f'fill="#333333">{tick:.4g}</text>'
        )
    zero_y = py(0.0)
    out.append(
        f'<line id="zero-line" x1="{left}" y1="{zero_y:.2f}" x2="{right}" y2="{zero_y:.2f}" '
        'stroke="#999999" stroke-dasharray="4 3" stroke-width="1"/>'
    )
    for idx, (label, t, q) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        points = " ".join(f"{px(float(a)):.2f},{py(float(b)):.2f}" for a, b in zip(t, q))
        out.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
        )
    for idx, (label, _, _) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        ly = top + 16 + 18 * idx
        out.append(
            f'<line x1="{right - 150}" y1="{ly}" x2="{right - 120}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{right - 112}" y="{ly + 4}" font-size="12" fill="#333333">{label}</text>'
        )
    out.append(
        f'<text x="{(left + right) / 2:.2f}" y="{_SVG_H - 15}" font-size="12" '
        'text-anchor="middle" fill="#333333">t [s]</text>'
    )
    out.append(
        f'<text x="18" y="{(top + bottom) / 2:.2f}" font-size="12" text-anchor="middle" '
        f'fill="#333333" transform="rotate(-90 18 {(top + bottom) / 2:.2f})">{quantity}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _print_feasibility(bound: float, used: float, out) -> bool:
    if bound <= 0:
        print(
            f"warning: epsilon bound {bound:.6g} is non-positive; no feasible epsilon "
            f"exists for this initial data (configured epsilon={used:g})",
            file=out,
        )
        return False
    if used > bound + 1e-12:
        print(f"warning: epsilon {used:g} exceeds the feasibility bound {bound:.6g}", file=out)
        return False
    print(f"epsilon feasibility: bound {bound:.6g}, using {used:g} (ok)", file=out)
    return True


def _print_report(label: str, report, out) -> None:
    first = "none" if report.first_violation_t is None else f"t={report.first_violation_t:.6g}"
    print(
        f"{label}: min h_true {report.min_h_true:.6g}, min h0 {report.min_h0:.6g}, "
        f"first violation {first}, bound violations {report.bound_violations}, "
        f"infeasible steps {report.infeasible_steps}",
        file=out,
    )


def run_preset(name: str, overrides: Optional[dict] = None, out_dir: str = "out") -> int:
    """Run a preset's proposed/baseline pair and write traces and a plot.

    Returns the process exit status: 0 on success, 2 when a strict
    feasibility check rejects epsilon, 1 on any other error.
    """
    out = sys.stdout
    if name not in PRESET_NAMES:
        print(f"error: unknown preset {name!r}; choose from {PRESET_NAMES}", file=sys.stderr)
        return 1
    try:
        cfg = apply_overrides(make_preset(name).cfg, dict(overrides or {}))
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1

    ok = _print_feasibility(compute_epsilon_bound(cfg), cfg.adaptive0.epsilon, out)
    if cfg.strict_feasibility and not ok:
        print("strict feasibility check failed; not running", file=out)
        return 2
    try:
        proposed, baseline = run_pair(cfg)
    except RunError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1

    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "proposed": os.path.join(out_dir, f"{name}_proposed.csv"),
        "baseline": os.path.join(out_dir, f"{name}_baseline.csv"),
        "plot": os.path.join(out_dir, f"{name}_h.svg"),
    }
    with open(paths["proposed"], "w", newline="") as f:
        f.write(emit_csv(proposed))
    with open(paths["baseline"], "w", newline="") as f:
        f.write(emit_csv(baseline))
    with open(paths["plot"], "w", newline="") as f:
        f.write(emit_plot([("proposed", proposed), ("baseline", baseline)], "h_true"))

    _print_report("proposed", safety_report(proposed, cfg), out)
    _print_report("baseline", safety_report(baseline, cfg), out)
    print(f"wrote {paths['proposed']}, {paths['baseline']}, {paths['plot']}", file=out)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cbfsim",
        description="Observer-aware safety-filter simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a preset pair and write CSV traces and an SVG plot")
    run_p.add_argument("--preset", help=f"one of {', '.join(PRESET_NAMES)}")
    run_p.add_argument("--config", help="JSON config file (overrides a preset)")
    run_p.add_argument("--out", default="out", help="output directory (default ./out)")
    run_p.add_argument("--dt", type=float, help="override the step size")
    run_p.add_argument("--t-end", dest="t_end", type=float, help="override the horizon")
    run_p.add_argument("--strict", action="store_true", help="abort when the epsilon check fails")
    args = parser.parse_args(argv)

    if args.preset and args.config:
        print("error: pass either --preset or --config, not both", file=sys.stderr)
        return 1
    overrides: dict = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as f:
                text = f.read()
            name, overrides = _parse_config_doc(text)
        except OSError as err:
            print(f"error: cannot read config: {err}", file=sys.stderr)
            return 1
        except ValueError as err:
            print(f"error: {err}", file=sys.stderr)
            return 1
    elif args.preset:
        name = args.preset
    else:
        print("error: one of --preset or --config is required", file=sys.stderr)
        return 1
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.t_end is not None:
        overrides["t_end"] = args.t_end
    if args.strict:
        overrides["strict_feasibility"] = True
    return run_preset(name, overrides, out_dir=args.out)
