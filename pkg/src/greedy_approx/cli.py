"""Experiment runner: config parsing, trace CSV/summary/SVG emission.

Configs are flat ``key = value`` text files with ``#`` comments; command
line flags override file values and unknown keys are rejected with their
line number.  Each run writes ``<prefix>_trace.csv`` and
``<prefix>_summary.txt`` (plus ``<prefix>.svg`` with ``--plot``); the
summary verdict is recomputable from the trace alone.

Exit codes: 0 success (including WARN outcomes), 1 usage or config error,
2 I/O error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from ._svg import loglog_svg
from .diagnostics import (
    BoundInputs,
    EntropyModel,
    RateKind,
    SpaceKind,
    cga_bound,
    eim_bound,
    fit_rate,
    predicted_order,
)
from .dictionary import (
    ReluFamilySpec,
    build_point_functionals,
    build_relu_dictionary,
)
from .eim import eim_fit, weak_rbm_fit
from .errors import ConvergenceFailure
from .function_space import INF, GridFunction, as_exponent, make_uniform_grid
from .sparse_greedy import CgaConfig, cga_run, oga_run

#: Acceptance half-width of the slope band around the predicted order.
SLOPE_BAND = 0.35

KINDS = ("eim", "rbm", "oga", "cga", "bounds")


class ConfigError(ValueError):
    """Malformed, unknown, or out-of-range configuration entry."""


def _conv_kind(v):
    v = v.strip().lower()
    if v not in KINDS:
        raise ValueError(f"kind must be one of {', '.join(KINDS)}")
    return v


def _conv_int(lo):
    def conv(v):
        n = int(v)
        if n < lo:
            raise ValueError(f"value must be >= {lo}")
        return n

    return conv


def _conv_float(v):
    return float(v)

def _conv_pos_float(v):
    x = float(v)
    if x <= 0:
        raise ValueError("value must be positive")
    return x


def _conv_nonneg_float(v):
    x = float(v)
    if x < 0:
        raise ValueError("value must be >= 0")
    return x


def _conv_p(v):
    p = as_exponent(v.strip().lower() if isinstance(v, str) else v)
    return p


def _conv_alpha(v):
    a = float(v)
    if not 0 < a <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    return a


def _conv_bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _conv_target(v):
    s = v.strip()
    low = s.lower()
    if low == "sin_pi_x":
        return "sin_pi_x"
    if low.startswith("atom:"):
        int(s.split(":", 1)[1])  # must parse
        return "atom:" + s.split(":", 1)[1].strip()
    if low.startswith("csv:"):
        return "csv:" + s.split(":", 1)[1].strip()
    raise ValueError("target must be sin_pi_x, atom:<index>, or csv:<path>")


def _conv_w_values(v):
    vals = tuple(float(t) for t in str(v).split(","))
    if not vals or any(w not in (-1.0, 1.0) for w in vals):
        raise ValueError("w_values must be a comma list of +1/-1")
    return vals


def _conv_space(v):
    table = {
        "hilbert": SpaceKind.HILBERT,
        "banach": SpaceKind.GENERAL_BANACH,
        "general_banach": SpaceKind.GENERAL_BANACH,
        "sobolev": SpaceKind.SOBOLEV_P,
        "sobolev_p": SpaceKind.SOBOLEV_P,
    }
    key = str(v).strip().lower()
    if key not in table:
        raise ValueError("space must be hilbert, banach, or sobolev")
    return table[key]


def _conv_bound(v):
    s = str(v).strip().lower()
    if s not in ("eim", "cga"):
        raise ValueError("bound must be eim or cga")
    return s


def _conv_s(v):
    x = float(v)
    if not 1 < x <= 2:
        raise ValueError("s must lie in (1, 2]")
    return x


CONVERTERS = {
    "kind": _conv_kind,
    "grid_points": _conv_int(2),
    "p": _conv_p,
    "m": _conv_int(0),
    "b_min": _conv_float,
    "b_max": _conv_float,
    "b_count": _conv_int(2),
    "w_values": _conv_w_values,
    "target": _conv_target,
    "steps": _conv_int(1),
    "alpha": _conv_alpha,
    "seed": _conv_int(0),
    "out": str.strip,
    "plot": _conv_bool,
    "stop_tol": _conv_nonneg_float,
    "stride": _conv_int(1),
    "bound": _conv_bound,
    "space": _conv_space,
    "entropy_amplitude": _conv_pos_float,
    "entropy_rate": _conv_pos_float,
    "log_correction": _conv_bool,
    "s": _conv_s,
    "c_x": _conv_pos_float,
    "l1_norm": _conv_pos_float,
    "lebesgue_csv": str.strip,
}

COMMON_DEFAULTS = {
    "grid_points": 1000,
    "b_min": -2.0,
    "b_max": 2.0,
    "w_values": (-1.0, 1.0),
    "target": "sin_pi_x",
    "alpha": 1.0,
    "seed": 0,
    "out": "run",
    "plot": False,
    "stop_tol": 0.0,
    "stride": 1,
    "bound": "eim",
    "space": SpaceKind.GENERAL_BANACH,
    "entropy_amplitude": 1.0,
    "entropy_rate": 1.0,
    "log_correction": False,
    "s": 2.0,
    "c_x": 1.0,
    "l1_norm": 1.0,
    "lebesgue_csv": "",
}

KIND_DEFAULTS = {
    "eim": {"p": INF, "m": 1, "b_count": 4001, "steps": 60},
    "rbm": {"p": as_exponent(2), "m": 1, "b_count": 401, "steps": 30},
    "oga": {"p": as_exponent(2), "m": 1, "b_count": 250, "steps": 50},
    "cga": {"p": as_exponent(2), "m": 0, "b_count": 80001, "steps": 100},
    "bounds": {"p": as_exponent(2), "m": 0, "b_count": 2, "steps": 50},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One fully-resolved experiment description."""

    kind: str
    grid_points: int
    p: object
    m: int
    b_min: float
    b_max: float
    b_count: int
    w_values: tuple
    target: str
    steps: int
    alpha: float
    seed: int
    out: str
    plot: bool
    stop_tol: float
    stride: int
    bound: str
    space: SpaceKind
    entropy_amplitude: float
    entropy_rate: float
    log_correction: bool
    s: float
    c_x: float
    l1_norm: float
    lebesgue_csv: str

    @property
    def dictionary(self):
        return ReluFamilySpec(
            m=self.m,
            b_min=self.b_min,
            b_max=self.b_max,
            b_count=self.b_count,
            w_values=self.w_values,
        )


def _read_config_file(path):
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in CONVERTERS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = CONVERTERS[key](value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {key}: {exc}") from exc
    return values


def parse_config(path=None, overrides=None):
    """Resolve a config file plus overrides into an ExperimentConfig.

    ``overrides`` maps config keys to raw string values (converted here) or
    already-typed values; they win over file entries.  Per-kind defaults
    fill the rest.
    """
    values = _read_config_file(path) if path else {}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in CONVERTERS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            values[key] = (
                CONVERTERS[key](value) if isinstance(value, str) else value
            )
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    if "kind" not in values:
        raise ConfigError("missing required key 'kind'")
    kind = values["kind"]
    merged = dict(COMMON_DEFAULTS)
    merged.update(KIND_DEFAULTS[kind])
    merged.update(values)
    if kind == "oga" and merged["p"].p != 2.0:
        raise ConfigError("oga runs in L_2 only; use kind=cga for other p")
    if kind == "cga" and merged["p"].is_inf:
        raise ConfigError("cga needs finite p")
    return ExperimentConfig(**merged)


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _g17(x):
    return format(float(x), ".17g")


def _trace_csv(kind, trace):
    if kind in ("eim", "rbm"):
        lines = ["n,error,lebesgue_upper,selected_index,seconds"]
        for rec in trace.records:
            leb = "" if rec.lebesgue_upper is None else _g17(rec.lebesgue_upper)
            lines.append(
                f"{rec.n},{_g17(rec.error)},{leb},{rec.selected_index},{_g17(rec.seconds)}"
            )
    else:
        lines = ["n,residual_norm,selected_index,seconds"]
        for rec in trace.records:
            lines.append(
                f"{rec.n},{_g17(rec.error)},{rec.selected_index},{_g17(rec.seconds)}"
            )
    return "\n".join(lines) + "\n"


def _default_window(ns):
    return int(ns[len(ns) // 3]), int(ns[-1])


def _target_function(config, grid, dictionary):
    name = config.target
    if name == "sin_pi_x":
        return GridFunction(grid, np.sin(np.pi * grid.points))
    if name.startswith("atom:"):
        idx = int(name.split(":", 1)[1])
        if not 0 <= idx < len(dictionary):
            raise ConfigError(
                f"target atom index {idx} out of range 0..{len(dictionary) - 1}"
            )
        return dictionary.atom(idx)
    path = name.split(":", 1)[1]
    vals = np.loadtxt(path, dtype=float, ndmin=1)
    if vals.size != len(grid):
        raise ConfigError(
            f"target csv has {vals.size} values, grid has {len(grid)} points"
        )
    return GridFunction(grid, vals)


def _predicted(config):
    if config.kind == "eim" or config.kind == "rbm":
        return predicted_order(config.m, 1, config.p, RateKind.EIM_ENTROPY)
    return predicted_order(config.m, 1, config.p, RateKind.CGA_ENTROPY)


def _summary_text(config, trace, warn):
    ns, errors = trace.ns, trace.errors
    lines = [f"kind = {config.kind}", f"steps_run = {len(trace)}"]
    p_label = "inf" if config.p.is_inf else f"{config.p.p:g}"
    lines.append(f"p = {p_label}")
    lines.append(f"m = {config.m}")
    if warn:
        lines.append(f"warn = {warn}")
    if len(ns) >= 4 and np.all(errors > 0):
        window = _default_window(ns)
        slope, _, r2 = fit_rate(ns, errors, window)
        predicted = _predicted(config)
        threshold = predicted + SLOPE_BAND
        verdict = "PASS" if slope <= threshold else "FAIL"
        lines += [
            f"fit_window = [{window[0]}, {window[1]}]",
            f"fitted_slope = {slope:.6f}",
            f"r_squared = {r2:.6f}",
            f"predicted_order = {predicted:.6f}",
            f"slope_threshold = {threshold:.6f}  # predicted + {SLOPE_BAND}",
            f"verdict = {verdict}",
        ]
    else:
        lines.append("verdict = SKIP  # too few iterations for a rate fit")
    if config.kind == "eim":
        leb = trace.lebesgue
        if len(leb) and np.all(np.isfinite(leb)):
            lines.append(f"lebesgue_upper_final = {leb[-1]:.6f}")
    return "\n".join(lines) + "\n"


def _error_label(kind):
    return "sup error" if kind in ("eim", "rbm") else "residual norm"


def _write_run_outputs(config, trace, warn):
    prefix = config.out
    _atomic_write(prefix + "_trace.csv", _trace_csv(config.kind, trace))
    _atomic_write(prefix + "_summary.txt", _summary_text(config, trace, warn))
    if config.plot and len(trace) >= 2:
        predicted = _predicted(config)
        series = [(_error_label(config.kind), trace.ns.tolist(), trace.errors.tolist())]
        if config.kind == "eim":
            series.append(("Lebesgue upper bound", trace.ns.tolist(), trace.lebesgue.tolist()))
        svg = loglog_svg(
            series,
            guides=[(predicted, f"slope {predicted:g}")],
            title=f"{config.kind} convergence (m={config.m}, p="
            + ("inf" if config.p.is_inf else f"{config.p.p:g}")
            + ")",
            xlabel="n",
            ylabel=_error_label(config.kind),
        )
        _atomic_write(prefix + ".svg", svg)


def _read_lebesgue_csv(path):
    series = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        try:
            col = header.index("lebesgue_upper")
        except ValueError as exc:
            raise ConfigError(f"{path}: no lebesgue_upper column") from exc
        for line in fh:
            cell = line.strip().split(",")[col]
            if cell:
                series.append(float(cell))
    if not series:
        raise ConfigError(f"{path}: lebesgue_upper column is empty")
    return series


def _run_bounds(config):
    model = EntropyModel(
        config.entropy_amplitude, config.entropy_rate, config.log_correction
    )
    n_max = config.steps
    if config.lebesgue_csv:
        lebesgue = _read_lebesgue_csv(config.lebesgue_csv)
        n_max = min(n_max, len(lebesgue) + 1)
    else:
        lebesgue = [1.0] * n_max
    inputs = BoundInputs(
        space_kind=config.space,
        lebesgue_series=tuple(lebesgue),
        alpha_series=tuple([config.alpha] * n_max),
        s=config.s,
        C_X=config.c_x,
        l1_norm=config.l1_norm,
        p=None if config.p.is_inf else config.p.p,
    )
    ns = list(range(1, n_max + 1))
    evaluator = eim_bound if config.bound == "eim" else cga_bound
    values = [evaluator(n, inputs, model) for n in ns]
    lines = ["n,bound"]
    lines += [f"{n},{_g17(v)}" for n, v in zip(ns, values)]
    _atomic_write(config.out + "_trace.csv", "\n".join(lines) + "\n")

    diffs = np.diff(np.array(values))
    summary = [
        f"kind = bounds ({config.bound})",
        f"space = {config.space.value}",
        f"entropy_model = {config.entropy_amplitude:g} * n^-{config.entropy_rate:g}"
        + (" (log-reindexed)" if config.log_correction else ""),
        f"n_max = {n_max}",
        f"min_bound = {min(values):.6e}",
        f"max_bound = {max(values):.6e}",
        f"monotone_decreasing = {bool(np.all(diffs <= 0))}",
    ]
    _atomic_write(config.out + "_summary.txt", "\n".join(summary) + "\n")
    if config.plot and len(ns) >= 2:
        svg = loglog_svg(
            [(f"{config.bound} bound", ns, values)],
            title=f"{config.bound} bound ({config.space.value})",
            xlabel="n",
            ylabel="bound",
        )
        _atomic_write(config.out + ".svg", svg)
    return 0


def run_experiment(config):
    """Execute one experiment and write its trace/summary (and SVG).

    Returns 0 on success; breakdown or stagnation produce a WARN line and
    still return 0 (a truncated trace is still a result).
    """
    if config.kind == "bounds":
        return _run_bounds(config)

    grid = make_uniform_grid(config.grid_points)
    dictionary = build_relu_dictionary(config.dictionary, grid)
    warn = ""
    if config.kind == "eim":
        functionals = build_point_functionals(grid, config.stride)
        steps = min(config.steps, len(dictionary), len(functionals))
        _, trace = eim_fit(dictionary, functionals, config.p, steps, config.stop_tol)
        if trace.breakdown:
            warn = "collocation breakdown; trace truncated"
    elif config.kind == "rbm":
        steps = min(config.steps, len(dictionary))
        trace = weak_rbm_fit(dictionary, config.p, config.alpha, steps)
        if trace.exhausted:
            warn = "dictionary span exhausted; trace truncated"
    elif config.kind == "oga":
        target = _target_function(config, grid, dictionary)
        _, trace = oga_run(target, dictionary, config.steps,
                           config.stop_tol or 1e-12)
        if trace.stagnated:
            warn = "selection stagnated; trace truncated"
    elif config.kind == "cga":
        target = _target_function(config, grid, dictionary)
        cga_cfg = CgaConfig(
            p=config.p,
            alpha=config.alpha,
            max_steps=config.steps,
            select_tol=config.stop_tol or 1e-12,
        )
        _, trace = cga_run(target, dictionary, cga_cfg)
        if trace.stagnated:
            warn = "selection stagnated; trace truncated"
    else:  # pragma: no cover - parse_config rejects unknown kinds
        raise ConfigError(f"unknown kind {config.kind!r}")

    _write_run_outputs(config, trace, warn)
    if warn:
        print(f"WARN: {warn}", file=sys.stderr)
    return 0


PAPER_SUITE = (
    {"kind": "eim", "m": 1, "p": INF},
    {"kind": "eim", "m": 2, "p": INF},
    {"kind": "eim", "m": 3, "p": INF},
    {"kind": "eim", "m": 1, "p": as_exponent(2)},
    {"kind": "eim", "m": 2, "p": as_exponent(2)},
    {"kind": "eim", "m": 3, "p": as_exponent(2)},
    {"kind": "cga", "p": as_exponent(2)},
    {"kind": "cga", "p": as_exponent(3)},
    {"kind": "cga", "p": as_exponent(4)},
    {"kind": "cga", "p": as_exponent(8)},
)


def reproduce_paper(out_dir, plot=False):
    """Run the full experiment suite into ``out_dir`` and write report.txt."""
    os.makedirs(out_dir, exist_ok=True)
    report = []
    for spec in PAPER_SUITE:
        p = spec["p"]
        p_label = "inf" if p.is_inf else f"p{p.p:g}"
        name = (
            f"eim_m{spec['m']}_{p_label}" if spec["kind"] == "eim" else f"cga_{p_label}"
        )
        overrides = dict(spec)
        overrides["out"] = os.path.join(out_dir, name)
        overrides["plot"] = plot
        config = parse_config(overrides=overrides)
        print(f"running {name} ...", flush=True)
        run_experiment(config)
        with open(overrides["out"] + "_summary.txt", encoding="utf-8") as fh:
            body = fh.read().strip().replace("\n", "; ")
        report.append(f"{name}: {body}")
    _atomic_write(os.path.join(out_dir, "report.txt"), "\n".join(report) + "\n")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="greedy-approx",
        description="Greedy approximation experiments on [0, 1].",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a config file")
    run.add_argument("--config", help="key = value config file")
    run.add_argument("--kind", help="experiment kind (overrides config)")
    run.add_argument("--p", help="norm exponent, a number > 1 or 'inf'")
    run.add_argument("--m", help="ridge smoothness index")
    run.add_argument("--steps", help="greedy iterations")
    run.add_argument("--out", help="output path prefix")
    run.add_argument("--plot", action="store_true", help="also write an SVG chart")

    rep = sub.add_parser("reproduce-paper", help="run the full experiment suite")
    rep.add_argument("--out", required=True, help="output directory")
    rep.add_argument("--plot", action="store_true")

    bounds = sub.add_parser("bounds", help="evaluate theoretical bound curves")
    bounds.add_argument("--config", required=True)
    bounds.add_argument("--out", help="output path prefix")
    bounds.add_argument("--steps", help="largest step n")
    bounds.add_argument("--plot", action="store_true")
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    try:
        if args.command == "reproduce-paper":
            return reproduce_paper(args.out, plot=args.plot)
        overrides = {
            "kind": getattr(args, "kind", None),
            "p": getattr(args, "p", None),
            "m": getattr(args, "m", None),
            "steps": getattr(args, "steps", None),
            "out": getattr(args, "out", None),
        }
        if args.command == "bounds":
            overrides["kind"] = "bounds"
        if args.plot:
            overrides["plot"] = True
        config = parse_config(args.config, overrides)
        return run_experiment(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceFailure, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
