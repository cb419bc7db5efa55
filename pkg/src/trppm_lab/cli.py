"""Experiment harness: run / sweep / verify.

Exit codes: 0 all checks pass, 1 a verification check failed, 2 bad
configuration or arguments, 3 a numerical solve failed. The ``TRPPM_SEED``
environment variable overrides the configured seed. Identical config and
seed produce byte-identical CSV and report files.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from pathlib import Path

import numpy as np

from .checks import (
    SUITE_NAMES,
    CheckResult,
    VerificationReport,
    evaluate_trace_check,
    run_suite,
)
from .config import load_config
from .errors import ConfigError, NumericalFailure
from .solvers import CSV_COLUMNS, Termination, run

_SWEEP_AXES = {
    "solver.t": "t",
    "solver.lambda": "lam",
    "solver.theta": "theta",
    "solver.epsilon": "epsilon",
    "solver.stop_dist": "stop_dist",
    "solver.max_iters": "max_iters",
    "solver.lambda_tol": "lambda_tol",
}
_INT_AXES = {"solver.max_iters"}

SWEEP_HEADER = "axis_value,final_f_gap,iters_to_neighborhood,fitted_rate,status"


def _g(value):
    return format(float(value), ".17g")


def write_trace_csv(records, path):
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        lines.append(
            f"{r.k},{_g(r.f_gap)},{_g(r.dist)},{_g(r.step_len)},"
            f"{'true' if r.active else 'false'},{_g(r.lambda_k)},{_g(r.t_k)},"
            f"{_g(r.q_k)},{_g(r.envelope)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def run_experiment(cfg, base_dir=None):
    """Run one configured experiment; write its CSV trace and check report.

    Returns ``(trace, report)``. On a numerical failure the artifacts are
    still written (header-only CSV, a failed ``numerical_failure`` check)
    and the exception is re-raised for the exit-code path.
    """
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    csv_path = base / cfg.csv_path
    report_path = base / cfg.report_path
    try:
        trace = run(cfg.problem, cfg.x0, cfg.solver)
    except NumericalFailure as exc:
        failure = CheckResult(
            "numerical_failure", False, exc.residual, 0.0, 0.0, str(exc)
        )
        report = VerificationReport("experiment", cfg.seed, [failure])
        write_trace_csv([], csv_path)
        report_path.write_text(report.render())
        raise
    results = [evaluate_trace_check(name, trace, params) for name, params in cfg.checks]
    report = VerificationReport("experiment", cfg.seed, results)
    write_trace_csv(trace.records, csv_path)
    report_path.write_text(report.render())
    return trace, report


def _fitted_rate(trace):
    # geometric fit: least-squares slope of log f_gap against k
    ks, gaps = [], []
    for r in trace.records:
        if r.f_gap > 0.0:
            ks.append(float(r.k))
            gaps.append(math.log(r.f_gap))
    if len(ks) < 2:
        return None
    return float(np.polyfit(np.array(ks), np.array(gaps), 1)[0])


def _suffixed(path_str, suffix):
    p = Path(path_str)
    return str(p.with_name(p.stem + suffix + p.suffix))


def run_sweep(cfg, axis, values, base_dir=None):
    """Re-run the experiment for each axis value; write a summary CSV.

    Per-entry failures are recorded in the summary's status column and the
    sweep continues. Returns ``(rows, all_passed)``.
    """
    if axis not in _SWEEP_AXES:
        known = ", ".join(sorted(_SWEEP_AXES))
        raise ConfigError(f"sweep axis {axis!r} is not numeric; known axes: {known}")
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    attr = _SWEEP_AXES[axis]
    rows = []
    all_passed = True
    for value in values:
        value = int(value) if axis in _INT_AXES else float(value)
        tag = f"__{axis.replace('.', '_')}={value:g}"
        entry = dataclasses.replace(cfg)
        entry.csv_path = _suffixed(cfg.csv_path, tag)
        entry.report_path = _suffixed(cfg.report_path, tag)
        try:
            entry.solver = dataclasses.replace(cfg.solver, **{attr: value})
            trace, report = run_experiment(entry, base)
        except (ConfigError, ValueError, NumericalFailure) as exc:
            all_passed = False
            rows.append((value, "", "", "", f"error: {exc}"))
            continue
        final_gap = trace.records[-1].f_gap
        iters = (
            str(trace.records[-1].k)
            if trace.terminated_reason is Termination.NEIGHBORHOOD_REACHED
            else ""
        )
        rate = _fitted_rate(trace)
        status = "pass" if report.overall else "check_failed"
        all_passed = all_passed and report.overall
        rows.append((value, _g(final_gap), iters, "" if rate is None else _g(rate), status))

    lines = [SWEEP_HEADER]
    for row in rows:
        lines.append(f"{row[0]:g},{row[1]},{row[2]},{row[3]},{_csv_escape(row[4])}")
    summary_path = base / _suffixed(cfg.csv_path, "__sweep")
    Path(summary_path).write_text("\n".join(lines) + "\n")
    return rows, all_passed


def _csv_escape(text):
    if "," in text or '"' in text or "\n" in text:
        return '"' + text.replace('"', '""') + '"'
    return text


def _env_seed():
    raw = os.environ.get("TRPPM_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"TRPPM_SEED: expected an integer, got {raw!r}") from exc


def _load(path):
    cfg = load_config(path)
    seed = _env_seed()
    if seed is not None:
        cfg = cfg.with_seed(seed)
    return cfg


def _cmd_run(args):
    cfg = _load(args.config)
    _, report = run_experiment(cfg)
    sys.stdout.write(report.render())
    return 0 if report.overall else 1


def _cmd_sweep(args):
    cfg = _load(args.config)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    parsed = []
    for v in values:
        try:
            parsed.append(float(v))
        except ValueError as exc:
            raise ConfigError(f"--values: {v!r} is not a number") from exc
    rows, all_passed = run_sweep(cfg, args.axis, parsed)
    for row in rows:
        sys.stdout.write(f"{args.axis}={row[0]:g}: {row[4]}\n")
    if not rows:
        sys.stdout.write("empty sweep: no values given\n")
        return 0
    return 0 if all_passed else 1


def _cmd_verify(args):
    seed = args.seed
    if seed is None:
        seed = _env_seed()
    if seed is None:
        seed = 42
    report = run_suite(args.suite, seed)
    sys.stdout.write(report.render())
    return 0 if report.overall else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="trppm-lab",
        description="Trust-region proximal point experiments and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a TOML config")
    p_run.add_argument("config", help="path to the TOML experiment file")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="repeat an experiment over one numeric axis")
    p_sweep.add_argument("config", help="path to the TOML experiment file")
    p_sweep.add_argument("--axis", required=True, help="dotted config key, e.g. solver.t")
    p_sweep.add_argument("--values", required=True, help="comma-separated numbers")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run a deterministic self-test suite")
    p_verify.add_argument("suite", choices=[*SUITE_NAMES, "all"])
    p_verify.add_argument("--seed", type=int, default=None)
    p_verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc} (residual {exc.residual:g})", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
