"""Strict TOML experiment configuration.

Unknown keys anywhere in the file are rejected by their dotted path, so a
typo like ``solver.lamda`` fails loudly instead of being ignored. The
``lambda`` solver key maps to ``SolverConfig.lam`` (keyword restriction).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .checks import TRACE_CHECKS
from .errors import ConfigError
from .problems import make_problem
from .solvers import SolverConfig

_TOP_KEYS = {"problem", "x0", "seed", "solver", "outputs", "verification"}
_SOLVER_KEYS = {
    "regime",
    "t",
    "lambda",
    "theta",
    "epsilon",
    "lambda_rule",
    "max_iters",
    "stop_dist",
    "lambda_tol",
    "mf_samples",
}
_OUTPUT_KEYS = {"csv", "report"}

DEFAULT_CSV = "trace.csv"
DEFAULT_REPORT = "report.txt"


@dataclass
class ExperimentConfig:
    problem: object
    problem_name: str
    problem_params: dict
    x0: np.ndarray
    solver: SolverConfig
    csv_path: str = DEFAULT_CSV
    report_path: str = DEFAULT_REPORT
    checks: List[Tuple[str, dict]] = field(default_factory=list)
    seed: int = 42

    def with_seed(self, seed):
        out = replace(self)
        out.seed = int(seed)
        out.solver = replace(self.solver, mf_seed=int(seed))
        return out


def _require_table(raw, key):
    value = raw.get(key)
    if not isinstance(value, dict):
        raise ConfigError(f"{key}: required table is missing or not a table")
    return value


def _reject_unknown(found, allowed, prefix):
    unknown = sorted(set(found) - allowed)
    if unknown:
        names = ", ".join(f"{prefix}{k}" for k in unknown)
        raise ConfigError(f"unknown key(s): {names}")


def _number(value, key, allow_int_only=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if allow_int_only:
        if isinstance(value, float):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _string(value, key):
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string, got {value!r}")
    return value


def _number_list(value, key, length=None):
    if not isinstance(value, list) or (length is not None and len(value) != length):
        want = f" of length {length}" if length is not None else ""
        raise ConfigError(f"{key}: expected an array{want}")
    return [_number(v, f"{key}[{i}]") for i, v in enumerate(value)]


def parse_config(text):
    """Parse and validate a TOML experiment description."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc
    _reject_unknown(raw, _TOP_KEYS, "")

    problem_table = dict(_require_table(raw, "problem"))
    name = _string(problem_table.pop("name", None) or "", "problem.name")
    if not name:
        raise ConfigError("problem.name: required")
    try:
        problem = make_problem(name, problem_table)
    except ValueError as exc:
        raise ConfigError(f"problem: {exc}") from exc

    if "x0" not in raw:
        raise ConfigError("x0: required")
    x0 = np.array(_number_list(raw["x0"], "x0"), dtype=float)
    if x0.shape != (problem.dim,):
        raise ConfigError(
            f"x0: expected {problem.dim} coordinate(s) for problem {name!r}, got {x0.shape[0]}"
        )

    seed = 42
    if "seed" in raw:
        seed = _number(raw["seed"], "seed", allow_int_only=True)
        if seed < 0:
            raise ConfigError("seed: must be nonnegative")

    solver_table = _require_table(raw, "solver")
    _reject_unknown(solver_table, _SOLVER_KEYS, "solver.")
    if "regime" not in solver_table:
        raise ConfigError("solver.regime: required")
    kwargs = {"regime": _string(solver_table["regime"], "solver.regime"), "mf_seed": seed}
    for key, target in (
        ("t", "t"),
        ("lambda", "lam"),
        ("theta", "theta"),
        ("epsilon", "epsilon"),
        ("stop_dist", "stop_dist"),
        ("lambda_tol", "lambda_tol"),
    ):
        if key in solver_table:
            kwargs[target] = _number(solver_table[key], f"solver.{key}")
    for key in ("max_iters", "mf_samples"):
        if key in solver_table:
            kwargs[key] = _number(solver_table[key], f"solver.{key}", allow_int_only=True)
    if "lambda_rule" in solver_table:
        kwargs["lambda_rule"] = _string(solver_table["lambda_rule"], "solver.lambda_rule")
    try:
        solver = SolverConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from exc

    csv_path, report_path = DEFAULT_CSV, DEFAULT_REPORT
    if "outputs" in raw:
        outputs = _require_table(raw, "outputs")
        _reject_unknown(outputs, _OUTPUT_KEYS, "outputs.")
        if "csv" in outputs:
            csv_path = _string(outputs["csv"], "outputs.csv")
        if "report" in outputs:
            report_path = _string(outputs["report"], "outputs.report")

    checks = []
    if "verification" in raw:
        verification = _require_table(raw, "verification")
        for check_name, params in verification.items():
            if check_name not in TRACE_CHECKS:
                known = ", ".join(sorted(TRACE_CHECKS))
                raise ConfigError(
                    f"verification.{check_name}: unknown check; known checks: {known}"
                )
            if not isinstance(params, dict):
                raise ConfigError(f"verification.{check_name}: expected a table")
            checks.append((check_name, _check_params(check_name, params)))

    return ExperimentConfig(
        problem=problem,
        problem_name=name,
        problem_params=dict(problem_table),
        x0=x0,
        solver=solver,
        csv_path=csv_path,
        report_path=report_path,
        checks=checks,
        seed=seed,
    )


def _check_params(name, params):
    prefix = f"verification.{name}."
    _, allowed = TRACE_CHECKS[name]
    _reject_unknown(params, allowed, prefix)
    out = {}
    if name == "slope":
        for req in ("quantity", "basis", "window", "bounds"):
            if req not in params:
                raise ConfigError(f"{prefix}{req}: required")
        quantity = _string(params["quantity"], prefix + "quantity")
        if quantity not in ("dist", "f_gap", "step_len"):
            raise ConfigError(f"{prefix}quantity: must be dist, f_gap or step_len")
        basis = _string(params["basis"], prefix + "basis")
        if basis not in ("log_k", "k"):
            raise ConfigError(f"{prefix}basis: must be log_k or k")
        window = _number_list(params["window"], prefix + "window", length=2)
        bounds = _number_list(params["bounds"], prefix + "bounds", length=2)
        if bounds[0] > bounds[1]:
            raise ConfigError(f"{prefix}bounds: lower bound exceeds upper bound")
        out = {
            "quantity": quantity,
            "basis": basis,
            "window": (int(window[0]), int(window[1])),
            "bounds": (bounds[0], bounds[1]),
        }
    elif "tol" in params:
        tol = _number(params["tol"], prefix + "tol")
        if tol <= 0.0:
            raise ConfigError(f"{prefix}tol: must be positive")
        out = {"tol": tol}
    return out


def load_config(path):
    try:
        with open(path, "rb") as fh:
            text = fh.read().decode("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
