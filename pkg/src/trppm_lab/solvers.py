"""Trust-region proximal point iterations and their traces.

One loop drives all five regimes:

- ``PPM``: classical proximal point, ``t = inf``, constant ``lam > 0``.
- ``BPM``: ball minimization, ``lam = 0``, fixed radius ``t``.
- ``TRPPM_FIXED_T``: fixed radius, ``lam_k`` chosen per iterate by a rule
  (bisection on the displacement, weak-sharpness constants, or constant).
- ``TRPPM_FIXED_LAMBDA``: constant ``lam``, radius ``theta * m`` where ``m``
  lower-bounds the displacement over the far region (closed form when
  available, otherwise a shaved sampled estimate).
- ``TRPPM_UNCONSTRAINED``: constant ``lam`` on a strongly convex problem,
  optional radius.

Each record carries the per-step contraction estimate
``q_k = (1 + step_len / ||x_{k+1} - x*||)^-1`` and the regime's theoretical
envelope, so traces are self-auditing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from .displacement import (
    MinDisplacementQuery,
    critical_lambda,
    displacement,
    min_displacement_closed_form,
    min_displacement_grid,
    weak_sharp_lambda,
)
from .errors import ClosedFormUnavailable, PreconditionError
from .prox import SubproblemSpec, brox, tr_prox

INF = float("inf")

STEP_FLOOR = 1e-14
EQUIVALENCE_TOL = 1e-8
GRID_SAFETY = 0.9
BISECTION_SAFETY = 0.99


class Regime(str, Enum):
    PPM = "PPM"
    BPM = "BPM"
    TRPPM_FIXED_T = "TRPPM_FIXED_T"
    TRPPM_FIXED_LAMBDA = "TRPPM_FIXED_LAMBDA"
    TRPPM_UNCONSTRAINED = "TRPPM_UNCONSTRAINED"


class LambdaRule(str, Enum):
    BISECTION = "BISECTION"
    WEAK_SHARP = "WEAK_SHARP"
    CONSTANT = "CONSTANT"


class Termination(str, Enum):
    NEIGHBORHOOD_REACHED = "NEIGHBORHOOD_REACHED"
    MAX_ITERS = "MAX_ITERS"
    FIXED_POINT = "FIXED_POINT"


@dataclass(frozen=True)
class SolverConfig:
    """Validated solver parameters.

    ``lambda_rule`` applies to the fixed-t regime only. ``stop_dist``
    defaults per regime: ``t`` for fixed-t, ``epsilon`` for fixed-lambda,
    0 otherwise.
    """

    regime: Regime
    t: float = INF
    lam: float = 0.0
    theta: float = 1.0
    epsilon: Optional[float] = None
    lambda_rule: LambdaRule = LambdaRule.CONSTANT
    max_iters: int = 1000
    stop_dist: Optional[float] = None
    lambda_tol: float = 1e-6
    mf_samples: int = 10000
    mf_seed: int = 42

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "regime", Regime(self.regime))
        set_(self, "lambda_rule", LambdaRule(self.lambda_rule))
        t = float(self.t)
        if not t > 0.0:
            raise ValueError("t must be positive (inf allowed)")
        set_(self, "t", t)
        lam = float(self.lam)
        if not (lam >= 0.0 and math.isfinite(lam)):
            raise ValueError("lam must be finite and nonnegative")
        set_(self, "lam", lam)
        theta = float(self.theta)
        if not 0.0 < theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")
        set_(self, "theta", theta)
        if self.epsilon is not None:
            eps = float(self.epsilon)
            if not (eps > 0.0 and math.isfinite(eps)):
                raise ValueError("epsilon must be positive and finite")
            set_(self, "epsilon", eps)
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be at least 1")
        set_(self, "max_iters", int(self.max_iters))
        if self.stop_dist is not None:
            stop = float(self.stop_dist)
            if not (stop >= 0.0 and math.isfinite(stop)):
                raise ValueError("stop_dist must be finite and nonnegative")
            set_(self, "stop_dist", stop)
        if not float(self.lambda_tol) > 0.0:
            raise ValueError("lambda_tol must be positive")
        set_(self, "lambda_tol", float(self.lambda_tol))

        regime = self.regime
        if regime is Regime.PPM:
            if math.isfinite(t):
                raise ValueError("PPM has no trust region; leave t infinite")
            if not lam > 0.0:
                raise ValueError("PPM requires lam > 0")
        elif regime is Regime.BPM:
            if not math.isfinite(t):
                raise ValueError("BPM requires a finite radius t")
            if lam != 0.0:
                raise ValueError("BPM requires lam == 0")
        elif regime is Regime.TRPPM_FIXED_T:
            if not math.isfinite(t):
                raise ValueError("fixed-t regime requires a finite radius t")
        elif regime is Regime.TRPPM_FIXED_LAMBDA:
            if not lam > 0.0:
                raise ValueError("fixed-lambda regime requires lam > 0")
            if self.epsilon is None:
                raise ValueError("fixed-lambda regime requires epsilon")
        elif regime is Regime.TRPPM_UNCONSTRAINED:
            if not lam > 0.0:
                raise ValueError("unconstrained regime requires lam > 0")
        if regime is not Regime.TRPPM_FIXED_T and self.lambda_rule is not LambdaRule.CONSTANT:
            raise ValueError("lambda_rule other than CONSTANT applies to TRPPM_FIXED_T only")

    @property
    def default_stop_dist(self):
        if self.stop_dist is not None:
            return self.stop_dist
        if self.regime is Regime.TRPPM_FIXED_T:
            return self.t
        if self.regime is Regime.TRPPM_FIXED_LAMBDA:
            return self.epsilon
        return 0.0


@dataclass(frozen=True)
class IterateRecord:
    """State at iterate ``k`` plus the step taken from it.

    The last record of a trace is the stopping iterate: no step is taken
    from it, so ``step_len = 0``, ``active = False``, ``lambda_k = 0`` and
    ``q_k = 1``. ``envelope`` is the regime's theoretical bound on ``f_gap``
    at index ``k``. ``q_k = 0`` flags a step landing exactly on the anchor
    solution.
    """

    k: int
    x: np.ndarray
    f_gap: float
    dist: float
    step_len: float
    active: bool
    lambda_k: float
    t_k: float
    q_k: float
    envelope: float


CSV_COLUMNS = ("k", "f_gap", "dist", "step_len", "active", "lambda_k", "t_k", "q_k", "envelope")


@dataclass
class Trace:
    problem: object
    config: SolverConfig
    records: List[IterateRecord]
    terminated_reason: Termination
    anchor: np.ndarray
    d0: float
    gap0: float
    mf: Optional[float] = field(default=None)

    def column(self, name):
        if name not in CSV_COLUMNS:
            raise ValueError(f"unknown column {name!r}")
        return np.array([getattr(r, name) for r in self.records])


def step_ppm(problem, x, lam):
    """One classical proximal step."""
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise ValueError("step_ppm requires finite lam > 0")
    return problem.prox(lam, problem.check_point(x))


def step_trppm(problem, x, lam, t):
    """One trust-region proximal step; returns the full subproblem result."""
    return tr_prox(SubproblemSpec(problem, x, lam, t))


def _choose_parameters(problem, x, cfg, t_run):
    regime = cfg.regime
    if regime is Regime.PPM:
        return cfg.lam, INF
    if regime is Regime.BPM:
        return 0.0, cfg.t
    if regime is Regime.TRPPM_UNCONSTRAINED:
        return cfg.lam, cfg.t
    if regime is Regime.TRPPM_FIXED_LAMBDA:
        return cfg.lam, t_run
    if cfg.lambda_rule is LambdaRule.BISECTION:
        return BISECTION_SAFETY * critical_lambda(problem, x, cfg.t, cfg.lambda_tol), cfg.t
    if cfg.lambda_rule is LambdaRule.WEAK_SHARP:
        return weak_sharp_lambda(problem, x, cfg.t), cfg.t
    return cfg.lam, cfg.t


def _envelope_factor(cfg, d0, lam_k, t_k, mu):
    # multiplicative decay of the theoretical envelope for one step
    regime = cfg.regime
    if regime in (Regime.TRPPM_FIXED_T, Regime.BPM):
        return 1.0 + cfg.t / d0
    if regime is Regime.TRPPM_FIXED_LAMBDA:
        return 1.0 + t_k / d0
    if regime is Regime.TRPPM_UNCONSTRAINED:
        return 1.0 + min(t_k / d0, mu / lam_k)
    return 1.0


def run(problem, x0, config):
    """Iterate the configured regime from ``x0`` until a stopping rule fires.

    Stopping rules, in precedence order: exact solution reached
    (``FIXED_POINT``), ``dist <= stop_dist`` (``NEIGHBORHOOD_REACHED``),
    iteration cap (``MAX_ITERS``), step below 1e-14 (``FIXED_POINT``).
    A parameter rule whose precondition fails mid-run (the iterate entered
    the t-neighborhood) terminates with ``NEIGHBORHOOD_REACHED``.
    """
    cfg = config
    x = problem.check_point(x0)
    if not math.isfinite(problem.value(x)):
        raise ValueError("x0 must lie in the domain of f")
    anchor = problem.project_solutions(x)
    d0 = float(np.linalg.norm(x - anchor))
    gap0 = problem.value(x) - problem.f_inf

    mf = None
    t_run = cfg.t
    if cfg.regime is Regime.TRPPM_FIXED_LAMBDA:
        try:
            mf = min_displacement_closed_form(problem, cfg.epsilon, cfg.lam)
        except ClosedFormUnavailable:
            query = MinDisplacementQuery(problem, x, cfg.epsilon, cfg.lam, anchor)
            mf = GRID_SAFETY * min_displacement_grid(query, cfg.mf_samples, cfg.mf_seed)
        t_run = cfg.theta * mf
    if cfg.regime is Regime.TRPPM_UNCONSTRAINED and problem.strong_convexity is None:
        raise ValueError("unconstrained envelope requires a strongly convex problem")
    if (
        cfg.regime is Regime.TRPPM_FIXED_T
        and cfg.lambda_rule is LambdaRule.WEAK_SHARP
        and problem.weak_sharp is None
    ):
        raise ValueError(f"{problem.name}: weak-sharpness constants unavailable")

    stop = cfg.default_stop_dist
    mu = problem.strong_convexity
    f_inf = problem.f_inf
    terminal_t = INF if cfg.regime is Regime.PPM else t_run

    records = []
    env = gap0
    k = 0
    while True:
        gap = problem.value(x) - f_inf
        proj = problem.project_solutions(x)
        dist = float(np.linalg.norm(x - proj))
        env_k = _record_envelope(cfg, gap0, d0, k, env)
        if dist == 0.0:
            records.append(IterateRecord(k, x, gap, dist, 0.0, False, 0.0, terminal_t, 1.0, env_k))
            reason = Termination.FIXED_POINT
            break
        if dist <= stop:
            records.append(IterateRecord(k, x, gap, dist, 0.0, False, 0.0, terminal_t, 1.0, env_k))
            reason = Termination.NEIGHBORHOOD_REACHED
            break
        if k >= cfg.max_iters:
            records.append(IterateRecord(k, x, gap, dist, 0.0, False, 0.0, terminal_t, 1.0, env_k))
            reason = Termination.MAX_ITERS
            break
        try:
            lam_k, t_k = _choose_parameters(problem, x, cfg, t_run)
        except PreconditionError:
            records.append(IterateRecord(k, x, gap, dist, 0.0, False, 0.0, terminal_t, 1.0, env_k))
            reason = Termination.NEIGHBORHOOD_REACHED
            break
        if math.isinf(t_k):
            u = problem.prox(lam_k, x)
            active = False
        else:
            res = step_trppm(problem, x, lam_k, t_k)
            u = res.point
            active = res.active
        step_len = float(np.linalg.norm(u - x))
        if step_len < STEP_FLOOR:
            records.append(
                IterateRecord(k, x, gap, dist, step_len, active, lam_k, t_k, 1.0, env_k)
            )
            reason = Termination.FIXED_POINT
            break
        r_next = float(np.linalg.norm(u - anchor))
        q_k = 0.0 if r_next == 0.0 else 1.0 / (1.0 + step_len / r_next)
        records.append(
            IterateRecord(k, x, gap, dist, step_len, active, lam_k, t_k, q_k, env_k)
        )
        env = env / _envelope_factor(cfg, d0, lam_k, t_k, mu)
        x = u
        k += 1

    return Trace(problem, cfg, records, reason, anchor, d0, gap0, mf)


def _record_envelope(cfg, gap0, d0, k, env):
    if cfg.regime is Regime.PPM:
        if k == 0:
            return gap0
        # O(1/k) bound, capped by gap0 so the envelope is non-increasing
        return min(gap0, d0 * d0 * cfg.lam / (2.0 * k))
    return env


def empirical_rate(trace, window, quantity="dist", basis="log_k"):
    """Least-squares slope of ``log(quantity)`` over an iteration window.

    ``basis = "log_k"`` regresses against ``log k`` (power-law rate);
    ``basis = "k"`` regresses against ``k`` (geometric rate). All values in
    the window must be positive.
    """
    if quantity not in ("dist", "f_gap", "step_len"):
        raise ValueError(f"unsupported quantity {quantity!r}")
    if basis not in ("log_k", "k"):
        raise ValueError(f"unsupported basis {basis!r}")
    k_lo, k_hi = int(window[0]), int(window[1])
    recs = [r for r in trace.records if k_lo <= r.k <= k_hi]
    if len(recs) < 2:
        raise ValueError(f"window [{k_lo}, {k_hi}] selects fewer than 2 records")
    ks = np.array([r.k for r in recs], dtype=float)
    ys = np.array([getattr(r, quantity) for r in recs], dtype=float)
    if np.any(ys <= 0.0):
        raise ValueError(f"{quantity} must be positive over the window")
    if basis == "log_k":
        if ks[0] < 1:
            raise ValueError("log_k basis requires k >= 1 in the window")
        xs = np.log(ks)
    else:
        xs = ks
    return float(np.polyfit(xs, np.log(ys), 1)[0])


def check_bpm_equivalence(problem, x, lam, t):
    """Compare the ball-minimization step with the regularized one.

    When neither the prox point nor the solution set lies in the ball, the
    two subproblems share their minimizer. Returns ``(agree, discrepancy)``
    with ``agree = discrepancy <= 1e-8``. Raises ``PreconditionError``
    naming whichever exclusion fails.
    """
    x = problem.check_point(x)
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise ValueError("lam must be positive and finite")
    t = float(t)
    if not (t > 0.0 and math.isfinite(t)):
        raise ValueError("t must be positive and finite")
    phi = displacement(problem, lam, x)
    d = problem.dist_to_solutions(x)
    failures = []
    if phi <= t:
        failures.append(f"prox point lies in the ball (displacement {phi:.6g} <= t = {t:.6g})")
    if d <= t:
        failures.append(f"solution set meets the ball (dist {d:.6g} <= t = {t:.6g})")
    if failures:
        raise PreconditionError("; ".join(failures))
    ball_point = brox(problem, x, t).point
    reg_point = tr_prox(SubproblemSpec(problem, x, lam, t)).point
    disc = float(np.linalg.norm(ball_point - reg_point))
    return disc <= EQUIVALENCE_TOL, disc
