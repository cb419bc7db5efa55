"""Verification checks: trace audits and deterministic self-test suites.

Trace checks score a finished solver trace against its theoretical
guarantees (envelope, active steps, admissible weights, per-step
contraction, monotonicity, empirical rate). Suites bundle operator-,
displacement-, rate- and equivalence-level checks over a fixed problem set
with a seeded generator, so a given seed always yields byte-identical
reports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .displacement import (
    MinDisplacementQuery,
    critical_lambda,
    displacement,
    min_displacement_grid,
    weak_sharp_lambda,
)
from .errors import ConfigError, PreconditionError
from .problems import (
    IndicatorBall,
    IndicatorBox,
    Quadratic,
    Quartic1D,
    ScaledAbs,
    SharpNorm,
)
from .prox import SubproblemSpec, brox, prox_zero, tr_prox
from .solvers import (
    INF,
    IterateRecord,
    LambdaRule,
    Regime,
    SolverConfig,
    Termination,
    Trace,
    check_bpm_equivalence,
    empirical_rate,
    run,
)

SUITE_NAMES = ("operators", "displacement", "rates", "equivalence")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    bound: float
    tol: float
    detail: str = ""


@dataclass
class VerificationReport:
    suite: str
    seed: int
    checks: List[CheckResult]

    @property
    def overall(self):
        return all(c.passed for c in self.checks)

    def render(self):
        out = [f"seed: {self.seed}", f"suite: {self.suite}"]
        for c in self.checks:
            line = (
                f"{c.name}: {'PASS' if c.passed else 'FAIL'} "
                f"measured={_fmt(c.measured)} bound={_fmt(c.bound)} tol={_fmt(c.tol)}"
            )
            if c.detail:
                line += f" ({c.detail})"
            out.append(line)
        out.append(f"overall: {'PASS' if self.overall else 'FAIL'}")
        return "\n".join(out) + "\n"


def _fmt(v):
    return format(float(v), ".17g")


# ---------------------------------------------------------------------------
# trace checks


def check_envelope(trace, tol=1e-7):
    """f_gap stays below the recorded theoretical envelope (factor 1 + tol)."""
    worst = 0.0
    for r in trace.records:
        if r.envelope > 0.0:
            worst = max(worst, r.f_gap / r.envelope)
        elif r.f_gap > 0.0:
            worst = math.inf
    return CheckResult("envelope", worst <= 1.0 + tol, worst, 1.0, tol)


def check_active_step(trace, tol=1e-6):
    """Steps taken outside the t-neighborhood hit the ball boundary exactly."""
    worst = 0.0
    inactive = 0
    for r in trace.records[:-1]:
        if not math.isfinite(r.t_k) or r.dist <= r.t_k:
            continue
        worst = max(worst, abs(r.step_len - r.t_k))
        if not r.active:
            inactive += 1
    passed = worst <= tol and inactive == 0
    detail = f"{inactive} steps not flagged active" if inactive else ""
    return CheckResult("active_step", passed, worst, 0.0, tol, detail)


def check_lambda_admissible(trace, tol=1e-6):
    """Each chosen weight keeps the displacement at least t_k."""
    worst = -math.inf
    count = 0
    for r in trace.records[:-1]:
        if not math.isfinite(r.t_k) or r.dist <= r.t_k:
            continue
        phi = displacement(trace.problem, r.lambda_k, r.x)
        worst = max(worst, r.t_k - phi)
        count += 1
    if count == 0:
        return CheckResult("lambda_admissible", True, 0.0, 0.0, tol, "no applicable steps")
    return CheckResult("lambda_admissible", worst <= tol, worst, 0.0, tol)


def check_per_step_factor(trace, tol=1e-9):
    """Consecutive f_gap ratios respect the regime's contraction factor."""
    cfg = trace.config
    regime = cfg.regime
    if regime in (Regime.TRPPM_FIXED_T, Regime.BPM):
        bound = 1.0 / (1.0 + cfg.t / trace.d0)
        neighborhood = cfg.t
    elif regime is Regime.TRPPM_FIXED_LAMBDA:
        t_run = cfg.theta * trace.mf
        bound = 1.0 / (1.0 + t_run / trace.d0)
        neighborhood = cfg.epsilon
    elif regime is Regime.TRPPM_UNCONSTRAINED:
        mu = trace.problem.strong_convexity
        bound = 1.0 / (1.0 + min(cfg.t / trace.d0, mu / cfg.lam))
        neighborhood = None
    else:
        raise ConfigError("per_step_factor does not apply to the PPM regime")
    worst = 0.0
    for a, b in zip(trace.records, trace.records[1:]):
        if a.f_gap <= 0.0:
            continue
        if neighborhood is not None and a.dist <= neighborhood:
            continue
        worst = max(worst, b.f_gap / a.f_gap)
    return CheckResult("per_step_factor", worst <= bound + tol, worst, bound, tol)


def check_fejer(trace, tol=1e-9):
    """Distance to the solution set never increases."""
    worst = 0.0
    for a, b in zip(trace.records, trace.records[1:]):
        worst = max(worst, b.dist - a.dist)
    return CheckResult("fejer", worst <= tol, worst, 0.0, tol)


def check_descent(trace, tol=1e-9):
    """f_gap contracts at least by the recorded per-step factor q_k."""
    worst = -math.inf
    for a, b in zip(trace.records, trace.records[1:]):
        worst = max(worst, b.f_gap - a.q_k * a.f_gap)
    if worst == -math.inf:
        worst = 0.0
    return CheckResult("descent", worst <= tol, worst, 0.0, tol)


def check_step_monotone(trace, tol=1e-9):
    """Step lengths are non-increasing (classical proximal iterations)."""
    steps = [r.step_len for r in trace.records[:-1]]
    worst = 0.0
    for a, b in zip(steps, steps[1:]):
        worst = max(worst, b - a)
    return CheckResult("step_monotone", worst <= tol, worst, 0.0, tol)


def check_slope(trace, quantity, basis, window, bounds):
    """Empirical log-log or log-linear rate lies in the stated interval."""
    lo, hi = float(bounds[0]), float(bounds[1])
    slope = empirical_rate(trace, window, quantity=quantity, basis=basis)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return CheckResult(
        "slope",
        lo <= slope <= hi,
        slope,
        mid,
        half,
        f"{quantity} vs {basis} on k in [{int(window[0])}, {int(window[1])}]",
    )


TRACE_CHECKS = {
    "envelope": (check_envelope, {"tol"}),
    "active_step": (check_active_step, {"tol"}),
    "lambda_admissible": (check_lambda_admissible, {"tol"}),
    "per_step_factor": (check_per_step_factor, {"tol"}),
    "fejer": (check_fejer, {"tol"}),
    "descent": (check_descent, {"tol"}),
    "step_monotone": (check_step_monotone, {"tol"}),
    "slope": (check_slope, {"quantity", "basis", "window", "bounds"}),
}

_SLOPE_REQUIRED = {"quantity", "basis", "window", "bounds"}


def evaluate_trace_check(name, trace, params):
    if name not in TRACE_CHECKS:
        known = ", ".join(sorted(TRACE_CHECKS))
        raise ConfigError(f"unknown check {name!r}; known checks: {known}")
    fn, allowed = TRACE_CHECKS[name]
    unknown = set(params) - allowed
    if unknown:
        raise ConfigError(f"check {name}: unknown parameter(s) {sorted(unknown)}")
    if name == "slope":
        missing = _SLOPE_REQUIRED - set(params)
        if missing:
            raise ConfigError(f"check slope: missing parameter(s) {sorted(missing)}")
    return fn(trace, **params)


# ---------------------------------------------------------------------------
# shared suite fixtures


def _random_psd(rng, n, ridge=0.1):
    a = rng.normal(size=(n, n))
    return a.T @ a + ridge * np.eye(n)


def suite_problem_set(rng):
    return [
        Quartic1D(),
        ScaledAbs(1.0),
        ScaledAbs(2.5),
        Quadratic([[1.0]]),
        Quadratic(np.diag([2.0, 1.0])),
        Quadratic(np.diag([2.0, 0.0])),
        Quadratic(_random_psd(rng, 3)),
        IndicatorBox([-1.0, -0.5], [1.0, 2.0]),
        IndicatorBall([0.5, -0.5], 1.5),
        SharpNorm(alpha=2.0, dim=3),
    ]


def _sample_points(problem, rng, n, scale=3.0):
    return scale * rng.normal(size=(n, problem.dim))


def _uniform_ball(rng, dim, n):
    raw = rng.normal(size=(n, dim))
    norms = np.linalg.norm(raw, axis=1)
    norms[norms == 0.0] = 1.0
    radii = rng.uniform(size=n) ** (1.0 / dim)
    return raw / norms[:, None] * radii[:, None]


def _far_point(problem, rng, min_dist=0.5, scale=4.0, tries=64):
    for _ in range(tries):
        x = scale * rng.normal(size=problem.dim)
        if problem.dist_to_solutions(x) >= min_dist:
            return x
    raise RuntimeError("could not sample a point far from the solution set")


# ---------------------------------------------------------------------------
# operators suite


def _quad_objective_batch(p, points, lam, x):
    vals = 0.5 * np.sum((points @ p.matrix) * points, axis=1)
    return vals + 0.5 * lam * np.sum((points - x) ** 2, axis=1)


def polar_grid_minimize(p, x, lam, t, stages=3, n_r=100, n_theta=100):
    """Zooming polar-grid enumeration of the ball subproblem (2-d quadratics).

    Derivative-free oracle independent of the radius-equation solver: each
    stage scans an (r, theta) grid and the next stage zooms into one cell
    around the best point.
    """
    r_lo, r_hi = 0.0, t
    th_lo, th_hi = 0.0, 2.0 * math.pi
    best = None
    for stage in range(stages):
        rs = np.linspace(r_lo, r_hi, n_r)
        ths = np.linspace(th_lo, th_hi, n_theta, endpoint=(stage > 0))
        grid_r, grid_th = np.meshgrid(rs, ths, indexing="ij")
        pts = np.stack(
            [
                x[0] + grid_r.ravel() * np.cos(grid_th.ravel()),
                x[1] + grid_r.ravel() * np.sin(grid_th.ravel()),
            ],
            axis=1,
        )
        vals = _quad_objective_batch(p, pts, lam, x)
        idx = int(np.argmin(vals))
        best = pts[idx]
        i_r, i_th = divmod(idx, n_theta)
        dr = rs[1] - rs[0]
        dth = ths[1] - ths[0]
        r_lo = max(0.0, rs[i_r] - dr)
        r_hi = min(t, rs[i_r] + dr)
        th_lo = ths[i_th] - dth
        th_hi = ths[i_th] + dth
    return best


def _check_nonexpansive(problems, rng):
    worst = 0.0
    for p in problems:
        for lam in (0.1, 1.0, 10.0):
            xs = _sample_points(p, rng, 100)
            ys = _sample_points(p, rng, 100)
            for xv, yv in zip(xs, ys):
                gap = float(
                    np.linalg.norm(p.prox(lam, xv) - p.prox(lam, yv))
                    - np.linalg.norm(xv - yv)
                )
                worst = max(worst, gap)
    return CheckResult("prox_nonexpansive", worst <= 1e-9, worst, 0.0, 1e-9)


def _check_prox_fixed_points(problems, rng):
    worst = 0.0
    moved = math.inf
    for p in problems:
        for xv in _sample_points(p, rng, 20):
            sol = p.project_solutions(xv)
            for lam in (0.1, 1.0, 10.0):
                worst = max(worst, float(np.linalg.norm(p.prox(lam, sol) - sol)))
            if p.dist_to_solutions(xv) >= 0.5:
                moved = min(moved, float(np.linalg.norm(p.prox(1.0, xv) - xv)))
    passed = worst <= 1e-10 and moved > 0.0
    detail = "" if moved > 0.0 else "prox fixed a non-solution point"
    return CheckResult("prox_fixed_points", passed, worst, 0.0, 1e-10, detail)


def _check_prox_zero(problems, rng):
    worst = 0.0
    for p in problems:
        for xv in _sample_points(p, rng, 20):
            worst = max(
                worst, float(np.linalg.norm(prox_zero(p, xv) - p.project_solutions(xv)))
            )
    return CheckResult("prox_zero_projection", worst <= 0.0, worst, 0.0, 0.0)


def _check_boundary(problems, rng):
    worst = 0.0
    for p in problems:
        for _ in range(10):
            x = _far_point(p, rng)
            t = 0.5 * p.dist_to_solutions(x)
            res = brox(p, x, t)
            if not res.active:
                worst = math.inf
                continue
            dev = abs(float(np.linalg.norm(res.point - x)) - t)
            worst = max(worst, dev / max(1.0, t))
    return CheckResult("boundary_on_sphere", worst <= 1e-8, worst, 0.0, 1e-8)


def _check_interior(problems, rng):
    worst = 0.0
    for p in problems:
        for _ in range(10):
            x = _sample_points(p, rng, 1)[0]
            lam = 1.0
            phi = displacement(p, lam, x)
            t = 2.0 * phi + 0.1
            res = tr_prox(SubproblemSpec(p, x, lam, t))
            dev = float(np.linalg.norm(res.point - p.prox(lam, x)))
            if res.active:
                dev = math.inf
            worst = max(worst, dev)
    return CheckResult("interior_matches_prox", worst <= 0.0, worst, 0.0, 0.0)


def _active_cases(problems, rng, per_problem=6):
    cases = []
    for p in problems:
        for _ in range(per_problem):
            x = _far_point(p, rng)
            lam = float(rng.uniform(0.2, 2.0))
            phi = displacement(p, lam, x)
            if phi <= 1e-9:
                continue
            t = 0.5 * min(phi, p.dist_to_solutions(x))
            res = tr_prox(SubproblemSpec(p, x, lam, t))
            if res.active:
                cases.append((p, x, lam, t, res))
    return cases


def _check_certificate_gradient(cases):
    worst = 0.0
    applicable = 0
    for p, x, lam, t, res in cases:
        grad_fn = getattr(p, "gradient", None)
        if res.multiplier is None or grad_fn is None:
            continue
        g = grad_fn(res.point)
        if g is None:
            continue
        applicable += 1
        lhs = g - (res.multiplier + lam) * (x - res.point)
        worst = max(worst, float(np.linalg.norm(lhs)))
    detail = f"{applicable} differentiable boundary cases"
    return CheckResult("certificate_stationarity", worst <= 1e-6, worst, 0.0, 1e-6, detail)


def _check_certificate_descent(cases, rng):
    worst = -math.inf
    for p, x, lam, t, res in cases:
        if res.multiplier is None:
            continue
        total = res.multiplier + lam
        fu = p.value(res.point)
        ys = _sample_points(p, rng, 64, scale=2.0)
        for yv in ys:
            fy = p.value(yv)
            if math.isinf(fy):
                continue
            lhs = fy - fu
            rhs = total * float(np.dot(x - res.point, yv - res.point))
            worst = max(worst, rhs - lhs)
    if worst == -math.inf:
        worst = 0.0
    return CheckResult("certificate_descent", worst <= 1e-6, worst, 0.0, 1e-6)


def _check_subproblem_optimality(problems, rng):
    worst = 0.0
    for p in problems:
        for _ in range(6):
            x = _sample_points(p, rng, 1)[0]
            lam = float(rng.uniform(0.0, 2.0))
            t = float(rng.uniform(0.3, 2.0))
            res = tr_prox(SubproblemSpec(p, x, lam, t))
            candidates = x + t * _uniform_ball(rng, p.dim, 64)
            for z in candidates:
                dz = float(np.linalg.norm(z - x))
                obj = p.value(z) + 0.5 * lam * dz * dz
                if math.isinf(res.objective):
                    if math.isinf(obj):
                        continue
                    worst = math.inf
                    continue
                worst = max(worst, res.objective - obj)
    return CheckResult("subproblem_optimality", worst <= 1e-7, worst, 0.0, 1e-7)


def _check_radius_equation_oracle(rng):
    quads = [
        Quadratic(np.diag([2.0, 1.0])),
        Quadratic(np.diag([2.0, 0.0])),
        Quadratic(_random_psd(rng, 2, ridge=0.2)),
    ]
    worst_pt = 0.0
    worst_obj = 0.0
    for p in quads:
        for _ in range(3):
            x = _far_point(p, rng, min_dist=1.0)
            lam = float(rng.uniform(0.0, 1.5))
            phi = displacement(p, lam, x) if lam > 0 else p.dist_to_solutions(x)
            if phi <= 0.2:
                continue
            t = 0.5 * phi
            res = tr_prox(SubproblemSpec(p, x, lam, t))
            ref = polar_grid_minimize(p, x, lam, t)
            worst_pt = max(worst_pt, float(np.linalg.norm(res.point - ref)))
            ref_obj = _quad_objective_batch(p, ref[None, :], lam, x)[0]
            worst_obj = max(worst_obj, res.objective - float(ref_obj))
    return [
        CheckResult("radius_equation_point", worst_pt <= 1e-3, worst_pt, 0.0, 1e-3),
        CheckResult("radius_equation_objective", worst_obj <= 1e-6, worst_obj, 0.0, 1e-6),
    ]


def _check_cubic_residual(rng):
    p = Quartic1D()
    worst = 0.0
    for _ in range(50):
        x = float(rng.uniform(-30.0, 30.0))
        lam = float(10.0 ** rng.uniform(-6.0, 6.0))
        z = float(p.prox(lam, np.array([x]))[0])
        resid = abs(z ** 3 + lam * z - lam * x)
        worst = max(worst, resid / (max(1.0, abs(x)) * max(1.0, lam)))
    return CheckResult("cubic_root_residual", worst <= 1e-12, worst, 0.0, 1e-12)


def suite_operators(seed):
    rng = np.random.default_rng(seed)
    problems = suite_problem_set(rng)
    checks = [
        _check_nonexpansive(problems, rng),
        _check_prox_fixed_points(problems, rng),
        _check_prox_zero(problems, rng),
        _check_boundary(problems, rng),
        _check_interior(problems, rng),
    ]
    cases = _active_cases(problems, rng)
    checks.append(_check_certificate_gradient(cases))
    checks.append(_check_certificate_descent(cases, rng))
    checks.append(_check_subproblem_optimality(problems, rng))
    checks.extend(_check_radius_equation_oracle(rng))
    checks.append(_check_cubic_residual(rng))
    return checks


# ---------------------------------------------------------------------------
# displacement suite


def _domain_point(p, x):
    return p.project_solutions(x) if isinstance(p, (IndicatorBox, IndicatorBall)) else x


def suite_displacement(seed):
    rng = np.random.default_rng(seed)
    problems = suite_problem_set(rng)
    lam_grid = np.logspace(-3.0, 3.0, 50)

    worst_range = 0.0
    worst_mono = 0.0
    worst_hi_limit = 0.0
    worst_lo_limit = 0.0
    worst_lip = 0.0
    for p in problems:
        xs = _sample_points(p, rng, 20)
        for xv in xs:
            d = p.dist_to_solutions(xv)
            prev = math.inf
            for lam in lam_grid:
                phi = displacement(p, lam, xv)
                worst_range = max(worst_range, phi - d, -phi)
                worst_mono = max(worst_mono, phi - prev)
                prev = phi
            dom = _domain_point(p, xv)
            worst_hi_limit = max(worst_hi_limit, displacement(p, 1e12, dom))
            # the lam -> 0 limit is probed at unit scale: the finite-lam
            # residue grows with ||x|| (cube-root law for the quartic)
            nrm = float(np.linalg.norm(xv))
            small = xv if nrm <= 0.5 else xv * (0.5 / nrm)
            worst_lo_limit = max(
                worst_lo_limit,
                abs(displacement(p, 1e-12, small) - p.dist_to_solutions(small)),
            )
        ys = _sample_points(p, rng, 20)
        for xv, yv in zip(xs, ys):
            for lam in (0.1, 1.0, 10.0):
                gap = abs(displacement(p, lam, xv) - displacement(p, lam, yv))
                worst_lip = max(worst_lip, gap - 2.0 * float(np.linalg.norm(xv - yv)))

    checks = [
        CheckResult("displacement_range", worst_range <= 1e-12, worst_range, 0.0, 1e-12),
        CheckResult("displacement_monotone", worst_mono <= 1e-9, worst_mono, 0.0, 1e-9),
        CheckResult("displacement_limit_high", worst_hi_limit <= 1e-4, worst_hi_limit, 0.0, 1e-4),
        CheckResult("displacement_limit_low", worst_lo_limit <= 1e-4, worst_lo_limit, 0.0, 1e-4),
        CheckResult("displacement_lipschitz", worst_lip <= 1e-9, worst_lip, 0.0, 1e-9),
    ]

    worst_crit = -math.inf
    worst_ws = -math.inf
    for p in problems:
        for _ in range(10):
            x = _far_point(p, rng)
            t = float(rng.uniform(0.2, 0.8)) * p.dist_to_solutions(x)
            lam_hat = critical_lambda(p, x, t)
            worst_crit = max(worst_crit, t - displacement(p, lam_hat, x))
            if p.weak_sharp is not None:
                lam_ws = weak_sharp_lambda(p, x, t)
                worst_ws = max(worst_ws, t - displacement(p, lam_ws, x))
    checks.append(
        CheckResult("critical_lambda_admissible", worst_crit <= 1e-9, worst_crit, 0.0, 1e-9)
    )
    checks.append(
        CheckResult("weak_sharp_lambda_admissible", worst_ws <= 1e-9, worst_ws, 0.0, 1e-9)
    )

    # min-displacement estimates: positive, monotone in lam and epsilon
    geometries = [
        (ScaledAbs(1.0), np.array([5.0])),
        (Quadratic(np.diag([2.0, 0.0])), np.array([3.0, 3.0])),
        (IndicatorBall([0.0, 0.0], 1.0), np.array([3.0, 0.0])),
    ]
    eps_grid = (0.4, 0.7, 1.0)
    lam_grid_mf = (0.5, 2.0, 8.0)
    worst_pos = math.inf
    worst_mf_mono = 0.0
    for p, x0 in geometries:
        table = {}
        for eps in eps_grid:
            for lam in lam_grid_mf:
                q = MinDisplacementQuery(p, x0, eps, lam)
                table[(eps, lam)] = min_displacement_grid(q, samples=2000)
        worst_pos = min(worst_pos, min(table.values()))
        for eps in eps_grid:
            for la, lb in zip(lam_grid_mf, lam_grid_mf[1:]):
                worst_mf_mono = max(worst_mf_mono, table[(eps, lb)] - table[(eps, la)])
        for lam in lam_grid_mf:
            for ea, eb in zip(eps_grid, eps_grid[1:]):
                worst_mf_mono = max(worst_mf_mono, table[(ea, lam)] - table[(eb, lam)])
    checks.append(
        CheckResult("min_displacement_positive", worst_pos > 0.0, worst_pos, 0.0, 0.0)
    )
    checks.append(
        CheckResult("min_displacement_monotone", worst_mf_mono <= 1e-12, worst_mf_mono, 0.0, 1e-12)
    )
    return checks


# ---------------------------------------------------------------------------
# rates suite


def _trace_checks(prefix, trace, names, **overrides):
    out = []
    for name in names:
        fn, _ = TRACE_CHECKS[name]
        params = overrides.get(name, {})
        res = fn(trace, **params)
        out.append(
            CheckResult(f"{prefix}_{res.name}", res.passed, res.measured, res.bound, res.tol, res.detail)
        )
    return out


def suite_rates(seed):
    checks = []

    quartic = Quartic1D()
    ppm = run(
        quartic,
        np.array([10.0]),
        SolverConfig(regime=Regime.PPM, lam=1.0, max_iters=2000),
    )
    checks.extend(
        _trace_checks("ppm_quartic", ppm, ["envelope", "fejer", "descent", "step_monotone"])
    )
    slope = empirical_rate(ppm, (100, 2000), quantity="dist", basis="log_k")
    checks.append(
        CheckResult("ppm_quartic_slope", -0.7 <= slope <= -0.3, slope, -0.5, 0.2)
    )

    fixed_t = run(
        quartic,
        np.array([10.0]),
        SolverConfig(
            regime=Regime.TRPPM_FIXED_T, t=0.5, lambda_rule=LambdaRule.BISECTION, max_iters=100
        ),
    )
    checks.extend(
        _trace_checks(
            "fixed_t_quartic",
            fixed_t,
            ["envelope", "active_step", "lambda_admissible", "fejer", "descent", "per_step_factor"],
        )
    )

    quad = Quadratic(np.diag([2.0, 1.0]))
    fixed_t_quad = run(
        quad,
        np.array([6.0, 8.0]),
        SolverConfig(
            regime=Regime.TRPPM_FIXED_T, t=0.5, lambda_rule=LambdaRule.BISECTION, max_iters=100
        ),
    )
    checks.extend(
        _trace_checks(
            "fixed_t_quadratic",
            fixed_t_quad,
            ["envelope", "active_step", "lambda_admissible", "fejer", "descent"],
        )
    )

    sharp = ScaledAbs(1.0)
    ws = run(
        sharp,
        np.array([20.0]),
        SolverConfig(
            regime=Regime.TRPPM_FIXED_T, t=1.0, lambda_rule=LambdaRule.WEAK_SHARP, max_iters=100
        ),
    )
    checks.extend(
        _trace_checks(
            "weak_sharp_abs", ws, ["envelope", "active_step", "lambda_admissible", "descent"]
        )
    )

    quad2 = Quadratic(np.diag([2.0, 0.5]))
    fixed_lam = run(
        quad2,
        np.array([2.0, 1.0]),
        SolverConfig(
            regime=Regime.TRPPM_FIXED_LAMBDA, lam=1.0, epsilon=0.1, theta=1.0, max_iters=2000
        ),
    )
    checks.extend(
        _trace_checks(
            "fixed_lambda_quadratic",
            fixed_lam,
            ["envelope", "per_step_factor", "fejer", "descent"],
        )
    )

    strong = Quadratic(np.eye(2))
    sc = run(
        strong,
        np.array([3.0, 4.0]),
        SolverConfig(regime=Regime.TRPPM_UNCONSTRAINED, lam=2.0, max_iters=200),
    )
    checks.extend(
        _trace_checks("strongly_convex", sc, ["envelope", "per_step_factor", "descent"])
    )

    # regime identities: shared step path means bitwise / near-bitwise equality
    ppm_quad = run(
        strong,
        np.array([3.0, 4.0]),
        SolverConfig(regime=Regime.PPM, lam=2.0, max_iters=200),
    )
    ident_ppm = _max_record_gap(ppm_quad, sc)
    checks.append(CheckResult("identity_ppm_unconstrained", ident_ppm == 0.0, ident_ppm, 0.0, 0.0))

    ball = run(
        quad,
        np.array([6.0, 8.0]),
        SolverConfig(regime=Regime.BPM, t=0.5, lam=0.0, max_iters=100, stop_dist=0.0),
    )
    zero_lam = run(
        quad,
        np.array([6.0, 8.0]),
        SolverConfig(
            regime=Regime.TRPPM_FIXED_T,
            t=0.5,
            lam=0.0,
            lambda_rule=LambdaRule.CONSTANT,
            max_iters=100,
            stop_dist=0.0,
        ),
    )
    ident_bpm = _max_record_gap(ball, zero_lam)
    checks.append(CheckResult("identity_bpm_zero_lambda", ident_bpm <= 1e-10, ident_bpm, 0.0, 1e-10))

    # synthetic sequences pin the rate estimator itself
    geo = _synthetic_trace(gaps=[0.5 ** k for k in range(1, 40)])
    geo_slope = empirical_rate(geo, (1, 39), quantity="f_gap", basis="k")
    geo_err = abs(geo_slope - math.log(0.5))
    checks.append(CheckResult("rate_estimator_geometric", geo_err <= 1e-9, geo_err, 0.0, 1e-9))
    power = _synthetic_trace(gaps=[float(k) ** -2.0 for k in range(1, 40)])
    pow_slope = empirical_rate(power, (1, 39), quantity="f_gap", basis="log_k")
    pow_err = abs(pow_slope + 2.0)
    checks.append(CheckResult("rate_estimator_power", pow_err <= 1e-9, pow_err, 0.0, 1e-9))
    return checks


def _max_record_gap(tr_a, tr_b):
    if len(tr_a.records) != len(tr_b.records):
        return math.inf
    worst = 0.0
    for a, b in zip(tr_a.records, tr_b.records):
        worst = max(worst, float(np.max(np.abs(a.x - b.x), initial=0.0)))
    return worst


def _synthetic_trace(gaps):
    cfg = SolverConfig(regime=Regime.PPM, lam=1.0)
    records = [
        IterateRecord(k + 1, np.zeros(1), g, g, 0.0, False, 1.0, INF, 1.0, g)
        for k, g in enumerate(gaps)
    ]
    return Trace(
        Quartic1D(), cfg, records, Termination.MAX_ITERS, np.zeros(1), 1.0, gaps[0]
    )


# ---------------------------------------------------------------------------
# equivalence suite


def suite_equivalence(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    count = 0
    for _ in range(20):
        p = Quadratic(_random_psd(rng, 2, ridge=0.05))
        x = _far_point(p, rng, min_dist=1.0)
        t = 0.3 * p.dist_to_solutions(x)
        lam = 0.5 * critical_lambda(p, x, t)
        agree, disc = check_bpm_equivalence(p, x, lam, t)
        worst = max(worst, disc)
        count += 1
    checks = [
        CheckResult(
            "bpm_equivalence_quadratic", worst <= 1e-8, worst, 0.0, 1e-8, f"{count} instances"
        )
    ]

    extra = 0.0
    for p, x0 in ((ScaledAbs(1.0), np.array([3.0])), (SharpNorm(2.0, 3), np.array([2.0, -2.0, 1.0]))):
        t = 0.4 * p.dist_to_solutions(x0)
        lam = 0.5 * critical_lambda(p, x0, t)
        _, disc = check_bpm_equivalence(p, x0, lam, t)
        extra = max(extra, disc)
    checks.append(CheckResult("bpm_equivalence_sharp", extra <= 1e-8, extra, 0.0, 1e-8))

    # precondition diagnostics must fire when an exclusion fails
    p = Quadratic(np.diag([1.0]))
    raised = 0.0
    try:
        check_bpm_equivalence(p, np.array([2.0]), 1.0, 3.0)
    except PreconditionError:
        raised += 1.0
    try:
        check_bpm_equivalence(p, np.array([2.0]), 10.0, 1.0)
    except PreconditionError:
        raised += 1.0
    checks.append(
        CheckResult("equivalence_preconditions", raised == 2.0, raised, 2.0, 0.0)
    )
    return checks


# ---------------------------------------------------------------------------


def run_suite(name, seed=42):
    """Run one named suite (or ``all``) and return its report."""
    seed = int(seed)
    if name == "all":
        checks = []
        for suite in SUITE_NAMES:
            checks.extend(_SUITES[suite](seed))
        return VerificationReport("all", seed, checks)
    if name not in _SUITES:
        known = ", ".join(SUITE_NAMES + ("all",))
        raise ConfigError(f"unknown suite {name!r}; known suites: {known}")
    return VerificationReport(name, seed, _SUITES[name](seed))


_SUITES = {
    "operators": suite_operators,
    "displacement": suite_displacement,
    "rates": suite_rates,
    "equivalence": suite_equivalence,
}
