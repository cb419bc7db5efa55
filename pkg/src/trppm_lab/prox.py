"""Exact solvers for the ball-constrained proximal subproblem.

``tr_prox`` solves ``argmin_{z in B_t(x)} f(z) + lam/2 ||z - x||^2`` for
every catalog problem. ``lam = 0`` (the pure ball-minimization step) and
``t = inf`` (the classical prox) are both admitted; ``lam = 0, t = inf``
falls back to the projection onto the solution set.

When the ball constraint is active the result carries a multiplier
``c >= 0`` such that ``(c + lam) * (x - z)`` is a subgradient of ``f`` at
``z``; it is ``None`` when ``f`` is nondifferentiable at ``z`` (kinks,
indicator boundaries).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericalFailure
from .problems import (
    IndicatorBall,
    IndicatorBox,
    Problem,
    Quadratic,
    Quartic1D,
    ScaledAbs,
    SharpNorm,
)

_RADIUS_RESIDUAL_RTOL = 1e-13
_MAX_ROOT_ITERS = 200


@dataclass(frozen=True)
class ProxResult:
    """Solution of one ball-constrained proximal subproblem.

    ``active`` means the ball constraint is tight: ``||point - center||``
    equals the radius up to ``1e-8 * max(1, radius)``. ``residual`` is the
    boundary-equation residual (0 for closed-form branches). ``unique`` is
    False when the subproblem's argmin is a set and ``point`` is a
    representative (projection tie-breaks).
    """

    point: np.ndarray
    active: bool
    multiplier: Optional[float]
    objective: float
    residual: float
    unique: bool = True


@dataclass(frozen=True)
class SubproblemSpec:
    """Problem, center, regularization weight and trust radius."""

    problem: Problem
    center: np.ndarray
    lam: float
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", self.problem.check_point(self.center))
        lam = float(self.lam)
        if not (lam >= 0.0 and math.isfinite(lam)):
            raise ValueError("lam must be finite and nonnegative")
        object.__setattr__(self, "lam", lam)
        radius = float(self.radius)
        if not radius > 0.0:
            raise ValueError("radius must be positive (inf allowed)")
        object.__setattr__(self, "radius", radius)


def prox(problem, lam, x):
    """Exact proximal map ``argmin_z f(z) + lam/2 ||z - x||^2``, lam > 0."""
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise ValueError("prox requires finite lam > 0; use prox_zero for lam == 0")
    return problem.prox(lam, problem.check_point(x))


def prox_zero(problem, x):
    """The lam = 0 convention: projection onto the solution set."""
    return problem.project_solutions(problem.check_point(x))


def _objective(problem, z, lam, x):
    d = float(np.linalg.norm(z - x))
    return problem.value(z) + 0.5 * lam * d * d


def tr_prox(spec):
    """Solve the trust-region proximal subproblem described by ``spec``."""
    p, x, lam, t = spec.problem, spec.center, spec.lam, spec.radius
    if math.isinf(t):
        u = p.prox(lam, x) if lam > 0.0 else p.project_solutions(x)
        unique = lam > 0.0 or p.solution_set_is_singleton
        return ProxResult(u, False, 0.0, _objective(p, u, lam, x), 0.0, unique)
    u = p.prox(lam, x) if lam > 0.0 else p.project_solutions(x)
    if float(np.linalg.norm(u - x)) <= t:
        unique = lam > 0.0 or p.solution_set_is_singleton
        return ProxResult(u, False, 0.0, _objective(p, u, lam, x), 0.0, unique)
    return _boundary_solve(p, x, lam, t)


def brox(problem, x, t):
    """Minimize ``f`` over the ball B_t(x) (the lam = 0 subproblem)."""
    return tr_prox(SubproblemSpec(problem, x, 0.0, t))


def _boundary_solve(p, x, lam, t):
    if isinstance(p, Quadratic):
        return _boundary_quadratic(p, x, lam, t)
    if isinstance(p, (Quartic1D, ScaledAbs)):
        return _boundary_clamp_1d(p, x, lam, t)
    if isinstance(p, (IndicatorBox, IndicatorBall)):
        return _boundary_indicator(p, x, lam, t)
    if isinstance(p, SharpNorm):
        return _boundary_sharp_norm(p, x, lam, t)
    raise NotImplementedError(
        f"no boundary solver for problem kind {type(p).__name__}"
    )


def _solve_radius_equation(sigma, w2, t, nu_lo):
    # Find nu > nu_lo with g(nu) = ||x - z(nu)|| - t = 0 where, in the
    # eigenbasis, (x - z(nu))_i = sigma_i/(sigma_i + nu) * w_i. g is strictly
    # decreasing; the caller guarantees g(nu_lo) > 0. Safeguarded Newton with
    # a bisection fallback inside the bracket.
    ftol = _RADIUS_RESIDUAL_RTOL * max(1.0, t)

    def eval_g(nu):
        ratios = sigma / (sigma + nu)
        terms = ratios * ratios * w2
        val = math.sqrt(float(np.sum(terms)))
        slope = -float(np.sum(terms / (sigma + nu))) / val if val > 0.0 else 0.0
        return val - t, slope

    lo = nu_lo
    wnorm = math.sqrt(float(np.sum(w2)))
    hi = max(float(sigma.max()) * max(wnorm / t - 1.0, 0.0) + 1.0, lo + 1.0)
    g_hi, _ = eval_g(hi)
    for _ in range(_MAX_ROOT_ITERS):
        if g_hi < 0.0:
            break
        lo = hi
        hi = 2.0 * hi + 1.0
        g_hi, _ = eval_g(hi)
    else:
        raise NumericalFailure("radius-equation bracket not found", residual=g_hi)

    nu = 0.5 * (lo + hi)
    g = None
    for _ in range(_MAX_ROOT_ITERS):
        g, slope = eval_g(nu)
        if abs(g) <= ftol:
            return nu
        if g > 0.0:
            lo = nu
        else:
            hi = nu
        candidate = nu - g / slope if slope != 0.0 else None
        nu = candidate if candidate is not None and lo < candidate < hi else 0.5 * (lo + hi)
    raise NumericalFailure("radius equation did not converge", residual=abs(g))


def _boundary_quadratic(p, x, lam, t):
    w = p.basis.T @ x
    nu = _solve_radius_equation(p.sigma, w * w, t, max(lam, 0.0))
    z = p.basis @ ((nu / (p.sigma + nu)) * w)
    c = max(nu - lam, 0.0)
    dz = float(np.linalg.norm(z - x))
    obj = p.value(z) + 0.5 * lam * dz * dz
    return ProxResult(z, True, c, obj, abs(dz - t), True)


def _boundary_clamp_1d(p, x, lam, t):
    # 1-d convex objective: the constrained minimizer is the unconstrained
    # one clamped to [x - t, x + t].
    u = p.prox(lam, x) if lam > 0.0 else p.project_solutions(x)
    z = np.clip(u, x - t, x + t)
    grad = p.gradient(z)
    mult = None if grad is None else max(abs(float(grad[0])) / t - lam, 0.0)
    dz = float(np.linalg.norm(z - x))
    obj = p.value(z) + 0.5 * lam * dz * dz
    return ProxResult(z, True, mult, obj, abs(dz - t), True)


def _boundary_indicator(p, x, lam, t):
    # Feasible set does not meet the ball: every ball point has value +inf.
    # Return the ball point nearest the feasible set as the representative.
    proj = p.project_solutions(x)
    d = float(np.linalg.norm(proj - x))
    z = x + (proj - x) * (t / d)
    dz = float(np.linalg.norm(z - x))
    obj = p.value(z) + 0.5 * lam * dz * dz
    return ProxResult(z, True, None, obj, abs(dz - t), False)


def _boundary_sharp_norm(p, x, lam, t):
    nx = float(np.linalg.norm(x))
    z = x * (1.0 - t / nx)
    c = max(p.alpha / t - lam, 0.0)
    dz = float(np.linalg.norm(z - x))
    obj = p.value(z) + 0.5 * lam * dz * dz
    return ProxResult(z, True, c, obj, abs(dz - t), True)
