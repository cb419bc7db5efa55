"""Displacement analysis for the proximal map.

The displacement ``||x - prox_{f/lam}(x)||`` as a function of ``lam`` is
continuous, non-increasing, equals ``dist(x, X*)`` at ``lam = 0`` (by the
projection convention) and decays to 0 as ``lam`` grows. The routines here
invert it (largest ``lam`` keeping the displacement at least ``t``), bound
it from weak-sharpness constants, and lower-bound it uniformly over the
region of points at least ``eps`` away from the solution set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import (
    ClosedFormUnavailable,
    InfeasibleRegionError,
    NumericalFailure,
    PreconditionError,
)
from .problems import IndicatorBall, IndicatorBox, Quadratic, ScaledAbs

_LAM_FLOOR = 1e-12
_LAM_CEILING = 1e18
_DIST_SLACK = 1e-12
_MIN_GRID_SAMPLES = 1000


def displacement(problem, lam, x):
    """``||x - prox_{f/lam}(x)||``; equals ``dist(x, X*)`` at ``lam = 0``."""
    x = problem.check_point(x)
    lam = float(lam)
    if not (lam >= 0.0 and math.isfinite(lam)):
        raise ValueError("lam must be finite and nonnegative")
    if lam == 0.0:
        return float(np.linalg.norm(x - problem.project_solutions(x)))
    return float(np.linalg.norm(x - problem.prox(lam, x)))


def critical_lambda_upper_bound(problem, x, t):
    """``2 (f(x) - f_inf) / t**2`` dominates every lam whose step stays >= t."""
    x = problem.check_point(x)
    t = float(t)
    if not (t > 0.0 and math.isfinite(t)):
        raise ValueError("t must be positive and finite")
    gap = problem.value(x) - problem.f_inf
    return 2.0 * gap / (t * t)


def critical_lambda(problem, x, t, tol=1e-6, max_iters=200):
    """Largest regularization weight that still moves ``x`` by at least ``t``.

    Bisection on ``[1e-12, 2 (f(x) - f_inf) / t**2]``. The return value is
    always admissible (``displacement >= t``); it is within relative ``tol``
    of the crossing, or the upper bound itself when even that is admissible
    (flat displacement, e.g. indicators).

    Requires ``dist(x, X*) > t``; raises ``PreconditionError`` otherwise.
    """
    x = problem.check_point(x)
    t = float(t)
    if not (t > 0.0 and math.isfinite(t)):
        raise ValueError("t must be positive and finite")
    d = problem.dist_to_solutions(x)
    if d <= t:
        raise PreconditionError(
            f"dist(x, X*) = {d:.6g} <= t = {t:.6g}: no admissible lam exists"
        )
    hi = critical_lambda_upper_bound(problem, x, t)
    if math.isinf(hi):
        # x outside dom f (indicators): the displacement saturates at the
        # domain projection, so probe a large finite weight instead
        hi = _LAM_CEILING
    if displacement(problem, hi, x) >= t:
        return hi
    lo = min(_LAM_FLOOR, 0.5 * hi)
    phi_lo = displacement(problem, lo, x)
    if phi_lo < t:
        raise NumericalFailure(
            "displacement already below t at the lower bracket", residual=t - phi_lo
        )
    for _ in range(max_iters):
        if phi_lo - t <= tol * t or hi - lo <= tol * lo:
            break
        mid = 0.5 * (lo + hi)
        phi_mid = displacement(problem, mid, x)
        if phi_mid >= t:
            lo, phi_lo = mid, phi_mid
        else:
            hi = mid
    return lo


def weak_sharp_lambda(problem, x, t):
    """Admissible regularization weight from weak-sharpness constants.

    Order 1 uses ``2 alpha^2 / (f(x) - f_inf + alpha t)``; order q >= 1 uses
    ``2 alpha (dist - t)**(q-1) / (dist + t)``. Requires ``dist(x, X*) > t``.
    """
    if problem.weak_sharp is None:
        raise ValueError(f"{problem.name}: no weak-sharpness constants available")
    alpha, order = problem.weak_sharp
    x = problem.check_point(x)
    t = float(t)
    if not (t > 0.0 and math.isfinite(t)):
        raise ValueError("t must be positive and finite")
    d = problem.dist_to_solutions(x)
    if d <= t:
        raise PreconditionError(
            f"dist(x, X*) = {d:.6g} <= t = {t:.6g}: no admissible lam exists"
        )
    if order == 1.0:
        gap = problem.value(x) - problem.f_inf
        return 2.0 * alpha * alpha / (gap + alpha * t)
    return 2.0 * alpha * (d - t) ** (order - 1.0) / (d + t)


def min_displacement_closed_form(problem, epsilon, lam):
    """Exact min displacement over points with ``dist >= epsilon``.

    Known for indicators (``eps``), scaled absolute value
    (``min(eps, mu/lam)``) and PSD quadratics
    (``sigma_plus / (sigma_plus + lam) * eps``). Raises
    ``ClosedFormUnavailable`` otherwise.
    """
    epsilon = float(epsilon)
    lam = float(lam)
    if not (epsilon > 0.0 and math.isfinite(epsilon)):
        raise ValueError("epsilon must be positive and finite")
    if not (lam >= 0.0 and math.isfinite(lam)):
        raise ValueError("lam must be finite and nonnegative")
    if isinstance(problem, (IndicatorBox, IndicatorBall)):
        return epsilon
    if isinstance(problem, ScaledAbs):
        return epsilon if lam == 0.0 else min(epsilon, problem.mu / lam)
    if isinstance(problem, Quadratic):
        s = problem.sigma_plus
        return s / (s + lam) * epsilon
    raise ClosedFormUnavailable(
        f"no closed-form min displacement for {type(problem).__name__}"
    )


@dataclass(frozen=True)
class MinDisplacementQuery:
    """Region spec for the sampled min-displacement estimate.

    The region is the ball of radius ``||x0 - anchor||`` around ``anchor``
    intersected with ``{dist(., X*) >= epsilon}``. ``anchor`` must be a
    solution; it defaults to the projection of ``x0``.
    """

    problem: object
    x0: np.ndarray
    epsilon: float
    lam: float
    anchor: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        p = self.problem
        object.__setattr__(self, "x0", p.check_point(self.x0))
        epsilon = float(self.epsilon)
        if not (epsilon > 0.0 and math.isfinite(epsilon)):
            raise ValueError("epsilon must be positive and finite")
        object.__setattr__(self, "epsilon", epsilon)
        lam = float(self.lam)
        if not (lam >= 0.0 and math.isfinite(lam)):
            raise ValueError("lam must be finite and nonnegative")
        object.__setattr__(self, "lam", lam)
        anchor = self.anchor
        anchor = p.project_solutions(self.x0) if anchor is None else p.check_point(anchor)
        if p.dist_to_solutions(anchor) > 1e-9 * max(1.0, float(np.linalg.norm(anchor))):
            raise ValueError("anchor must belong to the solution set")
        object.__setattr__(self, "anchor", anchor)

    @property
    def radius(self):
        return float(np.linalg.norm(self.x0 - self.anchor))


def ball_samples(center, radius, n, dim, seed=42):
    """Low-discrepancy points in the ball: scrambled Halton in ``dim + 1``
    coordinates mapped through inverse-normal directions and the radial CDF."""
    sampler = qmc.Halton(d=dim + 1, scramble=True, seed=seed)
    u = sampler.random(n)
    raw = ndtri(np.clip(u[:, :dim], 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(raw, axis=1)
    norms[norms == 0.0] = 1.0
    directions = raw / norms[:, None]
    radii = radius * u[:, dim] ** (1.0 / dim)
    return center + radii[:, None] * directions


def min_displacement_grid(query, samples=10000, seed=42):
    """Sampled lower envelope of the displacement over the query region.

    Deterministic for a fixed seed. Raises ``InfeasibleRegionError`` when no
    sample clears the ``dist >= epsilon`` filter (empty or unreachable
    region). Estimates are upper bounds of the true minimum; callers that
    need admissibility shave a safety factor off the result.

    Queries are independent, so large scans can shard over (epsilon, lam)
    pairs in separate processes without shared state.
    """
    samples = int(samples)
    if samples < _MIN_GRID_SAMPLES:
        raise ValueError(f"samples must be at least {_MIN_GRID_SAMPLES}")
    p = query.problem
    points = ball_samples(query.anchor, query.radius, samples, p.dim, seed=seed)
    best = math.inf
    accepted = 0
    for row in points:
        d = p.dist_to_solutions(row)
        if d < query.epsilon - _DIST_SLACK:
            continue
        accepted += 1
        val = d if query.lam == 0.0 else displacement(p, query.lam, row)
        if val < best:
            best = val
    if accepted == 0:
        raise InfeasibleRegionError(
            f"no sample with dist >= {query.epsilon:.6g} inside radius "
            f"{query.radius:.6g}; region is empty or unreachable"
        )
    return best
