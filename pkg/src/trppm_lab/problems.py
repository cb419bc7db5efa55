"""Catalog of convex test problems with exact ground truth.

Every problem carries a value oracle, an exact proximal map, the Euclidean
projection onto its solution set, the infimal value, and (where meaningful)
weak-sharpness constants ``(alpha, q)`` with
``f(x) - f_inf >= alpha * dist(x, X*)**q`` and a strong-convexity modulus.

Instances are immutable after construction; all operations validate point
dimension and finiteness, so they are safe to share across threads.
"""
from __future__ import annotations

import math

import numpy as np

from .linalg import POSITIVE_EIGENVALUE_TOL, eigendecompose, smallest_positive_eigenvalue

INF = float("inf")

_PSD_REJECT_TOL = -1e-10
_BALL_MEMBERSHIP_RTOL = 1e-12


class Problem:
    """Base class: value / prox / solution-projection contract.

    ``project_solutions`` returns the Euclidean projection onto the solution
    set ``X*`` (the nearest solution when ``X*`` is not a singleton).
    ``prox(lam, x)`` solves ``argmin_z f(z) + lam/2 ||z - x||^2`` exactly for
    ``lam > 0``; the ``lam = 0`` convention (projection onto ``X*``) lives in
    the prox engine.
    """

    name = "problem"
    dim = 1
    f_inf = 0.0
    weak_sharp = None
    strong_convexity = None
    solution_set_is_singleton = True

    def check_point(self, x):
        arr = np.asarray(x, dtype=float)
        if arr.shape != (self.dim,):
            raise ValueError(
                f"{self.name}: expected point of shape ({self.dim},), got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{self.name}: point has non-finite coordinates")
        return arr

    def value(self, x):
        raise NotImplementedError

    def prox(self, lam, x):
        raise NotImplementedError

    def project_solutions(self, x):
        raise NotImplementedError

    def dist_to_solutions(self, x):
        x = self.check_point(x)
        return float(np.linalg.norm(x - self.project_solutions(x)))

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


def _cubic_resolvent_root(lam, v):
    # Unique real root of z**3 + lam*z - lam*v = 0 (lam > 0): Cardano on the
    # depressed cubic, picking the cancellation-free branch, then Newton
    # polish to bring the residual to scale * 1e-12.
    p = lam
    q = -lam * v
    s = math.sqrt(0.25 * q * q + p * p * p / 27.0)
    if q <= 0.0:
        u = np.cbrt(-0.5 * q + s)
    else:
        u = np.cbrt(-0.5 * q - s)
    z = u - p / (3.0 * u) if u != 0.0 else 0.0
    scale = max(1.0, abs(v))
    for _ in range(200):
        r = z * (z * z + p) + q
        if abs(r) <= 1e-12 * scale * max(1.0, p):
            return z
        z -= r / (3.0 * z * z + p)
    from .errors import NumericalFailure

    raise NumericalFailure(
        "cubic root polish did not converge", residual=abs(z * (z * z + p) + q)
    )


class Quartic1D(Problem):
    """f(x) = x**4 / 4 on the line. Flat minimum at 0, not strongly convex."""

    name = "quartic1d"
    dim = 1
    weak_sharp = (0.25, 4.0)

    def value(self, x):
        x = self.check_point(x)
        return float(x[0] ** 4) / 4.0

    def gradient(self, x):
        x = self.check_point(x)
        return np.array([float(x[0]) ** 3])

    def prox(self, lam, x):
        x = self.check_point(x)
        return np.array([_cubic_resolvent_root(lam, float(x[0]))])

    def project_solutions(self, x):
        self.check_point(x)
        return np.zeros(1)


class ScaledAbs(Problem):
    """f(x) = mu * |x|. Weakly sharp of order 1 with constant mu."""

    name = "scaled_abs"
    dim = 1

    def __init__(self, mu=1.0):
        mu = float(mu)
        if not (mu > 0.0 and math.isfinite(mu)):
            raise ValueError("scaled_abs: mu must be positive and finite")
        self.mu = mu
        self.weak_sharp = (mu, 1.0)

    def value(self, x):
        x = self.check_point(x)
        return self.mu * float(abs(x[0]))

    def gradient(self, x):
        x = self.check_point(x)
        if x[0] == 0.0:
            return None
        return np.array([self.mu * math.copysign(1.0, float(x[0]))])

    def prox(self, lam, x):
        # soft threshold by mu / lam
        x = self.check_point(x)
        return np.sign(x) * np.maximum(np.abs(x) - self.mu / lam, 0.0)

    def project_solutions(self, x):
        self.check_point(x)
        return np.zeros(1)


class Quadratic(Problem):
    """f(x) = x^T Q x / 2 with Q symmetric PSD.

    The matrix is eigendecomposed once at construction; value, gradient,
    prox and solution projection all work in the eigenbasis so that points
    in the kernel evaluate to exactly ``f_inf``. Eigenvalues in
    ``[-1e-10, 0)`` are clamped to zero; anything below that is rejected.
    """

    name = "quadratic"
    kernel_dim = 0

    def __init__(self, q):
        eigvals, eigvecs = eigendecompose(q)
        if eigvals[0] < _PSD_REJECT_TOL:
            raise ValueError(
                f"quadratic: matrix is not positive semidefinite "
                f"(eigenvalue {eigvals[0]:.3e})"
            )
        eigvals = np.where(eigvals < 0.0, 0.0, eigvals)
        self.sigma = eigvals
        self.basis = eigvecs
        self.dim = eigvals.shape[0]
        self.sigma_plus = smallest_positive_eigenvalue(eigvals)
        self._kernel_mask = (eigvals <= POSITIVE_EIGENVALUE_TOL).astype(float)
        self.kernel_dim = int(self._kernel_mask.sum())
        self.solution_set_is_singleton = self.kernel_dim == 0
        self.weak_sharp = (self.sigma_plus / 2.0, 2.0)
        mu = float(eigvals[0])
        self.strong_convexity = mu if mu > POSITIVE_EIGENVALUE_TOL else None
        self.matrix = eigvecs @ (eigvals[:, None] * eigvecs.T)

    def value(self, x):
        x = self.check_point(x)
        y = self.basis.T @ x
        return 0.5 * float(y @ (self.sigma * y))

    def gradient(self, x):
        x = self.check_point(x)
        return self.basis @ (self.sigma * (self.basis.T @ x))

    def prox(self, lam, x):
        x = self.check_point(x)
        y = self.basis.T @ x
        return self.basis @ ((lam / (lam + self.sigma)) * y)

    def project_solutions(self, x):
        x = self.check_point(x)
        y = self.basis.T @ x
        return self.basis @ (self._kernel_mask * y)


class IndicatorBox(Problem):
    """Indicator of an axis-aligned box [lower, upper]."""

    name = "indicator_box"

    def __init__(self, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("indicator_box: lower/upper must be 1-d of equal length")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("indicator_box: bounds must be finite")
        if np.any(lower > upper):
            raise ValueError("indicator_box: empty box (lower > upper)")
        self.lower = lower
        self.upper = upper
        self.dim = lower.shape[0]
        self.solution_set_is_singleton = bool(np.all(lower == upper))

    def value(self, x):
        x = self.check_point(x)
        inside = np.all(x >= self.lower) and np.all(x <= self.upper)
        return 0.0 if inside else INF

    def prox(self, lam, x):
        # prox of an indicator is the projection for every lam > 0
        x = self.check_point(x)
        return np.clip(x, self.lower, self.upper)

    def project_solutions(self, x):
        x = self.check_point(x)
        return np.clip(x, self.lower, self.upper)


class IndicatorBall(Problem):
    """Indicator of the Euclidean ball B_radius(center)."""

    name = "indicator_ball"

    def __init__(self, center, radius):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        radius = float(radius)
        if center.ndim != 1 or not np.all(np.isfinite(center)):
            raise ValueError("indicator_ball: center must be a finite 1-d point")
        if not (radius > 0.0 and math.isfinite(radius)):
            raise ValueError("indicator_ball: radius must be positive and finite")
        self.center = center
        self.radius = radius
        self.dim = center.shape[0]
        self.solution_set_is_singleton = False

    def value(self, x):
        x = self.check_point(x)
        # tolerant membership so projected points evaluate to f_inf
        slack = _BALL_MEMBERSHIP_RTOL * max(1.0, self.radius)
        inside = float(np.linalg.norm(x - self.center)) <= self.radius + slack
        return 0.0 if inside else INF

    def prox(self, lam, x):
        return self.project_solutions(x)

    def project_solutions(self, x):
        x = self.check_point(x)
        offset = x - self.center
        nrm = float(np.linalg.norm(offset))
        if nrm <= self.radius:
            return x.copy()
        return self.center + offset * (self.radius / nrm)


class SharpNorm(Problem):
    """f(x) = alpha * ||x||. Weakly sharp of order 1 in any dimension."""

    name = "sharp_norm"

    def __init__(self, alpha=1.0, dim=2):
        alpha = float(alpha)
        dim = int(dim)
        if not (alpha > 0.0 and math.isfinite(alpha)):
            raise ValueError("sharp_norm: alpha must be positive and finite")
        if dim < 1:
            raise ValueError("sharp_norm: dim must be at least 1")
        self.alpha = alpha
        self.dim = dim
        self.weak_sharp = (alpha, 1.0)

    def value(self, x):
        x = self.check_point(x)
        return self.alpha * float(np.linalg.norm(x))

    def gradient(self, x):
        x = self.check_point(x)
        nrm = float(np.linalg.norm(x))
        if nrm == 0.0:
            return None
        return self.alpha * x / nrm

    def prox(self, lam, x):
        # block soft threshold: shrink the radius by alpha / lam
        x = self.check_point(x)
        nrm = float(np.linalg.norm(x))
        if nrm == 0.0:
            return np.zeros(self.dim)
        return x * max(1.0 - self.alpha / (lam * nrm), 0.0)

    def project_solutions(self, x):
        self.check_point(x)
        return np.zeros(self.dim)


def _build_quartic1d():
    return Quartic1D()


def _build_scaled_abs(mu=1.0):
    return ScaledAbs(mu=mu)


def _build_quadratic(q):
    return Quadratic(q)


def _build_indicator_box(lower, upper):
    return IndicatorBox(lower, upper)


def _build_indicator_ball(center, radius):
    return IndicatorBall(center, radius)


def _build_sharp_norm(alpha=1.0, dim=2):
    return SharpNorm(alpha=alpha, dim=dim)


CATALOG = {
    "quartic1d": _build_quartic1d,
    "scaled_abs": _build_scaled_abs,
    "quadratic": _build_quadratic,
    "indicator_box": _build_indicator_box,
    "indicator_ball": _build_indicator_ball,
    "sharp_norm": _build_sharp_norm,
}

_REQUIRED_PARAMS = {
    "quartic1d": set(),
    "scaled_abs": set(),
    "quadratic": {"q"},
    "indicator_box": {"lower", "upper"},
    "indicator_ball": {"center", "radius"},
    "sharp_norm": set(),
}

_ALLOWED_PARAMS = {
    "quartic1d": set(),
    "scaled_abs": {"mu"},
    "quadratic": {"q"},
    "indicator_box": {"lower", "upper"},
    "indicator_ball": {"center", "radius"},
    "sharp_norm": {"alpha", "dim"},
}


def make_problem(name, params=None):
    """Build a catalog problem from its name and a parameter mapping.

    Unknown names, unknown parameter keys and missing required parameters
    raise ``ValueError`` naming the offender.
    """
    if name not in CATALOG:
        known = ", ".join(sorted(CATALOG))
        raise ValueError(f"unknown problem {name!r}; known problems: {known}")
    params = dict(params or {})
    unknown = set(params) - _ALLOWED_PARAMS[name]
    if unknown:
        raise ValueError(
            f"{name}: unknown parameter(s) {sorted(unknown)}; "
            f"allowed: {sorted(_ALLOWED_PARAMS[name])}"
        )
    missing = _REQUIRED_PARAMS[name] - set(params)
    if missing:
        raise ValueError(f"{name}: missing required parameter(s) {sorted(missing)}")
    return CATALOG[name](**params)
