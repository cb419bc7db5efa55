"""Displacement function, critical regularization and min-displacement bounds.

Worked values used below, all derivable by hand:
  * Quadratic(Q=[[s]]): phi(lam, x) = s/(s+lam) * |x|, so phi(lam*) = t gives
    lam* = s*(|x|/t - 1).
  * Quartic (f = z^4/4): the prox solves z^3 + lam z = lam x, so requiring a
    displacement of exactly t means lam = (x-t)^3 / t.
  * ScaledAbs(mu) and SharpNorm(alpha): phi = min(dist, mu/lam), lam* = mu/t.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trppm_lab.displacement import (
    MinDisplacementQuery,
    ball_samples,
    critical_lambda,
    critical_lambda_upper_bound,
    displacement,
    min_displacement_closed_form,
    min_displacement_grid,
    weak_sharp_lambda,
)
from trppm_lab.errors import ClosedFormUnavailable, InfeasibleRegionError, PreconditionError
from trppm_lab.problems import (
    IndicatorBall,
    IndicatorBox,
    Quadratic,
    Quartic1D,
    ScaledAbs,
    SharpNorm,
)


# --- displacement values ----------------------------------------------------


def test_zero_lam_gives_distance():
    p = Quadratic(np.diag([2.0, 0.0]))
    assert displacement(p, 0.0, [3.0, 4.0]) == pytest.approx(3.0, abs=1e-14)


def test_quadratic_scalar_closed_form():
    p = Quadratic([[1.0]])
    assert displacement(p, 1.0, [2.0]) == pytest.approx(1.0, abs=1e-14)
    assert displacement(p, 3.0, [2.0]) == pytest.approx(0.5, abs=1e-14)


def test_scaled_abs_saturates():
    p = ScaledAbs(2.0)
    assert displacement(p, 4.0, [5.0]) == pytest.approx(0.5)
    # once mu/lam exceeds |x| the prox reaches the solution set
    assert displacement(p, 0.1, [5.0]) == pytest.approx(5.0)


def test_quartic_unit_displacement():
    # z^3 + z = 2 has root 1, so the prox of 2 at lam 1 moves by exactly 1
    assert displacement(Quartic1D(), 1.0, [2.0]) == pytest.approx(1.0, abs=1e-12)


@given(
    lam_lo=st.floats(min_value=1e-6, max_value=1e3),
    factor=st.floats(min_value=1.0, max_value=1e3),
    x=st.floats(min_value=-20.0, max_value=20.0),
)
@settings(max_examples=80, deadline=None)
def test_monotone_nonincreasing_in_lam(lam_lo, factor, x):
    p = ScaledAbs(1.2)
    q = Quadratic([[2.0]])
    hi = lam_lo * factor
    assert displacement(p, hi, [x]) <= displacement(p, lam_lo, [x]) + 1e-12
    assert displacement(q, hi, [x]) <= displacement(q, lam_lo, [x]) + 1e-12


def test_bounded_by_distance():
    rng = np.random.default_rng(31)
    p = Quadratic(np.diag([2.0, 1.0]))
    for _ in range(50):
        x = rng.normal(scale=5.0, size=2)
        lam = float(rng.uniform(0.0, 20.0))
        phi = displacement(p, lam, x)
        assert 0.0 <= phi <= p.dist_to_solutions(x) + 1e-12


# --- critical regularization --------------------------------------------------


def test_upper_bound_formula():
    # 2 * gap / t^2 with gap = f(2) = 4, t = 1
    assert critical_lambda_upper_bound(Quartic1D(), [2.0], 1.0) == pytest.approx(8.0)


def test_upper_bound_dominates_critical_value():
    p = Quadratic([[1.0]])
    x, t = [2.0], 1.0
    ub = critical_lambda_upper_bound(p, x, t)
    assert critical_lambda(p, x, t) <= ub + 1e-9


def test_critical_lambda_scalar_quadratic():
    # s/(s+lam)*|x| = t with s=1, x=2, t=1 gives lam* = 1
    p = Quadratic([[1.0]])
    lam = critical_lambda(p, [2.0], 1.0)
    assert lam == pytest.approx(1.0, rel=1e-5)
    # narrow margin: t = 1.9 gives lam* = 2/1.9 - 1
    lam2 = critical_lambda(p, [2.0], 1.9)
    assert lam2 == pytest.approx(2.0 / 1.9 - 1.0, abs=1e-4)


def test_critical_lambda_quartic():
    # displacement t = 1 from x = 3 needs z = 2: lam = z^3/(x - z) = 8
    lam = critical_lambda(Quartic1D(), [3.0], 1.0)
    assert lam == pytest.approx(8.0, rel=1e-5)


@pytest.mark.parametrize("mu,t", [(2.0, 0.5), (1.0, 0.25)])
def test_critical_lambda_threshold_problems(mu, t):
    # phi = min(|x|, mu/lam): the critical value is mu/t regardless of x
    lam = critical_lambda(ScaledAbs(mu), [5.0], t)
    assert displacement(ScaledAbs(mu), lam, [5.0]) >= t - 1e-9
    assert lam == pytest.approx(mu / t, rel=1e-4)


def test_critical_lambda_returned_value_is_admissible():
    rng = np.random.default_rng(13)
    p = Quadratic(np.diag([2.0, 1.0]))
    for _ in range(20):
        x = rng.normal(scale=6.0, size=2)
        d = p.dist_to_solutions(x)
        if d < 0.5:
            continue
        t = 0.4 * d
        lam = critical_lambda(p, x, t)
        assert displacement(p, lam, x) >= t - 1e-6 * t


def test_critical_lambda_requires_outside_neighborhood():
    with pytest.raises(PreconditionError, match="dist"):
        critical_lambda(Quadratic([[1.0]]), [0.5], 1.0)


def test_critical_lambda_infeasible_center_saturates():
    # f(x) = inf outside the box: the bracket cannot use the gap bound but
    # the displacement is flat in lam, so any large lam is admissible
    p = IndicatorBox([-1.0], [1.0])
    lam = critical_lambda(p, [3.0], 0.5)
    assert displacement(p, lam, [3.0]) >= 0.5


# --- weak-sharpness rule ---------------------------------------------------------


def test_weak_sharp_order_one_abs():
    # 2 alpha^2 / (gap + alpha t) with alpha = 1, gap = 3, t = 1
    assert weak_sharp_lambda(ScaledAbs(1.0), [3.0], 1.0) == pytest.approx(0.5)


def test_weak_sharp_order_one_norm():
    # alpha = 2, gap = 8, t = 1: 2*4/(8+2) = 0.8
    p = SharpNorm(2.0, dim=2)
    assert weak_sharp_lambda(p, [0.0, 4.0], 1.0) == pytest.approx(0.8)


def test_weak_sharp_order_two_quadratic():
    # 2 alpha (d-t)^(q-1) / (d+t) with alpha = 1, q = 2, d = 4, t = 1
    assert weak_sharp_lambda(Quadratic([[2.0]]), [4.0], 1.0) == pytest.approx(1.2)


def test_weak_sharp_order_four_quartic():
    # alpha = 1/4, q = 4, d = 3, t = 1: 0.5 * 2^3 / 4 = 1
    lam = weak_sharp_lambda(Quartic1D(), [3.0], 1.0)
    assert lam == pytest.approx(1.0)
    # prescribed value keeps the constraint active
    assert displacement(Quartic1D(), lam, [3.0]) >= 1.0


def test_weak_sharp_rule_is_admissible_for_abs():
    p = ScaledAbs(1.0)
    for x in (2.0, 5.0, 20.0):
        lam = weak_sharp_lambda(p, [x], 1.0)
        assert displacement(p, lam, [x]) >= 1.0 - 1e-12


def test_weak_sharp_requires_constants_and_distance():
    with pytest.raises(ValueError, match="weak-sharp"):
        weak_sharp_lambda(IndicatorBox([0.0], [1.0]), [3.0], 0.5)
    with pytest.raises(PreconditionError):
        weak_sharp_lambda(ScaledAbs(1.0), [0.5], 1.0)


# --- min displacement: closed forms ------------------------------------------------


def test_closed_form_indicator():
    assert min_displacement_closed_form(IndicatorBall([0.0, 0.0], 1.0), 0.7, 5.0) == 0.7
    assert min_displacement_closed_form(IndicatorBox([0.0], [1.0]), 0.4, 0.0) == 0.4


def test_closed_form_scaled_abs():
    p = ScaledAbs(1.0)
    assert min_displacement_closed_form(p, 0.4, 2.0) == pytest.approx(0.4)
    assert min_displacement_closed_form(p, 0.4, 8.0) == pytest.approx(0.125)
    assert min_displacement_closed_form(p, 0.4, 0.0) == 0.4


def test_closed_form_quadratic():
    p = Quadratic(np.diag([2.0, 0.0]))
    assert min_displacement_closed_form(p, 0.9, 2.0) == pytest.approx(0.45)


def test_closed_form_unavailable_for_quartic():
    with pytest.raises(ClosedFormUnavailable):
        min_displacement_closed_form(Quartic1D(), 0.5, 1.0)


# --- min displacement: sampled estimate -----------------------------------------------


def test_ball_samples_deterministic_and_inside():
    c = np.array([1.0, -2.0])
    a = ball_samples(c, 3.0, 500, 2, seed=42)
    b = ball_samples(c, 3.0, 500, 2, seed=42)
    np.testing.assert_array_equal(a, b)
    assert a.shape == (500, 2)
    assert np.max(np.linalg.norm(a - c, axis=1)) <= 3.0 + 1e-12
    # different seed, different points
    assert np.any(ball_samples(c, 3.0, 500, 2, seed=1) != a)


def test_query_anchor_defaults_to_projection():
    p = Quadratic(np.diag([2.0, 0.0]))
    q = MinDisplacementQuery(p, [3.0, 4.0], 0.5, 1.0)
    np.testing.assert_allclose(q.anchor, [0.0, 4.0], atol=1e-14)
    assert q.radius == pytest.approx(3.0)


def test_query_rejects_non_solution_anchor():
    p = ScaledAbs(1.0)
    with pytest.raises(ValueError, match="anchor"):
        MinDisplacementQuery(p, [3.0], 0.5, 1.0, anchor=[1.0])


def test_grid_matches_closed_form_scaled_abs():
    p = ScaledAbs(1.0)
    q = MinDisplacementQuery(p, [5.0], 0.7, 2.0)
    est = min_displacement_grid(q, samples=10000, seed=42)
    want = min_displacement_closed_form(p, 0.7, 2.0)  # 0.5
    assert est >= want - 1e-12  # sampled minimum cannot undershoot the true one
    assert est == pytest.approx(want, rel=0.02)


def test_grid_matches_closed_form_quadratic_with_kernel():
    p = Quadratic(np.diag([2.0, 0.0]))
    q = MinDisplacementQuery(p, [3.0, 0.0], 0.6, 1.0)
    est = min_displacement_grid(q, samples=10000, seed=42)
    want = min_displacement_closed_form(p, 0.6, 1.0)  # 2/3 * 0.6 = 0.4
    assert est >= want - 1e-12
    assert est == pytest.approx(want, rel=0.02)


def test_grid_infeasible_region():
    # every point of the query ball is within eps of the solution set
    p = IndicatorBall([0.0, 0.0], 1.0)
    q = MinDisplacementQuery(p, [1.5, 0.0], 2.0, 1.0)
    with pytest.raises(InfeasibleRegionError):
        min_displacement_grid(q, samples=1000, seed=42)


def test_grid_enforces_minimum_samples():
    p = ScaledAbs(1.0)
    q = MinDisplacementQuery(p, [5.0], 0.5, 1.0)
    with pytest.raises(ValueError, match="samples"):
        min_displacement_grid(q, samples=10)
