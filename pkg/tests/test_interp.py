import numpy as np
import pytest

from intrinsic_holder import (DegenerateAlpha, DerivativeOracle, InterpolationQuery, PolyFunction, SamplingPlan,
                              abs_power, build_mollifier, interpolation_inequality_check, rate_fit,
                              theta_alpha_map)
from intrinsic_holder.errors import DegenerateData, InvalidQuery, NonPositiveLambda, OrderViolation
from intrinsic_holder.interp import curve_shape_defects, k_functional_curve, k_functional_upper

BOX = ((-0.05, 0.05), (-0.25, 0.25), (-0.25, 0.25))


def test_theta_alpha_examples():
    for theta in (0.1, 0.5, 0.9):
        assert theta_alpha_map(InterpolationQuery(0, 0, 1, 0, theta)) == (0, theta)
    assert theta_alpha_map(InterpolationQuery(0, 0, 2, 0, 0.75)) == (1, 0.5)
    with pytest.raises(DegenerateAlpha):
        theta_alpha_map(InterpolationQuery(0, 0, 2, 0, 0.5))


def test_query_validation():
    for bad in [(0, 0, 1, 0, 0.0), (0, 0, 1, 0, 1.0), (2, 0, 1, 0, 0.5), (0, 1.5, 2, 0, 0.5), (-1, 0, 1, 0, 0.5)]:
        with pytest.raises(InvalidQuery):
            InterpolationQuery(*bad)


def test_rate_fit():
    pts = [(s, 3 * s ** 0.5) for s in (1e-3, 1e-2, 1e-1, 1.0)]
    fit = rate_fit(pts)
    assert fit.slope == pytest.approx(0.5, abs=1e-12) and fit.r_squared == 1.0
    flat = rate_fit([(s, 2.0) for s in (1e-2, 1e-1, 1.0)])
    assert flat.slope == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DegenerateData):
        rate_fit([(1, 1), (2, 2)])
    with pytest.raises(DegenerateData):
        rate_fit([(1, 1), (2, 0), (3, 1)])


@pytest.fixture(scope="module")
def curve(request):
    from intrinsic_holder import langevin
    g = langevin()
    plan = SamplingPlan(BOX, (1e-6, 0.5), 32, 8, seed=5, anchors=((0, 0, 0),))
    u = DerivativeOracle(g, 2, function=abs_power(2, 0.5, 0, 1.0))
    lams = [0.0] + list(np.logspace(-3, 0, 7))
    return g, u, plan, k_functional_curve(g, u, lams, (0, 1), [2.0 ** -k for k in range(8)], plan)


def test_k_hat_basic(curve):
    g, u, plan, c = curve
    assert c.values[0] == np.min(c.rough_norms)
    assert np.all(c.values <= c.u_small + 1e-15)
    d = curve_shape_defects(c)
    assert d["monotonicity"] == 0 and d["concavity"] <= 1e-12
    assert c.at(float(c.lambdas[3])) == c.values[3]


def test_k_hat_errors(curve):
    g, u, plan, _ = curve
    with pytest.raises(NonPositiveLambda):
        k_functional_upper(g, u, -1.0, (0, 1), [0.5], plan)
    with pytest.raises(OrderViolation):
        k_functional_upper(g, u, 1.0, (1, 1), [0.5], plan)


def test_zero_function_has_zero_k(curve):
    g, _, plan, _ = curve
    zero = DerivativeOracle(g, 2, function=PolyFunction.constant(0, 2))
    assert k_functional_upper(g, zero, 0.3, (0, 1), [0.5, 0.25], plan) == 0.0


def test_smooth_function_has_zero_k_at_zero(curve):
    g, _, plan, _ = curve
    u = DerivativeOracle(g, 2, function=PolyFunction.coordinate(0, 2) * PolyFunction.time(2))
    assert k_functional_upper(g, u, 0.0, (0, 1), [0.5], plan) == 0.0


def test_inequality_witness(curve):
    g, _, _, _ = curve
    plan = SamplingPlan(BOX, (1e-3, 0.5), 16, 4, anchors=((0, 0.25, 0),))
    p = PolyFunction.coordinate(0, 2) ** 2
    rep = interpolation_inequality_check(g, [DerivativeOracle(g, 4, function=p)], 0, 1, 2, plan)
    # On |x_1| <= 1/4: ||p||_0 = 1/16, ||p||_1 = 1/16 + 1/2, ||p||_2 = 1/16 + 1/2 + 2.
    v0, v1, v2 = 1 / 16, 1 / 16 + 0.5, 1 / 16 + 0.5 + 2
    assert rep.norms[0][0] == pytest.approx(v0)
    assert rep.witness_constant == pytest.approx(v1 / (v0 * v2) ** 0.5, rel=1e-9)
    with pytest.raises(OrderViolation):
        interpolation_inequality_check(g, [DerivativeOracle(g, 4, function=p)], 0, 2, 2, plan)
