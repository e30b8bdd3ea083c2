import numpy as np
import pytest

from intrinsic_holder import (AlphaOutOfRange, DerivativeOracle, EmptyPlan, FieldIndexOutOfRange, IncompleteOracle,
                              PolyFunction, SamplingPlan, Y, holder_norm, holder_norms, seminorm, smooth_product)
from intrinsic_holder.holder import write_trace_csv

BOX = ((-1, 1), (-2, 2), (-2, 2))


def test_seminorm_examples(lang):
    plan = SamplingPlan(BOX, (0.01, 1.0), 64, 8, anchors=((0, 2, 0), (0, -2, 0)))
    assert seminorm(lang, PolyFunction.constant(3, 2), Y, 0.5, plan).value == 0
    assert seminorm(lang, PolyFunction.coordinate(0, 2), 0, 1.0, plan).value == pytest.approx(1.0, abs=1e-12)
    est = seminorm(lang, PolyFunction.coordinate(1, 2), Y, 1.0, plan)
    assert est.value == pytest.approx(2.0, abs=1e-12)
    assert abs(est.witness[0].x[0]) == 2.0


def test_seminorm_errors(lang):
    plan = SamplingPlan(BOX)
    with pytest.raises(FieldIndexOutOfRange):
        seminorm(lang, PolyFunction.coordinate(0, 2), 1, 0.5, plan)
    with pytest.raises(AlphaOutOfRange):
        seminorm(lang, PolyFunction.coordinate(0, 2), 0, 0.0, plan)
    with pytest.raises(EmptyPlan):
        SamplingPlan(BOX, (1.0, 0.5))
    with pytest.raises(EmptyPlan):
        SamplingPlan(BOX, n_base=0)


def test_norm_examples(lang):
    plan = SamplingPlan(BOX, n_base=32, n_delta=8)
    zero = DerivativeOracle(lang, 4, function=PolyFunction.constant(0, 2))
    assert holder_norm(lang, zero, 2, 0.5, plan) == 0
    c = DerivativeOracle(lang, 4, function=PolyFunction.constant(-2.5, 2))
    for n in range(4):
        for a in (0.0, 0.5, 1.0):
            assert holder_norm(lang, c, n, a, plan) == 2.5
    with pytest.raises(IncompleteOracle):
        holder_norm(lang, DerivativeOracle(lang, 1, function=PolyFunction.constant(1, 2)), 2, 0.0, plan)
    with pytest.raises(AlphaOutOfRange):
        holder_norm(lang, c, 0, 1.5, plan)


def test_norm_structure(lang):
    # u = x_1^2: sup 4, d_1 u = 2x_1 (sup 4), d_1 d_1 u = 2, Y u = 0 on the box |x_1| <= 2.
    plan = SamplingPlan(BOX, (0.01, 1.0), 64, 8, anchors=((0, 2, 0),))
    u = DerivativeOracle(lang, 4, function=PolyFunction.coordinate(0, 2) ** 2)
    val, parts = holder_norm(lang, u, 2, 0.0, plan, details=True)
    assert parts[("sup",)] == 4 and parts[("sup", 0)] == 4 and parts[("sup", 0, 0)] == 2
    assert val == pytest.approx(4 + 0 + 4 + parts[("semi", Y, 0.5, 0)] + 2)


def test_refinement_monotone_and_stable(lang):
    u = DerivativeOracle(lang, 4, function=smooth_product(2, "x1", 2.0))
    plan = SamplingPlan(BOX, (1e-3, 1.0), 128, 12, seed=3)
    a = holder_norm(lang, u, 1, 0.0, plan)
    b = holder_norm(lang, u, 1, 0.0, plan.refined())
    assert b >= a
    assert abs(b / a - 1) <= 0.05


def test_scaling_is_exact(lang):
    plan = SamplingPlan(BOX, n_base=64, n_delta=8)
    f = smooth_product(2, "sin(x1) + x2", 2.0)
    a = seminorm(lang, f, Y, 0.25, plan).value
    b = seminorm(lang, f * 4.0, Y, 0.25, plan).value
    assert b == 4 * a


def test_shared_norms(lang):
    plan = SamplingPlan(BOX, n_base=32, n_delta=6)
    u = DerivativeOracle(lang, 4, function=smooth_product(2, "x1*x2", 2.0))
    many = holder_norms(lang, u, [(0, 0.5), (1, 0.0), (2, 0.0)], plan)
    assert many[(2, 0.0)] == holder_norm(lang, u, 2, 0.0, plan)


def test_trace_csv(lang, tmp_path):
    plan = SamplingPlan(BOX, n_base=4, n_delta=2)
    est = seminorm(lang, PolyFunction.coordinate(0, 2), 0, 1.0, plan, trace=True)
    write_trace_csv(tmp_path / "trace.csv", est, 2)
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "t,x1,x2,delta,ratio" and len(lines) == 1 + est.samples


def test_plan_roundtrip():
    plan = SamplingPlan(BOX, (0.01, 0.5), 10, 3, 7, ((0, 1, 0),))
    assert SamplingPlan.from_dict(plan.to_dict()) == plan
