import numpy as np
import pytest
import sympy as sp

from intrinsic_holder import (DerivativeOracle, ExprFunction, IncompleteOracle, IntrinsicIndex, PolyFunction, Y,
                              abs_power, bump)
from intrinsic_holder.functions import evaluate, symbols
from intrinsic_holder.oracle import CombinationOracle, FunctionOracle, index_word, word_index


def test_expr_drift_matches_definition(lang, rng):
    t, (x1, x2) = symbols(2)
    f = ExprFunction(sp.sin(x1) * x2 + t ** 2, 2)
    yf = f.derive(lang, Y)
    tt, xx = rng.uniform(-1, 1, 10), rng.uniform(-1, 1, (10, 2))
    want = 2 * tt + xx[:, 0] * np.sin(xx[:, 0])
    np.testing.assert_allclose(yf(tt, xx), want, atol=1e-13)


def test_bump_support_and_peak():
    b = bump(2, 2.0)
    assert b(np.array([0.0]), np.zeros((1, 2)))[0] == pytest.approx(1.0)
    assert b(np.array([0.0]), np.array([[2.5, 0.0]]))[0] == 0.0


def test_abs_power_values():
    f = abs_power(2, 0.5, 0, 4.0)
    v = f(np.zeros(2), np.array([[0.0, 0.0], [0.04, 0.0]]))
    assert v[0] == 0.0 and v[1] == pytest.approx(0.2 * np.exp(1 - 1 / (1 - 0.0001)), rel=1e-12)


def test_threaded_evaluation_is_identical(rng):
    f = abs_power(2, 1.5, 0, 2.0)
    t, x = rng.uniform(-1, 1, 10_000), rng.uniform(-1, 1, (10_000, 2))
    assert np.array_equal(evaluate(f, t, x, threads=1), evaluate(f, t, x, threads=4, chunk=1000))


def test_words():
    ix = IntrinsicIndex(2, (1, 0))
    assert index_word(ix) == (0, Y, Y)
    assert word_index((0, Y, Y), 2) == ix
    assert word_index((Y, 0), 2) is None


def test_oracle_orders(lang):
    p = PolyFunction.coordinate(1, 2)
    o = DerivativeOracle(lang, 2, function=p)
    assert o[(1, (0, 0))] == PolyFunction.coordinate(0, 2)
    assert o.word((Y,)) == PolyFunction.coordinate(0, 2)
    with pytest.raises(IncompleteOracle):
        o.word((Y, 0))  # intrinsic order 3
    assert DerivativeOracle(lang, 3, function=p).word((Y, 0)) == PolyFunction.constant(1, 2)
    assert o.value((1, (0, 0)), 0.5, [0.25, 3.0], exact=True) == 0.25


def test_table_oracle(lang):
    table = {(0, (0, 0)): PolyFunction.constant(1, 2), (0, (1, 0)): PolyFunction.constant(0, 2)}
    o = DerivativeOracle(lang, 1, table=table)
    assert o[(0, (1, 0))] == PolyFunction.constant(0, 2)
    with pytest.raises(IncompleteOracle):
        DerivativeOracle(lang, 2, table=table)


def test_combination_oracle(lang, rng):
    a, b = PolyFunction.coordinate(0, 2) ** 2, PolyFunction.time(2)
    o = CombinationOracle(lang, [(1.0, DerivativeOracle(lang, 4, function=a)), (-2.0, b)], 2)
    t, x = rng.uniform(-1, 1, 5), rng.uniform(-1, 1, (5, 2))
    np.testing.assert_allclose(o.word((0,))(t, x), 2 * x[:, 0])
    np.testing.assert_allclose(o.word((Y,))(t, x), -2.0)
    assert FunctionOracle(lang, a, 2).word((0, 0)) == PolyFunction.constant(2, 2)
