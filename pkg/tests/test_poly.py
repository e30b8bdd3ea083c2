from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intrinsic_holder import (BlockStructure, DerivativeOracle, GroupPoint, IncompleteOracle, IndexOutOfRange,
                              IntrinsicIndex, OrderTooLow, PolyFunction, build_group, check_exchange_identities,
                              enumerate_indices, poly_eval, poly_partial, poly_Y, random_polynomial, taylor_eval,
                              taylor_polynomial)

T = lambda d: PolyFunction.time(d)  # noqa: E731
X = lambda i, d: PolyFunction.coordinate(i, d)  # noqa: E731


def test_eval_examples():
    z = GroupPoint(2.0, np.array([3.0, 5.0]))
    assert poly_eval(PolyFunction.constant(1, 2), z) == 1
    assert poly_eval(T(2) * X(0, 2), z) == 6


def test_eval_against_group_operations(lang, rng):
    # x_2 - xi_2 - (t - s) xi_1 is the second coordinate of zeta^{-1} o z.
    s, xi = 0.3, np.array([0.7, -1.1])
    p = X(1, 2) - xi[1] - (T(2) - s) * xi[0]
    z = lang.random_points(rng, 50)
    zeta = GroupPoint(np.full(50, s), np.tile(xi, (50, 1)))
    w = lang.compose(lang.inverse(zeta), z)
    np.testing.assert_allclose(poly_eval(p, z), w.x[:, 1], atol=1e-12)


def test_partial_examples(rng):
    assert poly_partial(X(0, 2) ** 2, 0) == X(0, 2) * 2
    assert len(poly_partial(T(2) * X(0, 2), 1)) == 0
    with pytest.raises(IndexOutOfRange):
        poly_partial(X(0, 2), 2)
    p = PolyFunction.from_terms([{"k": 1, "beta": [2, 1], "coeff": 3}, {"k": 0, "beta": [0, 3], "coeff": -2}], 2)
    t, x = rng.uniform(-1, 1, 20), rng.uniform(-1, 1, (20, 2))
    h = 1e-5
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (p(t, x + e) - p(t, x - e)) / (2 * h)
        np.testing.assert_allclose(p.partial(i)(t, x), fd, atol=1e-6)


def test_drift_examples(lang):
    assert poly_Y(lang, X(1, 2)) == X(0, 2)
    assert len(poly_Y(lang, PolyFunction.constant(5, 2))) == 0
    assert poly_Y(lang, T(2)) == PolyFunction.constant(1, 2)


def test_enumeration(lang):
    assert enumerate_indices(lang, 0) == [IntrinsicIndex(0, (0, 0))]
    got = {(ix.k, ix.beta) for ix in enumerate_indices(lang, 3)}
    assert got == {(0, (0, 0)), (0, (1, 0)), (0, (2, 0)), (0, (3, 0)), (0, (0, 1)), (1, (0, 0)), (1, (1, 0))}
    par = build_group(BlockStructure((2,)))
    for n in range(6):
        brute = sum(1 for k in range(4) for a in range(7) for b in range(7) if 2 * k + a + b <= n)
        assert len(enumerate_indices(par, n)) == brute


def test_taylor_examples(lang):
    u = DerivativeOracle(lang, 6, function=PolyFunction.constant(0, 2) + X(1, 2))
    s, xi = Fraction(3, 8), [Fraction(5, 4), Fraction(-7, 8)]
    T2 = taylor_polynomial(lang, u, 2, (s, xi))
    assert T2 == xi[1] + xi[0] * (T(2) - s)
    T0 = taylor_polynomial(lang, u, 0, (s, xi))
    assert T0 == PolyFunction.constant(xi[1], 2)
    sq = DerivativeOracle(lang, 6, function=X(0, 2) ** 2)
    assert taylor_polynomial(lang, sq, 2, (s, xi)) == X(0, 2) ** 2
    with pytest.raises(IncompleteOracle):
        taylor_polynomial(lang, DerivativeOracle(lang, 1, function=X(1, 2)), 2, (s, xi))


def test_exchange_examples(lang):
    rep = check_exchange_identities(lang, X(1, 2), 2)
    assert rep.max_discrepancy == 0
    with pytest.raises(OrderTooLow):
        check_exchange_identities(lang, X(1, 2), 0)


def test_taylor_eval_matches_expansion(deep, rng):
    p = random_polynomial(deep, rng, 5)
    o = DerivativeOracle(deep, 5, function=p)
    zeta = GroupPoint(0.25, np.array([0.5, -0.25, 0.125, 1.0]))
    T3 = taylor_polynomial(deep, o, 3, zeta)
    z = deep.random_points(rng, 30)
    zz = GroupPoint(np.full(30, zeta.t), np.tile(zeta.x, (30, 1)))
    np.testing.assert_allclose(taylor_eval(deep, o, 3, zz, z), T3(z.t, z.x), atol=1e-10)


def test_terms_roundtrip():
    p = PolyFunction.from_terms([{"k": 2, "beta": [1, 0], "coeff": 1.5}], 2)
    assert PolyFunction.from_terms(p.to_terms(), 2) == p


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31), n=st.integers(1, 6))
def test_exchange_random(seed, n):
    rng = np.random.default_rng(seed)
    g = build_group(BlockStructure((1, 1), ([[1]],)))
    p = random_polynomial(g, rng, n + 2)
    assert check_exchange_identities(g, p, n, rng=rng).max_discrepancy < 1e-9


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 31), n=st.integers(0, 5))
def test_reproduction_random(seed, n):
    rng = np.random.default_rng(seed)
    g = build_group(BlockStructure((2, 1, 1), ([[1, -1]], [[2]])))
    p = random_polynomial(g, rng, n)
    zeta = (Fraction(int(rng.integers(-8, 9)), 4), [Fraction(int(v), 4) for v in rng.integers(-8, 9, 4)])
    assert taylor_polynomial(g, DerivativeOracle(g, n, function=p), n, zeta) == p
