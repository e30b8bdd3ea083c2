"""Reusable numerical checks of the group structure and the Taylor machinery.

Every function returns plain floats (maximum errors or witness constants) so
callers decide on tolerances.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .group import GroupPoint, HomogeneousGroup, Y
from .oracle import DerivativeOracle
from .poly import (check_exchange_identities, enumerate_indices, random_polynomial, taylor_eval,
                   taylor_polynomial)


def _err(a: GroupPoint, b: GroupPoint) -> float:
    return float(max(np.max(np.abs(a.t - b.t)), np.max(np.abs(a.x - b.x))))


def group_axiom_errors(group: HomogeneousGroup, rng: np.random.Generator, n: int = 10_000,
                       scale: float = 2.0) -> dict:
    a, b, c = (group.random_points(rng, n, scale) for _ in range(3))
    e = GroupPoint(np.zeros(n), np.zeros((n, group.d)))
    ia = group.inverse(a)
    return {
        "associativity": _err(group.compose(group.compose(a, b), c), group.compose(a, group.compose(b, c))),
        "identity": max(_err(group.compose(a, e), a), _err(group.compose(e, a), a)),
        "inverse": max(_err(group.compose(a, ia), e), _err(group.compose(ia, a), e)),
        "inverse_involution": _err(group.inverse(ia), a),
    }


def nilpotency_residual(group: HomogeneousGroup) -> float:
    """``max |B^{r+1}|`` computed in exact rational arithmetic from the float entries."""
    B = [list(row) for row in group.B_exact]
    d = group.d
    P = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    for _ in range(group.r + 1):
        P = [[sum((P[i][k] * B[k][j] for k in range(d)), Fraction(0)) for j in range(d)] for i in range(d)]
    return float(max((abs(v) for row in P for v in row), default=0))


def determinant_error(group: HomogeneousGroup, rng: np.random.Generator, n: int = 1000,
                      delta_max: float = 10.0) -> float:
    deltas = rng.uniform(-delta_max, delta_max, n)
    return float(np.max(np.abs(np.linalg.det(group.exp_B(deltas)) - 1.0)))


def layerwise_flow_error(group: HomogeneousGroup, rng: np.random.Generator, n: int = 1000) -> float:
    worst = 0.0
    for _ in range(n):
        delta = float(rng.uniform(-3, 3))
        x = rng.uniform(-2, 2, group.d)
        worst = max(worst, float(np.max(np.abs(group.layerwise_exp_apply(delta, x) - group.exp_B(delta) @ x))))
    return worst


def flow_identity_errors(group: HomogeneousGroup, rng: np.random.Generator, n: int = 10_000) -> dict:
    """Dilation-flow commutation and left invariance of the flows, all fields."""
    z = group.random_points(rng, n, 1.0)
    w = group.random_points(rng, n, 1.0)
    lam = rng.uniform(0.25, 2.0, n)
    delta = rng.uniform(-1.0, 1.0, n)
    dil, inv = 0.0, 0.0
    winv = group.inverse(w)
    for fld in [Y] + list(range(group.d)):
        weight = group.field_weight(fld)
        lhs = group.dilate(lam, group.flow(fld, delta, z))
        rhs = group.flow(fld, delta * lam ** weight, group.dilate(lam, z))
        dil = max(dil, _err(lhs, rhs))
        lhs = group.compose(winv, group.flow(fld, delta, z))
        rhs = group.flow(fld, delta, group.compose(winv, z))
        inv = max(inv, _err(lhs, rhs))
    return {"dilation_flow": dil, "left_invariance": inv}


def quasi_norm_homogeneity_error(group: HomogeneousGroup, rng: np.random.Generator, n: int = 10_000) -> float:
    """Largest relative error of ``||D_lam z|| = lam ||z||``."""
    z = group.random_points(rng, n, 2.0)
    lam = np.exp(rng.uniform(np.log(0.1), np.log(10.0), n))
    lhs = group.quasi_norm(group.dilate(lam, z))
    rhs = lam * group.quasi_norm(z)
    return float(np.max(np.abs(lhs - rhs) / rhs))


def langevin_increment_error(group: HomogeneousGroup, rng: np.random.Generator, n: int = 10_000) -> float:
    """``||zeta^{-1} o z||`` against ``|t-s|^{1/2} + |x_1-xi_1| + |x_2 - xi_2 - (t-s) xi_1|^{1/3}``.

    Only meaningful for the Langevin group (``d = 2``, ``B = [[0, 0], [1, 0]]``).
    """
    z = group.random_points(rng, n, 2.0)
    zeta = group.random_points(rng, n, 2.0)
    got = group.quasi_norm(group.compose(group.inverse(zeta), z))
    dt = z.t - zeta.t
    want = (np.sqrt(np.abs(dt)) + np.abs(z.x[:, 0] - zeta.x[:, 0])
            + np.abs(z.x[:, 1] - zeta.x[:, 1] - dt * zeta.x[:, 0]) ** (1 / 3))
    return float(np.max(np.abs(got - want)))


def is_langevin(group: HomogeneousGroup) -> bool:
    return group.layer_dims == (1, 1) and np.array_equal(group.B, np.array([[0.0, 0.0], [1.0, 0.0]]))


def exchange_discrepancy(group: HomogeneousGroup, rng: np.random.Generator, n_polys: int = 102,
                         max_order: int = 6) -> dict:
    """Worst coefficient discrepancy of the exchange identities, per order."""
    per_order = {n: 0.0 for n in range(1, max_order + 1)}
    for j in range(n_polys):
        n = 1 + j % max_order
        p = random_polynomial(group, rng, n + 2, n_terms=6)
        rep = check_exchange_identities(group, p, n, rng=rng, n_points=1)
        per_order[n] = max(per_order[n], rep.max_discrepancy)
    return per_order


def reproduction_error(group: HomogeneousGroup, rng: np.random.Generator, n_polys: int = 30,
                       max_order: int = 6) -> float:
    """``T_n p(zeta, .) - p`` for random ``p`` of intrinsic degree ``<= n`` (exact coefficients)."""
    worst = 0.0
    for j in range(n_polys):
        n = 1 + j % max_order
        p = random_polynomial(group, rng, n, n_terms=5)
        s = int(rng.integers(-16, 17)) / 8
        xi = [int(v) / 8 for v in rng.integers(-16, 17, size=group.d)]
        T = taylor_polynomial(group, DerivativeOracle(group, n, function=p), n, (s, xi))
        worst = max(worst, T.max_coeff_diff(p))
    return worst


def remainder_witness(group: HomogeneousGroup, oracle, n: int, rng: np.random.Generator,
                      n_pairs: int = 10_000, box: float = 1.0, min_norm: float = 1e-2,
                      max_norm: float = 1.0) -> dict:
    """Largest ``|u(z) - T_n u(zeta, z)| / ||zeta^{-1} o z||^{n+1}`` over random pairs.

    ``zeta`` is uniform in ``[-box, box]^{1+d}`` and ``z = zeta o w`` where ``w``
    has quasi-norm log-uniform in ``[min_norm, max_norm]``.
    """
    zeta = group.random_points(rng, n_pairs, box)
    direction = group.random_points(rng, n_pairs, 1.0)
    target = np.exp(rng.uniform(np.log(min_norm), np.log(max_norm), n_pairs))
    w = group.dilate(target / group.quasi_norm(direction), direction)
    z = group.compose(zeta, w)
    taylor = taylor_eval(group, oracle, n, zeta, z)
    u = np.asarray(oracle(z.t, z.x), dtype=float)
    ratio = np.abs(u - taylor) / group.quasi_norm(w) ** (n + 1)
    i = int(np.argmax(ratio))
    return {"witness": float(ratio[i]), "pairs": int(n_pairs), "at_norm": float(target[i]),
            "indices": len(enumerate_indices(group, n))}
