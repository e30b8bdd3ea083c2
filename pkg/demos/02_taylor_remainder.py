"""Intrinsic Taylor polynomials and how fast their remainder decays.

For a smooth ``u`` the remainder ``u(z) - T_n u(zeta, z)`` shrinks like
``||zeta^{-1} o z||^{n+1}``; the printed ratios stay bounded as the points merge.
"""
import numpy as np

from intrinsic_holder import DerivativeOracle, GroupPoint, langevin, smooth_product, taylor_polynomial
from intrinsic_holder.poly import taylor_eval

g = langevin()
u = DerivativeOracle(g, 3, function=smooth_product(g.d, "sin(x1) + t*x2", 2.0))

zeta = GroupPoint(np.array([0.1]), np.array([[0.2, -0.3]]))
print("T_2 u at zeta:", taylor_polynomial(g, u, 2, (0.1, [0.2, -0.3])))

rng = np.random.default_rng(0)
direction = g.random_points(rng, 1, 1.0)
for n in (0, 1, 2):
    print(f"order n={n}")
    for r in (0.2, 0.1, 0.05, 0.025):
        w = g.dilate(r / g.quasi_norm(direction), direction)
        z = g.compose(zeta, w)
        err = abs(u.word(())(z.t, z.x)[0] - taylor_eval(g, u, n, zeta, z)[0])
        print(f"  ||zeta^-1 z|| = {r:<6}  |remainder| = {err:.3e}  ratio = {err / r ** (n + 1):.4f}")
