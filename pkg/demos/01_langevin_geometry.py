"""Walk through the Langevin group: composition, dilations and the quasi-norm.

Run with ``python3 demos/01_langevin_geometry.py``.
"""
import numpy as np

from intrinsic_holder import GroupPoint, Y, langevin

g = langevin()
print(f"Langevin group: d={g.d}, homogeneous dimension Q={g.Q}")

z = GroupPoint(np.array([0.5]), np.array([[1.0, -2.0]]))
w = GroupPoint(np.array([0.25]), np.array([[-0.5, 0.0]]))
print("z o w        =", g.compose(z, w))
print("w o z        =", g.compose(w, z), "(the law is not commutative)")
print("z o z^{-1}   =", g.compose(z, g.inverse(z)))

# Dilations scale t by lam^2, x_1 by lam and x_2 by lam^3, so the quasi-norm is 1-homogeneous.
for lam in (0.5, 2.0, 10.0):
    ratio = g.quasi_norm(g.dilate(lam, z))[0] / g.quasi_norm(z)[0]
    print(f"||D_{lam} z|| / ||z|| = {ratio:.12f}")

# Moving along Y for time delta shifts t and drags x_2 by delta * x_1.
moved = g.flow(Y, 0.1, z)
print("flow of Y for 0.1 from z:", moved)
print("distance travelled:", g.quasi_norm(g.compose(g.inverse(z), moved))[0], "= sqrt(0.1) =", np.sqrt(0.1))
