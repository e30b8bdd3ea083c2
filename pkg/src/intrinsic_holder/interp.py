"""K-functional upper bounds, rate fitting and the interpolation parameter map."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Sequence

import numpy as np

from .errors import (DegenerateAlpha, DegenerateData, EmptyGrid, IncompleteOracle, InvalidQuery,
                     NonPositiveLambda, OrderViolation)
from .functions import evaluate
from .group import GroupPoint, HomogeneousGroup, Y
from .holder import SamplingPlan, holder_norm
from .mollify import MollifiedFunction, MollifierSpec, QuadratureSpec, build_mollifier
from .oracle import CombinationOracle, FunctionOracle


# ----- log-log fits --------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    points: tuple
    slope: float
    intercept: float
    r_squared: float

    def to_dict(self) -> dict:
        return {"points": [list(p) for p in self.points], "slope": self.slope,
                "intercept": self.intercept, "r_squared": self.r_squared}


def rate_fit(points: Sequence[tuple]) -> RateFit:
    """Least-squares line through ``(log scale, log value)``."""
    pts = [(float(s), float(v)) for s, v in points]
    if len(pts) < 3:
        raise DegenerateData(f"need at least 3 points, got {len(pts)}")
    arr = np.array(pts)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DegenerateData("scales and values must be positive and finite")
    xs, ys = np.log(arr[:, 0]), np.log(arr[:, 1])
    if np.ptp(xs) == 0:
        raise DegenerateData("all scales coincide")
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot <= 1e-30 * max(1.0, float(np.sum(ys ** 2))) else 1.0 - ss_res / ss_tot
    return RateFit(tuple(pts), float(slope), float(intercept), float(min(1.0, max(0.0, r2))))


# ----- the parameter map ---------------------------------------------------------

@dataclass(frozen=True)
class InterpolationQuery:
    n1: int
    alpha1: float
    n2: int
    alpha2: float
    theta: float

    def __post_init__(self):
        if int(self.n1) != self.n1 or int(self.n2) != self.n2 or self.n1 < 0 or self.n2 < 0:
            raise InvalidQuery("orders must be nonnegative integers")
        for a in (self.alpha1, self.alpha2):
            if not 0 <= a <= 1:
                raise InvalidQuery(f"endpoint exponents must lie in [0, 1], got {a}")
        if not 0 < self.theta < 1:
            raise InvalidQuery(f"theta must lie in (0, 1), got {self.theta}")
        if self.n1 + self.alpha1 > self.n2 + self.alpha2:
            raise InvalidQuery("endpoints must satisfy n1 + alpha1 <= n2 + alpha2")


def theta_alpha_map(q: InterpolationQuery) -> tuple:
    """``(n, alpha)`` with ``n + alpha`` the ``theta``-convex combination of the endpoint orders.

    Arithmetic is exact in the binary value of each input.
    """
    lo = q.n1 + Fraction(q.alpha1)
    hi = q.n2 + Fraction(q.alpha2)
    total = lo + Fraction(q.theta) * (hi - lo)
    n = floor(total)
    alpha = total - n
    if alpha == 0:
        raise DegenerateAlpha(f"n + alpha = {total} is an integer, so alpha would be 0 or 1")
    return int(n), float(alpha)


# ----- K-functional --------------------------------------------------------------

@dataclass
class KCurve:
    """``K_hat`` on a lambda grid together with the per-decomposition norms it minimises."""

    lambdas: np.ndarray
    values: np.ndarray
    choice: list
    eps_grid: tuple
    rough_norms: np.ndarray  # est ||u - u_eps||_{C^{n1,0}} per eps
    smooth_norms: np.ndarray  # est ||u_eps||_{C^{n2,0}} per eps
    u_small: float
    u_large: float | None
    spaces: tuple
    meta: dict = field(default_factory=dict)

    def at(self, lam: float) -> float:
        return _k_min(self, np.array([lam]))[0][0]

    def rows(self, theta: float | None = None) -> list:
        out = []
        for lam, val, ch in zip(self.lambdas, self.values, self.choice):
            row = [float(lam), float(val), ch]
            if theta is not None:
                row.append(float(val / lam ** theta) if lam > 0 else float("nan"))
            out.append(row)
        return out


def _k_min(curve: KCurve, lambdas: np.ndarray):
    cands = [curve.rough_norms[None, :] + lambdas[:, None] * curve.smooth_norms[None, :]]
    labels = [f"eps={e!r}" for e in curve.eps_grid]
    cands.append(np.full((len(lambdas), 1), curve.u_small))
    labels.append("(u,0)")
    if curve.u_large is not None:
        cands.append(lambdas[:, None] * curve.u_large)
        labels.append("(0,u)")
    table = np.concatenate(cands, axis=1)
    idx = np.argmin(table, axis=1)
    return table[np.arange(len(lambdas)), idx], [labels[i] for i in idx]


def k_functional_curve(group: HomogeneousGroup, oracle, lambdas: Sequence[float], spaces: tuple,
                       eps_grid: Sequence[float], plan: SamplingPlan, phi: MollifierSpec | None = None,
                       quad: QuadratureSpec | None = None, taylor_order: int | None = None,
                       threads: int = 1) -> KCurve:
    """``K_hat(lambda)`` for every lambda, sharing one norm evaluation per ``eps``.

    ``spaces = (n1, n2)`` names the endpoints ``C^{n1,0}`` and ``C^{n2,0}``.
    The family is ``{(u - u_eps, u_eps)}`` plus ``(u, 0)``, and ``(0, u)`` when
    the oracle reaches order ``n2``.  ``u_eps`` uses the Taylor order
    ``taylor_order`` (default ``n1``).
    """
    n1, n2 = (int(v) for v in spaces)
    if n1 >= n2:
        raise OrderViolation(f"need n1 < n2, got {spaces}")
    eps_grid = tuple(float(e) for e in eps_grid)
    lambdas = np.asarray(lambdas, dtype=float)
    if not eps_grid or lambdas.size == 0:
        raise EmptyGrid("both the eps grid and the lambda grid must be nonempty")
    if np.any(lambdas < 0):
        raise NonPositiveLambda("lambda must be nonnegative")
    m = n1 if taylor_order is None else int(taylor_order)
    if oracle.order < max(m, n1):
        raise IncompleteOracle(f"oracle order {oracle.order} is below the small space order {max(m, n1)}")
    quad = quad or QuadratureSpec.default_for(group)
    phi = phi or build_mollifier(group, quad)
    rough, smooth = [], []
    for eps in eps_grid:
        ue = MollifiedFunction(group, oracle, m, eps, phi, quad)
        diff = CombinationOracle(group, [(1.0, oracle), (-1.0, ue)], n1)
        rough.append(holder_norm(group, diff, n1, 0.0, plan, threads=threads))
        smooth.append(holder_norm(group, FunctionOracle(group, ue, n2), n2, 0.0, plan, threads=threads))
    u_small = holder_norm(group, oracle, n1, 0.0, plan, threads=threads)
    u_large = holder_norm(group, oracle, n2, 0.0, plan, threads=threads) if oracle.order >= n2 else None
    if u_large is not None and not np.isfinite(u_large):
        u_large = None  # (0, u) is not an admissible decomposition
    curve = KCurve(lambdas, np.empty(0), [], eps_grid, np.array(rough), np.array(smooth),
                   u_small, u_large, (n1, n2), {"taylor_order": m})
    curve.values, curve.choice = _k_min(curve, lambdas)
    return curve


def k_functional_upper(group: HomogeneousGroup, oracle, lam: float, spaces: tuple,
                       eps_grid: Sequence[float], plan: SamplingPlan, **kwargs) -> float:
    """``K_hat(lambda, u; C^{n1,0}, C^{n2,0})``, an upper bound of the sampled K-functional."""
    if lam < 0:
        raise NonPositiveLambda("lambda must be nonnegative")
    return float(k_functional_curve(group, oracle, [lam], spaces, eps_grid, plan, **kwargs).values[0])


def curve_shape_defects(curve: KCurve) -> dict:
    """Worst violations of monotonicity and midpoint concavity on the lambda grid."""
    lam = curve.lambdas
    order = np.argsort(lam)
    lam, val = lam[order], curve.values[order]
    mono = float(max(0.0, np.max(val[:-1] - val[1:]))) if len(val) > 1 else 0.0
    mids = (lam[:-1] + lam[1:]) / 2
    if len(mids):
        at_mid, _ = _k_min(curve, mids)
        conc = float(max(0.0, np.max((val[:-1] + val[1:]) / 2 - at_mid)))
    else:
        conc = 0.0
    return {"monotonicity": mono, "concavity": conc}


# ----- interpolation inequality --------------------------------------------------

@dataclass
class InequalityReport:
    orders: tuple
    ratios: list
    norms: list
    witness_constant: float
    witness_index: int

    def to_dict(self) -> dict:
        return {"orders": list(self.orders), "ratios": self.ratios, "norms": self.norms,
                "witness_constant": self.witness_constant, "witness_index": self.witness_index}


def interpolation_inequality_check(group: HomogeneousGroup, oracles, n1: int, n: int, n2: int,
                                   plan: SamplingPlan, threads: int = 1) -> InequalityReport:
    """``||u||_n / (||u||_{n1}^{(n2-n)/(n2-n1)} ||u||_{n2}^{(n-n1)/(n2-n1)})`` for each oracle.

    All norms are sampled ``C^{.,0}`` estimates on ``plan``.  The witness
    constant is the largest ratio.
    """
    if not n1 < n < n2:
        raise OrderViolation(f"need n1 < n < n2, got {(n1, n, n2)}")
    if not isinstance(oracles, (list, tuple)):
        oracles = [oracles]
    if not oracles:
        raise EmptyGrid("no functions to check")
    a = (n2 - n) / (n2 - n1)
    b = (n - n1) / (n2 - n1)
    ratios, norms = [], []
    for o in oracles:
        if o.order < n2:
            raise IncompleteOracle(f"oracle order {o.order} is below n2 = {n2}")
        v1, v, v2 = (holder_norm(group, o, k, 0.0, plan, threads=threads) for k in (n1, n, n2))
        norms.append([v1, v, v2])
        denom = v1 ** a * v2 ** b
        ratios.append(float(v / denom) if denom > 0 else (0.0 if v == 0 else float("inf")))
    i = int(np.argmax(ratios))
    return InequalityReport((n1, n, n2), ratios, norms, float(ratios[i]), i)


# ----- consequences of membership in the interpolation space ---------------------

def increment_diagnostics(group: HomogeneousGroup, u, curve: KCurve, plan: SamplingPlan,
                          threads: int = 1) -> dict:
    """Largest ``|u(e^{delta X} z) - u(z)| / (2 K_hat(s))`` over the plan.

    ``s = |delta|`` for the partials and ``s = |delta|^{1/2}`` for ``Y``; the
    curve must have ``spaces = (0, 1)``.  Values above one measure how much the
    sampled norms undershoot the true ones.
    """
    if tuple(curve.spaces) != (0, 1):
        raise OrderViolation("increment bounds are stated for the pair (C^{0,0}, C^{1,0})")
    z = plan.base_points()
    deltas = plan.deltas()
    uz = evaluate(u, z.t, z.x, threads=threads)
    out = {}
    for fld in [Y] + list(range(group.p0)):
        zz = GroupPoint(np.repeat(z.t, len(deltas)), np.repeat(z.x, len(deltas), axis=0))
        dd = np.tile(deltas, len(z))
        moved = group.flow(fld, dd, zz)
        inc = np.abs(evaluate(u, moved.t, moved.x, threads=threads) - np.repeat(uz, len(deltas)))
        scale = np.abs(dd) ** (0.5 if fld == Y else 1.0)
        uniq, inv = np.unique(scale, return_inverse=True)
        k_vals, _ = _k_min(curve, uniq)
        ratio = inc / (2 * k_vals[inv])
        out["Y" if fld == Y else f"d{fld}"] = float(np.max(ratio))
    return out
