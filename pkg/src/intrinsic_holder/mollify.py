"""Intrinsic mollification ``u_eps = T_n u(., z) *_B phi_eps``.

The convolution is always integrated in the transformed variable
``zbar = D_{1/eps}(zeta^{-1} o z)``, which ranges over the fixed support box of
``phi``; the Jacobian ``eps^{Q+2}`` cancels the normalisation exactly.

Derivatives of ``u_eps`` along a word of fields are obtained by Leibniz over
the product ``T_n u(zeta, z) * phi(D_{1/eps}(zeta^{-1} o z))``.  Both factors are
functions of ``zeta^{-1} o z`` (the Taylor polynomial is a combination of
monomials in it), and the fields are left invariant, so every derivative lands
on an explicit polynomial or on an explicit derivative of ``phi``.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from math import factorial
from typing import Sequence

import numpy as np
import sympy as sp
from numpy.polynomial import Polynomial
from scipy import special
from scipy.stats import qmc

from .errors import EpsilonOutOfRange, IncompleteOracle, QuadratureFailure, ValidationError
from .functions import FunctionBase
from .group import GroupPoint, HomogeneousGroup, IntrinsicIndex, Y
from .oracle import index_word
from .poly import PolyFunction, enumerate_indices, index_factorial

#: Fraction of the unit quasi-ball used by the support box.
SUPPORT_FILL = 0.95


# ----- one-dimensional profiles ------------------------------------------------

@dataclass(frozen=True)
class BumpProfile:
    """Even profile ``b`` on ``[-1, 1]`` with ``b(0) = 1`` and all needed derivatives.

    ``kind="poly"`` is ``(1 - s^2)^power``: ``C^{power-1}`` with bounded
    derivatives up to order ``power``, and polynomial, so Gauss rules integrate
    every derivative term exactly.  ``kind="exp"`` is ``exp(1 - 1/(1 - s^2))``,
    infinitely smooth but far harder to integrate once differentiated.
    """

    kind: str = "poly"
    power: int = 8

    def __post_init__(self):
        if self.kind not in ("poly", "exp"):
            raise ValidationError(f"unknown bump profile {self.kind!r}")
        if self.kind == "poly" and self.power < 1:
            raise ValidationError("polynomial bump needs power >= 1")

    @property
    def max_derivative(self) -> float:
        return float(self.power) if self.kind == "poly" else np.inf

    def __call__(self, s, m: int = 0) -> np.ndarray:
        if m > self.max_derivative:
            raise ValidationError(f"{self} has no bounded derivative of order {m}")
        s = np.asarray(s, dtype=float)
        inside = np.abs(s) < 1
        out = np.zeros_like(s)
        if np.any(inside):
            out[inside] = _profile_derivative(self.kind, self.power, m)(s[inside])
        return out

    def integral(self) -> float:
        if self.kind == "poly":
            return float(special.beta(0.5, self.power + 1))
        return _exp_bump_integral()

    def to_dict(self) -> dict:
        return asdict(self)


@lru_cache(maxsize=None)
def _profile_derivative(kind: str, power: int, m: int):
    if kind == "poly":
        p = Polynomial([1.0, 0.0, -1.0]) ** power
        return p.deriv(m) if m else p
    s = sp.Symbol("s", real=True)
    f = sp.lambdify(s, sp.diff(sp.exp(1 - 1 / (1 - s ** 2)), s, m), modules="numpy")

    def safe(v):
        with np.errstate(all="ignore"):
            val = np.asarray(f(v), dtype=float)
        return np.nan_to_num(val, nan=0.0, posinf=0.0, neginf=0.0)

    return safe


@lru_cache(maxsize=None)
def _exp_bump_integral() -> float:
    s, w = _tanh_rule(128, 3.0)
    return float(w @ BumpProfile("exp")(s))


def _tanh_rule(n: int, width: float):
    """Trapezoid rule in ``u`` after ``s = tanh(u)``; nodes in ``(-1, 1)``."""
    u = np.linspace(-width, width, n)
    h = u[1] - u[0]
    return np.tanh(u), h / np.cosh(u) ** 2


# ----- quadrature ----------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Rule on the mollifier's support box.

    ``method`` is ``"gauss"`` (tensor Gauss-Legendre, the default), ``"tanh"``
    (tensor trapezoid after ``s = tanh(u)``, suited to the exponential profile)
    or ``"qmc"`` (scrambled Sobol points, ``total_points`` rounded up to a
    power of two).
    """

    method: str = "gauss"
    points_per_axis: int | None = 16
    total_points: int | None = None
    tolerance: float = 1e-8
    tanh_width: float = 2.5
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("tanh", "gauss", "qmc"):
            raise ValidationError(f"unknown quadrature method {self.method!r}")
        if self.method == "qmc" and not self.total_points:
            raise ValidationError("qmc quadrature needs total_points")
        if self.method != "qmc" and (self.points_per_axis or 0) < 2:
            raise ValidationError("tensor rules need points_per_axis >= 2")

    @classmethod
    def default_for(cls, group: HomogeneousGroup) -> "QuadratureSpec":
        # Ten Gauss points already integrate the degree-16 default profile exactly.
        if group.d + 1 <= 4:
            return cls("gauss", 16)
        if group.d + 1 == 5:
            return cls("gauss", 10)
        return cls("qmc", None, total_points=2 ** 18, tolerance=1e-3)

    def refined(self) -> "QuadratureSpec":
        if self.method == "qmc":
            return QuadratureSpec("qmc", None, 2 * self.total_points, self.tolerance, self.tanh_width, self.seed)
        return QuadratureSpec(self.method, 2 * self.points_per_axis, None, self.tolerance, self.tanh_width, self.seed)

    def unit_nodes(self, dim: int):
        """Nodes in ``(-1, 1)^dim`` and weights (summing to ``2^dim`` on constants)."""
        if self.method == "qmc":
            m = int(np.ceil(np.log2(self.total_points)))
            pts = qmc.Sobol(dim, scramble=True, seed=self.seed).random_base2(m)
            return 2 * pts - 1, np.full(pts.shape[0], 2.0 ** dim / pts.shape[0])
        if self.method == "gauss":
            s, w = np.polynomial.legendre.leggauss(self.points_per_axis)
        else:
            s, w = _tanh_rule(self.points_per_axis, self.tanh_width)
        grids = np.meshgrid(*([s] * dim), indexing="ij")
        wgrids = np.meshgrid(*([w] * dim), indexing="ij")
        nodes = np.stack([g.ravel() for g in grids], axis=-1)
        weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
        return nodes, weights

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, cfg: dict) -> "QuadratureSpec":
        return cls(**cfg)


# ----- the mollifier -------------------------------------------------------------

@dataclass(frozen=True)
class MollifierSpec:
    """``phi(tau, y) = c * b(tau/h_0) * prod_i b(y_i/h_i)`` for a :class:`BumpProfile` ``b``."""

    half_widths: tuple
    normalization: float
    profile: BumpProfile = BumpProfile()
    nodes: np.ndarray = field(default=None, repr=False, compare=False)
    weights: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.half_widths)

    def __call__(self, tau, y) -> np.ndarray:
        return self.derivative({(0,) * self.dim: 1.0}, tau, y)

    def derivative(self, expansion: dict, tau, y) -> np.ndarray:
        """Evaluate ``sum_gamma P_gamma * d^gamma phi`` (``gamma`` over ``(tau, y)``)."""
        tau = np.asarray(tau, dtype=float)
        y = np.asarray(y, dtype=float)
        h = np.asarray(self.half_widths)
        coords = np.concatenate([tau[..., None], y], axis=-1) / h
        out = np.zeros(coords.shape[:-1])
        cache = {}
        for gamma, coef in expansion.items():
            val = np.full(coords.shape[:-1], self.normalization)
            for a, m in enumerate(gamma):
                if (a, m) not in cache:
                    cache[(a, m)] = self.profile(coords[..., a], m) / h[a] ** m
                val = val * cache[(a, m)]
            if isinstance(coef, PolyFunction):
                val = val * coef(tau, y)
            else:
                val = val * float(coef)
            out = out + val
        return out

    def integral(self) -> float:
        """Quadrature value of ``int phi`` on this spec's rule."""
        return float(self.weights @ self(self.nodes[:, 0], self.nodes[:, 1:]))

    def to_dict(self) -> dict:
        return {"half_widths": list(self.half_widths), "normalization": self.normalization,
                "profile": self.profile.to_dict()}


def build_mollifier(group: HomogeneousGroup, quad: QuadratureSpec | None = None,
                    profile: BumpProfile | None = None, budget: Sequence[float] | None = None) -> MollifierSpec:
    """Tensor bump supported in a box inside ``{||z||_B <= 1}``, with unit integral.

    The quasi-norm budget is split over ``(t, x_1, ..., x_d)`` in proportion to
    ``budget`` (equal shares by default).  The constant ``c`` makes the rule's own integral exactly one; a
    :class:`QuadratureFailure` is raised when the refined rule disagrees by
    more than ``quad.tolerance``.
    """
    quad = quad or QuadratureSpec.default_for(group)
    profile = profile or BumpProfile()
    weights = np.ones(group.d + 1) if budget is None else np.asarray(budget, dtype=float)
    if weights.shape != (group.d + 1,) or np.any(weights <= 0):
        raise ValidationError(f"budget needs {group.d + 1} positive entries")
    share = SUPPORT_FILL * weights / weights.sum()
    h = share ** np.concatenate([[2.0], group.space_exponents.astype(float)])
    corner = GroupPoint(h[0], h[1:])
    if not group.quasi_norm(corner) < 1:
        raise ValidationError("support box escapes the unit quasi-ball")

    def raw_integral(q):
        unit, w = q.unit_nodes(group.d + 1)
        vals = np.prod(profile(unit), axis=-1)
        return unit * h, w * np.prod(h), float((w * np.prod(h)) @ vals)

    nodes, weights, total = raw_integral(quad)
    if not total > 0:
        raise QuadratureFailure("rule misses the mollifier's support entirely")
    if quad.method != "qmc" or quad.total_points <= 2 ** 18:
        _, _, finer = raw_integral(quad.refined())
        if abs(finer / total - 1.0) > quad.tolerance:
            raise QuadratureFailure(f"normalisation not stable under refinement: {total!r} vs {finer!r}")
    return MollifierSpec(tuple(float(v) for v in h), 1.0 / total, profile, nodes, weights)


# ----- exact derivatives of phi along words of fields --------------------------

def phi_word_expansion(group: HomogeneousGroup, word: Sequence) -> dict:
    """``W phi`` as ``{gamma: PolyFunction}`` meaning ``sum_gamma P_gamma(tau, y) d^gamma phi``.

    ``gamma`` indexes Euclidean derivatives in ``(tau, y_1, ..., y_d)``.
    """
    d = group.d
    one = PolyFunction.constant(1.0, d)
    exp = {(0,) * (d + 1): one}
    coords = [PolyFunction.coordinate(j, d) for j in range(d)]
    for fld in word:
        new: dict = {}

        def add(g, p):
            cur = new.get(g)
            new[g] = p if cur is None else cur + p

        for gamma, P in exp.items():
            if fld == Y:
                add(gamma, P.Y(group) if len(P) else P)
                g = list(gamma)
                g[0] += 1
                add(tuple(g), P)
                for i in range(d):
                    drift = None
                    for j in range(d):
                        if group.B[i, j] != 0:
                            term = coords[j] * float(group.B[i, j])
                            drift = term if drift is None else drift + term
                    if drift is not None:
                        g = list(gamma)
                        g[i + 1] += 1
                        add(tuple(g), P * drift)
            else:
                i = int(fld)
                add(gamma, P.partial(i))
                g = list(gamma)
                g[i + 1] += 1
                add(tuple(g), P)
        exp = {g: p for g, p in new.items() if len(p)}
    return exp


def word_weight(group: HomogeneousGroup, word: Sequence) -> int:
    return sum(group.field_weight(f) for f in word)


def _subwords(word: tuple):
    m = len(word)
    for mask in itertools.product((False, True), repeat=m):
        on_poly = tuple(f for f, b in zip(word, mask) if b)
        on_phi = tuple(f for f, b in zip(word, mask) if not b)
        yield on_poly, on_phi


# ----- the approximation ---------------------------------------------------------

class MollifiedFunction(FunctionBase):
    """``W u_eps^{(n)}`` for a word ``W`` of fields (empty word: ``u_eps`` itself).

    Follows the function protocol, so it can be fed back to :mod:`holder`.
    """

    def __init__(self, group: HomogeneousGroup, oracle, n: int, eps: float, phi: MollifierSpec,
                 quad: QuadratureSpec | None = None, word: Sequence = (), chunk_elems: int = 400_000):
        if not 0 < eps <= 1:
            raise EpsilonOutOfRange(f"eps must lie in (0, 1], got {eps}")
        if oracle.order < n:
            raise IncompleteOracle(f"oracle of order {oracle.order} cannot build T_{n}")
        if phi.nodes is None:
            raise ValidationError("mollifier has no quadrature nodes; use build_mollifier")
        self.group = group
        self.oracle = oracle
        self.n = int(n)
        self.eps = float(eps)
        self.phi = phi
        self.quad = quad
        self.word = tuple(word)
        self.d = group.d
        self.chunk_elems = chunk_elems
        self.indices = enumerate_indices(group, self.n)
        self._kernel = None

    def derive(self, group, fld) -> "MollifiedFunction":
        return MollifiedFunction(self.group, self.oracle, self.n, self.eps, self.phi, self.quad,
                                 self.word + (fld,), self.chunk_elems)

    def _prepare(self):
        if self._kernel is not None:
            return self._kernel
        g = self.group
        nodes, weights = self.phi.nodes, self.phi.weights
        zbar = GroupPoint(nodes[:, 0], nodes[:, 1:])
        w = g.dilate(self.eps, zbar)
        w_inv = g.inverse(w)
        # G[index, node] collects everything except the Taylor coefficients.
        G = np.zeros((len(self.indices), len(weights)))
        phi_cache = {}
        for on_poly, on_phi in _subwords(self.word):
            if on_phi not in phi_cache:
                expansion = phi_word_expansion(g, on_phi)
                scale = self.eps ** (-word_weight(g, on_phi))
                phi_cache[on_phi] = scale * self.phi.derivative(expansion, zbar.t, zbar.x)
            phi_vals = phi_cache[on_phi]
            for r, ix in enumerate(self.indices):
                mono = PolyFunction.monomial(ix.k, ix.beta, g.d, 1.0)
                for fld in on_poly:
                    mono = mono.derive(g, fld)
                    if not len(mono):
                        break
                if not len(mono):
                    continue
                G[r] += mono(w.t, w.x) * phi_vals / index_factorial(ix)
        G *= weights
        keep = np.any(G != 0, axis=0)
        self._kernel = (w_inv[keep] if keep.any() else w_inv[:1], G[:, keep] if keep.any() else G[:, :1] * 0)
        return self._kernel

    def __call__(self, t, x) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        x = np.atleast_2d(x)
        w_inv, G = self._prepare()
        g = self.group
        m = len(w_inv)
        out = np.empty(t.shape[0])
        step = max(1, self.chunk_elems // max(m, 1))
        # e^{sB} x = sum_j s^j/j! B^j x, applied to every (point, node) pair.
        powers = [w_inv.t ** j / factorial(j) for j in range(g.r + 1)]
        for a in range(0, t.shape[0], step):
            tb, xb = t[a:a + step], x[a:a + step]
            Bx = [xb]
            for _ in range(g.r):
                Bx.append(Bx[-1] @ g.B.T)
            zt = tb[:, None] + w_inv.t[None, :]
            zx = w_inv.x[None, :, :] + sum(p[None, :, None] * v[:, None, :] for p, v in zip(powers, Bx))
            flat_t, flat_x = zt.ravel(), zx.reshape(-1, g.d)
            acc = np.zeros(tb.shape[0])
            for r, ix in enumerate(self.indices):
                c = np.asarray(self.oracle[ix](flat_t, flat_x), dtype=float).reshape(zt.shape)
                acc += (c * G[r][None, :]).sum(axis=1)
            out[a:a + step] = acc
        return out[0] if scalar else out

    def __repr__(self):
        return f"MollifiedFunction(n={self.n}, eps={self.eps}, word={self.word})"


def approximate(group: HomogeneousGroup, oracle, n: int, eps: float, z: GroupPoint,
                phi: MollifierSpec, quad: QuadratureSpec | None = None):
    """``u_eps^{(n)}(z)``; ``z`` may be batched."""
    return MollifiedFunction(group, oracle, n, eps, phi, quad)(z.t, z.x)


def approximate_derivative(group: HomogeneousGroup, oracle, n: int, eps: float, index, z: GroupPoint,
                           phi: MollifierSpec, quad: QuadratureSpec | None = None):
    """``Y^k d^beta u_eps^{(n)}(z)`` for an :class:`IntrinsicIndex`, or along an explicit word."""
    if isinstance(index, IntrinsicIndex) or (
        isinstance(index, tuple) and len(index) == 2 and isinstance(index[1], (tuple, list))
    ):
        k, beta = index
        word = index_word(IntrinsicIndex(int(k), tuple(beta)))
    else:
        word = tuple(index)
    return MollifiedFunction(group, oracle, n, eps, phi, quad, word)(z.t, z.x)


def normalization_integral(group: HomogeneousGroup, phi: MollifierSpec, eps: float, z: GroupPoint,
                           fd_step: float = 1e-5) -> float:
    """``int phi(D_{1/eps}(zeta^{-1} o z)) dzeta / eps^{Q+2}`` via the transformed variable.

    Each node ``zbar`` is mapped to ``zeta = z o (D_eps zbar)^{-1}``, the integrand
    is recomputed from ``zeta`` through the group operations, and the Jacobian
    of ``zbar -> zeta`` is taken by central differences rather than assumed.
    """
    if not 0 < eps <= 1:
        raise EpsilonOutOfRange(f"eps must lie in (0, 1], got {eps}")
    g = group
    nodes, weights = phi.nodes, phi.weights

    def to_zeta(arr):
        zbar = GroupPoint.from_array(arr)
        w = g.dilate(eps, zbar)
        zz = GroupPoint(np.broadcast_to(z.t, w.t.shape), np.broadcast_to(z.x, w.x.shape))
        return g.compose(zz, g.inverse(w)).as_array()

    zeta = GroupPoint.from_array(to_zeta(nodes))
    zz = GroupPoint(np.broadcast_to(z.t, zeta.t.shape), np.broadcast_to(z.x, zeta.x.shape))
    back = g.dilate(1.0 / eps, g.compose(g.inverse(zeta), zz))
    values = phi(back.t, back.x)
    D = g.d + 1
    jac = np.empty((nodes.shape[0], D, D))
    for a in range(D):
        step = np.zeros(D)
        step[a] = fd_step
        jac[:, :, a] = (to_zeta(nodes + step) - to_zeta(nodes - step)) / (2 * fd_step)
    det = np.abs(np.linalg.det(jac))
    return float(weights @ (values * det) / eps ** (g.Q + 2))
