"""Differentiable test functions on ``R^{1+d}``.

Every function object here follows one small protocol:

* ``f(t, x)`` evaluates on arrays (``t`` of shape ``(N,)``, ``x`` of shape ``(N, d)``);
* ``f.derive(group, field)`` returns the derivative along ``Y`` or a coordinate
  partial as another function object.

:class:`~intrinsic_holder.poly.PolyFunction` implements the same protocol.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np
import sympy as sp

from .errors import DimensionMismatch, ValidationError
from .group import HomogeneousGroup, Y
from .poly import PolyFunction

_T = sp.Symbol("t", real=True)


def symbols(d: int):
    """The sympy symbols ``(t, x_1, ..., x_d)`` used by :class:`ExprFunction`."""
    return _T, tuple(sp.Symbol(f"x{i + 1}", real=True) for i in range(d))


class FunctionBase:
    """Arithmetic shared by the function classes (linear combinations only)."""

    d: int

    def __add__(self, other):
        return LinearCombination([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return LinearCombination([(1.0, self), (-1.0, other)])

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return LinearCombination([(float(c), self)])

    __rmul__ = __mul__

    def __neg__(self):
        return LinearCombination([(-1.0, self)])


class LinearCombination(FunctionBase):
    """``sum_j c_j f_j`` for functions sharing the same ``d``."""

    def __init__(self, parts):
        flat = []
        for c, f in parts:
            if isinstance(f, LinearCombination):
                flat.extend((c * c2, f2) for c2, f2 in f.parts)
            else:
                flat.append((float(c), f))
        dims = {f.d for _, f in flat}
        if len(dims) != 1:
            raise DimensionMismatch(f"cannot combine functions of dimensions {sorted(dims)}")
        self.parts = tuple(flat)
        self.d = dims.pop()

    def __call__(self, t, x):
        out = 0.0
        for c, f in self.parts:
            out = out + c * np.asarray(f(t, x), dtype=float)
        return np.broadcast_to(out, np.broadcast_shapes(np.shape(t), np.shape(x)[:-1])).astype(float)

    def derive(self, group, fld):
        return LinearCombination([(c, f.derive(group, fld)) for c, f in self.parts])

    def __repr__(self):
        return " + ".join(f"{c}*{f!r}" for c, f in self.parts)


class ExprFunction(FunctionBase):
    """A function given by a sympy expression in ``t, x1, ..., xd``.

    Derivatives are symbolic; numerical evaluation goes through ``lambdify``.
    """

    def __init__(self, expr, d: int, name: str | None = None):
        self.d = int(d)
        self.expr = sp.sympify(expr)
        self.name = name or str(self.expr)
        t, xs = symbols(self.d)
        free = self.expr.free_symbols - {t, *xs}
        if free:
            raise ValidationError(f"expression has unknown symbols {sorted(map(str, free))}")
        self._f = sp.lambdify((t, xs), self.expr, modules="numpy")

    def __call__(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise DimensionMismatch(f"expected {self.d} spatial coordinates, got {x.shape[-1]}")
        cols = tuple(x[..., i] for i in range(self.d))
        with np.errstate(all="ignore"):
            val = self._f(t, cols)
        return np.broadcast_to(np.asarray(val, dtype=float), np.broadcast_shapes(t.shape, x.shape[:-1])).copy()

    def derive(self, group: HomogeneousGroup, fld) -> "ExprFunction":
        t, xs = symbols(self.d)
        if fld == Y:
            expr = sp.diff(self.expr, t)
            for i in range(self.d):
                drift = sum(sp.Float(group.B[i, j]) * xs[j] for j in range(self.d) if group.B[i, j] != 0)
                if drift != 0:
                    expr += drift * sp.diff(self.expr, xs[i])
            label = f"Y[{self.name}]"
        else:
            expr = sp.diff(self.expr, xs[int(fld)])
            label = f"d{int(fld) + 1}[{self.name}]"
        return ExprFunction(expr, self.d, name=label)

    def __repr__(self):
        return f"ExprFunction({self.name})"


def bump_expr(d: int, radii: Sequence[float]):
    """``exp(1 - 1/(1 - rho^2))`` on ``rho < 1``, zero outside; equals 1 at the origin.

    ``rho^2 = (t/R_0)^2 + sum (x_i/R_i)^2``.
    """
    t, xs = symbols(d)
    radii = [sp.nsimplify(r) for r in radii]
    rho2 = (t / radii[0]) ** 2 + sum((xi / ri) ** 2 for xi, ri in zip(xs, radii[1:]))
    return sp.Piecewise((sp.exp(1 - 1 / (1 - rho2)), rho2 < 1), (0, True))


def bump(d: int, radius=2.0) -> ExprFunction:
    radii = [radius] * (d + 1) if np.isscalar(radius) else list(radius)
    return ExprFunction(bump_expr(d, radii), d, name=f"bump(R={radius})")


def abs_power(d: int, power, coord: int = 0, radius=2.0) -> ExprFunction:
    """``bump * |x_coord|^power`` (``coord`` 0-based)."""
    radii = [radius] * (d + 1) if np.isscalar(radius) else list(radius)
    _, xs = symbols(d)
    s = sp.nsimplify(power)
    return ExprFunction(bump_expr(d, radii) * sp.Abs(xs[coord]) ** s, d,
                        name=f"bump*|x{coord + 1}|^{power}")


def time_power(d: int, power, radius=2.0) -> ExprFunction:
    """``bump * |t|^power``."""
    radii = [radius] * (d + 1) if np.isscalar(radius) else list(radius)
    t, _ = symbols(d)
    s = sp.nsimplify(power)
    return ExprFunction(bump_expr(d, radii) * sp.Abs(t) ** s, d, name=f"bump*|t|^{power}")


def smooth_product(d: int, factor: str, radius=2.0) -> ExprFunction:
    """``bump * factor`` where ``factor`` is a sympy-parsable expression in ``t, x1..xd``."""
    radii = [radius] * (d + 1) if np.isscalar(radius) else list(radius)
    t, xs = symbols(d)
    local = {"t": t, **{str(s): s for s in xs}}
    expr = sp.sympify(factor, locals=local)
    return ExprFunction(bump_expr(d, radii) * expr, d, name=f"bump*({factor})")


def evaluate(f, t, x, threads: int = 1, chunk: int = 4096) -> np.ndarray:
    """Evaluate ``f`` on a batch, optionally split across a thread pool."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    n = t.shape[0] if t.ndim else 1
    if threads <= 1 or n <= chunk:
        return np.asarray(f(t, x), dtype=float)
    bounds = [(a, min(a + chunk, n)) for a in range(0, n, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda ab: np.asarray(f(t[ab[0]:ab[1]], x[ab[0]:ab[1]]), dtype=float), bounds))
    return np.concatenate(parts)


def as_function(obj, d: int):
    """Accept a function object, a :class:`PolyFunction` or a sympy expression."""
    if isinstance(obj, (PolyFunction, FunctionBase)) or hasattr(obj, "derive"):
        return obj
    if isinstance(obj, (sp.Expr, str)):
        return ExprFunction(obj, d)
    raise ValidationError(f"cannot interpret {obj!r} as a differentiable function")
