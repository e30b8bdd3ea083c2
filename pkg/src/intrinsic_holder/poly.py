"""Exact sparse polynomials in ``(t, x_1, ..., x_d)`` and intrinsic Taylor polynomials.

Coefficients may be ``int``/:class:`~fractions.Fraction` (exact) or ``float``.
Exact coefficients stay exact through every operation as long as the group
matrix is taken in its exact form, which :func:`poly_Y` does automatically.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, prod
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, IncompleteOracle, IndexOutOfRange, OrderTooLow
from .group import GroupPoint, HomogeneousGroup, IntrinsicIndex, Y


def _is_exact(c) -> bool:
    return isinstance(c, Rational)


class PolyFunction:
    """Sparse polynomial ``sum c * t^k * x^beta``.

    Terms are keyed by exponent tuples ``(k, beta_1, ..., beta_d)``.  Zero
    coefficients are never stored.
    """

    __slots__ = ("d", "_terms")

    def __init__(self, d: int, terms: Mapping[tuple, object] | None = None):
        self.d = int(d)
        clean = {}
        for key, c in (terms or {}).items():
            key = tuple(int(e) for e in key)
            if len(key) != self.d + 1 or any(e < 0 for e in key):
                raise DimensionMismatch(f"bad exponent tuple {key} for d={self.d}")
            if c != 0:
                clean[key] = c
        self._terms = clean

    # ----- construction -------------------------------------------------------

    @classmethod
    def constant(cls, c, d: int) -> "PolyFunction":
        return cls(d, {(0,) * (d + 1): c})

    @classmethod
    def time(cls, d: int) -> "PolyFunction":
        return cls(d, {(1,) + (0,) * d: 1})

    @classmethod
    def coordinate(cls, i: int, d: int) -> "PolyFunction":
        if not 0 <= i < d:
            raise IndexOutOfRange(f"coordinate {i} outside 0..{d - 1}")
        key = [0] * (d + 1)
        key[i + 1] = 1
        return cls(d, {tuple(key): 1})

    @classmethod
    def monomial(cls, k: int, beta: Sequence[int], d: int, coeff=1) -> "PolyFunction":
        return cls(d, {(int(k),) + tuple(beta): coeff})

    @classmethod
    def from_terms(cls, terms: Iterable[Mapping], d: int) -> "PolyFunction":
        """Inverse of :meth:`to_terms`: ``[{"k": 0, "beta": [...], "coeff": c}, ...]``."""
        out = {}
        for term in terms:
            beta = tuple(term["beta"])
            if len(beta) != d:
                raise DimensionMismatch(f"beta {beta} has length {len(beta)}, expected {d}")
            key = (int(term.get("k", 0)),) + beta
            out[key] = out.get(key, 0) + term["coeff"]
        return cls(d, out)

    def to_terms(self) -> list:
        return [
            {"k": key[0], "beta": list(key[1:]), "coeff": float(c)}
            for key, c in sorted(self._terms.items())
        ]

    # ----- mapping-ish access -------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(sorted(self._terms.items()))

    def coeff(self, k: int, beta: Sequence[int]):
        return self._terms.get((int(k),) + tuple(beta), 0)

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self._terms.values())

    def intrinsic_degree(self, group: HomogeneousGroup) -> int:
        if not self._terms:
            return 0
        w = np.concatenate([[2], group.space_exponents])
        return max(int(np.dot(w, key)) for key in self._terms)

    # ----- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "PolyFunction":
        if isinstance(other, PolyFunction):
            if other.d != self.d:
                raise DimensionMismatch(f"cannot combine d={self.d} and d={other.d}")
            return other
        return PolyFunction.constant(other, self.d)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for key, c in other._terms.items():
            out[key] = out.get(key, 0) + c
        return PolyFunction(self.d, out)

    __radd__ = __add__

    def __neg__(self):
        return PolyFunction(self.d, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, PolyFunction):
            return PolyFunction(self.d, {k: c * other for k, c in self._terms.items()})
        other = self._coerce(other)
        out = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                key = tuple(a + b for a, b in zip(k1, k2))
                out[key] = out.get(key, 0) + c1 * c2
        return PolyFunction(self.d, out)

    __rmul__ = __mul__

    def __pow__(self, m: int):
        if not isinstance(m, (int, np.integer)) or m < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = PolyFunction.constant(1, self.d)
        base = self
        while m:
            if m & 1:
                result = result * base
            base = base * base
            m >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, PolyFunction):
            return NotImplemented
        return self.d == other.d and self._terms == other._terms

    def __hash__(self):
        return hash((self.d, frozenset(self._terms.items())))

    def max_coeff_diff(self, other: "PolyFunction") -> float:
        diff = self - other
        return max((abs(float(c)) for c in diff._terms.values()), default=0.0)

    def __repr__(self):
        if not self._terms:
            return "PolyFunction(0)"
        parts = []
        for key, c in sorted(self._terms.items()):
            mono = []
            if key[0]:
                mono.append("t" if key[0] == 1 else f"t^{key[0]}")
            for i, e in enumerate(key[1:], start=1):
                if e:
                    mono.append(f"x{i}" if e == 1 else f"x{i}^{e}")
            parts.append(f"{c}" + ("*" + "*".join(mono) if mono else ""))
        return "PolyFunction(" + " + ".join(parts) + ")"

    # ----- calculus -----------------------------------------------------------

    def partial(self, i: int) -> "PolyFunction":
        """Partial derivative in ``x_i`` (0-based)."""
        if not 0 <= i < self.d:
            raise IndexOutOfRange(f"coordinate {i} outside 0..{self.d - 1}")
        out = {}
        for key, c in self._terms.items():
            e = key[i + 1]
            if e:
                nk = list(key)
                nk[i + 1] -= 1
                out[tuple(nk)] = out.get(tuple(nk), 0) + c * e
        return PolyFunction(self.d, out)

    def dt(self) -> "PolyFunction":
        out = {}
        for key, c in self._terms.items():
            if key[0]:
                nk = (key[0] - 1,) + key[1:]
                out[nk] = out.get(nk, 0) + c * key[0]
        return PolyFunction(self.d, out)

    def Y(self, group: HomogeneousGroup) -> "PolyFunction":
        return poly_Y(group, self)

    def derive(self, group: HomogeneousGroup, fld) -> "PolyFunction":
        if fld == Y:
            return poly_Y(group, self)
        return self.partial(int(fld))

    # ----- evaluation ---------------------------------------------------------

    def __call__(self, t, x) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise DimensionMismatch(f"expected {self.d} spatial coordinates, got {x.shape[-1]}")
        out = np.zeros(np.broadcast_shapes(t.shape, x.shape[:-1]))
        for key, c in self._terms.items():
            val = float(c) * t ** key[0]
            for i, e in enumerate(key[1:]):
                if e:
                    val = val * x[..., i] ** e
            out = out + val
        return out

    def evaluate_exact(self, s, xi):
        """Exact value at a rational point; inputs are converted with ``Fraction``."""
        s = Fraction(s)
        xi = [Fraction(v) for v in xi]
        total = Fraction(0)
        for key, c in self._terms.items():
            term = Fraction(c) * s ** key[0]
            for v, e in zip(xi, key[1:]):
                if e:
                    term *= v ** e
            total += term
        return total


def poly_eval(p: PolyFunction, z: GroupPoint):
    if z.dim != p.d:
        raise DimensionMismatch(f"point dimension {z.dim} != polynomial dimension {p.d}")
    return p(z.t, z.x)


def poly_partial(p: PolyFunction, i: int) -> PolyFunction:
    return p.partial(i)


def poly_Y(group: HomogeneousGroup, p: PolyFunction) -> PolyFunction:
    """``<Bx, grad p> + dp/dt``, exact when ``p`` has exact coefficients."""
    if p.d != group.d:
        raise DimensionMismatch(f"polynomial has d={p.d}, group has d={group.d}")
    B = group.B_exact if p.is_exact else group.B
    nz = [(i, j, B[i][j]) for i in range(group.d) for j in range(group.d) if B[i][j] != 0]
    out = dict(p.dt()._terms)
    for key, c in p._terms.items():
        for i, j, bij in nz:
            e = key[i + 1]
            if not e:
                continue
            nk = list(key)
            nk[i + 1] -= 1
            nk[j + 1] += 1
            nk = tuple(nk)
            out[nk] = out.get(nk, 0) + c * e * bij
    return PolyFunction(p.d, out)


def enumerate_indices(group: HomogeneousGroup, n: int) -> list:
    """All ``IntrinsicIndex(k, beta)`` with ``2k + |beta|_B <= n``.

    Ordered by intrinsic order, then lexicographically by ``beta``, then ``k``.
    """
    if n < 0:
        return []
    w = [int(v) for v in group.space_exponents]
    betas = []

    def rec(i, budget, acc):
        if i == group.d:
            betas.append(tuple(acc))
            return
        for e in range(budget // w[i] + 1):
            acc.append(e)
            rec(i + 1, budget - e * w[i], acc)
            acc.pop()

    rec(0, n, [])
    out = []
    for beta in betas:
        bl = sum(e * wi for e, wi in zip(beta, w))
        for k in range((n - bl) // 2 + 1):
            out.append(IntrinsicIndex(k, beta))
    out.sort(key=lambda ix: (2 * ix.k + sum(e * wi for e, wi in zip(ix.beta, w)), ix.beta, ix.k))
    return out


def index_factorial(index: IntrinsicIndex) -> int:
    return factorial(index.k) * prod(factorial(b) for b in index.beta)


def _shift_polys(group: HomogeneousGroup, s, xi, exact: bool) -> list:
    """``x - e^{(t - s)B} xi`` as a list of ``d`` polynomials in ``(t, x)``."""
    d = group.d
    if exact:
        s = Fraction(s)
        xi = [Fraction(v) for v in xi]
        B = group.B_exact
    else:
        s = float(s)
        xi = [float(v) for v in xi]
        B = group.B
    tau = PolyFunction.time(d) - s
    # B^j xi / j! for j = 0..r
    vecs = [list(xi)]
    for j in range(1, group.r + 1):
        prev = vecs[-1]
        nxt = [sum(B[i][m] * prev[m] for m in range(d)) for i in range(d)]
        vecs.append([v / j for v in nxt])
    shifts = []
    for i in range(d):
        poly = PolyFunction.coordinate(i, d)
        tau_pow = PolyFunction.constant(1, d)
        for j in range(group.r + 1):
            if vecs[j][i] != 0:
                poly = poly - tau_pow * vecs[j][i]
            tau_pow = tau_pow * tau
        shifts.append(poly)
    return shifts


def taylor_polynomial(group: HomogeneousGroup, oracle, n: int, zeta, exact: bool | None = None) -> PolyFunction:
    """Intrinsic Taylor polynomial of order ``n`` around ``zeta``, expanded in ``z = (t, x)``.

    ``zeta`` is a single :class:`GroupPoint` or an ``(s, xi)`` pair.  With
    ``exact=True`` (the default when the oracle is polynomial with exact
    coefficients) the expansion is carried out in rationals; float inputs are
    converted exactly.
    """
    if oracle.order < n:
        raise IncompleteOracle(f"oracle of order {oracle.order} cannot build T_{n}")
    if isinstance(zeta, GroupPoint):
        s, xi = float(zeta.t), [float(v) for v in zeta.x]
    else:
        s, xi = zeta
    if exact is None:
        exact = oracle.is_exact
    d = group.d
    if len(xi) != d:
        raise DimensionMismatch(f"expansion point has dimension {len(xi)}, group has d={d}")
    shifts = _shift_polys(group, s, xi, exact)
    tau = PolyFunction.time(d) - (Fraction(s) if exact else float(s))
    power_cache = {}

    def power(i, e):
        if (i, e) not in power_cache:
            base = tau if i < 0 else shifts[i]
            power_cache[(i, e)] = base ** e
        return power_cache[(i, e)]

    total = PolyFunction(d)
    for index in enumerate_indices(group, n):
        c = oracle.value(index, s, xi, exact=exact)
        if c == 0:
            continue
        fact = index_factorial(index)
        c = Fraction(c) / fact if exact else float(c) / fact
        term = power(-1, index.k) * c
        for i, e in enumerate(index.beta):
            if e:
                term = term * power(i, e)
        total = total + term
    return total


def taylor_eval(group: HomogeneousGroup, oracle, n: int, zeta: GroupPoint, z: GroupPoint) -> np.ndarray:
    """Pointwise ``T_n u(zeta, z)`` using ``T_n u(zeta, z) = sum c(zeta) m(zeta^{-1} o z)``.

    Vectorised over matching batches of ``zeta`` and ``z``.
    """
    if oracle.order < n:
        raise IncompleteOracle(f"oracle of order {oracle.order} cannot build T_{n}")
    w = group.compose(group.inverse(zeta), z)
    total = np.zeros(np.broadcast_shapes(zeta.t.shape, z.t.shape))
    for index in enumerate_indices(group, n):
        c = oracle[index](zeta.t, zeta.x)
        mono = w.t ** index.k
        for i, e in enumerate(index.beta):
            if e:
                mono = mono * w.x[..., i] ** e
        total = total + c * mono / index_factorial(index)
    return total


@dataclass
class ExchangeReport:
    """Outcome of :func:`check_exchange_identities`."""

    max_discrepancy: float
    partial_discrepancy: float
    drift_discrepancy: float | None
    n: int
    points: list


def check_exchange_identities(group: HomogeneousGroup, p: PolyFunction, n: int, points=None,
                              rng: np.random.Generator | None = None, n_points: int = 2,
                              denominator: int = 8) -> ExchangeReport:
    """Verify ``d_i T_n u = T_{n-1}(d_i u)`` (``i < p_0``) and ``Y T_n u = T_{n-2}(Y u)``.

    Both sides are expanded as polynomials in ``z`` around random dyadic points
    ``zeta`` (exactly representable, so the check is exact when ``p`` is).
    The drift identity is skipped for ``n < 2``.
    """
    from .oracle import DerivativeOracle

    if n < 1:
        raise OrderTooLow("the exchange identities need n >= 1")
    if points is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        points = [
            (int(rng.integers(-3 * denominator, 3 * denominator + 1)) / denominator,
             [int(v) / denominator for v in rng.integers(-3 * denominator, 3 * denominator + 1, size=group.d)])
            for _ in range(n_points)
        ]
    u = DerivativeOracle(group, n, function=p)
    partial_err = 0.0
    drift_err = None
    for s, xi in points:
        Tn = taylor_polynomial(group, u, n, (s, xi))
        for i in range(group.p0):
            lhs = Tn.partial(i)
            rhs = taylor_polynomial(group, DerivativeOracle(group, n - 1, function=p.partial(i)), n - 1, (s, xi))
            partial_err = max(partial_err, lhs.max_coeff_diff(rhs))
        if n >= 2:
            lhs = poly_Y(group, Tn)
            rhs = taylor_polynomial(group, DerivativeOracle(group, n - 2, function=poly_Y(group, p)), n - 2, (s, xi))
            drift_err = max(drift_err or 0.0, lhs.max_coeff_diff(rhs))
    return ExchangeReport(
        max_discrepancy=max(partial_err, drift_err or 0.0),
        partial_discrepancy=partial_err,
        drift_discrepancy=drift_err,
        n=n,
        points=list(points),
    )


def random_polynomial(group: HomogeneousGroup, rng: np.random.Generator, max_degree: int,
                      n_terms: int = 6, coeff_range: int = 5) -> PolyFunction:
    """Random integer-coefficient polynomial with monomials of intrinsic degree ``<= max_degree``."""
    pool = enumerate_indices(group, max_degree)
    picks = rng.choice(len(pool), size=min(n_terms, len(pool)), replace=False)
    terms = {}
    for j in picks:
        ix = pool[int(j)]
        c = int(rng.integers(-coeff_range, coeff_range + 1)) or 1
        terms[(ix.k,) + tuple(ix.beta)] = c
    return PolyFunction(group.d, terms)


__all__ = [
    "PolyFunction",
    "poly_eval",
    "poly_partial",
    "poly_Y",
    "enumerate_indices",
    "index_factorial",
    "taylor_polynomial",
    "taylor_eval",
    "check_exchange_identities",
    "ExchangeReport",
    "random_polynomial",
]
