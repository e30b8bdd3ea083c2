"""Sampled estimates of intrinsic Hölder seminorms and the recursive ``C^{n,alpha}_B`` norms.

The global sups in the definitions are replaced by maxima over a compact box of
base points and a bounded set of increments, so every value returned here is a
lower bound for the true quantity.
"""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import AlphaOutOfRange, EmptyPlan, FieldIndexOutOfRange, IncompleteOracle
from .functions import evaluate
from .group import GroupPoint, HomogeneousGroup, Y


@dataclass(frozen=True)
class SamplingPlan:
    """Where the sups are sampled.

    ``base_box`` lists ``(lo, hi)`` for ``t`` followed by each ``x_i``.  Increments
    are log-uniform in ``delta_range`` and used with both signs.  ``anchors`` are
    extra base points (rows ``(t, x_1, ..., x_d)``) always placed first.

    Plans with the same seed are nested: raising ``n_base`` or ``n_delta`` only
    appends samples, so estimates can only grow.
    """

    base_box: tuple
    delta_range: tuple = (1e-3, 1.0)
    n_base: int = 256
    n_delta: int = 16
    seed: int = 0
    anchors: tuple = ()

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.base_box)
        object.__setattr__(self, "base_box", box)
        object.__setattr__(self, "delta_range", tuple(float(v) for v in self.delta_range))
        object.__setattr__(self, "anchors", tuple(tuple(float(v) for v in row) for row in self.anchors))
        lo, hi = self.delta_range
        if not 0 < lo < hi:
            raise EmptyPlan(f"delta_range must satisfy 0 < min < max, got {self.delta_range}")
        if self.n_delta < 1 or (self.n_base < 1 and not self.anchors) or self.n_base < 0:
            raise EmptyPlan("plans need at least one base point and one increment")
        if any(a > b for a, b in box):
            raise EmptyPlan(f"empty base box {box}")

    @property
    def dim(self) -> int:
        return len(self.base_box) - 1

    def base_points(self) -> GroupPoint:
        ss = np.random.SeedSequence(self.seed)
        rng = np.random.default_rng(ss.spawn(2)[0])
        lo = np.array([a for a, _ in self.base_box])
        hi = np.array([b for _, b in self.base_box])
        pts = lo + (hi - lo) * rng.random((self.n_base, len(lo)))
        if self.anchors:
            pts = np.vstack([np.array(self.anchors, dtype=float).reshape(-1, len(lo)), pts])
        return GroupPoint.from_array(pts)

    def deltas(self) -> np.ndarray:
        ss = np.random.SeedSequence(self.seed)
        rng = np.random.default_rng(ss.spawn(2)[1])
        lo, hi = np.log(self.delta_range[0]), np.log(self.delta_range[1])
        mags = np.exp(lo + (hi - lo) * rng.random(self.n_delta))
        return np.concatenate([mags, -mags])

    @property
    def samples(self) -> int:
        return (self.n_base + len(self.anchors)) * 2 * self.n_delta

    def refined(self, factor: int = 2) -> "SamplingPlan":
        return replace(self, n_base=self.n_base * factor, n_delta=self.n_delta * factor)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["base_box"] = [list(b) for b in self.base_box]
        out["delta_range"] = list(self.delta_range)
        out["anchors"] = [list(a) for a in self.anchors]
        return out

    @classmethod
    def from_dict(cls, cfg: dict) -> "SamplingPlan":
        return cls(
            base_box=tuple(tuple(b) for b in cfg["base_box"]),
            delta_range=tuple(cfg.get("delta_range", (1e-3, 1.0))),
            n_base=int(cfg.get("n_base", 256)),
            n_delta=int(cfg.get("n_delta", 16)),
            seed=int(cfg.get("seed", 0)),
            anchors=tuple(tuple(a) for a in cfg.get("anchors", ())),
        )


@dataclass
class SeminormEstimate:
    value: float
    witness: tuple  # (GroupPoint, delta)
    samples: int
    trace: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        z, delta = self.witness
        return {
            "value": self.value,
            "witness": {"t": float(z.t), "x": [float(v) for v in z.x], "delta": float(delta)},
            "samples": self.samples,
        }


def _check_field(group: HomogeneousGroup, fld):
    if fld == Y:
        return
    if not isinstance(fld, (int, np.integer)) or not 0 <= fld < group.p0:
        raise FieldIndexOutOfRange(f"Hölder fields are Y and partials 0..{group.p0 - 1}, got {fld!r}")


def _increment_ratios(group, u, fld, alpha, z, u_z, deltas, threads):
    n, m = len(z), len(deltas)
    zz = GroupPoint(np.repeat(z.t, m), np.repeat(z.x, m, axis=0))
    dd = np.tile(deltas, n)
    moved = group.flow(fld, dd, zz)
    u_moved = evaluate(u, moved.t, moved.x, threads=threads)
    with np.errstate(invalid="ignore"):
        ratios = np.abs(u_moved - np.repeat(u_z, m)) / np.abs(dd) ** alpha
    ratios = np.where(np.isnan(ratios), np.inf, ratios)
    return ratios.reshape(n, m)


def seminorm(group: HomogeneousGroup, u, fld, alpha: float, plan: SamplingPlan,
             threads: int = 1, trace: bool = False) -> SeminormEstimate:
    """``max |u(e^{delta X} z) - u(z)| / |delta|^alpha`` over the plan's samples.

    ``fld`` is ``Y`` or a 0-based index below ``p_0``.  For ``Y`` the caller
    supplies the exponent actually wanted (e.g. ``alpha / 2``).
    """
    if not 0 < alpha <= 1:
        raise AlphaOutOfRange(f"seminorm exponent must lie in (0, 1], got {alpha}")
    _check_field(group, fld)
    z = plan.base_points()
    deltas = plan.deltas()
    if len(z) == 0 or deltas.size == 0:
        raise EmptyPlan("plan has no samples")
    u_z = evaluate(u, z.t, z.x, threads=threads)
    ratios = _increment_ratios(group, u, fld, alpha, z, u_z, deltas, threads)
    i, j = np.unravel_index(int(np.argmax(ratios)), ratios.shape)
    est = SeminormEstimate(float(ratios[i, j]), (z[int(i)], float(deltas[j])), ratios.size)
    if trace:
        rows = np.column_stack([
            np.repeat(z.as_array(), len(deltas), axis=0),
            np.tile(deltas, len(z)),
            ratios.ravel(),
        ])
        est.trace = rows
    return est


def write_trace_csv(path, est: SeminormEstimate, d: int):
    header = ["t"] + [f"x{i + 1}" for i in range(d)] + ["delta", "ratio"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in est.trace:
            w.writerow([repr(float(v)) for v in row])


class _NormEvaluator:
    """Evaluates the recursive norm while caching base-point values per word."""

    def __init__(self, group, oracle, plan, threads):
        self.group = group
        self.oracle = oracle
        self.z = plan.base_points()
        self.deltas = plan.deltas()
        self.threads = threads
        self._values = {}
        self.parts = {}

    def values(self, word):
        if word not in self._values:
            f = self.oracle.word(word)
            self._values[word] = evaluate(f, self.z.t, self.z.x, threads=self.threads)
        return self._values[word]

    def sup(self, word):
        v = np.abs(self.values(word))
        v = np.where(np.isnan(v), np.inf, v)
        val = float(v.max())
        self.parts[("sup",) + word] = val
        return val

    def semi(self, word, fld, expo):
        f = self.oracle.word(word)
        ratios = _increment_ratios(self.group, f, fld, expo, self.z, self.values(word), self.deltas, self.threads)
        val = float(ratios.max())
        self.parts[("semi", fld, expo) + word] = val
        return val

    def norm(self, word, n, alpha):
        gens = range(self.group.p0)
        total = self.sup(word)
        if n == 0:
            if alpha > 0:
                total += self.semi(word, Y, alpha / 2)
                total += sum(self.semi(word, i, alpha) for i in gens)
            return total
        if n == 1:
            total += self.semi(word, Y, (1 + alpha) / 2)
            total += sum(self.norm(word + (i,), 0, alpha) for i in gens)
            return total
        total += self.norm(word + (Y,), n - 2, alpha)
        total += sum(self.norm(word + (i,), n - 1, alpha) for i in gens)
        return total


def holder_norm(group: HomogeneousGroup, oracle, n: int, alpha: float, plan: SamplingPlan,
                threads: int = 1, details: bool = False):
    """Sampled ``||u||_{C^{n,alpha}_B}`` following the recursive definition.

    ``n = 0``: ``|u| + [u]_{Y, alpha/2} + sum_i [u]_{d_i, alpha}`` (sup only if ``alpha = 0``);
    ``n = 1``: ``|u| + [u]_{Y, (1+alpha)/2} + sum_i ||d_i u||_{C^{0,alpha}}``;
    ``n >= 2``: ``|u| + ||Y u||_{C^{n-2,alpha}} + sum_i ||d_i u||_{C^{n-1,alpha}}``.

    With ``details=True`` returns ``(value, parts)`` where ``parts`` maps each
    sup/seminorm term (keyed by its derivative word) to its value.
    """
    if not 0 <= alpha <= 1:
        raise AlphaOutOfRange(f"alpha must lie in [0, 1], got {alpha}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if oracle.order < n:
        raise IncompleteOracle(f"oracle of order {oracle.order} cannot supply C^{n} derivatives")
    ev = _NormEvaluator(group, oracle, plan, threads)
    value = ev.norm((), n, alpha)
    if details:
        return value, dict(ev.parts)
    return value


def holder_norms(group, oracle, orders: Sequence[tuple], plan: SamplingPlan, threads: int = 1) -> dict:
    """Several ``(n, alpha)`` norms sharing one set of cached evaluations."""
    ev = _NormEvaluator(group, oracle, plan, threads)
    return {(n, a): ev.norm((), n, a) for n, a in orders}
