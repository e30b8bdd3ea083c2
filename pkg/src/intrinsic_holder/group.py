"""Homogeneous Lie group attached to a Kolmogorov operator.

The group lives on ``R x R^d`` with law ``(t, x) o (s, xi) = (s + t, xi + e^{sB} x)``,
where ``B`` is block sub-diagonal (all other blocks zero) and hence nilpotent.
Dilations act with weight 2 on time and ``2j + 1`` on the spatial coordinates of
layer ``j``.

All operations accept batched points: ``t`` of shape ``(N,)`` and ``x`` of
shape ``(N, d)``, or scalars/1-d arrays for a single point.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    FieldIndexOutOfRange,
    NonFinitePoint,
    NonMonotoneLayers,
    NonPositiveLambda,
    RankDeficientBlock,
    ValidationError,
)

#: Singular-value ratio below which a block is considered rank deficient.
RANK_RTOL = 1e-9

#: The drift field; coordinate fields are plain integer indices (0-based).
Y = "Y"

Field = Union[int, str]


class IntrinsicIndex(NamedTuple):
    """``Y^k d^beta``: ``k`` drift derivatives after the spatial partials ``beta``."""

    k: int
    beta: tuple


@dataclass(frozen=True)
class GroupPoint:
    """A point (or a batch of points) ``z = (t, x)``."""

    t: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 0:
            x = x.reshape(1)
        if x.shape[:-1] != t.shape:
            raise DimensionMismatch(
                f"time shape {t.shape} incompatible with space shape {x.shape}"
            )
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x))):
            raise NonFinitePoint("group points must have finite components")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)

    @classmethod
    def from_array(cls, arr) -> "GroupPoint":
        arr = np.asarray(arr, dtype=float)
        return cls(arr[..., 0], arr[..., 1:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.t[..., None], self.x], axis=-1)

    @property
    def dim(self) -> int:
        return self.x.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return self.t.shape

    def __getitem__(self, idx) -> "GroupPoint":
        return GroupPoint(self.t[idx], self.x[idx])

    def __len__(self):
        if self.t.ndim == 0:
            raise TypeError("single GroupPoint has no len()")
        return self.t.shape[0]

    def allclose(self, other: "GroupPoint", atol=1e-12, rtol=0.0) -> bool:
        return bool(
            np.allclose(self.t, other.t, atol=atol, rtol=rtol)
            and np.allclose(self.x, other.x, atol=atol, rtol=rtol)
        )


@dataclass(frozen=True)
class BlockStructure:
    """Layer dimensions ``(p_0, ..., p_r)`` and the sub-diagonal blocks ``B_1..B_r``.

    Block ``j`` has shape ``p_j x p_{j-1}``.  Validation happens in
    :func:`build_group`.
    """

    layer_dims: tuple
    blocks: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "layer_dims", tuple(int(p) for p in self.layer_dims))
        blocks = tuple(np.atleast_2d(np.asarray(b, dtype=float)) for b in self.blocks)
        for b in blocks:
            b.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_config(cls, cfg: dict) -> "BlockStructure":
        """Build from ``{"layer_dims": [...], "blocks": [[[...], ...], ...]}``.

        Each block is given row-major as a list of rows.
        """
        try:
            dims = cfg["layer_dims"]
        except (KeyError, TypeError) as exc:
            raise ValidationError("group config needs 'layer_dims'") from exc
        return cls(tuple(dims), tuple(cfg.get("blocks", ())))

    def to_config(self) -> dict:
        return {
            "layer_dims": list(self.layer_dims),
            "blocks": [b.tolist() for b in self.blocks],
        }

    def __eq__(self, other):
        if not isinstance(other, BlockStructure):
            return NotImplemented
        return self.layer_dims == other.layer_dims and len(self.blocks) == len(
            other.blocks
        ) and all(np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks))

    def __hash__(self):
        return hash((self.layer_dims, tuple(b.tobytes() for b in self.blocks)))


def build_group(structure: BlockStructure) -> "HomogeneousGroup":
    """Validate ``structure`` and assemble the group data."""
    dims = structure.layer_dims
    if len(dims) == 0:
        raise ValidationError("at least one layer is required")
    if any(p < 1 for p in dims):
        raise ValidationError(f"layer dimensions must be positive, got {dims}")
    for a, b in zip(dims, dims[1:]):
        if b > a:
            raise NonMonotoneLayers(f"layer dimensions must be non-increasing, got {dims}")
    r = len(dims) - 1
    if len(structure.blocks) != r:
        raise ValidationError(f"expected {r} blocks for {len(dims)} layers, got {len(structure.blocks)}")
    for j, blk in enumerate(structure.blocks, start=1):
        want = (dims[j], dims[j - 1])
        if blk.shape != want:
            raise DimensionMismatch(f"block {j} has shape {blk.shape}, expected {want}")
        if not np.all(np.isfinite(blk)):
            raise ValidationError(f"block {j} has non-finite entries")
        sv = np.linalg.svd(blk, compute_uv=False)
        if sv.size < dims[j] or sv[0] == 0.0 or sv[dims[j] - 1] <= RANK_RTOL * sv[0]:
            raise RankDeficientBlock(f"block {j} must have full row rank {dims[j]}")
    return HomogeneousGroup(structure)


class HomogeneousGroup:
    """The group ``G_B`` built from a validated :class:`BlockStructure`.

    Immutable after construction.  Use :func:`build_group` rather than calling
    the constructor directly.
    """

    def __init__(self, structure: BlockStructure):
        self.structure = structure
        dims = structure.layer_dims
        self.layer_dims = dims
        self.r = len(dims) - 1
        self.d = int(sum(dims))
        self.p0 = dims[0]
        self.bar_p = tuple(int(v) for v in np.cumsum(dims))
        starts = (0,) + self.bar_p[:-1]
        self.layer_slices = tuple(slice(a, b) for a, b in zip(starts, self.bar_p))

        layer = np.concatenate([np.full(p, j) for j, p in enumerate(dims)])
        self.layer_of = layer.astype(int)
        self.space_exponents = (2 * self.layer_of + 1).astype(int)
        self.dilation_exponents = np.concatenate([[2], self.space_exponents]).astype(int)
        self.Q = int(self.space_exponents.sum())

        B = np.zeros((self.d, self.d))
        for j, blk in enumerate(structure.blocks, start=1):
            B[self.layer_slices[j], self.layer_slices[j - 1]] = blk
        B.setflags(write=False)
        self.B = B
        # B^j / j! for j = 1..r; B^{r+1} = 0.
        terms = []
        P = np.eye(self.d)
        for j in range(1, self.r + 1):
            P = P @ B
            terms.append(P / factorial(j))
        self._exp_terms = tuple(terms)
        for arr in self.layer_of, self.space_exponents, self.dilation_exponents:
            arr.setflags(write=False)

    def __repr__(self):
        return f"HomogeneousGroup(layer_dims={self.layer_dims}, d={self.d}, Q={self.Q})"

    @cached_property
    def B_exact(self) -> tuple:
        """``B`` as nested tuples of exact :class:`~fractions.Fraction` entries."""
        return tuple(tuple(Fraction(float(v)) for v in row) for row in self.B)

    # ----- matrix exponential -------------------------------------------------

    def exp_B(self, delta) -> np.ndarray:
        """``e^{delta B}`` by the finite series; batched over ``delta``."""
        delta = np.asarray(delta, dtype=float)
        out = np.broadcast_to(np.eye(self.d), delta.shape + (self.d, self.d)).copy()
        for j, term in enumerate(self._exp_terms, start=1):
            out += (delta ** j)[..., None, None] * term
        return out

    def _exp_apply(self, delta, x) -> np.ndarray:
        """``e^{delta B} x`` without forming the matrices."""
        delta = np.asarray(delta, dtype=float)
        x = np.asarray(x, dtype=float)
        acc = np.broadcast_to(x, np.broadcast_shapes(x.shape, delta.shape + (self.d,))).copy()
        y = x
        for j in range(1, self.r + 1):
            y = y @ self.B.T
            acc = acc + (delta ** j / factorial(j))[..., None] * y
        return acc

    def layerwise_exp_apply(self, delta: float, x) -> np.ndarray:
        """``e^{delta B} x`` assembled layer by layer from products of blocks.

        Independent of :meth:`exp_B`; used as a cross-check.
        """
        x = np.asarray(x, dtype=float)
        out = np.array(x, copy=True)
        blocks = self.structure.blocks
        for i in range(1, self.r + 1):
            for j in range(i):
                prod = np.eye(self.layer_dims[j])
                for k in range(j + 1, i + 1):
                    prod = blocks[k - 1] @ prod
                coef = delta ** (i - j) / factorial(i - j)
                out[..., self.layer_slices[i]] += coef * (x[..., self.layer_slices[j]] @ prod.T)
        return out

    # ----- group law ----------------------------------------------------------

    def _check(self, z: GroupPoint):
        if z.dim != self.d:
            raise DimensionMismatch(f"point has spatial dimension {z.dim}, group has d={self.d}")

    def identity(self) -> GroupPoint:
        return GroupPoint(0.0, np.zeros(self.d))

    def compose(self, z: GroupPoint, w: GroupPoint) -> GroupPoint:
        """``z o w = (s + t, xi + e^{sB} x)`` for ``z = (t, x)``, ``w = (s, xi)``."""
        self._check(z)
        self._check(w)
        return GroupPoint(z.t + w.t, w.x + self._exp_apply(w.t, z.x))

    def inverse(self, z: GroupPoint) -> GroupPoint:
        """``(t, x)^{-1} = (-t, -e^{-tB} x)``."""
        self._check(z)
        return GroupPoint(-z.t, -self._exp_apply(-z.t, z.x))

    def dilate(self, lam, z: GroupPoint) -> GroupPoint:
        lam = np.asarray(lam, dtype=float)
        if np.any(lam <= 0):
            raise NonPositiveLambda("dilation parameter must be positive")
        self._check(z)
        return GroupPoint(lam ** 2 * z.t, z.x * lam[..., None] ** self.space_exponents)

    def quasi_norm(self, z: GroupPoint) -> np.ndarray:
        """``|t|^{1/2} + sum_i |x_i|^{1/(2j_i + 1)}``."""
        self._check(z)
        return np.sqrt(np.abs(z.t)) + np.sum(
            np.abs(z.x) ** (1.0 / self.space_exponents), axis=-1
        )

    def b_length(self, beta: Sequence[int]) -> int:
        beta = np.asarray(beta, dtype=int)
        if beta.shape != (self.d,):
            raise DimensionMismatch(f"multi-index must have length {self.d}")
        if np.any(beta < 0):
            raise ValidationError("multi-index entries must be nonnegative")
        return int(beta @ self.space_exponents)

    def intrinsic_order(self, k: int, beta: Sequence[int]) -> int:
        return 2 * int(k) + self.b_length(beta)

    def field_weight(self, fld: Field) -> int:
        """Homogeneous degree of a field: 2 for ``Y``, ``2j+1`` for layer-``j`` partials."""
        if fld == Y:
            return 2
        return int(self.space_exponents[self._coord(fld)])

    def _coord(self, fld) -> int:
        if isinstance(fld, (bool, np.bool_)) or not isinstance(fld, (int, np.integer)):
            raise FieldIndexOutOfRange(f"unknown field {fld!r}")
        if not 0 <= fld < self.d:
            raise FieldIndexOutOfRange(f"coordinate field {fld} outside 0..{self.d - 1}")
        return int(fld)

    def flow(self, fld: Field, delta, z: GroupPoint) -> GroupPoint:
        """Integral curve of ``fld`` started at ``z`` after time ``delta``.

        ``fld`` is ``Y`` or a 0-based coordinate index.
        """
        self._check(z)
        delta = np.asarray(delta, dtype=float)
        if fld == Y:
            return GroupPoint(z.t + delta, self._exp_apply(delta, z.x))
        i = self._coord(fld)
        x = np.array(np.broadcast_to(z.x, np.broadcast_shapes(z.x.shape, delta.shape + (self.d,))))
        x[..., i] = x[..., i] + delta
        return GroupPoint(np.broadcast_to(z.t, x.shape[:-1]), x)

    # ----- helpers ------------------------------------------------------------

    def random_points(self, rng: np.random.Generator, n: int, scale: float = 1.0) -> GroupPoint:
        return GroupPoint(
            rng.uniform(-scale, scale, size=n), rng.uniform(-scale, scale, size=(n, self.d))
        )


def random_structure(
    rng: np.random.Generator, layer_dims: Sequence[int], integer: bool = False, low=-2.0, high=2.0
) -> BlockStructure:
    """Random admissible blocks, redrawn until every block has full row rank."""
    dims = tuple(layer_dims)
    blocks = []
    for j in range(1, len(dims)):
        shape = (dims[j], dims[j - 1])
        while True:
            if integer:
                blk = rng.integers(int(low), int(high) + 1, size=shape).astype(float)
            else:
                blk = rng.uniform(low, high, size=shape)
            sv = np.linalg.svd(blk, compute_uv=False)
            if sv[0] > 0 and sv[dims[j] - 1] > RANK_RTOL * sv[0]:
                break
        blocks.append(blk)
    return BlockStructure(dims, tuple(blocks))


def langevin() -> HomogeneousGroup:
    """The prototype ``B = [[0, 0], [1, 0]]``."""
    return build_group(BlockStructure((1, 1), ([[1.0]],)))
