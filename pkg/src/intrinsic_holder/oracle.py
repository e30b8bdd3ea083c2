"""Intrinsic derivative tables ``Y^k d^beta u`` up to a given intrinsic order."""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import IncompleteOracle, ValidationError
from .group import HomogeneousGroup, IntrinsicIndex, Y
from .poly import PolyFunction, enumerate_indices


def index_word(index: IntrinsicIndex) -> tuple:
    """Fields of ``Y^k d^beta`` in application order (partials first)."""
    word = []
    for i, e in enumerate(index.beta):
        word.extend([i] * int(e))
    word.extend([Y] * int(index.k))
    return tuple(word)


def word_index(word: Sequence, d: int) -> IntrinsicIndex | None:
    """Inverse of :func:`index_word`; ``None`` when a partial follows a ``Y``."""
    beta = [0] * d
    k = 0
    for fld in word:
        if fld == Y:
            k += 1
        elif k:
            return None
        else:
            beta[int(fld)] += 1
    return IntrinsicIndex(k, tuple(beta))


class DerivativeOracle:
    """Supplies ``Y^k d^beta u`` for every ``2k + |beta|_B <= order``.

    Either wraps a differentiable ``function`` (anything with ``derive``), in
    which case every word of fields up to ``order`` is available, or a user
    ``table`` mapping :class:`IntrinsicIndex` (or ``(k, beta)``) to callables
    ``f(t, x)``.  A table may be combined with a function; table entries win.
    """

    def __init__(self, group: HomogeneousGroup, order: int, function=None,
                 table: Mapping | None = None):
        if order < 0:
            raise ValidationError("oracle order must be nonnegative")
        if function is None and table is None:
            raise ValidationError("an oracle needs a function or a derivative table")
        self.group = group
        self.order = int(order)
        self.function = function
        self._table = {}
        for key, fn in (table or {}).items():
            k, beta = key
            self._table[IntrinsicIndex(int(k), tuple(int(b) for b in beta))] = fn
        self._words: dict = {(): function} if function is not None else {}
        if function is None:
            missing = [ix for ix in enumerate_indices(group, self.order) if ix not in self._table]
            if missing:
                raise IncompleteOracle(f"table lacks indices {missing[:4]}")

    @property
    def is_exact(self) -> bool:
        return isinstance(self.function, PolyFunction) and self.function.is_exact and not self._table

    def word_order(self, word: Sequence) -> int:
        return sum(self.group.field_weight(f) for f in word)

    def word(self, word: Sequence) -> Callable:
        """The derivative along ``word`` (``word[0]`` applied first)."""
        word = tuple(word)
        if self.word_order(word) > self.order:
            raise IncompleteOracle(
                f"word {word} has intrinsic order {self.word_order(word)} > oracle order {self.order}"
            )
        ix = word_index(word, self.group.d)
        if ix is not None and ix in self._table:
            return self._table[ix]
        if self.function is None:
            raise IncompleteOracle(f"word {word} is not in the derivative table")
        return self._derive_word(word)

    def _derive_word(self, word: tuple):
        if word not in self._words:
            parent = self._derive_word(word[:-1])
            self._words[word] = parent.derive(self.group, word[-1])
        return self._words[word]

    def __getitem__(self, index) -> Callable:
        k, beta = index
        ix = IntrinsicIndex(int(k), tuple(int(b) for b in beta))
        if len(ix.beta) != self.group.d:
            raise ValidationError(f"multi-index {ix.beta} has wrong length")
        return self.word(index_word(ix))

    @property
    def table(self) -> dict:
        return {ix: self[ix] for ix in enumerate_indices(self.group, self.order)}

    def value(self, index, s, xi, exact: bool = False):
        """Scalar ``Y^k d^beta u(s, xi)``; exact for polynomial oracles."""
        fn = self[index]
        if exact:
            if not isinstance(fn, PolyFunction):
                raise IncompleteOracle("exact evaluation needs a polynomial oracle")
            return fn.evaluate_exact(Fraction(s), [Fraction(v) for v in xi])
        return float(np.asarray(fn(np.asarray(float(s)), np.asarray(xi, dtype=float))))

    def __call__(self, t, x):
        return self.word(())(t, x)

    def with_order(self, order: int) -> "DerivativeOracle":
        return DerivativeOracle(self.group, order, function=self.function, table=self._table or None)

    def __repr__(self):
        return f"DerivativeOracle(order={self.order}, function={self.function!r})"


def along(group: HomogeneousGroup, f, word: Sequence):
    """Differentiate a function object along ``word``."""
    for fld in word:
        f = f.derive(group, fld)
    return f


class FunctionOracle:
    """Every word of a differentiable function, without caching or an index table."""

    def __init__(self, group: HomogeneousGroup, function, order: int):
        self.group = group
        self.function = function
        self.order = int(order)

    def word(self, word: Sequence):
        return along(self.group, self.function, word)

    def __call__(self, t, x):
        return self.function(t, x)


class CombinationOracle:
    """Word-wise ``sum_j c_j f_j`` where each ``f_j`` is an oracle or a differentiable function."""

    def __init__(self, group: HomogeneousGroup, parts: Sequence, order: int):
        self.group = group
        self.parts = list(parts)
        self.order = int(order)

    def word(self, word: Sequence):
        from .functions import LinearCombination

        return LinearCombination([
            (c, src.word(word) if callable(getattr(src, "word", None)) else along(self.group, src, word))
            for c, src in self.parts
        ])

    def __call__(self, t, x):
        return self.word(())(t, x)
