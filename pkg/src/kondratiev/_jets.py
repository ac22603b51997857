"""Truncated multivariate Taylor jets, vectorized over evaluation points.

A jet stores the Taylor coefficients ``c_alpha = d^alpha f(x) / alpha!`` for all
multi-indices with ``|alpha| <= order`` at a batch of points.  Arithmetic on jets
is exact forward-mode differentiation, so derivatives of composed radial
profiles come out of the chain and product rules without finite differences.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product as _cartesian
from math import factorial
from typing import Callable, Sequence

import numpy as np


@lru_cache(maxsize=None)
def multi_indices(d: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices of length ``d`` with total degree <= ``order``.

    Sorted by total degree, then lexicographically descending within a degree.
    """
    out = [a for a in _cartesian(range(order + 1), repeat=d) if sum(a) <= order]
    out.sort(key=lambda a: (sum(a), tuple(-x for x in a)))
    return tuple(out)


class JetSpace:
    """Index bookkeeping shared by all jets with the same (d, order)."""

    _cache: dict[tuple[int, int], "JetSpace"] = {}

    def __init__(self, d: int, order: int) -> None:
        self.d = d
        self.order = order
        self.indices = multi_indices(d, order)
        self.position = {a: i for i, a in enumerate(self.indices)}
        self.size = len(self.indices)
        self.degree = np.array([sum(a) for a in self.indices])
        self.factorial = np.array(
            [float(np.prod([factorial(k) for k in a])) for a in self.indices]
        )
        pairs = []
        for i, a in enumerate(self.indices):
            for j, b in enumerate(self.indices):
                c = tuple(x + y for x, y in zip(a, b))
                k = self.position.get(c)
                if k is not None:
                    pairs.append((k, i, j))
        self._pairs = sorted(pairs)

    @classmethod
    def get(cls, d: int, order: int) -> "JetSpace":
        key = (d, order)
        if key not in cls._cache:
            cls._cache[key] = cls(d, order)
        return cls._cache[key]

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        # accumulating row products in place avoids gathering all pair products at once
        shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
        out = np.zeros((self.size,) + shape)
        tmp = np.empty(shape)
        # coordinate jets are mostly zero rows; skipping them is a large win
        live_a = a.reshape(self.size, -1).any(axis=1)
        live_b = b.reshape(self.size, -1).any(axis=1)
        for k, i, j in self._pairs:
            if not (live_a[i] and live_b[j]):
                continue
            np.multiply(a[i], b[j], out=tmp)
            out[k] += tmp
        return out


class Jet:
    """Taylor jet of a scalar function at ``npts`` points."""

    __slots__ = ("space", "c")

    def __init__(self, space: JetSpace, coeffs: np.ndarray) -> None:
        self.space = space
        self.c = coeffs

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, space: JetSpace, value, npts: int) -> "Jet":
        c = np.zeros((space.size, npts))
        c[0] = value
        return cls(space, c)

    @classmethod
    def variable(cls, space: JetSpace, values: np.ndarray, axis: int) -> "Jet":
        c = np.zeros((space.size, values.shape[0]))
        c[0] = values
        if space.order >= 1:
            e = tuple(1 if k == axis else 0 for k in range(space.d))
            c[space.position[e]] = 1.0
        return cls(space, c)

    @classmethod
    def coordinates(cls, points: np.ndarray, order: int) -> list["Jet"]:
        space = JetSpace.get(points.shape[1], order)
        return [cls.variable(space, points[:, k], k) for k in range(points.shape[1])]

    # access -----------------------------------------------------------
    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    @property
    def npts(self) -> int:
        return self.c.shape[1]

    def derivative(self, alpha: Sequence[int]) -> np.ndarray:
        k = self.space.position[tuple(alpha)]
        return self.c[k] * self.space.factorial[k]

    def derivatives(self) -> np.ndarray:
        """All partial derivatives, rows ordered as ``space.indices``."""
        return self.c * self.space.factorial[:, None]

    def copy(self) -> "Jet":
        return Jet(self.space, self.c.copy())

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(self.space, other, self.npts)

    def __add__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return Jet(self.space, self.c + other.c)
        c = self.c.copy()
        c[0] = c[0] + other
        return Jet(self.space, c)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(self.space, -self.c)

    def __sub__(self, other) -> "Jet":
        return self + (-other)

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return Jet(self.space, self.space.multiply(self.c, other.c))
        return Jet(self.space, self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * other.pow(-1.0)
        return Jet(self.space, self.c / other)

    def __rtruediv__(self, other) -> "Jet":
        return self.pow(-1.0) * other

    def masked(self, mask: np.ndarray) -> "Jet":
        """Zero the jet wherever ``mask`` is False."""
        return Jet(self.space, np.where(mask[None, :], self.c, 0.0))

    # composition ------------------------------------------------------
    def compose(self, derivs: np.ndarray) -> "Jet":
        """Apply a univariate function given its derivatives at ``self.value``.

        ``derivs[k]`` holds ``f^(k)(value)`` for ``k = 0..order``.
        """
        order = self.space.order
        h = self.c.copy()
        h[0] = 0.0
        taylor = [derivs[k] / factorial(k) for k in range(order + 1)]
        acc = np.zeros_like(self.c)
        acc[0] = taylor[order]
        for k in range(order - 1, -1, -1):
            acc = self.space.multiply(acc, h)
            acc[0] = acc[0] + taylor[k]
        return Jet(self.space, acc)

    def exp(self) -> "Jet":
        e = np.exp(self.value)
        return self.compose(np.broadcast_to(e, (self.space.order + 1, self.npts)))

    def log(self) -> "Jet":
        x = self.value
        derivs = [np.log(x)]
        for k in range(1, self.space.order + 1):
            derivs.append((-1.0) ** (k - 1) * factorial(k - 1) / x**k)
        return self.compose(np.array(derivs))

    def pow(self, b: float) -> "Jet":
        x = self.value
        derivs = []
        coef = 1.0
        for k in range(self.space.order + 1):
            derivs.append(coef * x ** (b - k))
            coef *= b - k
        return self.compose(np.array(derivs))

    def sqrt(self) -> "Jet":
        return self.pow(0.5)

    def apply(self, fn: Callable[[np.ndarray, int], np.ndarray]) -> "Jet":
        """Compose with ``fn(values, order) -> array of derivatives``."""
        return self.compose(fn(self.value, self.space.order))


def sum_of_squares(coords: Sequence[Jet]) -> Jet:
    acc = coords[0] * coords[0]
    for x in coords[1:]:
        acc = acc + x * x
    return acc
