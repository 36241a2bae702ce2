"""Schatten p-norms for integer ``p >= 1`` and ``p = inf``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dense_core import as_matrix, svd


@dataclass(frozen=True, order=False)
class SchattenIndex:
    """Integer ``p >= 1`` or the operator-norm index ``INF`` (``value is None``)."""

    value: int | None = None

    def __post_init__(self):
        v = self.value
        if v is None:
            return
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
            raise ValueError(f"Schatten index must be an integer >= 1 or INF, got {v!r}")
        object.__setattr__(self, "value", int(v))

    @classmethod
    def parse(cls, p):
        """Accept a SchattenIndex, an int, ``math.inf`` or the strings 'inf'/'INF'/'2'."""
        if isinstance(p, cls):
            return p
        if isinstance(p, str):
            t = p.strip().lower()
            if t in ("inf", "infinity", "two", "spectral"):
                return INF
            if t in ("fro", "frobenius"):
                return cls(2)
            if t in ("nuc", "nuclear", "trace"):
                return cls(1)
            return cls(int(t))
        if isinstance(p, float):
            if math.isinf(p) and p > 0:
                return INF
            if p.is_integer():
                return cls(int(p))
            raise ValueError(f"non-integer Schatten index {p}")
        return cls(p)

    @property
    def is_inf(self):
        return self.value is None

    @property
    def is_even(self):
        return self.value is not None and self.value % 2 == 0

    def half(self):
        """Index ``p/2`` used by the Q-norm identity (``INF`` stays ``INF``)."""
        if self.is_inf:
            return self
        if not self.is_even:
            raise ValueError(f"p={self.value} is odd; p/2 is not an integer")
        return SchattenIndex(self.value // 2)

    def root(self, x):
        """``x ** (1/p)``, with ``x ** 0 = 1`` for ``INF``."""
        return 1.0 if self.is_inf else float(x) ** (1.0 / self.value)

    def __str__(self):
        return "inf" if self.is_inf else str(self.value)


INF = SchattenIndex(None)


def schatten_norm_of_singular_values(sigmas, p):
    """Schatten norm from a list of singular values.

    Sums ``(s_j / s_1) ** p`` and rescales by ``s_1`` so large ``p`` cannot
    overflow.
    """
    p = SchattenIndex.parse(p)
    s = np.asarray(sigmas, dtype=np.float64).ravel()
    if s.size == 0:
        return 0.0
    if np.any(s < 0):
        raise ValueError("singular values must be non-negative")
    top = float(s.max())
    if top == 0.0:
        return 0.0
    if p.is_inf:
        return top
    if p.value == 1:
        return float(np.sum(s))
    r = s / top
    return top * float(np.sum(r**p.value)) ** (1.0 / p.value)


def schatten_norm(a, p):
    """Schatten p-norm of a matrix, via :func:`dense_core.svd`.

    For ``p = 2`` the value is cross-checked against the entrywise Frobenius
    norm; a disagreement beyond ``1e-10`` relative signals a kernel bug.
    """
    p = SchattenIndex.parse(p)
    a = as_matrix(a)
    value = schatten_norm_of_singular_values(svd(a).singular_values, p)
    if p.value == 2:
        direct = float(np.sqrt(np.sum(a * a)))
        if abs(direct - value) > 1e-10 * max(1.0, direct):
            raise ArithmeticError(
                f"Frobenius cross-check failed: svd {value!r} vs entries {direct!r}"
            )
    return value


def two_norm(a):
    return schatten_norm(a, INF)


def frobenius_norm(a):
    return schatten_norm(a, 2)


def nuclear_norm(a):
    return schatten_norm(a, 1)
