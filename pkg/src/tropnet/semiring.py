"""Scalar arithmetic of the Maslov dequantization family S_h = (T, (+)_h, (x)_h).

T is the extended real line R u {-inf}.  For a finite parameter h > e the
tropical sum is ``log_h(h**a + h**b)``; the limit h -> +inf is ``max(a, b)``.
The tropical product is ordinary addition for every h.

All functions accept Python floats or numpy arrays and broadcast like numpy
ufuncs.  ``NEG_INF`` is the native ``-inf`` float; it is the additive zero and
the absorbing element of the product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import counters as ops
from .errors import DomainError

__all__ = [
    "NEG_INF",
    "ZERO",
    "ONE",
    "Hbar",
    "INFINITY",
    "as_hbar",
    "t_add",
    "t_mul",
    "t_sum",
    "dequantize",
    "quantize",
    "format_scalar",
    "parse_scalar",
]

NEG_INF = float("-inf")
ZERO = NEG_INF  # additive identity
ONE = 0.0  # multiplicative identity


@dataclass(frozen=True)
class Hbar:
    """Dequantization parameter: a finite ``h > e`` or ``math.inf`` for the limit."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v) or not (v > math.e):
            raise DomainError(f"hbar must satisfy hbar > e (got {self.value!r})")
        object.__setattr__(self, "value", v)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    @property
    def log(self) -> float:
        """Natural log of h (``inf`` in the limit)."""
        return math.log(self.value)

    def __str__(self) -> str:
        return "inf" if self.is_infinite else repr(self.value)


INFINITY = Hbar(math.inf)

HbarLike = Union[Hbar, float, int, None]


def as_hbar(hbar: HbarLike) -> Hbar:
    """Coerce ``None`` (limit), a number or an :class:`Hbar` to :class:`Hbar`."""
    if hbar is None:
        return INFINITY
    if isinstance(hbar, Hbar):
        return hbar
    return Hbar(float(hbar))


def _finite_hbar(hbar: HbarLike) -> Hbar:
    h = as_hbar(hbar)
    if h.is_infinite:
        raise DomainError("this map needs a finite hbar")
    return h


def _out(x):
    if isinstance(x, np.ndarray) and x.ndim == 0:
        return float(x)
    return x


def t_add(a, b, hbar: HbarLike = None):
    """Tropical sum ``a (+)_h b``.

    In the limit this is exactly ``max(a, b)``.  For finite h the maximum is
    factored out, ``max + log_h(1 + h**-(|a - b|))``, so large arguments never
    overflow.
    """
    h = as_hbar(hbar)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if h.is_infinite:
        return _out(ops.maximum(a, b))
    hi = ops.maximum(a, b)
    lo = ops.minimum(a, b)
    with np.errstate(invalid="ignore"):
        gap = ops.sub(lo, hi)  # <= 0; nan where both are -inf
        corr = ops.mul(np.log1p(np.exp(ops.mul(gap, h.log))), 1.0 / h.log)
        res = ops.add(hi, corr)
    res = np.where(np.isneginf(hi), NEG_INF, res)
    return _out(res)


def t_mul(a, b):
    """Tropical product ``a (x) b = a + b``; ``-inf`` absorbs."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    # -inf + finite is -inf natively; +inf never occurs in T
    return _out(ops.add(a, b))


def t_sum(values, hbar: HbarLike = None, axis: int = 0):
    """Left fold of :func:`t_add` along ``axis`` (``-inf`` for an empty axis)."""
    values = np.asarray(values, dtype=float)
    values = np.moveaxis(values, axis, 0)
    if values.shape[0] == 0:
        return _out(np.full(values.shape[1:], NEG_INF))
    acc = values[0]
    for v in values[1:]:
        acc = t_add(acc, v, hbar)
    return _out(np.asarray(acc))


def dequantize(x, hbar: HbarLike):
    """The semiring isomorphism ``x -> log_h(x)`` on nonnegative reals (0 maps to -inf)."""
    h = _finite_hbar(hbar)
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0):
        raise DomainError("dequantize is defined on nonnegative reals only")
    with np.errstate(divide="ignore"):
        res = np.log(x) / h.log
    return _out(res)


def quantize(a, hbar: HbarLike):
    """Inverse of :func:`dequantize`: ``a -> h**a`` with ``-inf -> 0``."""
    h = _finite_hbar(hbar)
    a = np.asarray(a, dtype=float)
    return _out(np.exp(a * h.log))


def format_scalar(x: float) -> str:
    """17-significant-digit text token; ``-inf`` for the tropical zero."""
    x = float(x)
    if math.isnan(x) or x == math.inf:
        raise DomainError(f"{x!r} is not an element of T")
    if x == NEG_INF:
        return "-inf"
    return format(x, ".17g")


def parse_scalar(token) -> float:
    if isinstance(token, (int, float)) and not isinstance(token, bool):
        x = float(token)
    else:
        t = str(token).strip()
        if t == "-inf":
            return NEG_INF
        try:
            x = float(t)
        except ValueError:
            raise DomainError(f"not a tropical scalar: {token!r}") from None
    if math.isnan(x) or x == math.inf:
        raise DomainError(f"not a tropical scalar: {token!r}")
    return x
