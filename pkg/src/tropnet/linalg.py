"""Dense tropical matrices.

The product ``c_ij = (+)_k (a_ik (x) b_kj)`` is evaluated as a left fold over
the inner index ``k`` (``k = 0, 1, ..., n-1``), vectorised over all output
entries.  The same fold with the real semiring gives the classical schoolbook
product, so both share one code path and one operation count.
"""
from __future__ import annotations

from typing import Iterable

import numpy as np

from . import counters as ops
from .errors import DimensionError, DomainError
from .semiring import (
    NEG_INF,
    HbarLike,
    as_hbar,
    dequantize,
    format_scalar,
    parse_scalar,
    quantize,
    t_add,
)

__all__ = [
    "TropicalMatrix",
    "mat_add",
    "mat_mul",
    "scalar_mul",
    "trop_identity",
    "log_image",
    "real_matmul",
    "product_array",
    "exp_image",
    "format_matrix",
    "parse_matrix",
]


class TropicalMatrix:
    """Immutable dense matrix over T = R u {-inf}.

    ``A + B`` and ``A @ B`` are the max-plus (h = inf) sum and product; use
    :func:`mat_add` / :func:`mat_mul` for a finite h.
    """

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DimensionError(f"expected a non-empty 2-D array, got shape {a.shape}")
        if np.isnan(a).any() or np.isposinf(a).any():
            raise DomainError("tropical matrix entries must be real or -inf")
        a.setflags(write=False)
        self._a = a

    @classmethod
    def full(cls, rows: int, cols: int, value: float = NEG_INF) -> "TropicalMatrix":
        return cls(np.full((rows, cols), value, dtype=float))

    @classmethod
    def column(cls, values: Iterable[float]) -> "TropicalMatrix":
        return cls(np.asarray(list(values), dtype=float).reshape(-1, 1))

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the entries."""
        return self._a

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def T(self) -> "TropicalMatrix":
        return TropicalMatrix(self._a.T)

    def tolist(self) -> list[list[float]]:
        return self._a.tolist()

    def __getitem__(self, idx):
        return self._a[idx]

    def __array__(self, dtype=None, copy=None):
        return self._a if dtype is None else self._a.astype(dtype)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TropicalMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self):
        return hash((self.shape, self._a.tobytes()))

    def __add__(self, other) -> "TropicalMatrix":
        return mat_add(self, other)

    def __matmul__(self, other) -> "TropicalMatrix":
        return mat_mul(self, other)

    def __repr__(self) -> str:
        return f"TropicalMatrix({self._a.tolist()!r})"


def _arr(A) -> np.ndarray:
    if isinstance(A, TropicalMatrix):
        return A.array
    return TropicalMatrix(A).array


def mat_add(A, B, hbar: HbarLike = None) -> TropicalMatrix:
    """Entrywise tropical sum."""
    a, b = _arr(A), _arr(B)
    if a.shape != b.shape:
        raise DimensionError(f"mat_add shape mismatch: {a.shape} vs {b.shape}")
    return TropicalMatrix(t_add(a, b, hbar))


def _fold_product(a: np.ndarray, b: np.ndarray, add, mul) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"inner dimensions differ: {a.shape} x {b.shape}")
    acc = mul(a[:, 0:1], b[0:1, :])
    for k in range(1, a.shape[1]):
        acc = add(acc, mul(a[:, k : k + 1], b[k : k + 1, :]))
    return np.asarray(acc, dtype=float)


def product_array(a: np.ndarray, b: np.ndarray, hbar: HbarLike) -> np.ndarray:
    """:func:`mat_mul` on raw arrays, without validation or wrapping."""
    h = as_hbar(hbar)
    return _fold_product(a, b, lambda x, y: t_add(x, y, h), ops.add)


def mat_mul(A, B, hbar: HbarLike = None) -> TropicalMatrix:
    """Tropical product ``c_ij = (+)_h over k of (a_ik + b_kj)``."""
    return TropicalMatrix(product_array(_arr(A), _arr(B), hbar))


def real_matmul(P, Q) -> np.ndarray:
    """Classical schoolbook product through the same fold as :func:`mat_mul`."""
    p = np.atleast_2d(np.asarray(P, dtype=float))
    q = np.atleast_2d(np.asarray(Q, dtype=float))
    return _fold_product(p, q, ops.add, ops.mul)


def scalar_mul(c: float, A) -> TropicalMatrix:
    """Tropical scalar action: ``c`` is added to every entry."""
    return TropicalMatrix(ops.add(float(c), _arr(A)))


def trop_identity(n: int) -> TropicalMatrix:
    if n < 1:
        raise DimensionError("identity size must be >= 1")
    a = np.full((n, n), NEG_INF)
    np.fill_diagonal(a, 0.0)
    return TropicalMatrix(a)


def log_image(P, hbar: HbarLike) -> TropicalMatrix:
    """Entrywise ``log_h`` of a strictly positive real matrix."""
    p = np.atleast_2d(np.asarray(P, dtype=float))
    bad = np.argwhere(~(p > 0))
    if bad.size:
        i, j = bad[0]
        raise DomainError(f"log_image needs positive entries; entry ({i}, {j}) = {p[i, j]!r}")
    return TropicalMatrix(dequantize(p, hbar))


def exp_image(A, hbar: HbarLike) -> np.ndarray:
    """Entrywise inverse of :func:`log_image` (``-inf`` maps to 0)."""
    return np.asarray(quantize(_arr(A), hbar))


def format_matrix(A) -> str:
    a = _arr(A)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    lines += [" ".join(format_scalar(x) for x in row) for row in a]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> TropicalMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DomainError("empty matrix text")
    try:
        rows, cols = (int(t) for t in lines[0].split())
    except ValueError:
        raise DomainError(f"bad matrix header: {lines[0]!r}") from None
    body = lines[1:]
    if len(body) != rows:
        raise DimensionError(f"header says {rows} rows, found {len(body)}")
    data = []
    for r, ln in enumerate(body):
        toks = ln.split()
        if len(toks) != cols:
            raise DimensionError(f"row {r} has {len(toks)} entries, expected {cols}")
        data.append([parse_scalar(t) for t in toks])
    return TropicalMatrix(data)
