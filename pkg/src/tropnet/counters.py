"""Exact scalar-operation counting.

Every arithmetic primitive used by the tropical and classical code paths goes
through :func:`add`, :func:`mul` or :func:`maximum`.  When a :func:`counting`
context is active, each call records the number of elementwise scalar
operations it performed, so vectorised array code is counted exactly as the
equivalent scalar loop would be.
"""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass
from typing import Iterator

import numpy as np

__all__ = ["OpCounters", "counting", "paused", "add", "sub", "mul", "maximum", "minimum", "record"]


@dataclass
class OpCounters:
    mults: int = 0
    adds: int = 0
    comparisons: int = 0

    @property
    def total_scalar_ops(self) -> int:
        return self.mults + self.adds + self.comparisons

    def as_dict(self) -> dict[str, int]:
        return {
            "mults": self.mults,
            "adds": self.adds,
            "comparisons": self.comparisons,
            "total_scalar_ops": self.total_scalar_ops,
        }


_active: contextvars.ContextVar[OpCounters | None] = contextvars.ContextVar(
    "tropnet_op_counters", default=None
)


@contextlib.contextmanager
def counting(counters: OpCounters | None = None) -> Iterator[OpCounters]:
    """Count scalar operations performed inside the ``with`` block.

    Counters are not synchronised; use one context per thread.
    """
    counters = OpCounters() if counters is None else counters
    token = _active.set(counters)
    try:
        yield counters
    finally:
        _active.reset(token)


@contextlib.contextmanager
def paused() -> Iterator[None]:
    """Suspend counting, e.g. for monitoring code that is not part of an algorithm."""
    token = _active.set(None)
    try:
        yield
    finally:
        _active.reset(token)


def record(kind: str, n: int = 1) -> None:
    c = _active.get()
    if c is not None:
        setattr(c, kind, getattr(c, kind) + int(n))


def _size(a, b) -> int:
    return int(np.broadcast(a, b).size)


def add(a, b):
    c = _active.get()
    if c is not None:
        c.adds += _size(a, b)
    return np.add(a, b)


def sub(a, b):
    # subtraction is counted as an addition
    c = _active.get()
    if c is not None:
        c.adds += _size(a, b)
    return np.subtract(a, b)


def mul(a, b):
    c = _active.get()
    if c is not None:
        c.mults += _size(a, b)
    return np.multiply(a, b)


def maximum(a, b):
    c = _active.get()
    if c is not None:
        c.comparisons += _size(a, b)
    return np.maximum(a, b)


def minimum(a, b):
    c = _active.get()
    if c is not None:
        c.comparisons += _size(a, b)
    return np.minimum(a, b)
