"""Classical vs tropical matrix-product operation counts and timings."""
from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .counters import OpCounters, counting
from .errors import DomainError
from .linalg import product_array, real_matmul
from .semiring import INFINITY

__all__ = ["KINDS", "BenchRow", "BenchReport", "counted_matmul", "bench_sweep", "expected_counts"]

KINDS = ("classical", "tropical")
CSV_COLUMNS = ["algorithm", "n", "mults", "adds", "comparisons", "wall_time_s"]


def _operands(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, (n, n)), rng.uniform(-1.0, 1.0, (n, n))


def _product(kind: str, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if kind == "classical":
        return real_matmul(A, B)
    if kind == "tropical":
        return product_array(A, B, INFINITY)
    raise DomainError(f"unknown algorithm {kind!r}; expected one of {KINDS}")


def counted_matmul(kind: str, n: int, seed: int = 0) -> OpCounters:
    """Count the scalar operations of one seeded ``n x n`` product."""
    if n < 1:
        raise DomainError("n must be >= 1")
    A, B = _operands(n, seed)
    with counting() as c:
        _product(kind, A, B)
    return c


def expected_counts(kind: str, n: int) -> OpCounters:
    """Closed forms of the schoolbook fold."""
    reduce_ops = n * n * (n - 1)
    if kind == "classical":
        return OpCounters(mults=n**3, adds=reduce_ops, comparisons=0)
    if kind == "tropical":
        return OpCounters(mults=0, adds=n**3, comparisons=reduce_ops)
    raise DomainError(f"unknown algorithm {kind!r}")


@dataclass
class BenchRow:
    algorithm: str
    n: int
    mults: int
    adds: int
    comparisons: int
    wall_time_s: float


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    def to_csv(self, include_time: bool = True) -> str:
        buf = io.StringIO()
        cols = CSV_COLUMNS if include_time else CSV_COLUMNS[:-1]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            vals = [r.algorithm, r.n, r.mults, r.adds, r.comparisons]
            if include_time:
                vals.append(f"{r.wall_time_s:.6e}")
            w.writerow(vals)
        return buf.getvalue()


def bench_sweep(kinds: Iterable[str], sizes: Sequence[int], repetitions: int = 3, seed: int = 0) -> BenchReport:
    """Exact counts plus the median wall time of uncounted runs per (kind, n)."""
    kinds = list(kinds)
    if not kinds:
        raise DomainError("at least one algorithm is required")
    if not sizes:
        raise DomainError("at least one size is required")
    if repetitions < 1:
        raise DomainError("repetitions must be >= 1")
    report = BenchReport()
    for n in sizes:
        A, B = _operands(int(n), seed)
        for kind in kinds:
            c = counted_matmul(kind, int(n), seed)
            times = []
            for _ in range(repetitions):
                t0 = time.perf_counter()
                _product(kind, A, B)
                times.append(time.perf_counter() - t0)
            report.rows.append(BenchRow(kind, int(n), c.mults, c.adds, c.comparisons, statistics.median(times)))
    return report
