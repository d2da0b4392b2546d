"""Reading and writing the text files used by the command line tool."""
from __future__ import annotations

import csv
import io
import json
import sys
from typing import Sequence

import numpy as np

from .errors import DomainError


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _rows(text: str, header: bool) -> list[list[str]]:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    return rows[1:] if header else rows


def read_dataset(path: str, header: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """CSV with feature columns followed by one integer label column."""
    rows = _rows(read_text(path), header)
    if not rows:
        raise DomainError(f"dataset {path!r} has no rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1 or widths.pop() < 2:
        raise DomainError("dataset rows need the same number (>= 2) of columns")
    try:
        X = np.array([[float(c) for c in r[:-1]] for r in rows])
        labels = np.array([int(r[-1]) for r in rows])
    except ValueError as exc:
        raise DomainError(f"bad dataset value: {exc}") from None
    return X, labels


def read_samples(path: str, header: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """CSV with input columns followed by one real target column."""
    rows = _rows(read_text(path), header)
    if not rows:
        raise DomainError(f"sample file {path!r} has no rows")
    try:
        data = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise DomainError(f"bad sample value: {exc}") from None
    if data.ndim != 2 or data.shape[1] < 2:
        raise DomainError("sample rows need input columns and a target column")
    return data[:, :-1], data[:, -1]


def write_dataset(path: str, X: np.ndarray, labels: Sequence[int], header: bool = False) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow([f"x{i}" for i in range(X.shape[1])] + ["label"])
    for x, y in zip(X, labels):
        w.writerow([format(float(v), ".17g") for v in x] + [int(y)])
    write_text(path, buf.getvalue())


def loss_csv(losses: Sequence[float]) -> str:
    lines = ["epoch,loss"] + [f"{i},{format(float(v), '.17g')}" for i, v in enumerate(losses)]
    return "\n".join(lines) + "\n"
