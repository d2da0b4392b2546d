"""Axis-aligned sampling grids shared by the corner-locus and topology code.

A grid with resolution ``r`` on an axis has ``r`` sample points (including
both bounds) and ``r - 1`` cells.  Cells are the units that get marked or
labelled; a cell's corners are its ``2**n`` surrounding sample points.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError

MAX_DIM = 3


@dataclass(frozen=True)
class GridSpec:
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    resolution: tuple[int, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        res = self.resolution
        if isinstance(res, (int, np.integer)):
            res = (int(res),) * len(lo)
        res = tuple(int(r) for r in res)
        if not (len(lo) == len(hi) == len(res)) or not lo:
            raise DimensionError("grid bounds and resolution must have one entry per axis")
        if any(not (a < b) for a, b in zip(lo, hi)):
            raise DomainError(f"grid needs lower < upper on every axis: {lo} vs {hi}")
        if any(r < 2 for r in res):
            raise DomainError("grid resolution must be >= 2 on every axis")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "resolution", res)

    @classmethod
    def from_bbox(cls, bbox: Sequence[float], resolution) -> "GridSpec":
        """``bbox`` is ``(lo_1, hi_1, lo_2, hi_2, ...)``."""
        if len(bbox) % 2 or not bbox:
            raise DimensionError("bbox needs an even number of values")
        return cls(tuple(bbox[0::2]), tuple(bbox[1::2]), resolution)

    @property
    def ndim(self) -> int:
        return len(self.lower)

    @property
    def cell_shape(self) -> tuple[int, ...]:
        return tuple(r - 1 for r in self.resolution)

    @property
    def spacing(self) -> np.ndarray:
        return (np.array(self.upper) - np.array(self.lower)) / (np.array(self.resolution) - 1)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(a, b, r) for a, b, r in zip(self.lower, self.upper, self.resolution)]

    def points(self) -> np.ndarray:
        """Sample points, shape ``resolution + (ndim,)``, axis order = coordinate order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def cell_centers(self) -> np.ndarray:
        centers = [(ax[:-1] + ax[1:]) / 2 for ax in self.axes()]
        return np.stack(np.meshgrid(*centers, indexing="ij"), axis=-1)

    def cell_index(self, x: Sequence[float]) -> tuple[int, ...]:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.ndim,):
            raise DimensionError(f"point has {x.size} coordinates, grid has {self.ndim}")
        lo, hi = np.array(self.lower), np.array(self.upper)
        if np.any(x < lo) or np.any(x > hi):
            raise DomainError(f"point {x.tolist()} lies outside the grid bounds")
        idx = np.floor((x - lo) / self.spacing).astype(int)
        idx = np.minimum(idx, np.array(self.cell_shape) - 1)
        return tuple(int(i) for i in idx)

    def to_dict(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper), "resolution": list(self.resolution)}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(tuple(d["lower"]), tuple(d["upper"]), tuple(d["resolution"]))


def check_supported(ndim: int) -> None:
    if not 1 <= ndim <= MAX_DIM:
        raise DimensionError(f"grids support 1 to {MAX_DIM} dimensions, got {ndim}")


def corner_views(samples: np.ndarray) -> list[np.ndarray]:
    """The ``2**n`` corner arrays of every cell, each of shape ``cell_shape``."""
    n = samples.ndim
    views = []
    for offs in np.ndindex(*(2,) * n):
        sl = tuple(slice(o, o + s - 1) for o, s in zip(offs, samples.shape))
        views.append(samples[sl])
    return views


def switch_cells(ids: np.ndarray) -> np.ndarray:
    """Mark cells whose corner samples do not all share the same id."""
    views = corner_views(ids)
    first = views[0]
    marked = np.zeros(first.shape, dtype=bool)
    for v in views[1:]:
        marked |= v != first
    return marked
