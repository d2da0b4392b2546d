"""Connected components of zero-locus complements on sampling grids.

A classification ``N: Omega -> {1..k}`` is realised by a field ``f`` when
points share a class exactly when they share a component of the complement
of ``Z_f``.  Only H_0 (component membership) is computed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import ndimage

from .errors import DimensionError, DomainError, ZeroLocusError
from .grid import GridSpec, check_supported, corner_views, switch_cells
from .network import LayeredNetwork, network_forward
from .polynomial import TropicalPolynomial, argmax_monomial
from .semiring import HbarLike, as_hbar, dequantize, quantize

__all__ = [
    "ScalarField",
    "ComponentLabeling",
    "EquivalenceReport",
    "StabilityReport",
    "zero_cells",
    "label_components",
    "label_mask",
    "classify",
    "check_classification_equivalence",
    "component_count_stability",
]


@dataclass(frozen=True)
class ScalarField:
    """A field on R^n, either real-valued or tropical.

    Classical fields provide ``values(points) -> f``; tropical fields provide
    ``pattern(points) -> int`` identifying the locally affine piece, whose
    switches form the corner locus.
    """

    kind: str
    ndim: int
    values: Callable[[np.ndarray], np.ndarray] | None = None
    pattern: Callable[[np.ndarray], np.ndarray] | None = None

    @classmethod
    def classical(cls, fn: Callable[[np.ndarray], np.ndarray], ndim: int) -> "ScalarField":
        """``fn`` maps points of shape ``(..., ndim)`` to values of shape ``(...)``."""
        return cls("classical", ndim, values=fn)

    @classmethod
    def from_polynomial(cls, P: TropicalPolynomial) -> "ScalarField":
        return cls("tropical", P.num_vars, pattern=lambda pts: argmax_monomial(P, pts))

    @classmethod
    def from_network(cls, net: LayeredNetwork, level: float = 0.0, output: int = 0) -> "ScalarField":
        """Classical field ``x -> net(x)[output] - level``."""

        def fn(pts):
            flat = pts.reshape(-1, pts.shape[-1])
            return (network_forward(net, flat)[:, output] - level).reshape(pts.shape[:-1])

        return cls("classical", net.n_in, values=fn)

    @classmethod
    def from_tropical_network(cls, net: LayeredNetwork) -> "ScalarField":
        """Tropical field whose pieces are the argmax patterns of all units."""
        if net.mode != "tropical":
            raise DomainError("from_tropical_network needs a tropical network")

        def fn(pts):
            O = pts.reshape(-1, pts.shape[-1])
            codes = []
            for layer in net.layers:
                cand = O[:, :, None] + layer.weights[None, :, :]  # (P, in, out)
                cand = np.concatenate([np.broadcast_to(layer.bias, (O.shape[0], 1, layer.n_out)), cand], axis=1)
                codes.append(np.argmax(cand, axis=1))
                O = cand.max(axis=1)
            allcodes = np.concatenate(codes, axis=1)
            _, ids = np.unique(allcodes, axis=0, return_inverse=True)
            return ids.reshape(pts.shape[:-1])

        return cls("tropical", net.n_in, pattern=fn)

    def pushforward(self, hbar: HbarLike) -> "ScalarField":
        """The field ``u -> f(h**u)`` in log_h coordinates."""
        h = as_hbar(hbar)
        if self.kind == "classical":
            return ScalarField.classical(lambda u: self.values(np.asarray(quantize(u, h))), self.ndim)
        return ScalarField("tropical", self.ndim, pattern=lambda u: self.pattern(np.asarray(quantize(u, h))))


@dataclass
class ComponentLabeling:
    """Cell labels: ``-1`` on the zero locus, ``0..num_components-1`` elsewhere."""

    grid: GridSpec
    labels: np.ndarray
    num_components: int

    @property
    def zero_mask(self) -> np.ndarray:
        return self.labels < 0

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "shape": list(self.labels.shape),
            "labels": [int(v) for v in self.labels.ravel()],
            "num_components": int(self.num_components),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComponentLabeling":
        grid = GridSpec.from_dict(d["grid"])
        labels = np.asarray(d["labels"], dtype=int).reshape(grid.cell_shape)
        return cls(grid, labels, int(d["num_components"]))


def zero_cells(field: ScalarField, grid: GridSpec, zero_tol: float | None = None) -> np.ndarray:
    """Boolean mask of cells treated as part of the zero locus.

    Tropical fields: cells where the piece id switches between corners.
    Classical fields: ``|f(center)| <= tol`` where ``tol`` defaults to a local
    Lipschitz estimate times the cell diagonal, i.e.
    ``2 * max_corner |f(corner) - f(center)|``.
    """
    check_supported(grid.ndim)
    if field.ndim != grid.ndim:
        raise DimensionError(f"field has {field.ndim} variables, grid has {grid.ndim} axes")
    if field.kind == "tropical":
        return switch_cells(np.asarray(field.pattern(grid.points())))
    fc = np.asarray(field.values(grid.cell_centers()), dtype=float)
    if zero_tol is None:
        fs = np.asarray(field.values(grid.points()), dtype=float)
        var = np.max([np.abs(v - fc) for v in corner_views(fs)], axis=0)
        tol = 2.0 * var
    else:
        if zero_tol < 0:
            raise DomainError("zero_tol must be >= 0")
        tol = zero_tol
    with np.errstate(invalid="ignore"):
        return ~(np.abs(fc) > tol)  # NaN counts as zero


def label_components(field: ScalarField, grid: GridSpec, zero_tol: float | None = None) -> ComponentLabeling:
    """Label the complement of the zero locus with 2n-connectivity.

    Labels follow first visit in a row-major scan of the cells.
    """
    return label_mask(grid, zero_cells(field, grid, zero_tol))


def label_mask(grid: GridSpec, zero: np.ndarray) -> ComponentLabeling:
    """Label the cells where ``zero`` is False."""
    zero = np.asarray(zero, dtype=bool)
    if zero.shape != grid.cell_shape:
        raise DimensionError(f"mask shape {zero.shape} does not match cells {grid.cell_shape}")
    structure = ndimage.generate_binary_structure(grid.ndim, 1)
    lab, count = ndimage.label(~zero, structure=structure)
    return ComponentLabeling(grid, lab.astype(int) - 1, int(count))


def classify(labeling: ComponentLabeling, x: Sequence[float]) -> int:
    """Component label of the cell containing ``x``."""
    idx = labeling.grid.cell_index(x)
    lab = int(labeling.labels[idx])
    if lab < 0:
        raise ZeroLocusError(f"point {list(map(float, x))} lies on a zero-locus cell {idx}")
    return lab


@dataclass
class EquivalenceReport:
    ok: bool
    violations: list[dict]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": self.violations}


def check_classification_equivalence(points, classes: Iterable, labeling: ComponentLabeling) -> EquivalenceReport:
    """Check ``N(x) = N(y) <=> F(x) = F(y)`` over all pairs of data points.

    Violations are ``{"kind": "split" | "merged", "pair": [i, j]}`` (same
    class in different components, or different classes in one component)
    and ``{"kind": "unclassifiable", "index": i, "reason": ...}``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    N = np.asarray(list(classes))
    if N.shape[0] != pts.shape[0]:
        raise DimensionError("one class per point required")
    violations: list[dict] = []
    F = np.empty(pts.shape[0], dtype=int)
    good = np.ones(pts.shape[0], dtype=bool)
    for i, p in enumerate(pts):
        try:
            F[i] = classify(labeling, p)
        except DomainError as exc:
            good[i] = False
            violations.append({"kind": "unclassifiable", "index": i, "reason": str(exc)})
    idx = np.flatnonzero(good)
    n_, f_ = N[idx], F[idx]
    same_n = n_[:, None] == n_[None, :]
    same_f = f_[:, None] == f_[None, :]
    bad = np.triu(same_n != same_f, k=1)
    for a, b in np.argwhere(bad):
        kind = "split" if same_n[a, b] else "merged"
        violations.append({"kind": kind, "pair": [int(idx[a]), int(idx[b])]})
    return EquivalenceReport(not violations, violations)


@dataclass
class StabilityReport:
    original: int
    counts: dict[float, int]

    @property
    def agree_all(self) -> bool:
        return all(c == self.original for c in self.counts.values())

    @property
    def stable(self) -> bool:
        """Counts stay equal to the original from the first agreeing h onward."""
        seq = [self.counts[h] for h in sorted(self.counts)]
        if self.original not in seq:
            return False
        first = seq.index(self.original)
        return all(c == self.original for c in seq[first:])

    def to_dict(self) -> dict:
        return {"original": self.original, "counts": {str(h): c for h, c in self.counts.items()}}


def component_count_stability(
    field: ScalarField, hbar_list: Sequence[float], grid: GridSpec, zero_tol: float | None = None
) -> StabilityReport:
    """Component counts of the complement in original and log_h coordinates.

    ``grid`` is in original coordinates and must lie in the open positive
    cone; for each h the log grid spans the log_h image of its bounds at the
    same resolution.
    """
    if min(grid.lower) <= 0:
        raise DomainError("component_count_stability needs a grid inside the positive cone")
    original = label_components(field, grid, zero_tol).num_components
    counts = {}
    for hv in hbar_list:
        h = as_hbar(hv)
        lg = GridSpec(
            tuple(float(dequantize(v, h)) for v in grid.lower),
            tuple(float(dequantize(v, h)) for v in grid.upper),
            grid.resolution,
        )
        counts[h.value] = label_components(field.pushforward(h), lg, zero_tol).num_components
    return StabilityReport(original, counts)
