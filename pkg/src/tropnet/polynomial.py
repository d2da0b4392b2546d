"""Tropical polynomials ``P(x) = (+)_v (a_v (x) x_1^v_1 (x) ... (x) x_n^v_n)``.

In the limit this is ``max_v (a_v + <v, x>)``.  Exponent weights ``v_k * x_k``
are evaluated as ``v_k``-fold repeated tropical products (additions), so the
evaluation path contains no multiplications.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import counters as ops
from .errors import DimensionError, DomainError
from .grid import GridSpec, check_supported, switch_cells
from .semiring import NEG_INF, HbarLike, as_hbar, format_scalar, parse_scalar, t_add, t_sum

__all__ = [
    "MAX_EXPONENT",
    "DEFAULT_TAU",
    "TropicalPolynomial",
    "poly_eval",
    "monomial_values",
    "active_monomials",
    "in_zero_set",
    "argmax_monomial",
    "corner_locus_grid",
]

MAX_EXPONENT = 64
DEFAULT_TAU = 1e-9


@dataclass(frozen=True, eq=False)
class TropicalPolynomial:
    """Monomials as parallel arrays: ``coeffs`` (M,) and integer ``exponents`` (M, n).

    Duplicate exponent vectors are merged with ``max`` of their coefficients,
    keeping the first-seen order of monomials.
    """

    coeffs: np.ndarray
    exponents: np.ndarray

    def __init__(self, monomials: Sequence[tuple[float, Sequence[int]]], num_vars: int | None = None):
        if not monomials:
            raise DomainError("a tropical polynomial needs at least one monomial")
        merged: dict[tuple[int, ...], float] = {}
        for coeff, exps in monomials:
            key = tuple(int(e) for e in exps)
            if any(e != float(x) for e, x in zip(key, exps)):
                raise DomainError(f"exponents must be integers: {exps!r}")
            c = parse_scalar(coeff)
            merged[key] = max(merged.get(key, NEG_INF), c)
        lengths = {len(k) for k in merged}
        if num_vars is None:
            num_vars = lengths.pop() if len(lengths) == 1 else -1
        if num_vars < 1 or lengths - {num_vars}:
            raise DimensionError("all exponent vectors must have length num_vars >= 1")
        exps = np.array(list(merged.keys()), dtype=np.int64).reshape(len(merged), num_vars)
        if exps.min() < 0 or exps.max() > MAX_EXPONENT:
            raise DomainError(f"exponents must lie in [0, {MAX_EXPONENT}]")
        coeffs = np.array(list(merged.values()), dtype=float)
        coeffs.setflags(write=False)
        exps.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "exponents", exps)

    @property
    def num_vars(self) -> int:
        return self.exponents.shape[1]

    @property
    def monomials(self) -> list[tuple[float, tuple[int, ...]]]:
        return [(float(c), tuple(int(e) for e in v)) for c, v in zip(self.coeffs, self.exponents)]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __call__(self, x, hbar: HbarLike = None):
        return poly_eval(self, x, hbar)

    def to_dict(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "monomials": [
                {"coeff": "-inf" if c == NEG_INF else c, "exponents": list(e)} for c, e in self.monomials
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TropicalPolynomial":
        try:
            mons = [(m["coeff"], m["exponents"]) for m in d["monomials"]]
            return cls(mons, int(d["num_vars"]))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed polynomial record: {exc}") from None

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "TropicalPolynomial":
        return cls.from_dict(json.loads(text))


def _points(P: TropicalPolynomial, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    pts = x.reshape(1, -1) if single else x.reshape(-1, x.shape[-1])
    if x.ndim == 0 or pts.shape[-1] != P.num_vars:
        raise DimensionError(f"point dimension {pts.shape[-1]} does not match num_vars={P.num_vars}")
    if np.isnan(pts).any():
        raise DomainError("NaN coordinate")
    return pts, single


def monomial_values(P: TropicalPolynomial, x) -> np.ndarray:
    """Values ``a_v + <v, x>``; shape ``(M,)`` for a single point, else ``(..., M)``."""
    x_arr = np.asarray(x, dtype=float)
    pts, single = _points(P, x_arr)
    vals = np.broadcast_to(P.coeffs, (pts.shape[0], len(P))).copy()
    for k in range(P.num_vars):
        col = P.exponents[:, k]
        xk = pts[:, k : k + 1]
        for r in range(1, int(col.max()) + 1):
            sel = col >= r
            vals[:, sel] = ops.add(vals[:, sel], xk)
    if single:
        return vals[0]
    return vals.reshape(x_arr.shape[:-1] + (len(P),))


def poly_eval(P: TropicalPolynomial, x, hbar: HbarLike = None):
    """Tropical sum over monomials with the given h (max in the limit)."""
    vals = monomial_values(P, x)
    out = t_sum(vals, as_hbar(hbar), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def active_monomials(P: TropicalPolynomial, x, tau: float = DEFAULT_TAU) -> set[int]:
    """Indices of monomials within ``tau`` of the maximum at a single point."""
    if tau < 0:
        raise DomainError("tau must be >= 0")
    vals = monomial_values(P, x)
    if vals.ndim != 1:
        raise DimensionError("active_monomials takes a single point")
    top = vals.max()
    if top == NEG_INF:
        return set()
    return {int(i) for i in np.flatnonzero(vals >= top - tau)}


def in_zero_set(P: TropicalPolynomial, x, tau: float = DEFAULT_TAU) -> bool:
    vals = monomial_values(P, x)
    if vals.max() == NEG_INF:
        return True
    return len(active_monomials(P, x, tau)) >= 2


def argmax_monomial(P: TropicalPolynomial, x) -> np.ndarray:
    """Index of the first maximising monomial at each point (array over leading axes)."""
    return np.argmax(monomial_values(P, x), axis=-1)


def corner_locus_grid(P: TropicalPolynomial, grid: GridSpec) -> np.ndarray:
    """Boolean array over grid cells; True where the argmax monomial switches.

    Over-approximates the corner locus by at most one cell width.
    """
    check_supported(grid.ndim)
    if grid.ndim != P.num_vars:
        raise DimensionError(f"grid has {grid.ndim} axes, polynomial has {P.num_vars} variables")
    ids = argmax_monomial(P, grid.points())
    return switch_cells(ids)
