"""Tropical (max-plus) arithmetic, networks and backpropagation."""
from .counters import OpCounters, counting
from .errors import DimensionError, DomainError, TropnetError, ZeroLocusError
from .grid import GridSpec
from .linalg import TropicalMatrix, log_image, mat_add, mat_mul, scalar_mul, trop_identity
from .polynomial import TropicalPolynomial, active_monomials, corner_locus_grid, in_zero_set, poly_eval
from .semiring import INFINITY, NEG_INF, Hbar, dequantize, quantize, t_add, t_mul

__all__ = [
    "NEG_INF",
    "INFINITY",
    "Hbar",
    "t_add",
    "t_mul",
    "dequantize",
    "quantize",
    "TropicalMatrix",
    "mat_add",
    "mat_mul",
    "scalar_mul",
    "trop_identity",
    "log_image",
    "TropicalPolynomial",
    "poly_eval",
    "active_monomials",
    "in_zero_set",
    "corner_locus_grid",
    "GridSpec",
    "OpCounters",
    "counting",
    "TropnetError",
    "DimensionError",
    "DomainError",
    "ZeroLocusError",
]

__version__ = "0.1.0"
