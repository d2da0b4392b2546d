"""Exception hierarchy shared by every tropnet module."""


class TropnetError(Exception):
    """Base class for all library errors."""


class DimensionError(TropnetError, ValueError):
    """Operand shapes or vector lengths do not agree."""


class DomainError(TropnetError, ValueError):
    """A value lies outside the domain of the requested map."""


class ZeroLocusError(DomainError):
    """A query point falls on a cell of the zero locus."""
