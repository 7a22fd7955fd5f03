"""Exception and warning types raised by the library."""


class DECError(Exception):
    """Base class for all library errors."""


class ComplexError(DECError, ValueError):
    """Malformed simplicial complex input."""


class DuplicateTopSimplex(ComplexError):
    pass


class MixedDimension(ComplexError):
    pass


class DegreeOutOfRange(DECError, ValueError):
    pass


class DegreeMismatch(DECError, ValueError):
    pass


class DegreeOverflow(DECError, ValueError):
    pass


class MissingEdgeLength(DECError, KeyError):
    pass


class DegenerateSimplex(DECError, ValueError):
    pass


class NotWellCentered(DECError, ValueError):
    pass


class ZeroVolume(DECError, ZeroDivisionError):
    pass


class ZeroDualVolume(DECError, ZeroDivisionError):
    pass


class UnsupportedDegree(DECError, ValueError):
    pass


class ConeTableMissing(DECError, LookupError):
    pass


class NotIsomorphic(DECError, ValueError):
    pass


class EnumerationOrderViolation(DECError, ValueError):
    pass


class NotClosed(DECError, ValueError):
    pass


class NoConeStructure(DECError, ValueError):
    pass


class SingularSystem(DECError, ArithmeticError):
    pass


class LightlikeEdge(DECError, ValueError):
    pass


class DomainMismatch(DECError, ValueError):
    pass


class UnsupportedDimension(DECError, ValueError):
    pass


class NonSimplicialImage(DECError, ValueError):
    pass


class NotInvertible(DECError, ValueError):
    pass


class NonManifoldWarning(UserWarning):
    """An (n-1)-simplex has more than two cofaces."""


class BoundaryIncomplete(UserWarning):
    """An operator was evaluated on an open (boundary) one-ring."""
