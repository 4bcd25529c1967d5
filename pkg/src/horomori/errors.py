"""Exception hierarchy.

Domain errors (bad input / unsatisfied precondition) derive from
:class:`HoromoriError`.  :class:`InternalInvariantViolation` and its
subclasses signal identities the theory guarantees: raising one means a
bug, not a bad input, and the CLI maps them to exit code 2.
"""


class HoromoriError(Exception):
    """Base class for all domain errors raised by this package."""


class InvalidDiagram(HoromoriError):
    """Dynkin diagram outside the allowed type/rank table."""


class UnknownNode(HoromoriError):
    """Simple-root node label not present in the root system."""


class InternalInvariantViolation(HoromoriError):
    """A proved identity failed; indicates an implementation bug."""


class InequalityViolated(InternalInvariantViolation):
    """The positive-root inequality failed on a witness (diagram, I)."""


class FanError(HoromoriError):
    """Base class for coloured-fan structure errors."""


class NotComplete(FanError):
    pass


class NotSimplicial(FanError):
    pass


class NotQFactorial(FanError):
    pass


class NotProjective(FanError):
    """The cone of curve classes contains a line."""


class PointOutsideSupport(FanError):
    pass


class OutsideSupport(FanError):
    pass


class ConeNotInFan(FanError):
    pass


class NotQCartier(HoromoriError):
    """No consistent linear data exists on some maximal cone."""


class NonIntegralMultiple(InternalInvariantViolation):
    """Cartier-data difference across a wall is not a multiple of the
    wall functional; wall data is inconsistent."""


class ColourInCone(HoromoriError):
    """Colour curve class requested for a colour already in the cone."""


class NotExtremal(HoromoriError):
    pass


class NotFlipping(HoromoriError):
    pass


class UnsupportedFlip(HoromoriError):
    """Flipping ray whose merged region is not a single circuit pair."""


class IdentityViolated(InternalInvariantViolation):
    """The flip-tower pullback identity failed exactly."""


class NoKNegativeRay(HoromoriError):
    pass


class NotNef(HoromoriError):
    pass


class NotTerminalFlagged(HoromoriError):
    """MMP entry point called without the terminality input flag."""


class NotPicardOne(HoromoriError):
    pass


class NoRelation(HoromoriError):
    """No positive ray relation exists; the fan cannot be complete."""


class NotInExceptionalImage(HoromoriError):
    pass


class MinimalModelReached(HoromoriError):
    """No K-negative ray remains; the curve certificate does not apply."""


class ParseError(HoromoriError):
    pass


class SchemaMismatch(ParseError):
    pass


class UnknownReference(ParseError):
    """Problem file refers to an undeclared colour, cone or divisor."""


class UnknownCommand(HoromoriError):
    pass
