"""Typed errors raised by the core modules.

Every error a user can trigger through bad parameters derives from
``DomainError``; the CLI maps those to exit status 3.
"""


class GhostError(Exception):
    """Base class for all package errors."""


class DomainError(GhostError):
    """Parameters or states outside the domain where an operation is defined."""


class InvariantViolation(GhostError):
    """An internal consistency check failed (a bug, not a user error)."""


# params
class DegenerateBranch(DomainError):
    pass


class NotDegenerate(DomainError):
    pass


class SingularDegeneracy(DomainError):
    pass


# pu_map
class MapUndefined(DomainError):
    pass


class ComplexFrequencies(DomainError):
    pass


class DegenerateFrequencies(DomainError):
    pass


class SingularMapDeterminant(DomainError):
    pass


class UnknownRegime(DomainError):
    pass


# recurrence
class OffSpectrum(DomainError):
    pass


class GammaPole(DomainError):
    pass


class SingularMatrix(DomainError):
    pass


class UnexpectedSingularTower(DomainError):
    pass


class BadLabel(DomainError):
    pass


# wavefunction / fock
class ShapeMismatch(DomainError):
    pass


class NotNormalisable(DomainError):
    pass


class NotNormalisableGround(NotNormalisable):
    pass
