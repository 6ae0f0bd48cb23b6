"""Exact spectral solver for a two-dimensional ghost oscillator.

Two independent routes to the eigensystem are provided: coupled three-term
recurrences (:mod:`ghostosc.recurrence`) and a ladder-operator construction
built on the map to the Pais-Uhlenbeck oscillator (:mod:`ghostosc.fock`).
"""
from .errors import DomainError, GhostError, InvariantViolation
from .params import ALL_BRANCHES, AuxParams, Branch, ModelParams, classify_domain, derive_aux

__all__ = ["ALL_BRANCHES", "AuxParams", "Branch", "DomainError", "GhostError",
           "InvariantViolation", "ModelParams", "classify_domain", "derive_aux"]
__version__ = "0.1.0"
