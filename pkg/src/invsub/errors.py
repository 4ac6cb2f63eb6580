"""Exception types shared across the package."""

from __future__ import annotations


class InvSubError(Exception):
    """Base class for all package errors."""


class ValidationError(InvSubError, ValueError):
    """A model, spec or configuration violates its invariants."""


class DomainError(InvSubError, ValueError):
    """An argument lies outside the domain of an operation."""


class RangeError(DomainError):
    """A requested time lies outside the horizon of a precomputed grid."""


class UnsupportedError(InvSubError, NotImplementedError):
    """The request is valid in principle but outside the supported caps."""


class NumericError(InvSubError, ArithmeticError):
    """A numerical evaluation produced a non-finite value.

    ``lam`` carries the offending transform argument when there is one.
    """

    def __init__(self, message: str, lam: complex | None = None):
        super().__init__(message)
        self.lam = lam


class HorizonError(InvSubError, RuntimeError):
    """A simulated path did not reach the requested level."""
