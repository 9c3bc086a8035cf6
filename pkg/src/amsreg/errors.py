"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code, see :mod:`amsreg.cli`.
"""

from __future__ import annotations


class AmsregError(Exception):
    """Base class for all package errors."""


class InputError(AmsregError):
    """Malformed or out-of-contract input (CLI exit code 1)."""


class AssumptionViolationError(AmsregError):
    """A structural assumption of the underlying theory failed on concrete
    data (CLI exit code 2).  This is never expected; a raise here means the
    inputs exposed a genuine inconsistency and the run must not be trusted.
    """


class ArithmeticOverflowError(AmsregError):
    """Checked-arithmetic overflow (CLI exit code 3).

    Python integers are arbitrary precision, so this is only raised by
    explicit magnitude guards.
    """


class OracleDegeneracyError(AmsregError):
    """The oracle could not draw a point sample in general position
    (CLI exit code 4).  Carries the offending seed for reproduction.
    """

    def __init__(self, message: str, seed: int | None = None):
        super().__init__(message)
        self.seed = seed


class InternalError(AmsregError):
    """Iteration cap or internal invariant failure; indicates a bug."""
