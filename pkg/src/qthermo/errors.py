"""Typed exceptions shared across the package."""

from __future__ import annotations


class QThermoError(Exception):
    """Base class for all library errors."""


class QExpDomainError(QThermoError, ValueError):
    """Raised when exp_q is evaluated outside 1 + (1-q)u > 0.

    Carries enough context to identify the offending argument; callers that
    evaluate tables attach the (symbol, context) pair in the message.
    """

    def __init__(self, message, argument=None):
        super().__init__(message)
        self.argument = argument


class QLogDomainError(QThermoError, ValueError):
    """Raised when log_q is evaluated at u <= 0."""


class NonConvergenceError(QThermoError, RuntimeError):
    """Raised when an iterative routine exhausts its budget.

    Mapped to CLI exit code 3.
    """


class SizeGuardError(QThermoError, ValueError):
    """Raised when a request exceeds the documented size guards (d, memory, n)."""
