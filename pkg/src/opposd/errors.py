"""
opposd.errors — Root exception classes.

Every library error derives from OpposdError. The CLI maps
ConfigError to exit code 2 and NumericError to exit code 3.
Sub-packages define their concrete errors next to their code.
"""

from __future__ import annotations


class OpposdError(Exception):
    """Base class of all opposd errors."""
    pass


class ConfigError(OpposdError):
    """Invalid configuration."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        self.reason = message
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class NumericError(OpposdError):
    """Non-finite value or violated numerical precondition."""
    pass
