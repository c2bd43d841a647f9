"""Exception hierarchy shared across the toolkit.

Exit-code mapping used by the CLI: :class:`UsageError` -> 1,
:class:`DataError` (and subclasses) -> 2, :class:`UpstreamError`
(and subclasses) -> 3.
"""

from __future__ import annotations


class UsageError(Exception):
    """Bad invocation: missing directories, flags, or credentials."""


class DataError(Exception):
    """Input data violates a documented format or contract."""


class ParseError(DataError):
    """Malformed file syntax.

    ``byte_offset`` points at the first offending byte of the UTF-8 input,
    or is None when the position is unknown.
    """

    def __init__(self, message: str, byte_offset: int | None = None):
        self.byte_offset = byte_offset
        if byte_offset is not None:
            message = f"{message} (byte offset {byte_offset})"
        super().__init__(message)


class SchemaError(DataError):
    """Well-formed input that does not fit the expected schema."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field is not None:
            message = f"field {field!r}: {message}"
        super().__init__(message)


class ContractViolation(DataError):
    """A caller broke a documented precondition of a pure operation."""


class UpstreamError(Exception):
    """A remote model service failed after exhausting retries."""
