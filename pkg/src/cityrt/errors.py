"""Error types shared across the toolchain.

InputError and its subclasses mark problems a caller can fix (bad files,
bad arguments); they map to CLI exit code 2 and HTTP 4xx in the service.
"""

from __future__ import annotations


class CityrtError(Exception):
    """Base class for all toolchain errors."""


class InputError(CityrtError):
    """Invalid input from the user: files, arguments, configuration."""


class ParseError(InputError):
    """A file could not be parsed; carries the offending location."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc += f"{path}"
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class SchemaError(InputError):
    """A structured file misses required fields or has wrong types."""


class NotFoundError(InputError):
    """A named resource does not exist; carries the available names."""

    def __init__(self, message: str, *, available: list[str] | None = None):
        if available:
            message = f"{message} (available: {', '.join(sorted(available))})"
        super().__init__(message)
        self.available = available or []


class PlacementError(InputError):
    """A device or model cannot be placed where requested."""


class EmptySceneError(InputError):
    """A scene query selected no geometry."""


class DomainError(InputError):
    """A numeric argument is outside the valid domain."""


class ConfigError(InputError):
    """A configuration is invalid or inconsistent with the request."""
