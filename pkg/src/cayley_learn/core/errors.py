"""
Exception hierarchy shared by the library and the CLI.

Argument problems also subclass ValueError so callers that only know the
standard library can still catch them.
"""

from dataclasses import dataclass


class CayleyLearnError(Exception):
    """Root of every error raised by cayley_learn."""

    exit_code = 2


class InvalidOrderError(CayleyLearnError, ValueError):
    """A group, ring or square was requested with an impossible order."""


class UnsupportedOrderError(InvalidOrderError):
    """The order is valid mathematically but outside the supported range."""


class ShapeError(CayleyLearnError, ValueError):
    """Array dimensions do not fit together."""


class DomainError(CayleyLearnError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResourceLimitError(CayleyLearnError):
    """The request exceeds a configured size bound."""


class TableValidationError(CayleyLearnError, ValueError):
    """A table record failed validation."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.message = message
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class RecordParseError(TableValidationError):
    """A line of an NDJSON file is not valid JSON or lacks required fields."""


@dataclass(frozen=True)
class RecordProblem:
    line: int
    message: str


class TableImportError(CayleyLearnError):
    """One or more records of an import file were rejected."""

    def __init__(self, problems: list[RecordProblem]):
        self.problems = problems
        details = "; ".join(f"line {p.line}: {p.message}" for p in problems[:5])
        more = f" (+{len(problems) - 5} more)" if len(problems) > 5 else ""
        super().__init__(f"{len(problems)} invalid record(s): {details}{more}")


class UnknownRecipeError(CayleyLearnError, KeyError):
    """No recipe with the requested name is registered."""

    exit_code = 1

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown recipe"


class ConfigError(CayleyLearnError, ValueError):
    """An experiment config or command-line override is malformed."""

    exit_code = 1


class AcceptanceMiss(CayleyLearnError):
    """A run missed one of its acceptance bands (strict reporting only)."""

    exit_code = 3
