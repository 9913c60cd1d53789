"""Semantic exception hierarchy.

Public functions never raise bare ``ValueError``: every failure mode maps to
one of the classes below so callers (and the CLI) can translate error kinds
into exit codes without string matching.
"""

from __future__ import annotations


class AlignsurfError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(AlignsurfError, ValueError):
    """A config object or scenario file violates a documented invariant."""


class ScenarioError(ConfigurationError):
    """Scenario file cannot be loaded: parse error, unknown key, bad value.

    The message always carries the dotted key path of the offending entry.
    """


class DomainError(AlignsurfError, ValueError):
    """An argument lies outside the stated domain of an operation."""


class DegenerateInputError(AlignsurfError):
    """Inputs drive a probability to 1 (or an intensity to infinity)."""


class InfeasibleArchitectureError(AlignsurfError):
    """Requested (x, s) violates the codification floor s >= S(x)."""

    def __init__(self, message: str, shortfall: float):
        super().__init__(message)
        self.shortfall = shortfall


class NoCrossingError(AlignsurfError):
    """A requested threshold cannot be crossed for these inputs."""


class AssumptionViolationError(AlignsurfError):
    """A hypothesis a solver relies on fails its numerical pre-check."""


class ResourceLimitError(AlignsurfError):
    """Requested simulation size exceeds the configured work ceiling."""
