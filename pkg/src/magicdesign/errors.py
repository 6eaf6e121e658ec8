"""Exception types shared by all modules.

Each class carries the process exit code the CLI maps it to.
"""

from __future__ import annotations


class DesignError(Exception):
    exit_code = 4


class UnsupportedParameter(DesignError, ValueError):
    """A parameter is outside the supported range."""

    exit_code = 2


class ConfigError(DesignError, ValueError):
    exit_code = 2


class ResourceCapError(DesignError, MemoryError):
    """A dense object would exceed the configured size cap."""

    exit_code = 3


class RankError(DesignError, ArithmeticError):
    """A Gram matrix that must be inverted is singular."""

    exit_code = 2


class InvariantViolation(DesignError, AssertionError):
    exit_code = 4


class InvalidMoment(InvariantViolation):
    """A moment operator leaks out of the symmetric subspace."""


__all__ = [
    "DesignError",
    "UnsupportedParameter",
    "ConfigError",
    "ResourceCapError",
    "RankError",
    "InvariantViolation",
    "InvalidMoment",
]
