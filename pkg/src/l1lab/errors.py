"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class here, so that library code never has to match on message strings.
The CLI maps any ``L1LabError`` to exit code 3.
"""

from __future__ import annotations


class L1LabError(Exception):
    """Base class for all errors raised by this package."""


class PartitionMismatch(L1LabError):
    """Two grid functions that must share a partition do not."""


class DomainViolation(L1LabError):
    """An input sits outside the domain a map or operation requires."""


class ResolutionExhausted(L1LabError):
    """A map application would need finer dyadic structure than the grid holds."""

    def __init__(self, message: str, *, effective: int | None = None, storage: int | None = None):
        super().__init__(message)
        self.effective = effective
        self.storage = storage


class DegenerateBody(L1LabError):
    """A convex body has zero diameter, so radius ratios are undefined."""


class NoValidPair(L1LabError):
    """A sampling routine could not find any admissible pair of inputs."""


class ConfigError(L1LabError):
    """A scenario configuration failed validation.

    Carries the full list of violations so the CLI can print one per line.
    """

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)
