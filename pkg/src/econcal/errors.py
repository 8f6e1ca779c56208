"""Exception hierarchy.

Errors are grouped by how the CLI maps them to exit codes:
configuration problems (exit 2), numerical failures (exit 3) and
I/O problems (exit 4, plain OSError).
"""


class EconCalError(Exception):
    """Base class for all package errors."""


class ConfigError(EconCalError):
    """Invalid experiment configuration.

    Carries the full list of violations so a user can fix a config in
    one pass instead of playing whack-a-mole.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" + "\n".join(
            f"  - {v}" for v in self.violations))


class GraphConnectivityError(EconCalError):
    """Encounter graph violates the connectivity axiom."""


class DomainBoundaryError(EconCalError):
    """Utility evaluation hit a non-finite value at a domain boundary.

    Callers that sample treat the offending point as zero probability.
    """


class MeterEconomyMismatchError(EconCalError):
    """Meter and economy disagree on the number of goods."""


class MeasurementProtocolError(EconCalError):
    """Measurement protocol is unusable (non-positive spans, degenerate
    sampling plan, cross rate outside (0, 1))."""


class SingularSystemError(EconCalError):
    """Entropy fit system is singular (grid graph not connected)."""


class ConvergenceError(EconCalError):
    """An iterative numerical routine failed to converge."""


class NotAdjacentError(EconCalError):
    """Edge increment requested for a non-adjacent node pair."""
