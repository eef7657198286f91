"""Exception types raised by the simulation engines."""

from __future__ import annotations


class CircuitError(Exception):
    """Base class for simulation-level failures."""


class SingularSystemError(CircuitError):
    """The assembled system has no unique solution.

    Carries the label of the unknown whose pivot collapsed, which usually
    points at a floating node or contradictory constraints.
    """

    def __init__(self, unknown_label: str, detail: str = ""):
        self.unknown_label = unknown_label
        msg = f"singular system at unknown {unknown_label!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class NonConvergenceError(CircuitError):
    """Newton iteration failed to converge during a transient step."""

    def __init__(self, time_s: float, iterations: int):
        self.time_s = time_s
        self.iterations = iterations
        super().__init__(
            f"Newton did not converge at t={time_s:.6g} s after {iterations} iterations"
        )


class NotAllPassLikeError(CircuitError):
    """The probed phase response never crosses the +-90 degree target."""


class NoFundamentalError(CircuitError):
    """The trace carries no measurable component at the fundamental."""
