"""Exception hierarchy for Satake.

Every error knows the process exit code the command line maps it to.
"""

from typing import Any, List, Optional, Sequence


class SatakeError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 4


class ValidationError(SatakeError, ValueError):
    """Input rejected before any computation started."""

    exit_code = 2


class PresetNotFound(ValidationError):
    """Unknown preset name."""

    def __init__(self, name: str, valid: Sequence[str]):
        self.name = name
        self.valid = list(valid)
        super().__init__(
            f"Unknown preset '{name}'. Valid presets: {', '.join(self.valid)}"
        )


class UnsupportedOperation(ValidationError):
    """Operation not implemented for the requested family."""


class InteriorDirection(ValidationError):
    """Direction is not on the boundary of the variety."""


class UnboundedPolytope(ValidationError):
    """The weight polytope has a nonzero recession direction."""

    def __init__(self, ray: Sequence[Any]):
        self.ray = list(ray)
        super().__init__(
            "Weight polytope is unbounded along recession ray "
            f"({', '.join(str(x) for x in self.ray)})"
        )


class BudgetExceeded(SatakeError):
    """Work budget exhausted; partial results are attached."""

    exit_code = 3

    def __init__(self, message: str, partial: Optional[List[Any]] = None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


class QuadratureError(BudgetExceeded):
    """Adaptive quadrature did not reach its tolerance within budget."""

    def __init__(self, message: str, estimate: float, evaluations: int):
        super().__init__(
            f"{message} (estimate={estimate!r}, evaluations={evaluations})",
            partial=[estimate],
        )
        self.estimate = estimate
        self.evaluations = evaluations


class InternalInconsistency(SatakeError):
    """A computed value contradicts an invariant that should always hold."""

    exit_code = 4
