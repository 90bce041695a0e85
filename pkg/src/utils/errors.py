"""Exception hierarchy shared by every package."""
from typing import List, Optional


class RoadCollabError(Exception):
    """Base class for all library errors."""


class DimensionError(RoadCollabError, ValueError):
    """Operands have incompatible shapes."""


class DiagnosticsError(RoadCollabError):
    """A numerical sub-problem (eigen, realization) failed its checks."""


class SingularityError(RoadCollabError):
    """A transfer matrix is numerically singular on the evaluation grid."""

    def __init__(self, message: str, omega: Optional[float] = None):
        super().__init__(message)
        self.omega = omega


class ConditioningError(RoadCollabError):
    """A filter response exceeds the amplification guard."""

    def __init__(self, message: str, omega: Optional[float] = None,
                 magnitude: Optional[float] = None):
        super().__init__(message)
        self.omega = omega
        self.magnitude = magnitude


class DivergenceError(RoadCollabError):
    """A time-domain integration blew up."""

    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message)
        self.step = step


class RiccatiError(RoadCollabError):
    """No acceptable stabilizing Riccati solution was found."""


class ObfuscatorError(RoadCollabError):
    """Obfuscator generation failed."""


class ConfigError(RoadCollabError):
    """Experiment configuration failed to parse or validate."""

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class PipelineStepError(RoadCollabError):
    """A step of the collaborative estimation pass failed."""

    def __init__(self, step: int, vehicle_id: int, cause: Exception):
        self.step = step
        self.vehicle_id = vehicle_id
        self.cause = cause
        super().__init__(f"vehicle {vehicle_id}, step {step}: {cause}")


class RunFailedError(RoadCollabError):
    """Too many trials of an experiment run failed."""

    def __init__(self, failed: int, total: int):
        self.failed = failed
        self.total = total
        super().__init__(f"{failed} of {total} trials failed")


class SchemaError(RoadCollabError, ValueError):
    """Document does not match the expected schema or kind."""


class AttackError(RoadCollabError, ValueError):
    """The attacker cannot process an intercepted message as asked."""
