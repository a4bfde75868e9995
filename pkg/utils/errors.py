"""Exception types and diagnostic records shared across OrbitMesh."""

from dataclasses import dataclass
from typing import Iterable, List, Optional


@dataclass(frozen=True)
class Violation:
    """A single machine-readable diagnostic (one per stderr line)."""

    code: str
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.code}: line {self.line}: {self.message}"
        return f"{self.code}: {self.message}"


class OrbitMeshError(Exception):
    """Root of all OrbitMesh errors."""


class ConfigError(OrbitMeshError, ValueError):
    """Invalid or unreadable main configuration."""


class ConstellationError(OrbitMeshError, ValueError):
    """Invalid constellation input (indices, times, geometry)."""


class TopologyError(OrbitMeshError, ValueError):
    """Invalid topology or mesh input."""


class FileIOError(OrbitMeshError, OSError):
    """An input or output file could not be read or written."""


class TraceIOError(FileIOError):
    """A trace file could not be read or written."""


class _ViolationsError(OrbitMeshError):
    def __init__(self, violations: Iterable[Violation]):
        self.violations: List[Violation] = list(violations)
        summary = "; ".join(str(v) for v in self.violations[:3])
        if len(self.violations) > 3:
            summary += f" (+{len(self.violations) - 3} more)"
        super().__init__(summary)


class TraceFormatError(_ViolationsError):
    """A trace file failed validation."""


class FabricError(OrbitMeshError):
    """Fabric backend misuse (bad parameters, missing addresses)."""


class FabricOverflowError(FabricError, ArithmeticError):
    """A scheduled timestamp left the signed 64-bit microsecond range."""


class PlanParseError(_ViolationsError):
    """An experiment plan document is structurally malformed."""


class PlanValidationError(_ViolationsError):
    """An experiment plan parsed but is semantically invalid."""


class OrchestratorError(OrbitMeshError):
    """Run-time misuse of the orchestrator (injection, strict aborts)."""


class TelemetryError(OrbitMeshError, ValueError):
    """Invalid timestamps or empty sample sets."""
