"""
Error types shared by every stage of the toolchain.

Each error carries the process exit code the command line maps it to.
"""

from typing import Optional, Sequence


class ProbeForgeError(Exception):
    """Base class for all toolchain errors"""

    exit_code = 1


class ManifestSyntaxError(ProbeForgeError):
    """Malformed manifest document"""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ValidationError(ProbeForgeError):
    """Manifest is well-formed but violates a design rule"""

    def __init__(self, message: str, cycle: Optional[Sequence[str]] = None):
        super().__init__(message)
        self.cycle = list(cycle) if cycle is not None else None


class NoPragmaError(ProbeForgeError):
    """No function carries the profiling pragma"""


class NodeNotFoundError(ProbeForgeError):
    """Source path does not name a hierarchy node"""

    def __init__(self, path: str, suggestion: Optional[str] = None):
        message = f"No hierarchy node at '{path}'"
        if suggestion is not None:
            message += f" (did you mean '{suggestion}'?)"
        super().__init__(message)
        self.path = path
        self.suggestion = suggestion


class UnknownNodeError(ProbeForgeError):
    """Probe target id is not part of the tree"""


class EdgeOrderViolation(ProbeForgeError):
    """Toggle sequence for a probe is not rise/fall alternating"""


class CounterOverflowError(ProbeForgeError):
    """Global cycle counter would exceed its width"""

    exit_code = 3


class LossyLogError(ProbeForgeError):
    """Timestamp log lost entries and cannot be reconstructed exactly"""

    exit_code = 3


class DegenerateBaselineError(ProbeForgeError):
    """Weighted resource has neither a kernel baseline nor a budget"""


class UnfittableError(ProbeForgeError):
    """No probe configuration fits the resource budget"""

    exit_code = 2


class ArtifactMiss(ProbeForgeError):
    """Artifact key not present in the workspace"""


class NoPreviousRunError(ProbeForgeError):
    """Incremental planning requested without a recorded run"""
