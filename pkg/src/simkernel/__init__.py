"""Discrete-event execution of designs with the profiler attached"""

from src.manifest.model import PlatformModel

from .engine import (
    DramEvent,
    ExecutionTrace,
    LatencyMode,
    ProfiledRun,
    SimSettings,
    run,
    run_profiled,
)
from .reconstruct import reconstruct

__all__ = [
    'PlatformModel',
    'DramEvent',
    'ExecutionTrace',
    'LatencyMode',
    'ProfiledRun',
    'SimSettings',
    'run',
    'run_profiled',
    'reconstruct',
]
