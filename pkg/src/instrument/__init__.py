"""Probe network planning and timestamp queue allocation"""

from .probe_plan import Probe, ProbePlan, extract_signals
from .allocation import (
    AllocationSettings,
    CounterAllocation,
    ProbeAllocation,
    Storage,
    allocate_counters,
)

__all__ = [
    'Probe',
    'ProbePlan',
    'extract_signals',
    'AllocationSettings',
    'CounterAllocation',
    'ProbeAllocation',
    'Storage',
    'allocate_counters',
]
