"""Design-space exploration over storage strategy and dump ratio"""

from .configs import ProbeConfig, StorageMode, enumerate_configs, parse_storage
from .explorer import DsePoint, ExplorationResult, evaluate, explore, planned_offload_bytes
from .pareto import dominates, pareto_frontier, select_balanced

__all__ = [
    'ProbeConfig',
    'StorageMode',
    'enumerate_configs',
    'parse_storage',
    'DsePoint',
    'ExplorationResult',
    'evaluate',
    'explore',
    'planned_offload_bytes',
    'dominates',
    'pareto_frontier',
    'select_balanced',
]
