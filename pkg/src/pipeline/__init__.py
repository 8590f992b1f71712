"""End-to-end profiling pipeline and run metrics"""

from .metrics import write_run_metrics
from .runner import (
    PipelineResult,
    PreparedRun,
    RunConfig,
    oracle_as_trace,
    prepare,
    resolve_target,
    run_pipeline,
)

__all__ = [
    'write_run_metrics',
    'PipelineResult',
    'PreparedRun',
    'RunConfig',
    'oracle_as_trace',
    'prepare',
    'resolve_target',
    'run_pipeline',
]
