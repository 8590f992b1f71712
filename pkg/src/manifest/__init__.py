"""Design manifest parsing, validation, inlining and static latency estimates"""

from .model import (
    Call,
    Compute,
    DesignManifest,
    DramAccess,
    FunctionDef,
    InlineHint,
    InliningPolicy,
    Loop,
    Parallel,
    PlatformModel,
    ResourceBudget,
)
from .parser import PLATFORM_PRESETS, load_manifest, parse_manifest, render_manifest
from .inlining import apply_inlining
from .rollup import static_latency_rollup

__all__ = [
    'Call',
    'Compute',
    'DesignManifest',
    'DramAccess',
    'FunctionDef',
    'InlineHint',
    'InliningPolicy',
    'Loop',
    'Parallel',
    'PlatformModel',
    'ResourceBudget',
    'PLATFORM_PRESETS',
    'load_manifest',
    'parse_manifest',
    'render_manifest',
    'apply_inlining',
    'static_latency_rollup',
]
