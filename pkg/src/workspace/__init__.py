"""Content-addressed artifact workspace and incremental rebuild planning"""

from .store import ArtifactStore, canonical_json, content_key, write_atomic
from .incremental import (
    EXTRACTION_KINDS,
    PIPELINE_KINDS,
    ReusePlan,
    load_run_record,
    normalized_manifest_inputs,
    plan_incremental,
    save_run_record,
    stage_inputs,
    stage_keys,
)

__all__ = [
    'ArtifactStore',
    'canonical_json',
    'content_key',
    'write_atomic',
    'EXTRACTION_KINDS',
    'PIPELINE_KINDS',
    'ReusePlan',
    'load_run_record',
    'normalized_manifest_inputs',
    'plan_incremental',
    'save_run_record',
    'stage_inputs',
    'stage_keys',
]
