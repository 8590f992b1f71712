"""
Incremental Rebuild
Stage keys, run records and the reuse plan between two pipeline runs
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.manifest.model import DesignManifest, InliningPolicy
from src.manifest.parser import manifest_to_doc
from src.workspace.store import canonical_json, content_key, write_atomic
from src.utils.exceptions import NoPreviousRunError

logger = logging.getLogger(__name__)

PIPELINE_KINDS = ("manifest", "hierarchy", "mapping", "probe_plan", "allocation")
EXTRACTION_KINDS = ("manifest", "hierarchy", "mapping")

RUN_RECORD = Path("runs") / "latest.json"


def normalized_manifest_inputs(source: DesignManifest, policy: InliningPolicy) -> Dict[str, Any]:
    """
    Key inputs of the normalized (inlined) manifest.

    Pragma flags are stripped: the probe target is an input of the probe
    plan, not of extraction. The pragma still names which call sites the
    inlining pass protects unless every function is kept anyway.
    """
    doc = manifest_to_doc(source.with_pragma(None))
    protected_root = None if policy is InliningPolicy.INLINE_OFF_ALL else source.pragma_function
    return {"manifest": doc, "policy": policy.value, "inline_protect": protected_root}


def stage_inputs(
    manifest_inputs: Dict[str, Any],
    target: str,
    probes: Optional[List[str]],
    allocation_settings: Dict[str, Any]
) -> Dict[str, Dict[str, Any]]:
    """
    Chained key inputs of every pipeline stage.

    Each stage depends on the key of the stage before it plus its own
    settings, so a change propagates exactly to the stages downstream of it.
    """
    inputs: Dict[str, Dict[str, Any]] = {"manifest": manifest_inputs}
    manifest_key = content_key("manifest", manifest_inputs)
    inputs["hierarchy"] = {"manifest": manifest_key}
    hierarchy_key = content_key("hierarchy", inputs["hierarchy"])
    inputs["mapping"] = {"hierarchy": hierarchy_key}
    inputs["probe_plan"] = {
        "hierarchy": hierarchy_key,
        "target": target,
        "probes": sorted(probes) if probes else "all",
    }
    inputs["allocation"] = {
        "probe_plan": content_key("probe_plan", inputs["probe_plan"]),
        "settings": allocation_settings,
    }
    return inputs


def stage_keys(inputs: Dict[str, Dict[str, Any]]) -> Dict[str, str]:
    return {kind: content_key(kind, inputs[kind]) for kind in PIPELINE_KINDS}


@dataclass
class ReusePlan:
    reused: List[str] = field(default_factory=list)
    rebuilt: List[str] = field(default_factory=list)
    reused_kinds: List[str] = field(default_factory=list)

    @property
    def reuse_fraction(self) -> float:
        total = len(self.reused_kinds) + len(self.rebuilt)
        return len(self.reused_kinds) / total if total else 0.0

    @property
    def extraction_reuse(self) -> float:
        """Fraction of extraction artifacts (manifest, hierarchy, mapping) reused"""
        return sum(k in self.reused_kinds for k in EXTRACTION_KINDS) / len(EXTRACTION_KINDS)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "reused": list(self.reused),
            "reused_kinds": list(self.reused_kinds),
            "rebuilt": list(self.rebuilt),
            "reuse_fraction": self.reuse_fraction,
        }


def plan_incremental(prev_run: Optional[Dict[str, Any]], new_keys: Dict[str, str]) -> ReusePlan:
    """
    Decide which artifacts a new run can take from the previous one.

    A stage is reused when its key matches the previous run's key for the
    same kind. Because keys are chained, a target-only change reuses the
    manifest, hierarchy and mapping and rebuilds probe_plan and allocation;
    a settings-only change reuses through probe_plan; a manifest edit
    rebuilds everything.

    Args:
        prev_run: Previous run record (see load_run_record)
        new_keys: Stage keys of the new run

    Returns:
        ReusePlan

    Raises:
        NoPreviousRunError: there is no previous run
    """
    if not prev_run:
        raise NoPreviousRunError("no previous run recorded in this workspace")
    previous = prev_run.get("keys", {})
    plan = ReusePlan()
    for kind in PIPELINE_KINDS:
        if previous.get(kind) == new_keys[kind]:
            plan.reused.append(new_keys[kind])
            plan.reused_kinds.append(kind)
        else:
            plan.rebuilt.append(kind)
    logger.info(f"Reusing {len(plan.reused_kinds)}/{len(PIPELINE_KINDS)} artifacts; "
                f"rebuilding {plan.rebuilt or 'nothing'}")
    return plan


def load_run_record(workspace: str) -> Optional[Dict[str, Any]]:
    path = Path(workspace) / RUN_RECORD
    if not path.is_file():
        return None
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def save_run_record(workspace: str, record: Dict[str, Any]) -> None:
    write_atomic(Path(workspace) / RUN_RECORD, canonical_json(record))
