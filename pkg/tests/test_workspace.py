"""
Workspace Test: Artifact Store and Incremental Rebuild
Tests content-addressed caching across pipeline runs

Success Criteria:
- Identical inputs give identical keys and identical bytes
- A target-only change reuses manifest, hierarchy and mapping
- Incremental results equal a full rebuild byte for byte
"""

import sys
import os
import logging

import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.manifest.model import InliningPolicy
from src.pipeline.runner import RunConfig, run_pipeline
from src.utils.config import Config
from src.utils.exceptions import ArtifactMiss, NoPreviousRunError
from src.workspace.incremental import (
    normalized_manifest_inputs,
    plan_incremental,
    stage_inputs,
    stage_keys,
)
from src.workspace.store import ArtifactStore, canonical_json, content_key, write_atomic

logger = logging.getLogger(__name__)

COMPARED_OUTPUTS = ["report.txt", "report.json", "trace.json", "timestamps.csv", "mapping.csv",
                    "probe_plan.json", "allocation.json", "oracle.json", "gantt.svg"]


def test_canonical_json_sorts_keys():
    assert canonical_json({"b": 1, "a": 2}) == canonical_json({"a": 2, "b": 1})
    assert canonical_json({}).endswith("\n")


def test_content_key_depends_on_kind_and_inputs():
    assert content_key("hierarchy", {"x": 1}) == content_key("hierarchy", {"x": 1})
    assert content_key("hierarchy", {"x": 1}) != content_key("mapping", {"x": 1})
    assert content_key("hierarchy", {"x": 1}) != content_key("hierarchy", {"x": 2})
    assert len(content_key("manifest", None)) == 64


def test_write_atomic_leaves_no_temporaries(tmp_path):
    target = tmp_path / "a" / "b.json"
    write_atomic(target, "one\n")
    write_atomic(target, "two\n")
    assert target.read_text(encoding="utf-8") == "two\n"
    assert [p.name for p in target.parent.iterdir()] == ["b.json"]


def test_store_and_load(tmp_path):
    logger.info("TEST: Artifact store")
    store = ArtifactStore(str(tmp_path))
    key = store.store("hierarchy", {"manifest": "k"}, {"nodes": [1, 2]})
    assert store.exists("hierarchy", key)
    assert store.load("hierarchy", key) == {"nodes": [1, 2]}
    # a second put under the same key keeps the first artifact
    store.put("hierarchy", key, {"nodes": []})
    assert store.load("hierarchy", key) == {"nodes": [1, 2]}


def test_missing_artifact(tmp_path):
    store = ArtifactStore(str(tmp_path))
    with pytest.raises(ArtifactMiss):
        store.load("mapping", "0" * 64)
    assert store.get("mapping", "0" * 64) is None


def test_inventory(tmp_path):
    store = ArtifactStore(str(tmp_path / "ws"))
    assert store.inventory() == {}
    a = store.store("mapping", 1, [])
    b = store.store("mapping", 2, [])
    store.store("manifest", 1, {})
    inventory = store.inventory()
    assert list(inventory) == ["manifest", "mapping"]
    assert inventory["mapping"] == sorted([a, b])


def _keys(toy, target, probes=None, settings=None):
    inputs = normalized_manifest_inputs(toy, InliningPolicy.INLINE_OFF_TOP)
    return stage_keys(stage_inputs(inputs, target, probes, settings or {"probe_config": "R-0"}))


def test_manifest_key_ignores_pragma_placement(toy):
    moved = toy.with_pragma("sum")
    a = normalized_manifest_inputs(toy, InliningPolicy.INLINE_OFF_ALL)
    b = normalized_manifest_inputs(moved, InliningPolicy.INLINE_OFF_ALL)
    assert a == b
    # the protected call sites still differ under off-top
    assert (normalized_manifest_inputs(toy, InliningPolicy.INLINE_OFF_TOP)
            != normalized_manifest_inputs(moved, InliningPolicy.INLINE_OFF_TOP))


def test_target_change_rebuilds_downstream_only(toy):
    first = _keys(toy, "compute")
    second = _keys(toy, "compute/sum")
    plan = plan_incremental({"keys": first}, second)
    assert plan.reused_kinds == ["manifest", "hierarchy", "mapping"]
    assert plan.rebuilt == ["probe_plan", "allocation"]
    assert plan.extraction_reuse == 1.0
    assert plan.reuse_fraction == pytest.approx(0.6)


def test_settings_change_reuses_probe_plan(toy):
    first = _keys(toy, "compute")
    second = _keys(toy, "compute", settings={"probe_config": "B-50"})
    plan = plan_incremental({"keys": first}, second)
    assert plan.rebuilt == ["allocation"]


def test_probe_order_does_not_matter(toy):
    assert _keys(toy, "compute", ["compute/sum", "compute/mult"]) == \
        _keys(toy, "compute", ["compute/mult", "compute/sum"])


def test_no_previous_run(toy):
    with pytest.raises(NoPreviousRunError):
        plan_incremental(None, _keys(toy, "compute"))


def _run(toy_path, workspace, target):
    rc = RunConfig(manifest_path=toy_path, target=target, workspace=str(workspace), config=Config())
    return run_pipeline(rc)


def test_incremental_pipeline(no_config, toy_path, tmp_path):
    logger.info("TEST: Incremental rebuild")
    ws = tmp_path / "ws"
    first = _run(toy_path, ws, "compute")
    assert first.prepared.built == ["manifest", "hierarchy", "mapping", "probe_plan", "allocation"]
    assert first.reuse.reused_kinds == []

    store = ArtifactStore(str(ws))
    hierarchy_key = first.prepared.keys["hierarchy"]
    before = store.path("hierarchy", hierarchy_key).read_bytes()

    second = _run(toy_path, ws, "sum")
    assert second.prepared.target_path == "main/compute/sum"
    assert second.reuse.reused_kinds == ["manifest", "hierarchy", "mapping"]
    assert second.reuse.rebuilt == ["probe_plan", "allocation"]
    assert second.prepared.built == ["probe_plan", "allocation"]
    assert store.path("hierarchy", hierarchy_key).read_bytes() == before
    assert second.trace.total_cycles == 40
    assert [p.source_path for p in second.trace.profiles] == ["sum", "sum/L_while"]

    fresh = tmp_path / "fresh"
    _run(toy_path, fresh, "sum")
    for name in COMPARED_OUTPUTS:
        incremental = (ws / "out" / name).read_bytes()
        full = (fresh / "out" / name).read_bytes()
        assert incremental == full, f"{name} differs between incremental and full runs"


def test_unchanged_rerun_reuses_everything(no_config, toy_path, tmp_path):
    _run(toy_path, tmp_path, "compute")
    again = _run(toy_path, tmp_path, "compute")
    assert again.reuse.rebuilt == []
    assert again.reuse.reuse_fraction == 1.0
    assert again.prepared.built == []
