"""
Instrumentation Test: Probe Planning and Counter Allocation
Tests signal routing and queue sizing

Success Criteria:
- Every planned probe routes through all its ancestors
- Loop probes reserve truncate*2+2 slots per activation
- Unknown targets are rejected
- Counter width follows the static estimates
"""

import sys
import os
import json
import logging
from dataclasses import replace

import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.hierarchy.tree import build_hierarchy
from src.instrument.allocation import (
    AllocationSettings,
    CounterAllocation,
    Storage,
    allocate_counters,
)
from src.instrument.probe_plan import ProbePlan, extract_signals
from src.manifest.parser import parse_manifest
from src.utils.exceptions import UnknownNodeError

logger = logging.getLogger(__name__)


def test_all_probes_toy(toy_tree):
    logger.info("TEST: Probe plan")
    plan = extract_signals(toy_tree)
    assert len(plan) == 4
    loop_probe = plan.probe_for(3)
    # sum/L_while routes through sum, then compute
    assert loop_probe.route == (2, 0)
    assert plan.probe_for(0).route == ()
    assert loop_probe.signal_pair == ("ap_start", "ap_done")


def test_selected_targets(toy_tree):
    plan = extract_signals(toy_tree, [3, 1])
    assert plan.nodes == [1, 3]


def test_unknown_target(toy_tree):
    with pytest.raises(UnknownNodeError):
        extract_signals(toy_tree, [0, 99])


def test_plan_dict_round_trip(toy_tree):
    plan = extract_signals(toy_tree)
    assert ProbePlan.from_dict(json.loads(json.dumps(plan.to_dict()))) == plan


def test_toy_depths(toy_allocation):
    logger.info("TEST: Counter allocation")
    depths = {p.node: p.depth for p in toy_allocation.probes}
    # functions: 2 timestamps x 1 activation x safety 2; loop: 4*2 + 2
    assert depths == {0: 4, 1: 4, 2: 4, 3: 10}
    assert all(p.storage is Storage.REGISTER for p in toy_allocation.probes)
    assert toy_allocation.counter_width == 32
    assert toy_allocation.entry_bytes == 4
    assert toy_allocation.dump_ratio == 0.0


def test_depth_capped_at_max(toy_text):
    doc = json.loads(toy_text)
    doc["functions"]["sum"]["body"][0]["body"].append({"kind": "call", "callee": "mult"})
    doc["functions"]["sum"]["body"][0]["trip_count"] = 100
    tree = build_hierarchy(parse_manifest(json.dumps(doc)))
    allocation = allocate_counters(extract_signals(tree), tree)
    inner = tree.locate("compute/sum/L_while/mult")
    assert allocation.by_node()[inner].depth == 64


def test_data_dependent_gets_max_depth(toy_text):
    doc = json.loads(toy_text)
    doc["functions"]["sum"]["body"][0]["data_dependent"] = True
    tree = build_hierarchy(parse_manifest(json.dumps(doc)))
    allocation = allocate_counters(extract_signals(tree), tree)
    assert allocation.by_node()[3].depth == 64
    # unknown estimates force the wide counter
    assert allocation.counter_width == 64


def test_truncation_setting(toy_tree):
    settings = AllocationSettings(truncate_loop_iters=2)
    allocation = allocate_counters(extract_signals(toy_tree), toy_tree, settings)
    assert allocation.by_node()[3].depth == 2 * 2 + 2


def test_explicit_counter_width(toy_tree):
    settings = AllocationSettings(counter_width=64)
    allocation = allocate_counters(extract_signals(toy_tree), toy_tree, settings)
    assert allocation.counter_width == 64
    assert allocation.entry_bytes == 8


def test_effective_depth(toy_allocation):
    half = replace(toy_allocation, dump_ratio=0.5)
    loop = half.by_node()[3]
    assert half.effective_depth(loop) == 5
    root = half.by_node()[0]
    assert half.effective_depth(root) == 2
    quarter = replace(toy_allocation, dump_ratio=0.75)
    assert quarter.effective_depth(loop) == 3
    assert quarter.effective_depth(root) == 2


def test_allocation_dict_round_trip(toy_allocation):
    data = json.loads(json.dumps(toy_allocation.to_dict()))
    assert CounterAllocation.from_dict(data) == toy_allocation
