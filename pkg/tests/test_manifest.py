"""
Manifest Test: Parsing, Validation and Inlining
Tests the design manifest front end

Success Criteria:
- Toy manifest parses with the pragma on compute and top main
- Malformed documents report a position, design rule violations a cause
- Inlining policies are pure, idempotent rewrites
- Static roll-up matches hand-computed latencies
"""

import sys
import os
import json
import logging

import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.hierarchy.tree import build_hierarchy
from src.manifest.generator import generate_manifest
from src.manifest.inlining import apply_inlining
from src.manifest.model import Call, Compute, InliningPolicy, Loop
from src.manifest.parser import find_call_cycle, parse_manifest, render_manifest
from src.manifest.rollup import static_latency_rollup
from src.utils.exceptions import ManifestSyntaxError, ValidationError

logger = logging.getLogger(__name__)


def _toy_doc(toy_text):
    return json.loads(toy_text)


def test_parse_toy(toy):
    logger.info("TEST: Parse toy manifest")
    assert toy.name == "toy"
    assert toy.top == "main"
    assert toy.pragma_function == "compute"
    # compute, mult and sum plus the main wrapper
    assert set(toy.functions) == {"main", "compute", "mult", "sum"}
    assert toy.platform.name == "pynq-z2"
    assert toy.platform.fixed_latency_cycles == 30
    assert toy.budget.lut == 53200
    assert toy.kernel_usage.lut == 7840

    sum_body = toy.function("sum").body
    assert isinstance(sum_body[0], Loop)
    assert sum_body[0].trip_count == 8
    assert sum_body[0].body == (Compute(5),)


def test_malformed_json_reports_position():
    with pytest.raises(ManifestSyntaxError) as info:
        parse_manifest('{"design": "x",\n  "top": }')
    assert info.value.line == 2
    assert info.value.exit_code == 1


def test_wrong_field_type(toy_text):
    doc = _toy_doc(toy_text)
    doc["functions"]["mult"]["body"][0]["cycles"] = "forty"
    with pytest.raises(ManifestSyntaxError, match="cycles"):
        parse_manifest(json.dumps(doc))


def test_unknown_key_rejected(toy_text):
    doc = _toy_doc(toy_text)
    doc["functions"]["sum"]["unroll"] = 4
    with pytest.raises(ManifestSyntaxError, match="unroll"):
        parse_manifest(json.dumps(doc))


def test_recursion_reports_cycle(toy_text):
    doc = _toy_doc(toy_text)
    doc["functions"]["mult"]["body"].append({"kind": "call", "callee": "compute"})
    with pytest.raises(ValidationError) as info:
        parse_manifest(json.dumps(doc))
    cycle = info.value.cycle
    assert cycle[0] == cycle[-1]
    assert set(cycle) == {"compute", "mult"}


def test_dangling_callee(toy_text):
    doc = _toy_doc(toy_text)
    doc["functions"]["sum"]["body"].append({"kind": "call", "callee": "missing"})
    with pytest.raises(ValidationError, match="missing"):
        parse_manifest(json.dumps(doc))


def test_pipelined_loop_needs_ii(toy_text):
    doc = _toy_doc(toy_text)
    doc["functions"]["sum"]["body"][0]["pipelined"] = True
    with pytest.raises(ValidationError, match="ii"):
        parse_manifest(json.dumps(doc))


def test_pipelined_body_rejects_calls(toy_text):
    doc = _toy_doc(toy_text)
    loop = doc["functions"]["sum"]["body"][0]
    loop.update({"pipelined": True, "ii": 1})
    loop["body"].append({"kind": "call", "callee": "mult"})
    with pytest.raises(ValidationError, match="pipelined"):
        parse_manifest(json.dumps(doc))


def test_two_pragmas_rejected(toy_text):
    doc = _toy_doc(toy_text)
    doc["functions"]["sum"]["pragma_realprobe"] = True
    with pytest.raises(ValidationError, match="pragma"):
        parse_manifest(json.dumps(doc))


def test_unknown_platform_preset(toy_text):
    doc = _toy_doc(toy_text)
    doc["platform"] = "alveo"
    with pytest.raises(ValidationError, match="alveo"):
        parse_manifest(json.dumps(doc))


def test_render_is_canonical(toy):
    text = render_manifest(toy)
    assert text.endswith("\n")
    assert render_manifest(parse_manifest(text)) == text


def test_no_cycle_in_toy(toy):
    assert find_call_cycle(toy) is None


def test_inline_off_all_keeps_every_function(toy):
    logger.info("TEST: InlineOffAll")
    result = apply_inlining(toy, InliningPolicy.INLINE_OFF_ALL)
    assert set(result.functions) == set(toy.functions)
    assert result.function("compute").body == (Call("mult"), Call("sum"))


def test_inline_default_splices_single_compute(toy):
    result = apply_inlining(toy, InliningPolicy.INLINE_DEFAULT)
    assert "mult" not in result.functions
    body = result.function("compute").body
    assert body[0] == Compute(40, "mult_c0")
    assert body[1] == Call("sum")
    # loops are never flattened away
    assert "sum" in result.functions


def test_inline_off_top_protects_pragma_subtree(toy):
    result = apply_inlining(toy, InliningPolicy.INLINE_OFF_TOP)
    assert set(result.functions) == set(toy.functions)
    assert result.function("compute").body == (Call("mult"), Call("sum"))


@pytest.mark.parametrize("policy", list(InliningPolicy))
def test_inlining_is_idempotent(toy, policy):
    once = apply_inlining(toy, policy)
    twice = apply_inlining(once, policy)
    assert render_manifest(once) == render_manifest(twice)


@pytest.mark.parametrize("seed", range(5))
def test_inlining_idempotent_on_generated(seed):
    m = generate_manifest(seed)
    for policy in InliningPolicy:
        once = apply_inlining(m, policy)
        assert render_manifest(apply_inlining(once, policy)) == render_manifest(once)


def test_pragma_function_hinted_always_rejected(toy_text):
    doc = _toy_doc(toy_text)
    doc["functions"]["compute"]["inline"] = "always"
    m = parse_manifest(json.dumps(doc))
    with pytest.raises(ValidationError, match="compute"):
        apply_inlining(m, InliningPolicy.INLINE_DEFAULT)


def test_rollup_toy(toy):
    logger.info("TEST: Static latency roll-up")
    rollup = static_latency_rollup(toy)
    assert rollup["mult"] == 40
    assert rollup["sum"] == 40
    assert rollup["sum/L_while"] == 40
    assert rollup["compute"] == 80
    assert rollup["main"] == 80


def test_rollup_pipelined_and_dram(toy_text):
    doc = _toy_doc(toy_text)
    doc["functions"]["sum"]["body"] = [
        {"kind": "dram", "bursts": 2, "burst_bytes": 64},
        {"kind": "loop", "name": "L_p", "trip_count": 10, "pipelined": True, "ii": 2,
         "body": [{"kind": "compute", "cycles": 7}]},
    ]
    rollup = static_latency_rollup(parse_manifest(json.dumps(doc)))
    # 2 bursts at the fixed 30-cycle latency, then ii*(trip-1)+body
    assert rollup["sum/L_p"] == 2 * 9 + 7
    assert rollup["sum"] == 60 + 25


def test_rollup_data_dependent_is_unknown(toy_text):
    doc = _toy_doc(toy_text)
    doc["functions"]["sum"]["body"][0]["data_dependent"] = True
    rollup = static_latency_rollup(parse_manifest(json.dumps(doc)))
    assert rollup["sum"] is None
    assert rollup["compute"] is None
    assert rollup["mult"] == 40


def test_estimated_cycles_override(toy_text):
    doc = _toy_doc(toy_text)
    doc["functions"]["mult"]["estimated_cycles"] = 55
    rollup = static_latency_rollup(parse_manifest(json.dumps(doc)))
    assert rollup["mult"] == 55
    assert rollup["compute"] == 95


@pytest.mark.parametrize("seed", range(10))
def test_generator_is_deterministic(seed):
    assert render_manifest(generate_manifest(seed)) == render_manifest(generate_manifest(seed))
    m = generate_manifest(seed)
    assert m.pragma_function == "kernel"
    assert m.top == "main"


@pytest.mark.parametrize("max_trip", [4, 40])
def test_generator_respects_module_cap(max_trip):
    logger.info("TEST: Generated designs stay within 64 modules")
    for seed in range(40):
        tree = build_hierarchy(generate_manifest(seed, max_trip=max_trip))
        assert len(tree) <= 64, f"seed {seed}: {len(tree)} modules"
    small = build_hierarchy(generate_manifest(15, max_modules=8))
    assert len(small) <= 8
