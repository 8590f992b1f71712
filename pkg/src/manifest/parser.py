"""
Manifest Parser
Reads and validates design-manifest JSON documents and renders them back canonically
"""

import json
import logging
from typing import Any, Dict, List, Mapping, Optional, Tuple

from src.manifest.model import (
    BodyNode,
    Call,
    Compute,
    DesignManifest,
    DramAccess,
    FunctionDef,
    InlineHint,
    Loop,
    Parallel,
    PlatformModel,
    ResourceBudget,
    iter_callees,
    iter_sites,
)
from src.utils.exceptions import ManifestSyntaxError, ValidationError

logger = logging.getLogger(__name__)

# Board presets; cosim latency is shared so co-simulation is board-independent.
PLATFORM_PRESETS: Dict[str, Dict[str, Any]] = {
    "pynq-z2": {
        "fixed_latency_cycles": 30,
        "hw_latency_min": 30,
        "hw_latency_mean": 45,
        "bandwidth_gbps": 1.43,
    },
    "zcu102": {
        "fixed_latency_cycles": 30,
        "hw_latency_min": 34,
        "hw_latency_mean": 48,
        "bandwidth_gbps": 4.2,
    },
}

_TOP_KEYS = {"design", "clock_mhz", "platform", "budget", "top", "functions", "kernel_usage"}
_FUNCTION_KEYS = {"pragma_realprobe", "inline", "estimated_cycles", "body"}
_NODE_KEYS = {
    "call": {"kind", "callee"},
    "loop": {"kind", "name", "trip_count", "pipelined", "ii", "body", "data_dependent"},
    "compute": {"kind", "cycles", "name"},
    "dram": {"kind", "bursts", "burst_bytes", "name"},
    "parallel": {"kind", "branches", "name"},
}
_DRAM_KEYS = {"fixed_latency_cycles", "hw_latency_min", "hw_latency_mean", "bandwidth_gbps"}


def parse_manifest(
    text: str,
    presets: Optional[Mapping[str, Mapping[str, Any]]] = None
) -> DesignManifest:
    """
    Parse and validate a manifest document.

    Args:
        text: UTF-8 JSON manifest
        presets: Platform presets by name (defaults to PLATFORM_PRESETS)

    Returns:
        Validated DesignManifest

    Raises:
        ManifestSyntaxError: malformed JSON or wrong field types
        ValidationError: design rule violations
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ManifestSyntaxError(e.msg, e.lineno, e.colno) from e

    manifest = _build_manifest(doc, presets if presets is not None else PLATFORM_PRESETS)
    validate_manifest(manifest)
    logger.debug(f"Parsed manifest '{manifest.name}' with {len(manifest.functions)} functions")
    return manifest


def load_manifest(path: str, presets: Optional[Mapping[str, Mapping[str, Any]]] = None) -> DesignManifest:
    """Read and parse a manifest file"""
    with open(path, "r", encoding="utf-8") as f:
        return parse_manifest(f.read(), presets)


# ---------------------------------------------------------------- decoding

def _fail(where: str, message: str) -> ManifestSyntaxError:
    return ManifestSyntaxError(f"{where}: {message}")


def _check_keys(obj: Any, allowed: set, required: set, where: str) -> Dict[str, Any]:
    if not isinstance(obj, dict):
        raise _fail(where, "expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise _fail(where, f"unknown keys {unknown}")
    missing = sorted(required - set(obj))
    if missing:
        raise _fail(where, f"missing keys {missing}")
    return obj


def _int(value: Any, where: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(where, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{where}: must be >= {minimum}, got {value}")
    return value


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(where, f"expected a number, got {value!r}")
    return value


def _bool(value: Any, where: str) -> bool:
    if not isinstance(value, bool):
        raise _fail(where, f"expected true/false, got {value!r}")
    return value


def _str(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise _fail(where, f"expected a non-empty string, got {value!r}")
    return value


def _resources(obj: Any, where: str) -> ResourceBudget:
    obj = _check_keys(obj, {"lut", "ff", "bram"}, {"lut", "ff", "bram"}, where)
    return ResourceBudget(
        lut=_int(obj["lut"], f"{where}.lut"),
        ff=_int(obj["ff"], f"{where}.ff"),
        bram_blocks=_int(obj["bram"], f"{where}.bram"),
    )


def _platform(obj: Any, presets: Mapping[str, Mapping[str, Any]]) -> PlatformModel:
    if isinstance(obj, str):
        if obj not in presets:
            raise ValidationError(f"platform: unknown preset '{obj}' (known: {sorted(presets)})")
        name, dram = obj, dict(presets[obj])
    else:
        obj = _check_keys(obj, {"name", "dram"}, {"name", "dram"}, "platform")
        name = _str(obj["name"], "platform.name")
        dram = _check_keys(obj["dram"], _DRAM_KEYS, _DRAM_KEYS, "platform.dram")

    platform = PlatformModel(
        name=name,
        fixed_latency_cycles=_int(dram["fixed_latency_cycles"], "platform.dram.fixed_latency_cycles"),
        hw_latency_min=_int(dram["hw_latency_min"], "platform.dram.hw_latency_min"),
        hw_latency_mean=_number(dram["hw_latency_mean"], "platform.dram.hw_latency_mean"),
        bandwidth_gbps=_number(dram["bandwidth_gbps"], "platform.dram.bandwidth_gbps"),
    )
    if platform.hw_latency_min < 1:
        raise ValidationError("platform: hw_latency_min must be >= 1")
    if platform.hw_latency_mean < platform.hw_latency_min:
        raise ValidationError("platform: hw_latency_mean must be >= hw_latency_min")
    if platform.bandwidth_gbps <= 0:
        raise ValidationError("platform: bandwidth_gbps must be > 0")
    return platform


def _node(obj: Any, where: str) -> BodyNode:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise _fail(where, "expected a node object with a 'kind'")
    kind = obj["kind"]
    if kind not in _NODE_KEYS:
        raise _fail(where, f"unknown node kind {kind!r}")
    allowed = _NODE_KEYS[kind]
    name = obj.get("name")
    if name is not None:
        name = _str(name, f"{where}.name")

    if kind == "call":
        _check_keys(obj, allowed, {"kind", "callee"}, where)
        return Call(callee=_str(obj["callee"], f"{where}.callee"))

    if kind == "loop":
        _check_keys(obj, allowed, {"kind", "name", "trip_count", "body"}, where)
        pipelined = _bool(obj.get("pipelined", False), f"{where}.pipelined")
        ii = obj.get("ii")
        if pipelined:
            if ii is None:
                raise ValidationError(f"{where}: pipelined loop requires 'ii'")
            ii = _int(ii, f"{where}.ii", minimum=1)
        elif ii is not None:
            raise ValidationError(f"{where}: 'ii' only applies to pipelined loops")
        return Loop(
            name=_str(obj["name"], f"{where}.name"),
            trip_count=_int(obj["trip_count"], f"{where}.trip_count"),
            pipelined=pipelined,
            ii=ii,
            body=_body(obj["body"], f"{where}.body"),
            data_dependent=_bool(obj.get("data_dependent", False), f"{where}.data_dependent"),
        )

    if kind == "compute":
        _check_keys(obj, allowed, {"kind", "cycles"}, where)
        return Compute(cycles=_int(obj["cycles"], f"{where}.cycles"), name=name)

    if kind == "dram":
        _check_keys(obj, allowed, {"kind", "bursts", "burst_bytes"}, where)
        return DramAccess(
            bursts=_int(obj["bursts"], f"{where}.bursts"),
            burst_bytes=_int(obj["burst_bytes"], f"{where}.burst_bytes"),
            name=name,
        )

    _check_keys(obj, allowed, {"kind", "branches"}, where)
    branches = obj["branches"]
    if not isinstance(branches, list) or not branches:
        raise ValidationError(f"{where}: parallel block needs at least one branch")
    return Parallel(
        branches=tuple(_body(b, f"{where}.branches[{i}]") for i, b in enumerate(branches)),
        name=name,
    )


def _body(items: Any, where: str) -> Tuple[BodyNode, ...]:
    if not isinstance(items, list):
        raise _fail(where, "expected a list of nodes")
    return tuple(_node(item, f"{where}[{i}]") for i, item in enumerate(items))


def _function(name: str, obj: Any) -> FunctionDef:
    where = f"functions.{name}"
    obj = _check_keys(obj, _FUNCTION_KEYS, {"body"}, where)
    hint = obj.get("inline", "auto")
    try:
        inline_hint = InlineHint(hint)
    except ValueError:
        raise _fail(f"{where}.inline", f"expected auto/never/always, got {hint!r}")
    estimated = obj.get("estimated_cycles")
    if estimated is not None:
        estimated = _int(estimated, f"{where}.estimated_cycles")
    return FunctionDef(
        name=name,
        body=_body(obj["body"], f"{where}.body"),
        pragma_realprobe=_bool(obj.get("pragma_realprobe", False), f"{where}.pragma_realprobe"),
        inline_hint=inline_hint,
        estimated_cycles=estimated,
    )


def _build_manifest(doc: Any, presets: Mapping[str, Mapping[str, Any]]) -> DesignManifest:
    doc = _check_keys(doc, _TOP_KEYS, _TOP_KEYS - {"kernel_usage"}, "manifest")
    clock = _number(doc["clock_mhz"], "clock_mhz")
    if clock <= 0:
        raise ValidationError("clock_mhz must be > 0")
    functions_doc = doc["functions"]
    if not isinstance(functions_doc, dict):
        raise _fail("functions", "expected an object")
    usage = doc.get("kernel_usage")
    return DesignManifest(
        name=_str(doc["design"], "design"),
        clock_mhz=clock,
        platform=_platform(doc["platform"], presets),
        budget=_resources(doc["budget"], "budget"),
        functions={name: _function(name, f) for name, f in functions_doc.items()},
        top=_str(doc["top"], "top"),
        kernel_usage=_resources(usage, "kernel_usage") if usage is not None else ResourceBudget(),
    )


# -------------------------------------------------------------- validation

def validate_manifest(m: DesignManifest) -> None:
    """
    Check the cross-reference rules of a manifest.

    Raises:
        ValidationError: dangling callee, recursion, duplicate loop names,
            loop/callee name clash, forbidden nodes in a pipelined body,
            or more than one pragma
    """
    if m.top not in m.functions:
        raise ValidationError(f"top function '{m.top}' is not defined")
    if m.clock_mhz <= 0:
        raise ValidationError("clock_mhz must be > 0")

    pragmas = sorted(name for name, f in m.functions.items() if f.pragma_realprobe)
    if len(pragmas) > 1:
        raise ValidationError(f"multiple functions carry the profiling pragma: {pragmas}")

    for name, fdef in m.functions.items():
        if fdef.estimated_cycles is not None and fdef.estimated_cycles < 0:
            raise ValidationError(f"{name}: estimated_cycles must be >= 0")
        callees = set()
        for callee in iter_callees(fdef.body):
            if callee not in m.functions:
                raise ValidationError(f"{name}: call to undefined function '{callee}'")
            callees.add(callee)
        _check_loops(name, fdef.body, callees)

    cycle = find_call_cycle(m)
    if cycle is not None:
        raise ValidationError(f"recursive call chain {' -> '.join(cycle)}", cycle=cycle)


def _check_loops(function_name: str, body: Tuple[BodyNode, ...], callees: set) -> None:
    seen = set()
    for _, node in iter_sites(body):
        if isinstance(node, Parallel) and not node.branches:
            raise ValidationError(f"{function_name}: parallel block needs at least one branch")
        if not isinstance(node, Loop):
            continue
        if node.name in seen:
            raise ValidationError(f"{function_name}: duplicate loop name '{node.name}'")
        if node.name in callees:
            raise ValidationError(
                f"{function_name}: loop '{node.name}' has the same name as a called function"
            )
        seen.add(node.name)
        if node.pipelined:
            if node.ii is None or node.ii < 1:
                raise ValidationError(f"{function_name}/{node.name}: pipelined loop needs ii >= 1")
            for _, inner in iter_sites(node.body):
                if isinstance(inner, (Call, Loop)):
                    raise ValidationError(
                        f"{function_name}/{node.name}: pipelined loop bodies may only hold "
                        f"compute, dram and parallel nodes"
                    )


def find_call_cycle(m: DesignManifest) -> Optional[List[str]]:
    """
    Depth-first search for recursion.

    Returns:
        The cycle as a name list closing on its first element
        (e.g. ["a", "b", "a"]), or None
    """
    graph = {name: sorted(set(iter_callees(f.body))) for name, f in m.functions.items()}
    state: Dict[str, int] = {}  # 1 = on stack, 2 = done
    stack: List[str] = []

    def visit(name: str) -> Optional[List[str]]:
        state[name] = 1
        stack.append(name)
        for callee in graph.get(name, []):
            if state.get(callee) == 1:
                return stack[stack.index(callee):] + [callee]
            if callee not in state:
                found = visit(callee)
                if found:
                    return found
        stack.pop()
        state[name] = 2
        return None

    for name in [m.top] + sorted(graph):
        if name not in state:
            found = visit(name)
            if found:
                return found
    return None


# --------------------------------------------------------------- rendering

def _node_to_doc(node: BodyNode) -> Dict[str, Any]:
    if isinstance(node, Call):
        return {"kind": "call", "callee": node.callee}
    if isinstance(node, Loop):
        doc: Dict[str, Any] = {
            "kind": "loop",
            "name": node.name,
            "trip_count": node.trip_count,
            "pipelined": node.pipelined,
            "body": [_node_to_doc(n) for n in node.body],
        }
        if node.ii is not None:
            doc["ii"] = node.ii
        if node.data_dependent:
            doc["data_dependent"] = True
        return doc
    if isinstance(node, Compute):
        doc = {"kind": "compute", "cycles": node.cycles}
    elif isinstance(node, DramAccess):
        doc = {"kind": "dram", "bursts": node.bursts, "burst_bytes": node.burst_bytes}
    else:
        doc = {"kind": "parallel", "branches": [[_node_to_doc(n) for n in b] for b in node.branches]}
    if node.name is not None:
        doc["name"] = node.name
    return doc


def manifest_to_doc(m: DesignManifest) -> Dict[str, Any]:
    """Manifest as a JSON-ready dict (platform always expanded)"""
    functions = {}
    for name, fdef in m.functions.items():
        fdoc: Dict[str, Any] = {"body": [_node_to_doc(n) for n in fdef.body]}
        if fdef.pragma_realprobe:
            fdoc["pragma_realprobe"] = True
        if fdef.inline_hint is not InlineHint.AUTO:
            fdoc["inline"] = fdef.inline_hint.value
        if fdef.estimated_cycles is not None:
            fdoc["estimated_cycles"] = fdef.estimated_cycles
        functions[name] = fdoc
    p = m.platform
    return {
        "design": m.name,
        "clock_mhz": m.clock_mhz,
        "platform": {
            "name": p.name,
            "dram": {
                "fixed_latency_cycles": p.fixed_latency_cycles,
                "hw_latency_min": p.hw_latency_min,
                "hw_latency_mean": p.hw_latency_mean,
                "bandwidth_gbps": p.bandwidth_gbps,
            },
        },
        "budget": {"lut": m.budget.lut, "ff": m.budget.ff, "bram": m.budget.bram_blocks},
        "kernel_usage": {
            "lut": m.kernel_usage.lut,
            "ff": m.kernel_usage.ff,
            "bram": m.kernel_usage.bram_blocks,
        },
        "top": m.top,
        "functions": functions,
    }


def render_manifest(m: DesignManifest) -> str:
    """Canonical serialization: sorted keys, two-space indent, trailing newline"""
    return json.dumps(manifest_to_doc(m), sort_keys=True, indent=2) + "\n"
