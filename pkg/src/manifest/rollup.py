"""
Static Latency Roll-up
C-synthesis style cycle estimate for every function and loop
"""

import logging
from typing import Dict, Optional, Tuple

from src.manifest.model import (
    BodyNode,
    Call,
    Compute,
    DesignManifest,
    DramAccess,
    Loop,
    Parallel,
)

logger = logging.getLogger(__name__)

# Roll-up keys are definition paths: "<function>" or "<function>/<loop>/...".
Rollup = Dict[str, Optional[int]]


def _add(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None or b is None:
        return None
    return a + b


def loop_latency(loop: Loop, body_cycles: Optional[int]) -> Optional[int]:
    """Loop total from its body estimate (None = unknown)"""
    if loop.data_dependent or body_cycles is None:
        return None
    if loop.pipelined:
        if loop.trip_count == 0:
            return 0
        return loop.ii * (loop.trip_count - 1) + body_cycles
    return loop.trip_count * body_cycles


def static_latency_rollup(m: DesignManifest) -> Rollup:
    """
    Estimate the latency of every function and loop without simulating.

    Sequential nodes sum, loops multiply (pipelined loops overlap by ii),
    parallel blocks take their slowest branch, DRAM accesses cost their
    fixed co-simulation latency per burst and calls cost the callee total.
    A function's estimated_cycles overrides its computed total. Unknown
    entries (data-dependent loop bounds) propagate as None.

    Args:
        m: Validated manifest

    Returns:
        Map from definition path to cycles (None when unknown)
    """
    result: Rollup = {}
    fixed = m.platform.fixed_latency_cycles

    def function_total(name: str) -> Optional[int]:
        if name in result:
            return result[name]
        fdef = m.functions[name]
        computed = body_total(name, fdef.body)
        total = fdef.estimated_cycles if fdef.estimated_cycles is not None else computed
        result[name] = total
        return total

    def node_total(path: str, node: BodyNode) -> Optional[int]:
        if isinstance(node, Compute):
            return node.cycles
        if isinstance(node, DramAccess):
            return node.bursts * fixed
        if isinstance(node, Call):
            return function_total(node.callee)
        if isinstance(node, Parallel):
            totals = [body_total(path, branch) for branch in node.branches]
            if any(t is None for t in totals):
                return None
            return max(totals) if totals else 0
        loop_path = f"{path}/{node.name}"
        total = loop_latency(node, body_total(loop_path, node.body))
        result[loop_path] = total
        return total

    def body_total(path: str, body: Tuple[BodyNode, ...]) -> Optional[int]:
        total: Optional[int] = 0
        for node in body:
            # every node is evaluated so nested loops get recorded even after an unknown
            total = _add(total, node_total(path, node))
        return total

    for name in sorted(m.functions):
        function_total(name)
    logger.debug(f"Roll-up computed {len(result)} entries")
    return result
