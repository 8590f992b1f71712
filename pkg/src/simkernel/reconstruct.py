"""
Trace Reconstruction
Map raw timestamps back to source-level activations and iterations
"""

import logging
from typing import List, Optional, Tuple

from src.hierarchy.tree import HierarchyTree
from src.instrument.allocation import CounterAllocation
from src.profiler.timestamp_log import Edge, RawTimestampLog
from src.report.profiled_trace import Interval, PathProfile, ProfiledTrace
from src.utils.exceptions import EdgeOrderViolation, LossyLogError

logger = logging.getLogger(__name__)


def _pair(entries, probe_name: str) -> Tuple[List[Interval], List[List[Interval]]]:
    """Split one probe's entries into activations and per-activation iterations"""
    activations: List[Interval] = []
    iterations: List[List[Interval]] = []
    open_start: Optional[int] = None
    current: List[Interval] = []
    open_iterations = {}

    for entry in entries:
        if entry.iteration is None:
            if entry.edge is Edge.RISE:
                if open_start is not None:
                    raise EdgeOrderViolation(f"{probe_name}: rise while active at {entry.cycle}")
                open_start = entry.cycle
                current = []
            else:
                if open_start is None:
                    raise EdgeOrderViolation(f"{probe_name}: fall while idle at {entry.cycle}")
                activations.append((open_start, entry.cycle))
                iterations.append(sorted(current))
                open_start = None
        elif entry.edge is Edge.RISE:
            open_iterations[entry.iteration] = entry.cycle
        else:
            current.append((open_iterations.pop(entry.iteration), entry.cycle))
    if open_start is not None:
        raise EdgeOrderViolation(f"{probe_name}: activation at {open_start} never finished")
    return activations, iterations


def reconstruct(
    log: RawTimestampLog,
    tree: HierarchyTree,
    allocation: CounterAllocation,
    mode: str = "cosim",
    seed: int = 0
) -> ProfiledTrace:
    """
    Rebuild source-level results from a raw timestamp log.

    Activation edges pair into [start, end) intervals. Pipelined loops are
    expanded to every iteration from the first recorded iteration and the
    initiation interval; sequential loops keep their recorded iterations
    and report the full iteration count and exact loop total.

    Args:
        log: Finalized timestamp log
        tree: Hierarchy the probes were planned on
        allocation: Allocation used for the run
        mode: Latency mode label
        seed: Seed label

    Returns:
        ProfiledTrace with one profile per probed node, in preorder

    Raises:
        LossyLogError: the log lost entries
    """
    if log.lossy:
        raise LossyLogError(
            f"timestamp log lost {len(log.lost)} entries; exact reconstruction is impossible"
        )

    profiles = []
    for probe in sorted(allocation.probes, key=lambda p: p.node):
        node = tree.node(probe.node)
        activations, recorded = _pair(log.entries.get(probe.node, []), node.rtl_name)
        total = sum(end - start for start, end in activations)

        if not node.is_loop:
            profiles.append(PathProfile(
                source_path=node.source_path,
                rtl_name=node.rtl_name,
                kind=node.kind.value,
                iterations=len(activations),
                total_cycles=total,
                activations=activations,
            ))
            continue

        trip = node.trip_count
        synthetic = False
        iteration_intervals = recorded
        if node.pipelined and trip:
            synthetic = True
            expanded = []
            for (start, _), seen in zip(activations, recorded):
                if not seen:
                    expanded.append([])
                    continue
                span = seen[0][1] - seen[0][0]
                expanded.append([(start + i * node.ii, start + i * node.ii + span)
                                 for i in range(trip)])
            iteration_intervals = expanded

        profiles.append(PathProfile(
            source_path=node.source_path,
            rtl_name=node.rtl_name,
            kind=node.kind.value,
            iterations=trip * len(activations),
            total_cycles=total,
            activations=activations,
            iteration_intervals=iteration_intervals,
            trip_count=trip,
            synthetic=synthetic,
            truncated=not node.pipelined and trip > allocation.truncate_loop_iters,
        ))

    logger.debug(f"Reconstructed {len(profiles)} source paths")
    return ProfiledTrace(profiles=profiles, mode=mode, seed=seed)
