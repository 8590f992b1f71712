"""
Counter Allocation
Timestamp queue depth, storage and counter width for every probe
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from src.hierarchy.tree import HierarchyTree, NodeKind
from src.instrument.probe_plan import ProbePlan
from src.utils.config import Config

logger = logging.getLogger(__name__)


class Storage(Enum):
    REGISTER = "reg"
    BRAM = "bram"


@dataclass(frozen=True)
class AllocationSettings:
    truncate_loop_iters: int = 4
    module_cap: int = 50
    max_depth: int = 64
    safety_factor: float = 2.0
    counter_width: Optional[int] = None

    @classmethod
    def from_config(cls, config: Config) -> "AllocationSettings":
        return cls(
            truncate_loop_iters=int(config.get("profiler.truncate_loop_iters", 4)),
            module_cap=int(config.get("profiler.module_cap", 50)),
            max_depth=int(config.get("profiler.max_depth", 64)),
            safety_factor=float(config.get("profiler.safety_factor", 2.0)),
            counter_width=config.get("profiler.counter_width"),
        )


@dataclass(frozen=True)
class ProbeAllocation:
    node: int
    rtl_name: str
    depth: int
    storage: Storage
    level: int
    kind: NodeKind
    activations: Optional[int]


@dataclass(frozen=True)
class CounterAllocation:
    probes: Tuple[ProbeAllocation, ...]
    counter_width: int
    truncate_loop_iters: int = 4
    module_cap: int = 50
    dump_ratio: float = 0.0

    @property
    def entry_bytes(self) -> int:
        return self.counter_width // 8

    def effective_depth(self, probe: ProbeAllocation) -> int:
        """On-chip slots left after offloading `dump_ratio` of the queue"""
        return max(2, math.ceil((1.0 - self.dump_ratio) * probe.depth))

    def by_node(self) -> Dict[int, ProbeAllocation]:
        return {p.node: p for p in self.probes}

    def with_probes(self, probes: List[ProbeAllocation]) -> "CounterAllocation":
        return replace(self, probes=tuple(sorted(probes, key=lambda p: p.node)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "counter_width": self.counter_width,
            "truncate_loop_iters": self.truncate_loop_iters,
            "module_cap": self.module_cap,
            "dump_ratio": self.dump_ratio,
            "probes": [
                {
                    "node": p.node,
                    "rtl_name": p.rtl_name,
                    "depth": p.depth,
                    "effective_depth": self.effective_depth(p),
                    "storage": p.storage.value,
                    "level": p.level,
                    "kind": p.kind.value,
                    "activations": p.activations,
                }
                for p in self.probes
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CounterAllocation":
        return cls(
            probes=tuple(
                ProbeAllocation(
                    node=d["node"],
                    rtl_name=d["rtl_name"],
                    depth=d["depth"],
                    storage=Storage(d["storage"]),
                    level=d["level"],
                    kind=NodeKind(d["kind"]),
                    activations=d["activations"],
                )
                for d in data["probes"]
            ),
            counter_width=data["counter_width"],
            truncate_loop_iters=data["truncate_loop_iters"],
            module_cap=data["module_cap"],
            dump_ratio=data["dump_ratio"],
        )


def probe_depth(tree: HierarchyTree, node_id: int, settings: AllocationSettings) -> int:
    """Projected timestamp slots for one probe, clamped to [2, max_depth]"""
    node = tree.node(node_id)
    activations = tree.activations(node_id)
    if activations is None or node.est_cycles is None or node.data_dependent:
        return settings.max_depth

    if node.is_loop:
        recorded = min(node.trip_count, settings.truncate_loop_iters)
        demand = activations * (recorded * 2 + 2)
    else:
        demand = math.ceil(settings.safety_factor * activations * 2)
    return max(2, min(settings.max_depth, demand))


def allocate_counters(
    plan: ProbePlan,
    tree: HierarchyTree,
    settings: Optional[AllocationSettings] = None
) -> CounterAllocation:
    """
    Initial allocation before any budget check.

    Non-loop probes reserve two timestamps per expected activation, scaled
    by the safety factor. Loop probes reserve the loop rise/fall plus a
    rise/fall for each of the first truncate_loop_iters iterations, per
    activation. Every probe starts in register storage; the result may
    exceed the module cap (adaptation trims it).

    Args:
        plan: Probe plan over `tree`
        tree: Hierarchy carrying roll-up estimates
        settings: Allocation settings (defaults when omitted)

    Returns:
        CounterAllocation with dump_ratio 0
    """
    settings = settings or AllocationSettings()
    probes = []
    for probe in plan.probes:
        node = tree.node(probe.node)
        probes.append(ProbeAllocation(
            node=probe.node,
            rtl_name=probe.rtl_name,
            depth=probe_depth(tree, probe.node, settings),
            storage=Storage.REGISTER,
            level=node.depth,
            kind=node.kind,
            activations=tree.activations(probe.node),
        ))

    if settings.counter_width is not None:
        width = int(settings.counter_width)
    else:
        estimates = [tree.node(p.node).est_cycles for p in plan.probes]
        width = 64 if any(e is None or e >= 2 ** 32 for e in estimates) else 32

    if len(probes) > settings.module_cap:
        logger.info(f"{len(probes)} probes requested, module cap is {settings.module_cap}")

    return CounterAllocation(
        probes=tuple(probes),
        counter_width=width,
        truncate_loop_iters=settings.truncate_loop_iters,
        module_cap=settings.module_cap,
    )
