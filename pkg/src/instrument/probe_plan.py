"""
Probe Planning
Select which module control signals are exported and how they reach the top
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

from src.hierarchy.tree import HierarchyTree
from src.utils.exceptions import UnknownNodeError

logger = logging.getLogger(__name__)

START_SIGNAL = "ap_start"
DONE_SIGNAL = "ap_done"


@dataclass(frozen=True)
class Probe:
    """Exported start/done pair of one module instance"""
    node: int
    rtl_name: str
    source_path: str
    route: Tuple[int, ...]
    signal_pair: Tuple[str, str] = (START_SIGNAL, DONE_SIGNAL)


@dataclass(frozen=True)
class ProbePlan:
    probes: Tuple[Probe, ...]

    def __len__(self) -> int:
        return len(self.probes)

    @property
    def nodes(self) -> List[int]:
        return [p.node for p in self.probes]

    def probe_for(self, node: int) -> Optional[Probe]:
        for probe in self.probes:
            if probe.node == node:
                return probe
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "probes": [
                {
                    "node": p.node,
                    "rtl_name": p.rtl_name,
                    "source_path": p.source_path,
                    "signal_pair": list(p.signal_pair),
                    "route": list(p.route),
                }
                for p in self.probes
            ]
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProbePlan":
        return cls(tuple(
            Probe(
                node=d["node"],
                rtl_name=d["rtl_name"],
                source_path=d["source_path"],
                route=tuple(d["route"]),
                signal_pair=tuple(d["signal_pair"]),
            )
            for d in data["probes"]
        ))


def extract_signals(tree: HierarchyTree, targets: Optional[Iterable[int]] = None) -> ProbePlan:
    """
    Plan one probe per target node.

    Each probe's signals are routed through every ancestor up to the tree
    root; the root's own probe needs no route.

    Args:
        tree: Module hierarchy
        targets: Node ids to probe (None = every node)

    Returns:
        ProbePlan with probes in preorder

    Raises:
        UnknownNodeError: a target is not a node of the tree
    """
    if targets is None:
        selected = set(range(len(tree)))
    else:
        selected = set(targets)
        unknown = sorted(t for t in selected if not isinstance(t, int) or not 0 <= t < len(tree))
        if unknown:
            raise UnknownNodeError(f"probe targets not in the hierarchy: {unknown}")

    probes = []
    for node in tree.preorder():
        if node.id in selected:
            probes.append(Probe(
                node=node.id,
                rtl_name=node.rtl_name,
                source_path=node.source_path,
                route=tuple(tree.ancestors(node.id)),
            ))
    logger.debug(f"Planned {len(probes)} probes over {len(tree)} instances")
    return ProbePlan(tuple(probes))
