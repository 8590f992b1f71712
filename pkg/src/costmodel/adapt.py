"""
Allocation Adaptation
Fit the counter allocation into the resources the kernel leaves free
"""

import logging
from dataclasses import replace
from typing import List, Optional, Set

from src.costmodel.resources import CostConstants, ResourceEstimate, estimate_resources
from src.hierarchy.tree import HierarchyTree
from src.instrument.allocation import CounterAllocation, ProbeAllocation, Storage
from src.manifest.model import ResourceBudget
from src.utils.exceptions import UnfittableError

logger = logging.getLogger(__name__)


class _Fitter:
    def __init__(self, available: ResourceEstimate, k: CostConstants, width: int):
        self.available = available
        self.k = k
        self.width = width

    def estimate(self, probes: List[ProbeAllocation]) -> ResourceEstimate:
        return estimate_resources(
            len(probes), [p.depth for p in probes], [p.storage for p in probes], self.k, self.width
        )

    def fits(self, probes: List[ProbeAllocation]) -> bool:
        est = self.estimate(probes)
        a = self.available
        return est.lut <= a.lut and est.ff <= a.ff and est.bram_blocks <= a.bram_blocks

    def bram_fits(self, probes: List[ProbeAllocation]) -> bool:
        return self.estimate(probes).bram_blocks <= self.available.bram_blocks


def _drop_order(probes: List[ProbeAllocation], protected: Set[int]) -> List[ProbeAllocation]:
    """Droppable probes, deepest level first, later preorder first"""
    return sorted(
        (p for p in probes if p.node not in protected),
        key=lambda p: (p.level, p.node),
        reverse=True,
    )


def adapt_allocation(
    demand: CounterAllocation,
    tree: HierarchyTree,
    budget: ResourceBudget,
    origin: ResourceBudget,
    k: CostConstants,
    module_cap: Optional[int] = None
) -> CounterAllocation:
    """
    Shrink an allocation until the IP fits beside the kernel.

    Steps, each taken only while the estimate is still over budget:
    trim to the module cap, move the deepest register queues to BRAM while
    BRAM allows, drop the deepest probes (the root and its direct children
    are kept), halve the largest queues toward 2 and finally drop the
    root's children. Depths never grow.

    Args:
        demand: Allocation from allocate_counters (full depths are checked)
        tree: Hierarchy of the probed nodes
        budget: Board resources
        origin: Kernel resource usage
        k: Cost constants
        module_cap: Maximum counters (defaults to demand.module_cap)

    Returns:
        Fitting allocation; `demand` itself when it already fits

    Raises:
        UnfittableError: a single root counter of depth 2 does not fit
    """
    available = ResourceEstimate(
        budget.lut - origin.lut, budget.ff - origin.ff, budget.bram_blocks - origin.bram_blocks
    )
    fitter = _Fitter(available, k, demand.counter_width)
    probes = list(demand.probes)
    changed = False

    root = tree.root
    protected = {root} | set(tree.node(root).children)
    protected &= {p.node for p in probes}

    # Module cap
    cap = module_cap if module_cap is not None else demand.module_cap
    if len(probes) > cap:
        if len(protected) > cap:
            logger.warning(f"Root and its {len(protected) - 1} children exceed the module cap "
                           f"{cap}; raising the cap to {len(protected)}")
            cap = len(protected)
        excess = len(probes) - cap
        dropped = {p.node for p in _drop_order(probes, protected)[:excess]}
        probes = [p for p in probes if p.node not in dropped]
        logger.info(f"Module cap {cap}: dropped {len(dropped)} probe(s)")
        changed = True

    if fitter.fits(probes):
        return demand.with_probes(probes) if changed else demand

    # Register -> BRAM retagging, deepest queues first
    order = sorted(
        (i for i, p in enumerate(probes) if p.storage is Storage.REGISTER),
        key=lambda i: (probes[i].depth, probes[i].level, probes[i].node),
        reverse=True,
    )
    for index in order:
        trial = list(probes)
        trial[index] = replace(trial[index], storage=Storage.BRAM)
        if not fitter.bram_fits(trial):
            break
        probes = trial
        if fitter.fits(probes):
            logger.info("Allocation fits after moving queues to BRAM")
            return demand.with_probes(probes)

    # Drop deep probes
    dropped_count = 0
    for victim in _drop_order(probes, protected):
        if fitter.fits(probes):
            break
        probes = [p for p in probes if p.node != victim.node]
        dropped_count += 1
    if dropped_count:
        logger.warning(f"Dropped {dropped_count} probe(s) to meet the resource budget")

    # Halve the largest queues
    while not fitter.fits(probes):
        largest = max(range(len(probes)), key=lambda i: (probes[i].depth, -probes[i].node))
        if probes[largest].depth <= 2:
            break
        probes[largest] = replace(probes[largest], depth=max(2, probes[largest].depth // 2))

    # Last resort: the root's direct children
    if not fitter.fits(probes):
        children = sorted((p for p in probes if p.node != root), key=lambda p: p.node, reverse=True)
        for child in children:
            probes = [p for p in probes if p.node != child.node]
            logger.warning(f"Dropped top-level probe {child.rtl_name} to meet the resource budget")
            if fitter.fits(probes):
                break

    if not probes or not fitter.fits(probes):
        # the root, or the shallowest probe when the plan skips the root
        keep = min(demand.probes, key=lambda p: (p.node != root, p.level, p.node), default=None)
        if keep is not None:
            for storage in (Storage.REGISTER, Storage.BRAM):
                candidate = replace(keep, depth=2, storage=storage)
                if fitter.fits([candidate]):
                    logger.warning(f"Only probe {keep.rtl_name} fits the resource budget")
                    return demand.with_probes([candidate])
        raise UnfittableError(
            f"profiling IP does not fit: free LUT {available.lut}, FF {available.ff}, "
            f"BRAM {available.bram_blocks}"
        )

    return demand.with_probes(probes)
