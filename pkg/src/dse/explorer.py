"""
Design-Space Explorer
Evaluates probe configurations on the simulator and collects the metric triple
"""

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence

from src.costmodel.adapt import adapt_allocation
from src.costmodel.bandwidth import baseline_bandwidth, profiling_bandwidth
from src.costmodel.fmax import fmax_model
from src.costmodel.resources import (
    CostConstants,
    ResourceEstimate,
    estimate_allocation,
    r_util_components,
)
from src.dse.configs import ProbeConfig
from src.dse.pareto import pareto_frontier, select_balanced
from src.hierarchy.tree import HierarchyTree
from src.instrument.allocation import AllocationSettings, CounterAllocation, allocate_counters
from src.instrument.probe_plan import ProbePlan
from src.manifest.model import DesignManifest
from src.simkernel.engine import LatencyMode, SimSettings, run, run_profiled
from src.utils.config import Config

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["config", "r_util", "b_dram", "f_max", "latency_overhead", "on_frontier"]


@dataclass
class DsePoint:
    """Metric triple (plus latency impact) of one evaluated configuration"""
    config_id: str
    r_util: float
    b_dram: float
    f_max: float
    latency_overhead: float
    components: Dict[str, float] = field(default_factory=dict)
    b_dram_absolute: bool = False
    measured_dump_bytes: int = 0
    planned_dump_bytes: int = 0
    lossy: bool = False
    estimate: ResourceEstimate = field(default_factory=ResourceEstimate)
    probes: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config_id,
            "r_util": self.r_util,
            "b_dram": self.b_dram,
            "b_dram_absolute": self.b_dram_absolute,
            "f_max": self.f_max,
            "latency_overhead": self.latency_overhead,
            "components": dict(sorted(self.components.items())),
            "measured_dump_bytes": self.measured_dump_bytes,
            "planned_dump_bytes": self.planned_dump_bytes,
            "lossy": self.lossy,
            "estimate": self.estimate.as_dict(),
            "probes": self.probes,
        }


@dataclass
class ExplorationResult:
    points: List[DsePoint]
    frontier: List[DsePoint]
    balanced: Optional[DsePoint]

    def frontier_ids(self) -> List[str]:
        return [p.config_id for p in self.frontier]

    def to_csv(self) -> str:
        on_frontier = set(self.frontier_ids())
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for p in self.points:
            writer.writerow([
                p.config_id,
                f"{p.r_util:.6f}",
                f"{p.b_dram:.6e}",
                f"{p.f_max:.3f}",
                f"{p.latency_overhead:.6f}",
                int(p.config_id in on_frontier),
            ])
        return buffer.getvalue()

    def scatter_data(self) -> Dict[str, Any]:
        """Plot-ready data: every point, the frontier and the balanced pick"""
        return {
            "axes": ["r_util", "b_dram", "f_max"],
            "points": [p.to_dict() for p in self.points],
            "frontier": self.frontier_ids(),
            "balanced": self.balanced.config_id if self.balanced else None,
        }


def planned_offload_bytes(allocation: CounterAllocation) -> int:
    """Bytes streamed to DRAM instead of kept on chip: sum of (D - D_eff) * width/8"""
    return sum(
        (p.depth - allocation.effective_depth(p)) * allocation.entry_bytes
        for p in allocation.probes
    )


def configure_allocation(
    cfg: ProbeConfig,
    m: DesignManifest,
    tree: HierarchyTree,
    plan: ProbePlan,
    config: Config
) -> CounterAllocation:
    """
    Allocation for one configuration: demand, storage tags, adaptation, dump ratio.

    Raises:
        UnfittableError: the configuration cannot fit beside the kernel
    """
    settings = AllocationSettings.from_config(config)
    if cfg.counter_width is not None:
        settings = replace(settings, counter_width=cfg.counter_width)
    k = replace(CostConstants.from_config(config), decode_variant=cfg.decode_variant)

    demand = cfg.apply_storage(allocate_counters(plan, tree, settings))
    adapted = adapt_allocation(demand, tree, m.budget, m.kernel_usage, k)
    return replace(adapted, dump_ratio=cfg.dump_ratio)


def evaluate(
    cfg: ProbeConfig,
    m: DesignManifest,
    tree: HierarchyTree,
    plan: ProbePlan,
    seed: int = 0,
    config: Optional[Config] = None
) -> DsePoint:
    """
    Evaluate one configuration in hw mode.

    Args:
        cfg: Probe configuration
        m: Validated (post-inlining) manifest
        tree: Probed hierarchy
        plan: Probe plan over `tree`
        seed: Latency seed shared by the profiled and unprofiled runs
        config: Settings (defaults when omitted)

    Returns:
        DsePoint; b_dram is the measured dump bandwidth as a fraction of the
        kernel's own bandwidth, or an absolute GB/s value flagged by
        b_dram_absolute when the kernel moves no data

    Raises:
        UnfittableError: the configuration cannot fit beside the kernel
    """
    config = config or Config()
    k = replace(CostConstants.from_config(config), decode_variant=cfg.decode_variant)
    allocation = configure_allocation(cfg, m, tree, plan, config)

    estimate = estimate_allocation(allocation, k, effective=True)
    origin = ResourceEstimate.from_budget(m.kernel_usage)
    components = r_util_components(estimate, origin, m.budget, config.get("dse.weights"))

    sim = SimSettings.from_config(config)
    base = run(m, LatencyMode.HW, seed, tree=tree, settings=sim)
    profiled = run_profiled(m, tree, allocation, LatencyMode.HW, seed, sim.dump_bandwidth_share)

    # S_dram is the dump traffic the profiled run actually moved
    added = profiling_bandwidth(profiled.dram_traffic, profiled.wall_cycles, m.t_cycle_seconds)
    original = baseline_bandwidth(m, base)
    if original > 0:
        b_dram, absolute = added / original, False
    else:
        b_dram, absolute = added, True

    f_max = fmax_model(
        origin + estimate, m.budget, m.clock_mhz,
        float(config.get("fmax.beta", 0.5)), float(config.get("fmax.u_thresh", 0.7)),
    )
    if base.total_cycles:
        latency_overhead = (profiled.wall_cycles / f_max) / (base.total_cycles / m.clock_mhz) - 1.0
    else:
        latency_overhead = 0.0

    if profiled.log.lossy:
        logger.warning(f"{cfg.id}: profiled run lost {len(profiled.log.lost)} timestamp(s)")
    logger.debug(f"{cfg.id}: r_util {sum(components.values()):.4f}, b_dram {b_dram:.3e}, "
                 f"f_max {f_max:.1f} MHz")

    return DsePoint(
        config_id=cfg.id,
        r_util=sum(components.values()),
        b_dram=b_dram,
        f_max=f_max,
        latency_overhead=latency_overhead,
        components=components,
        b_dram_absolute=absolute,
        measured_dump_bytes=profiled.dram_traffic,
        planned_dump_bytes=planned_offload_bytes(allocation),
        lossy=profiled.log.lossy,
        estimate=estimate,
        probes=len(allocation.probes),
    )


def explore(
    configs: Sequence[ProbeConfig],
    m: DesignManifest,
    tree: HierarchyTree,
    plan: ProbePlan,
    seed: int = 0,
    config: Optional[Config] = None,
    workers: int = 1
) -> ExplorationResult:
    """
    Evaluate every configuration and build the frontier.

    Evaluations are independent; with workers > 1 they run on a thread
    pool and are merged back in configuration order.
    """
    config = config or Config()
    logger.info(f"Exploring {len(configs)} configuration(s) on {m.name} (seed {seed})")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda c: evaluate(c, m, tree, plan, seed, config), configs))
    else:
        points = [evaluate(c, m, tree, plan, seed, config) for c in configs]

    frontier = pareto_frontier(points)
    balanced = select_balanced(frontier)
    logger.info(f"Frontier: {', '.join(p.config_id for p in frontier)}"
                + (f"; balanced pick {balanced.config_id}" if balanced else ""))
    return ExplorationResult(points=points, frontier=frontier, balanced=balanced)
