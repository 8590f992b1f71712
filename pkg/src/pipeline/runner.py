"""
Pipeline Runner
parse -> inline -> hierarchy -> instrument -> adapt -> run -> reconstruct -> report,
with every extraction and planning stage cached in the workspace
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.dse.configs import ProbeConfig, StorageMode
from src.dse.explorer import configure_allocation
from src.hierarchy.mapping import MappingTable, build_mapping
from src.hierarchy.tree import HierarchyTree, build_hierarchy
from src.instrument.allocation import CounterAllocation
from src.instrument.probe_plan import ProbePlan, extract_signals
from src.manifest.inlining import apply_inlining
from src.manifest.model import DesignManifest, InliningPolicy
from src.manifest.parser import load_manifest, manifest_to_doc, parse_manifest
from src.pipeline.metrics import write_run_metrics
from src.profiler.timestamp_log import RawTimestampLog
from src.report.compare import BottleneckRanking, compare, csynth_by_source_path
from src.report.gantt import export_gantt
from src.report.profiled_trace import PathProfile, ProfiledTrace
from src.report.table import render_table
from src.report.trace_events import to_trace_events
from src.simkernel.engine import ExecutionTrace, LatencyMode, SimSettings, run_profiled
from src.simkernel.reconstruct import reconstruct
from src.utils.config import Config
from src.utils.exceptions import LossyLogError, NoPragmaError, ProbeForgeError
from src.workspace.incremental import (
    PIPELINE_KINDS,
    ReusePlan,
    load_run_record,
    normalized_manifest_inputs,
    plan_incremental,
    save_run_record,
    stage_inputs,
    stage_keys,
)
from src.workspace.store import ArtifactStore, canonical_json

logger = logging.getLogger(__name__)

DEFAULT_WORKSPACE = ".probe_forge"


@dataclass
class RunConfig:
    """Everything one pipeline invocation depends on"""
    manifest_path: str
    target: Optional[str] = None
    probes: Optional[List[str]] = None
    policy: InliningPolicy = InliningPolicy.INLINE_OFF_TOP
    mode: LatencyMode = LatencyMode.HW
    seed: int = 0
    probe_config: ProbeConfig = field(default_factory=lambda: ProbeConfig(StorageMode.ALL_REGISTER))
    workspace: str = DEFAULT_WORKSPACE
    out_dir: Optional[str] = None
    top_k: Optional[int] = None
    compare: bool = False
    config: Config = field(default_factory=Config)

    @property
    def output_dir(self) -> Path:
        return Path(self.out_dir) if self.out_dir else Path(self.workspace) / "out"

    def describe(self) -> Dict[str, Any]:
        """Run inputs as recorded in the run record (no absolute paths)"""
        return {
            "manifest": Path(self.manifest_path).name,
            "target": self.target,
            "probes": sorted(self.probes) if self.probes else None,
            "policy": self.policy.value,
            "mode": self.mode.value,
            "seed": self.seed,
            "probe_config": self.probe_config.id,
        }


@dataclass
class PreparedRun:
    """Extraction and planning artifacts for one target"""
    source: DesignManifest
    manifest: DesignManifest
    extraction_tree: HierarchyTree
    extraction_mapping: MappingTable
    target_path: str
    tree: HierarchyTree
    plan: ProbePlan
    allocation: Optional[CounterAllocation]
    keys: Dict[str, str]
    built: List[str]

    @property
    def mapping(self) -> MappingTable:
        """Mapping of the probed subtree"""
        return build_mapping(self.tree)


@dataclass
class PipelineResult:
    prepared: PreparedRun
    trace: ProfiledTrace
    log: RawTimestampLog
    oracle: ExecutionTrace
    wall_cycles: int
    reuse: ReusePlan
    comparison: Optional[BottleneckRanking] = None
    files: List[str] = field(default_factory=list)


def load_source(path: str, config: Config) -> DesignManifest:
    """
    Read the manifest a run starts from.

    Raises:
        ProbeForgeError: the file does not exist (exit 1)
    """
    if not Path(path).is_file():
        raise ProbeForgeError(f"manifest not found: {path}")
    return load_manifest(path, config.get("platforms"))


def resolve_target(tree: HierarchyTree, target: str) -> str:
    """
    Source path of a profiling target in the top-rooted tree.

    A path ("main/compute") is looked up as is; a bare function name picks
    the function's first instance in preorder.

    Raises:
        NodeNotFoundError: no such path or function instance
    """
    root_label = tree.node(tree.root).source_path
    if "/" in target or target == root_label:
        tree.locate(target)
        return target
    for node in tree.preorder():
        if not node.is_loop and node.function == target:
            return node.source_path
    tree.locate(target)
    return target


def allocation_settings(rc: RunConfig) -> Dict[str, Any]:
    """Settings the allocation artifact depends on"""
    return {
        "profiler": rc.config.get("profiler"),
        "cost": rc.config.get("cost"),
        "probe_config": rc.probe_config.id,
    }


class _Stages:
    """Stage builder backed by the artifact store"""

    def __init__(self, store: ArtifactStore, keys: Dict[str, str]):
        self.store = store
        self.keys = keys
        self.built: List[str] = []

    def cached(self, kind: str) -> Optional[Any]:
        artifact = self.store.get(kind, self.keys[kind])
        if artifact is not None:
            logger.debug(f"Reusing {kind} {self.keys[kind][:12]}")
        return artifact

    def keep(self, kind: str, artifact: Any) -> None:
        self.store.put(kind, self.keys[kind], artifact)
        self.built.append(kind)
        logger.debug(f"Built {kind} {self.keys[kind][:12]}")


def prepare(
    rc: RunConfig,
    allocate: bool = True,
    plan_override: Optional[ProbePlan] = None
) -> PreparedRun:
    """
    Run every cached stage up to the counter allocation.

    With allocate=False the run stops after the probe plan; a plan_override
    (read from a file) replaces the cached probe plan and nothing downstream
    of it is stored.

    The extraction tree is always elaborated at `top`; the probed tree is
    its subtree at the target, so RTL names do not depend on the target.

    Raises:
        ProbeForgeError: any validation, lookup or capacity failure
    """
    config = rc.config
    source = load_source(rc.manifest_path, config)
    manifest_inputs = normalized_manifest_inputs(source, rc.policy)

    # Extraction keys do not depend on the target; downstream keys are recomputed once it is resolved
    requested = rc.target if rc.target is not None else source.pragma_function
    if requested is None:
        raise NoPragmaError(
            f"design '{source.name}' has no function marked for profiling; pass a target"
        )

    store = ArtifactStore(rc.workspace)
    provisional = stage_keys(stage_inputs(manifest_inputs, "", rc.probes, allocation_settings(rc)))
    stages = _Stages(store, provisional)

    doc = stages.cached("manifest")
    if doc is not None:
        manifest = parse_manifest(json.dumps(doc), config.get("platforms"))
    else:
        manifest = apply_inlining(source, rc.policy).with_pragma(None)
        stages.keep("manifest", manifest_to_doc(manifest))

    data = stages.cached("hierarchy")
    if data is not None:
        extraction_tree = HierarchyTree.from_dict(data)
    else:
        extraction_tree = build_hierarchy(manifest, manifest.top)
        stages.keep("hierarchy", extraction_tree.to_dict())

    rows = stages.cached("mapping")
    extraction_mapping = build_mapping(extraction_tree)
    if rows is None:
        stages.keep("mapping", extraction_mapping.to_rows())

    target_path = resolve_target(extraction_tree, requested)
    keys = stage_keys(stage_inputs(manifest_inputs, target_path, rc.probes, allocation_settings(rc)))
    stages.keys = keys

    tree = extraction_tree.subtree(target_path)
    if plan_override is not None:
        plan = extract_signals(tree, plan_override.nodes)
    else:
        data = stages.cached("probe_plan")
        if data is not None:
            plan = ProbePlan.from_dict(data)
        else:
            targets = None if not rc.probes else sorted({tree.locate(p) for p in rc.probes})
            plan = extract_signals(tree, targets)
            stages.keep("probe_plan", plan.to_dict())

    allocation = None
    if allocate:
        data = stages.cached("allocation") if plan_override is None else None
        if data is not None:
            allocation = CounterAllocation.from_dict(data)
        else:
            allocation = configure_allocation(rc.probe_config, manifest, tree, plan, config)
            if plan_override is None:
                stages.keep("allocation", allocation.to_dict())
        logger.info(f"Prepared {source.name}: target {target_path}, {len(plan)} probe(s) planned, "
                    f"{len(allocation.probes)} allocated")

    return PreparedRun(
        source=source,
        manifest=manifest,
        extraction_tree=extraction_tree,
        extraction_mapping=extraction_mapping,
        target_path=target_path,
        tree=tree,
        plan=plan,
        allocation=allocation,
        keys=keys,
        built=stages.built,
    )


def oracle_as_trace(oracle: ExecutionTrace, tree: HierarchyTree) -> ProfiledTrace:
    """Ground-truth intervals in the ProfiledTrace shape"""
    profiles = []
    for node in tree.preorder():
        intervals = oracle.intervals.get(node.id, [])
        profiles.append(PathProfile(
            source_path=node.source_path,
            rtl_name=node.rtl_name,
            kind=node.kind.value,
            iterations=len(intervals) if not node.is_loop else sum(
                len(act) for act in oracle.iterations.get(node.id, [])
            ),
            total_cycles=sum(e - s for s, e in intervals),
            activations=list(intervals),
            iteration_intervals=[list(act) for act in oracle.iterations.get(node.id, [])],
            trip_count=node.trip_count,
        ))
    return ProfiledTrace(profiles=profiles, mode=oracle.mode, seed=oracle.seed)


def _profile(prepared: PreparedRun, mode: LatencyMode, rc: RunConfig):
    share = SimSettings.from_config(rc.config).dump_bandwidth_share
    return run_profiled(prepared.manifest, prepared.tree, prepared.allocation, mode, rc.seed, share)


class _Writer:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.files: List[str] = []

    def text(self, name: str, text: str) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        with open(self.out_dir / name, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        self.files.append(name)

    def json(self, name: str, obj: Any) -> None:
        self.text(name, canonical_json(obj))


def run_pipeline(rc: RunConfig) -> PipelineResult:
    """
    Profile a design end to end and write the report files.

    Outputs (in rc.output_dir): report.txt, report.json, trace.json,
    timestamps.csv, mapping.csv, probe_plan.json, allocation.json,
    oracle.json, oracle_events.json, trace_events.json, gantt.svg,
    metrics.prom, run.json and, with rc.compare, comparison.txt/json.

    Args:
        rc: Run configuration

    Returns:
        PipelineResult

    Raises:
        ProbeForgeError: validation (exit 1), Unfittable (exit 2),
            lossy log or counter overflow (exit 3)
    """
    previous = load_run_record(rc.workspace)
    prepared = prepare(rc)
    if previous:
        reuse = plan_incremental(previous, prepared.keys)
    else:
        reuse = ReusePlan(rebuilt=list(PIPELINE_KINDS))

    writer = _Writer(rc.output_dir)
    writer.text("mapping.csv", prepared.mapping.to_csv())
    writer.json("probe_plan.json", prepared.plan.to_dict())
    writer.json("allocation.json", prepared.allocation.to_dict())

    profiled = _profile(prepared, rc.mode, rc)
    log = profiled.log
    writer.text("timestamps.csv", log.to_csv())
    write_run_metrics(
        str(rc.output_dir), prepared.source.name, rc.mode.value,
        profiled.oracle.total_cycles, profiled.wall_cycles, len(log.dumps),
        log.dumped_bytes, len(prepared.allocation.probes), log.lossy,
    )
    writer.files.append("metrics.prom")
    if log.lossy:
        raise LossyLogError(
            f"{len(log.lost)} timestamp(s) lost to full queues; raw log kept in "
            f"{rc.output_dir / 'timestamps.csv'}"
        )

    trace = reconstruct(log, prepared.tree, prepared.allocation, rc.mode.value, rc.seed)
    clock = prepared.manifest.clock_mhz
    text, data = render_table(
        trace, prepared.mapping, int(rc.config.get("report.ila_capture_cycles", 131072))
    )
    writer.text("report.txt", text)
    writer.json("report.json", data)
    writer.json("trace.json", trace.to_dict())
    writer.json("oracle.json", profiled.oracle.to_json(prepared.tree))
    writer.json("oracle_events.json", to_trace_events(oracle_as_trace(profiled.oracle, prepared.tree), clock))
    writer.json("trace_events.json", to_trace_events(trace, clock, rc.top_k))
    writer.text("gantt.svg", export_gantt(trace, rc.top_k))

    comparison = None
    if rc.compare:
        other = LatencyMode.COSIM if rc.mode is LatencyMode.HW else LatencyMode.HW
        other_run = _profile(prepared, other, rc)
        other_trace = reconstruct(other_run.log, prepared.tree, prepared.allocation, other.value, rc.seed)
        cosim, hw = (trace, other_trace) if rc.mode is LatencyMode.COSIM else (other_trace, trace)
        comparison = compare(csynth_by_source_path(prepared.tree), cosim, hw)
        writer.text("comparison.txt", comparison.to_table())
        writer.json("comparison.json", comparison.to_dict())

    record = {
        "run": rc.describe(),
        "target_path": prepared.target_path,
        "clock_mhz": prepared.manifest.clock_mhz,
        "keys": prepared.keys,
        "reuse": reuse.to_dict(),
    }
    writer.json("run.json", record)
    save_run_record(rc.workspace, record)

    logger.info(f"{prepared.source.name} [{rc.mode.value}]: root total {trace.total_cycles} cycles, "
                f"{len(log.dumps)} dump(s); {len(writer.files)} file(s) in {rc.output_dir}")
    return PipelineResult(
        prepared=prepared,
        trace=trace,
        log=log,
        oracle=profiled.oracle,
        wall_cycles=profiled.wall_cycles,
        reuse=reuse,
        comparison=comparison,
        files=writer.files,
    )
