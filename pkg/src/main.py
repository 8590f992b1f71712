"""
probe-forge command line
Check, map, instrument, estimate, profile and explore HLS designs
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

# Allow `python3 src/main.py` from the repository root
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from src.costmodel.resources import CostConstants, ResourceEstimate, estimate_allocation, r_util_components
from src.dse.configs import ProbeConfig, StorageMode, enumerate_configs
from src.dse.explorer import explore
from src.instrument.probe_plan import ProbePlan
from src.manifest.inlining import apply_inlining
from src.manifest.model import InliningPolicy
from src.manifest.rollup import static_latency_rollup
from src.pipeline.runner import RunConfig, load_source, prepare, run_pipeline
from src.report.gantt import export_gantt
from src.report.profiled_trace import ProfiledTrace
from src.report.table import render_table
from src.report.trace_events import to_trace_events
from src.simkernel.engine import LatencyMode
from src.utils.config import Config
from src.utils.exceptions import ProbeForgeError
from src.utils.logger import setup_logger
from src.workspace.incremental import load_run_record
from src.workspace.store import ArtifactStore, canonical_json

logger = logging.getLogger(__name__)

DUMP_RATIOS = ("0", "25", "50", "75")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML settings file (default: $PROBE_FORGE_CONFIG)")
    common.add_argument("--workspace", help="Artifact workspace (default: $PROBE_FORGE_WORKSPACE)")
    common.add_argument("--log-level", help="Logging level (DEBUG, INFO, WARNING, ...)")
    common.add_argument("--debug", action="store_true", help="Enable debug logging")
    return common


def _design_options() -> argparse.ArgumentParser:
    design = argparse.ArgumentParser(add_help=False)
    design.add_argument("manifest", help="Design manifest (JSON)")
    design.add_argument(
        "--policy",
        choices=[p.value for p in InliningPolicy],
        default=InliningPolicy.INLINE_OFF_TOP.value,
        help="Inlining policy"
    )
    design.add_argument("--constants", help="Cost constants file (YAML or JSON)")
    return design


def _probe_options() -> argparse.ArgumentParser:
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--storage", choices=[m.value for m in StorageMode], default="reg",
                       help="Counter queue storage")
    probe.add_argument("--hybrid-threshold", type=int, default=8,
                       help="Queue depth from which hybrid storage uses BRAM")
    probe.add_argument("--dump-ratio", choices=DUMP_RATIOS, default="0",
                       help="Percentage of each queue offloaded to DRAM")
    probe.add_argument("--decode", choices=["monolithic", "staged"], default="monolithic",
                       help="Read-out decoder variant")
    return probe


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per toolchain step"""
    parser = argparse.ArgumentParser(
        prog="probe-forge",
        description="probe-forge - profiling toolchain and simulator for HLS designs"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common, design, probe = _common_options(), _design_options(), _probe_options()

    sub.add_parser("check", parents=[common, design], help="Validate a manifest")

    p = sub.add_parser("map", parents=[common, design], help="Print the C-to-RTL mapping table")
    p.add_argument("--root", help="Function or instance path to map (default: pragma function)")
    p.add_argument("--format", choices=["table", "csv", "json"], default="table")

    p = sub.add_parser("instrument", parents=[common, design, probe], help="Plan probes and counters")
    p.add_argument("--root", help="Function or instance path to profile (default: pragma function)")
    p.add_argument("--target", action="append", dest="targets",
                   help="Node path to probe (repeatable)")
    p.add_argument("--all", action="store_true", help="Probe every node (default)")
    p.add_argument("--out", help="Directory for probe_plan.json and allocation.json")

    p = sub.add_parser("estimate", parents=[common, design, probe], help="Estimate profiler resources")
    p.add_argument("--plan", help="probe_plan.json from `instrument`")
    p.add_argument("--root", help="Function or instance path to profile (default: pragma function)")
    p.add_argument("--weights", help="Resource weights lut,ff,bram (sum 1)")

    p = sub.add_parser("profile", parents=[common, design, probe], help="Profile a design end to end")
    p.add_argument("--target", help="Function or instance path to profile (default: pragma function)")
    p.add_argument("--probe", action="append", dest="probes", help="Node path to probe (repeatable)")
    p.add_argument("--mode", choices=[m.value for m in LatencyMode], default=LatencyMode.HW.value)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--compare", action="store_true",
                   help="Also run the other latency mode and compare against C-synth estimates")
    p.add_argument("--top", type=int, dest="top_k", help="Gantt lanes to keep")
    p.add_argument("--out", help="Report directory (default: <workspace>/out)")

    p = sub.add_parser("dse", parents=[common, design], help="Explore storage and dump-ratio configurations")
    p.add_argument("--target", help="Function or instance path to profile (default: pragma function)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hybrid", type=int, action="append", default=None,
                   help="Add hybrid storage with this depth threshold (repeatable)")
    p.add_argument("--decode", action="append", choices=["monolithic", "staged"],
                   help="Decoder variants to explore (repeatable)")
    p.add_argument("--weights", help="Resource weights lut,ff,bram (sum 1)")
    p.add_argument("--workers", type=int, default=1, help="Parallel evaluations")
    p.add_argument("--out", help="Output directory (default: <workspace>/dse)")

    p = sub.add_parser("report", parents=[common], help="Render a profiled run")
    p.add_argument("run_dir", help="Directory written by `profile`")
    p.add_argument("--format", choices=["table", "csv", "json", "svg", "trace-events"], default="table")
    p.add_argument("--top", type=int, dest="top_k", help="Gantt lanes to keep")

    sub.add_parser("status", parents=[common], help="List workspace artifacts and reuse")
    return parser


def make_config(args: argparse.Namespace) -> Config:
    """Settings from --config / $PROBE_FORGE_CONFIG, cost constants and weights overlaid"""
    config = Config(args.config)
    if getattr(args, "constants", None):
        if not Path(args.constants).is_file():
            raise ProbeForgeError(f"constants file not found: {args.constants}")
        config.load_section("cost", args.constants)
    if getattr(args, "weights", None):
        try:
            lut, ff, bram = (float(w) for w in args.weights.split(","))
        except ValueError:
            raise ProbeForgeError(f"--weights expects three numbers lut,ff,bram, got '{args.weights}'")
        config.set("dse.weights", {"lut": lut, "ff": ff, "bram": bram})
    return config


def workspace_dir(args: argparse.Namespace, config: Config) -> str:
    return (
        args.workspace
        or os.environ.get("PROBE_FORGE_WORKSPACE")
        or config.get("workspace.dir", ".probe_forge")
    )


def probe_config(args: argparse.Namespace) -> ProbeConfig:
    mode = StorageMode(args.storage)
    return ProbeConfig(
        storage=mode,
        dump_ratio=int(args.dump_ratio) / 100,
        threshold=args.hybrid_threshold if mode is StorageMode.HYBRID else None,
        decode_variant=args.decode,
    )


def run_config(args: argparse.Namespace, config: Config, target: Optional[str]) -> RunConfig:
    rc = RunConfig(
        manifest_path=args.manifest,
        target=target,
        policy=InliningPolicy(args.policy),
        workspace=workspace_dir(args, config),
        config=config,
    )
    if hasattr(args, "storage"):
        rc.probe_config = probe_config(args)
    return rc


# ------------------------------------------------------------------ commands

def cmd_check(args: argparse.Namespace, config: Config) -> int:
    source = load_source(args.manifest, config)
    inlined = apply_inlining(source, InliningPolicy(args.policy))
    rollup = static_latency_rollup(inlined)
    print(f"{source.name}: OK")
    print(f"  top: {source.top}")
    print(f"  profiling pragma: {source.pragma_function or '-'}")
    print(f"  functions: {len(source.functions)} declared, {len(inlined.functions)} after "
          f"'{args.policy}' inlining")
    top_estimate = rollup.get(inlined.top)
    print(f"  estimated latency of {inlined.top}: {'?' if top_estimate is None else top_estimate} cycles")
    return 0


def cmd_map(args: argparse.Namespace, config: Config) -> int:
    prepared = prepare(run_config(args, config, args.root), allocate=False)
    mapping = prepared.mapping
    if args.format == "csv":
        sys.stdout.write(mapping.to_csv())
    elif args.format == "json":
        sys.stdout.write(canonical_json(mapping.to_rows()))
    else:
        sys.stdout.write(mapping.to_table())
    return 0


def cmd_instrument(args: argparse.Namespace, config: Config) -> int:
    rc = run_config(args, config, args.root)
    if args.targets and not args.all:
        rc.probes = list(args.targets)
    prepared = prepare(rc)
    for probe in prepared.plan.probes:
        route = " <- ".join(prepared.tree.node(n).rtl_name for n in probe.route) or "(root)"
        print(f"{probe.source_path:40s} {probe.rtl_name:32s} {route}")
    allocation = prepared.allocation
    print(f"{len(allocation.probes)} counter(s), {allocation.counter_width}-bit timestamps")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "probe_plan.json").write_text(canonical_json(prepared.plan.to_dict()), encoding="utf-8")
        (out / "allocation.json").write_text(canonical_json(allocation.to_dict()), encoding="utf-8")
        logger.info(f"Probe plan and allocation written to {out}")
    return 0


def cmd_estimate(args: argparse.Namespace, config: Config) -> int:
    plan = None
    if args.plan:
        if not Path(args.plan).is_file():
            raise ProbeForgeError(f"probe plan not found: {args.plan}")
        with open(args.plan, "r", encoding="utf-8") as f:
            plan = ProbePlan.from_dict(json.load(f))
    rc = run_config(args, config, args.root)
    prepared = prepare(rc, plan_override=plan)

    k = CostConstants.from_config(config)
    k = replace(k, decode_variant=rc.probe_config.decode_variant)
    estimate = estimate_allocation(prepared.allocation, k, effective=True)
    m = prepared.manifest
    components = r_util_components(
        estimate, ResourceEstimate.from_budget(m.kernel_usage), m.budget, config.get("dse.weights")
    )
    print(f"{'RESOURCE':10s} {'PROFILER':>10s} {'KERNEL':>10s} {'BUDGET':>10s} {'WEIGHTED':>10s}")
    kernel = {"lut": m.kernel_usage.lut, "ff": m.kernel_usage.ff, "bram": m.kernel_usage.bram_blocks}
    budget = {"lut": m.budget.lut, "ff": m.budget.ff, "bram": m.budget.bram_blocks}
    for name, used in estimate.as_dict().items():
        print(f"{name:10s} {used:>10d} {kernel[name]:>10d} {budget[name]:>10d} {components[name]:>10.4f}")
    r_util = sum(components.values())
    print(f"delta R_util: {r_util:.4f}")
    sys.stdout.write(canonical_json({
        "probes": len(prepared.allocation.probes),
        "estimate": estimate.as_dict(),
        "components": components,
        "r_util": r_util,
    }))
    return 0


def cmd_profile(args: argparse.Namespace, config: Config) -> int:
    rc = run_config(args, config, args.target)
    rc.probes = args.probes
    rc.mode = LatencyMode(args.mode)
    rc.seed = args.seed
    rc.compare = args.compare
    rc.top_k = args.top_k if args.top_k is not None else config.get("report.top_k")
    rc.out_dir = args.out
    result = run_pipeline(rc)
    with open(rc.output_dir / "report.txt", "r", encoding="utf-8") as f:
        sys.stdout.write(f.read())
    if result.comparison is not None:
        sys.stdout.write("\n" + result.comparison.to_table())
    print(f"Reused {len(result.reuse.reused_kinds)}/{len(result.reuse.reused_kinds) + len(result.reuse.rebuilt)} "
          f"artifacts; results in {rc.output_dir}")
    return 0


def cmd_dse(args: argparse.Namespace, config: Config) -> int:
    rc = run_config(args, config, args.target)
    prepared = prepare(rc, allocate=False)
    configs = enumerate_configs(
        storages=config.get("dse.storages", ["reg", "bram"]),
        ratios=config.get("dse.ratios", [0.0, 0.25, 0.5, 0.75]),
        hybrid_thresholds=args.hybrid if args.hybrid is not None else config.get("dse.hybrid_thresholds", []),
        decode_variants=args.decode or ["monolithic"],
    )
    result = explore(configs, prepared.manifest, prepared.tree, prepared.plan,
                     args.seed, config, workers=args.workers)

    out = Path(args.out) if args.out else Path(rc.workspace) / "dse"
    out.mkdir(parents=True, exist_ok=True)
    (out / "dse_points.csv").write_text(result.to_csv(), encoding="utf-8")
    (out / "dse_scatter.json").write_text(canonical_json(result.scatter_data()), encoding="utf-8")

    sys.stdout.write(result.to_csv())
    if result.balanced is not None:
        print(f"Balanced configuration: {result.balanced.config_id}")
    logger.info(f"DSE results written to {out}")
    return 0


def _load_trace(run_dir: Path) -> ProfiledTrace:
    path = run_dir / "trace.json"
    if not path.is_file():
        raise ProbeForgeError(f"no profiled trace in {run_dir} (expected trace.json)")
    with open(path, "r", encoding="utf-8") as f:
        return ProfiledTrace.from_dict(json.load(f))


def cmd_report(args: argparse.Namespace, config: Config) -> int:
    run_dir = Path(args.run_dir)
    trace = _load_trace(run_dir)
    top_k = args.top_k if args.top_k is not None else config.get("report.top_k")

    if args.format == "table":
        text, _ = render_table(trace, None, int(config.get("report.ila_capture_cycles", 131072)))
        sys.stdout.write(text)
    elif args.format == "json":
        _, data = render_table(trace, None, int(config.get("report.ila_capture_cycles", 131072)))
        sys.stdout.write(canonical_json(data))
    elif args.format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["source_path", "rtl_name", "kind", "iterations", "total_cycles"])
        for p in trace.profiles:
            writer.writerow([p.source_path, p.rtl_name, p.kind, p.iterations, p.total_cycles])
        sys.stdout.write(buffer.getvalue())
    elif args.format == "svg":
        sys.stdout.write(export_gantt(trace, top_k))
    else:
        record_path = run_dir / "run.json"
        clock = 100.0
        if record_path.is_file():
            with open(record_path, "r", encoding="utf-8") as f:
                clock = float(json.load(f).get("clock_mhz", clock))
        sys.stdout.write(canonical_json(to_trace_events(trace, clock, top_k)))
    return 0


def cmd_status(args: argparse.Namespace, config: Config) -> int:
    workspace = workspace_dir(args, config)
    inventory = ArtifactStore(workspace).inventory()
    if not inventory:
        print(f"{workspace}: no artifacts")
        return 0
    print(f"workspace {workspace}")
    for kind, keys in inventory.items():
        print(f"  {kind:12s} {len(keys):4d}  " + " ".join(k[:12] for k in keys))
    record = load_run_record(workspace)
    if record:
        reuse = record["reuse"]
        print(f"last run: {record['run']['manifest']} -> {record['target_path']} "
              f"[{record['run']['mode']}, seed {record['run']['seed']}]")
        print(f"  reused: {', '.join(reuse['reused_kinds']) or '-'}")
        print(f"  rebuilt: {', '.join(reuse['rebuilt']) or '-'}")
        print(f"  reuse fraction: {reuse['reuse_fraction']:.2f}")
    return 0


COMMANDS = {
    "check": cmd_check,
    "map": cmd_map,
    "instrument": cmd_instrument,
    "estimate": cmd_estimate,
    "profile": cmd_profile,
    "dse": cmd_dse,
    "report": cmd_report,
    "status": cmd_status,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main program entry point; returns the process exit code"""
    load_dotenv()
    args = build_parser().parse_args(argv)

    try:
        config = make_config(args)
    except ProbeForgeError as e:
        logging.getLogger(__name__).error(str(e))
        return e.exit_code

    level = "DEBUG" if args.debug else (args.log_level or config.get("system.log_level", "INFO"))
    setup_logger("src", level, config.get("system.log_dir"))

    try:
        return COMMANDS[args.command](args, config)
    except ProbeForgeError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Received interrupt signal, shutting down...")
        sys.exit(0)
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        sys.exit(1)
