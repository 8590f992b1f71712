"""
Simulation Test: Oracle Execution and Profiled Reconstruction
Tests the cycle-level kernel against hand-computed traces and a generated corpus

Success Criteria:
- Toy co-simulation matches the hand-simulated intervals
- Reconstruction from the raw log equals the oracle exactly, in both modes
- Pipelined loops expand from recorded iterations without loss
- DRAM-heavy designs diverge between co-simulation and hardware; compute-only designs do not
- Runs are deterministic per seed
"""

import sys
import os
import json
import logging

import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.hierarchy.tree import build_hierarchy
from src.instrument.allocation import allocate_counters
from src.instrument.probe_plan import extract_signals
from src.manifest.generator import generate_manifest
from src.manifest.parser import load_manifest, parse_manifest
from src.simkernel.engine import LatencyMode, SimSettings, run, run_profiled
from src.simkernel.reconstruct import reconstruct
from src.utils.config import Config
from src.utils.exceptions import LossyLogError

logger = logging.getLogger(__name__)

RUN_SEEDS = range(5)


def test_toy_cosim_oracle(toy, toy_tree):
    logger.info("TEST: Toy oracle")
    trace = run(toy, LatencyMode.COSIM, tree=toy_tree)
    assert trace.total_cycles == 80
    assert trace.intervals[0] == [(0, 80)]
    assert trace.intervals[1] == [(0, 40)]
    assert trace.intervals[2] == [(40, 80)]
    assert trace.intervals[3] == [(40, 80)]
    assert trace.iterations[3] == [[(40 + 5 * i, 45 + 5 * i) for i in range(8)]]
    assert trace.kernel_bytes == 0


def test_toy_oracle_json(toy, toy_tree):
    data = run(toy, "cosim", tree=toy_tree).to_json(toy_tree)
    assert data == {
        "compute": [[0, 80]],
        "compute/mult": [[0, 40]],
        "compute/sum": [[40, 80]],
        "compute/sum/L_while": [[40, 80]],
    }


def test_toy_hw_equals_cosim_without_dram(toy, toy_tree):
    cosim = run(toy, LatencyMode.COSIM, tree=toy_tree)
    for seed in RUN_SEEDS:
        hw = run(toy, LatencyMode.HW, seed, tree=toy_tree)
        assert hw.intervals == cosim.intervals


def test_toy_profiled_log(toy, toy_tree, toy_allocation):
    logger.info("TEST: Toy profiled run")
    profiled = run_profiled(toy, toy_tree, toy_allocation, LatencyMode.COSIM)
    log = profiled.log
    assert not log.lossy
    mult = [(e.edge.value, e.cycle) for e in log.entries[1]]
    assert mult == [("rise", 0), ("fall", 40)]
    loop = log.entries[3]
    # loop rise/fall plus rise/fall for the first four iterations
    assert len(log.activation_edges(3)) == 2
    assert len(log.iteration_edges(3)) == 8
    assert [e.cycle for e in log.activation_edges(3)] == [40, 80]
    assert len(loop) == 10
    assert len(log) == 16
    assert profiled.wall_cycles == 80


def test_toy_reconstruction(toy, toy_tree, toy_allocation):
    profiled = run_profiled(toy, toy_tree, toy_allocation, LatencyMode.COSIM)
    trace = reconstruct(profiled.log, toy_tree, toy_allocation, "cosim", 0)
    assert trace.total_cycles == 80
    assert [p.total_cycles for p in trace.profiles] == [80, 40, 40, 40]
    mult = trace.get("compute/mult")
    assert mult.activations == [(0, 40)]
    loop = trace.get("compute/sum/L_while")
    assert loop.iterations == 8
    assert loop.truncated
    assert not loop.synthetic
    assert loop.iteration_intervals == [[(40, 45), (45, 50), (50, 55), (55, 60)]]


def test_lossy_log_refuses_reconstruction(toy, toy_tree, toy_allocation):
    profiled = run_profiled(toy, toy_tree, toy_allocation, LatencyMode.COSIM)
    profiled.log.lossy = True
    with pytest.raises(LossyLogError) as info:
        reconstruct(profiled.log, toy_tree, toy_allocation)
    assert info.value.exit_code == 3


def _check_against_oracle(m, tree, allocation, mode, seed):
    profiled = run_profiled(m, tree, allocation, mode, seed)
    assert not profiled.log.lossy, f"{m.name} seed {seed} {mode.value} lost timestamps"
    _assert_matches_oracle(profiled, tree, allocation, mode, seed)


def _assert_matches_oracle(profiled, tree, allocation, mode, seed):
    trace = reconstruct(profiled.log, tree, allocation, mode.value, seed)
    oracle = profiled.oracle
    truncate = allocation.truncate_loop_iters

    assert trace.total_cycles == sum(e - s for s, e in oracle.intervals[tree.root])
    for profile, probe in zip(trace.profiles, allocation.probes):
        node = tree.node(probe.node)
        expected = oracle.intervals[node.id]
        assert profile.activations == expected
        assert profile.total_cycles == sum(e - s for s, e in expected)
        if not node.is_loop:
            continue
        oracle_iterations = oracle.iterations[node.id]
        if node.pipelined:
            # analytic expansion must reproduce every iteration
            assert profile.iteration_intervals == oracle_iterations
        else:
            assert profile.iteration_intervals == [act[:truncate] for act in oracle_iterations]
        assert profile.iterations == node.trip_count * len(expected)


@pytest.mark.parametrize("mode", [LatencyMode.COSIM, LatencyMode.HW])
def test_corpus_matches_oracle(corpus, mode):
    logger.info(f"TEST: Corpus oracle equivalence ({mode.value})")
    for m in corpus:
        tree = build_hierarchy(m)
        allocation = allocate_counters(extract_signals(tree), tree)
        for seed in RUN_SEEDS:
            _check_against_oracle(m, tree, allocation, mode, seed)


def test_corpus_has_pipelined_loops(corpus):
    pipelined = sum(
        1 for m in corpus for n in build_hierarchy(m).preorder() if n.is_loop and n.pipelined
    )
    assert pipelined > 0


def test_long_loop_corpus_matches_oracle():
    logger.info("TEST: Truncation and dumps against the oracle")
    checked = dumped = truncated = 0
    for corpus_seed in range(20):
        m = generate_manifest(corpus_seed, max_trip=40)
        tree = build_hierarchy(m)
        allocation = allocate_counters(extract_signals(tree), tree)
        for mode in (LatencyMode.COSIM, LatencyMode.HW):
            for seed in range(3):
                profiled = run_profiled(m, tree, allocation, mode, seed)
                if profiled.log.lossy:
                    # lost entries are reported, never reconstructed
                    with pytest.raises(LossyLogError):
                        reconstruct(profiled.log, tree, allocation)
                    continue
                _assert_matches_oracle(profiled, tree, allocation, mode, seed)
                checked += 1
                dumped += bool(profiled.log.dumps)
                truncated += any(
                    n.is_loop and not n.pipelined and n.trip_count > allocation.truncate_loop_iters
                    and profiled.oracle.intervals[n.id]
                    for n in tree.preorder()
                )
    assert checked > 0
    assert dumped > 0
    assert truncated > 0


def _pipelined_design(trip, ii, cycles):
    doc = {
        "design": "pipelined", "clock_mhz": 100, "platform": "pynq-z2",
        "budget": {"lut": 53200, "ff": 106400, "bram": 140},
        "kernel_usage": {"lut": 5000, "ff": 5000, "bram": 0},
        "top": "main",
        "functions": {
            "main": {"body": [{"kind": "call", "callee": "kernel"}]},
            "kernel": {"pragma_realprobe": True, "body": [{
                "kind": "loop", "name": "L_pipe", "trip_count": trip, "pipelined": True, "ii": ii,
                "body": [{"kind": "compute", "cycles": cycles}],
            }]},
        },
    }
    return parse_manifest(json.dumps(doc))


@pytest.mark.parametrize("mode", [LatencyMode.COSIM, LatencyMode.HW])
def test_pipelined_trip_32_expands_from_four_iterations(mode):
    logger.info("TEST: Pipelined loop expansion")
    m = _pipelined_design(32, 2, 5)
    tree = build_hierarchy(m)
    allocation = allocate_counters(extract_signals(tree), tree)
    loop_id = tree.locate("kernel/L_pipe")
    profiled = run_profiled(m, tree, allocation, mode, 0)
    log = profiled.log
    assert not log.lossy
    # only the first four iterations reach the queue
    assert sorted({e.iteration for e in log.iteration_edges(loop_id)}) == [0, 1, 2, 3]
    assert len(log.iteration_edges(loop_id)) == 8

    trace = reconstruct(log, tree, allocation, mode.value, 0)
    loop = trace.get("kernel/L_pipe")
    assert loop.synthetic
    assert not loop.truncated
    assert loop.iterations == 32
    assert loop.total_cycles == 2 * 31 + 5
    assert len(loop.iteration_intervals[0]) == 32
    assert loop.iteration_intervals[0][-1] == (62, 67)
    assert loop.iteration_intervals == profiled.oracle.iterations[loop_id]


def test_unprofiled_run_matches_profiled_oracle_in_cosim(corpus):
    for m in corpus[:5]:
        tree = build_hierarchy(m)
        allocation = allocate_counters(extract_signals(tree), tree)
        profiled = run_profiled(m, tree, allocation, LatencyMode.COSIM)
        assert run(m, LatencyMode.COSIM, tree=tree).intervals == profiled.oracle.intervals


def test_gemm_hw_gap(designs_dir):
    logger.info("TEST: Co-simulation vs hardware gap")
    m = load_manifest(str(designs_dir / "gemm.json"))
    cosim = run(m, LatencyMode.COSIM)
    assert cosim.total_cycles == 3 * 32 * 8 * 30 + 6 * (31 + 6)
    for seed in RUN_SEEDS:
        hw = run(m, LatencyMode.HW, seed)
        gap = (hw.total_cycles - cosim.total_cycles) / cosim.total_cycles
        assert gap > 0.10


def test_compute_only_has_no_gap(designs_dir):
    m = load_manifest(str(designs_dir / "compute_only.json"))
    cosim = run(m, LatencyMode.COSIM)
    # filter 2*15+9, then max(scale 12*3, bias 30)
    assert cosim.total_cycles == 39 + 36
    for seed in RUN_SEEDS:
        assert run(m, LatencyMode.HW, seed).total_cycles == cosim.total_cycles


def test_hw_runs_are_seed_deterministic(designs_dir):
    m = load_manifest(str(designs_dir / "gemm.json"))
    first = run(m, LatencyMode.HW, 7)
    second = run(m, LatencyMode.HW, 7)
    assert first.intervals == second.intervals
    assert first.total_cycles == second.total_cycles
    totals = {run(m, LatencyMode.HW, seed).total_cycles for seed in RUN_SEEDS}
    assert len(totals) > 1


def test_hw_latency_floor(designs_dir):
    m = load_manifest(str(designs_dir / "gemm.json"))
    hw = run(m, LatencyMode.HW, 3)
    # every burst costs at least hw_latency_min
    assert hw.total_cycles >= 3 * 32 * 8 * m.platform.hw_latency_min + 6 * 37


def test_dump_contention_only_slows_hw(designs_dir):
    m = load_manifest(str(designs_dir / "gemm.json"))
    tree = build_hierarchy(m)
    allocation = allocate_counters(extract_signals(tree), tree)
    for seed in RUN_SEEDS:
        base = run(m, LatencyMode.HW, seed, tree=tree)
        profiled = run_profiled(m, tree, allocation, LatencyMode.HW, seed)
        assert profiled.wall_cycles >= base.total_cycles
    cosim = run_profiled(m, tree, allocation, LatencyMode.COSIM)
    assert cosim.wall_cycles == run(m, LatencyMode.COSIM, tree=tree).total_cycles
    assert cosim.dram_traffic == sum(d.bytes for d in cosim.dumps)


def test_gemm_profiles_without_loss(designs_dir):
    m = load_manifest(str(designs_dir / "gemm.json"))
    tree = build_hierarchy(m)
    allocation = allocate_counters(extract_signals(tree), tree)
    for seed in RUN_SEEDS:
        _check_against_oracle(m, tree, allocation, LatencyMode.HW, seed)


def test_sim_settings_follow_config(toy, toy_tree):
    config = Config()
    config.set("profiler.truncate_loop_iters", 2)
    config.set("profiler.dump_bandwidth_share", 0.75)
    settings = SimSettings.from_config(config)
    assert settings == SimSettings(truncate_loop_iters=2, dump_bandwidth_share=0.75)
    assert run(toy, LatencyMode.COSIM, tree=toy_tree, settings=settings).total_cycles == 80
    config.set("profiler.dump_bandwidth_share", 1.5)
    with pytest.raises(ValueError):
        SimSettings.from_config(config)
