"""
Cycle-accurate Simulation Kernel
Discrete-event execution of a manifest under co-simulation or hardware memory timing
"""

import heapq
import logging
import math
import zlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Generator, List, Optional, Set, Tuple

import numpy as np

from src.hierarchy.tree import HierarchyTree, build_hierarchy
from src.instrument.allocation import CounterAllocation
from src.manifest.model import (
    BodyNode,
    Call,
    Compute,
    DesignManifest,
    DramAccess,
    Loop,
    Parallel,
    SitePath,
)
from src.profiler.profiler_ip import ProfilerState
from src.profiler.timestamp_log import DumpRecord, Edge, RawTimestampLog
from src.utils.config import Config

logger = logging.getLogger(__name__)

Interval = Tuple[int, int]


class LatencyMode(Enum):
    COSIM = "cosim"
    HW = "hw"


@dataclass(frozen=True)
class SimSettings:
    truncate_loop_iters: int = 4
    dump_bandwidth_share: float = 0.5

    def __post_init__(self):
        if not 0 < self.dump_bandwidth_share < 1:
            raise ValueError("dump_bandwidth_share must be in (0, 1)")

    @classmethod
    def from_config(cls, config: Optional[Config] = None) -> "SimSettings":
        config = config or Config()
        return cls(
            truncate_loop_iters=int(config.get("profiler.truncate_loop_iters", 4)),
            dump_bandwidth_share=float(config.get("profiler.dump_bandwidth_share", 0.5)),
        )


@dataclass(frozen=True)
class Delay:
    cycles: int


@dataclass(frozen=True)
class AllOf:
    processes: Tuple[Generator, ...]


@dataclass(frozen=True)
class DramEvent:
    cycle: int
    bytes: int
    source: str = "kernel"


@dataclass
class ExecutionTrace:
    """
    Ground-truth activity of one run

    `intervals` holds [start, end) activations per tracked node id,
    `iterations` the iteration intervals of loop nodes per activation.
    """
    intervals: Dict[int, List[Interval]]
    iterations: Dict[int, List[List[Interval]]]
    total_cycles: int
    dram_events: List[DramEvent] = field(default_factory=list)
    mode: str = "cosim"
    seed: int = 0

    @property
    def kernel_bytes(self) -> int:
        return sum(e.bytes for e in self.dram_events if e.source == "kernel")

    def to_json(self, tree: HierarchyTree) -> Dict[str, List[List[int]]]:
        """{source_path: [[start, end], ...]} in preorder"""
        return {
            tree.node(node_id).source_path: [[s, e] for s, e in self.intervals.get(node_id, [])]
            for node_id in range(len(tree))
        }


@dataclass
class ProfiledRun:
    oracle: ExecutionTrace
    log: RawTimestampLog
    dram_traffic: int
    wall_cycles: int
    dumps: List[DumpRecord]


class _Process:
    __slots__ = ("gen", "parent", "pending")

    def __init__(self, gen: Generator, parent: Optional["_Process"]):
        self.gen = gen
        self.parent = parent
        self.pending = 0


class EventScheduler:
    """Generator processes resumed from a (cycle, seq) heap"""

    def __init__(self, before_event: Optional[Callable[[int], None]] = None):
        self.now = 0
        self._heap: List[Tuple[int, int, _Process]] = []
        self._seq = 0
        self._before_event = before_event

    def _schedule(self, proc: _Process, at: int) -> None:
        heapq.heappush(self._heap, (at, self._seq, proc))
        self._seq += 1

    def start(self, gen: Generator) -> None:
        self._schedule(_Process(gen, None), self.now)

    def run(self) -> int:
        while self._heap:
            at, _, proc = heapq.heappop(self._heap)
            if self._before_event is not None:
                self._before_event(at)
            self.now = at
            self._step(proc)
        return self.now

    def _step(self, proc: _Process) -> None:
        try:
            command = next(proc.gen)
        except StopIteration:
            parent = proc.parent
            if parent is not None:
                parent.pending -= 1
                if parent.pending == 0:
                    self._schedule(parent, self.now)
            return
        if isinstance(command, Delay):
            self._schedule(proc, self.now + command.cycles)
        elif isinstance(command, AllOf):
            if not command.processes:
                self._schedule(proc, self.now)
                return
            proc.pending = len(command.processes)
            for gen in command.processes:
                self._schedule(_Process(gen, proc), self.now)
        else:
            raise TypeError(f"process yielded {command!r}")


@dataclass(frozen=True)
class _Frame:
    """Execution context of one function invocation"""
    function: str
    instance: Optional[int]
    anchor_pos: Optional[int]
    call_path: Tuple[SitePath, ...]


class _Execution:
    def __init__(
        self,
        m: DesignManifest,
        tree: HierarchyTree,
        mode: LatencyMode,
        seed: int,
        profiler: Optional[ProfilerState],
        probed: Set[int],
        truncate_loop_iters: int,
        dump_bandwidth_share: float,
    ):
        self.m = m
        self.tree = tree
        self.mode = mode
        self.seed = seed
        self.profiler = profiler
        self.probed = probed
        self.truncate = truncate_loop_iters
        self.contention = 1.0 / (1.0 - dump_bandwidth_share)
        self.scheduler = EventScheduler(profiler.advance if profiler is not None else None)
        self.intervals: Dict[int, List[Interval]] = {n: [] for n in range(len(tree))}
        self.iterations: Dict[int, List[List[Interval]]] = {
            n.id: [] for n in tree.preorder() if n.is_loop
        }
        self.dram_events: List[DramEvent] = []
        self._occurrences: Dict[str, int] = {}
        platform = m.platform
        self._p = 1.0 / (platform.hw_latency_mean - platform.hw_latency_min + 1)

    @property
    def now(self) -> int:
        return self.scheduler.now

    def _toggle(self, node: int, edge: Edge, iteration: Optional[int] = None) -> None:
        if self.profiler is not None and node in self.probed:
            self.profiler.on_toggle(node, edge, self.now, iteration)

    # ------------------------------------------------------------- memory

    def _dram_latency(self, frame: _Frame, site: SitePath, access: DramAccess) -> int:
        platform = self.m.platform
        if self.mode is LatencyMode.COSIM:
            return access.bursts * platform.fixed_latency_cycles
        if access.bursts == 0:
            return 0

        key = f"{frame.function}|{frame.call_path}|{site}"
        occurrence = self._occurrences.get(key, 0)
        self._occurrences[key] = occurrence + 1
        sequence = np.random.SeedSequence(self.seed, spawn_key=(zlib.crc32(key.encode()), occurrence))
        rng = np.random.default_rng(sequence)
        draws = rng.geometric(self._p, size=access.bursts)
        latency = int(np.sum(draws - 1)) + access.bursts * platform.hw_latency_min

        if self.profiler is not None and self.profiler.dump_in_flight(self.now):
            latency = math.ceil(latency * self.contention)
        return latency

    def _instant_duration(self, body: Tuple[BodyNode, ...], frame: _Frame,
                          prefix: SitePath) -> Tuple[int, int]:
        """(duration, dram bytes) of a body without calls or loops"""
        total = 0
        moved = 0
        for index, node in enumerate(body):
            site = prefix + (index,)
            if isinstance(node, Compute):
                total += node.cycles
            elif isinstance(node, DramAccess):
                total += self._dram_latency(frame, site, node)
                moved += node.bursts * node.burst_bytes
            elif isinstance(node, Parallel):
                spans = [self._instant_duration(b, frame, site + (i,))
                         for i, b in enumerate(node.branches)]
                total += max(s for s, _ in spans)
                moved += sum(b for _, b in spans)
            else:
                raise TypeError(f"{type(node).__name__} inside a pipelined loop body")
        return total, moved

    # ---------------------------------------------------------- processes

    def function(self, frame: _Frame) -> Generator:
        node = frame.instance
        start = self.now
        if node is not None:
            self._toggle(node, Edge.RISE)
        yield from self.body(self.m.functions[frame.function].body, frame, ())
        if node is not None:
            self._toggle(node, Edge.FALL)
            self.intervals[node].append((start, self.now))

    def body(self, body: Tuple[BodyNode, ...], frame: _Frame, prefix: SitePath) -> Generator:
        for index, node in enumerate(body):
            site = prefix + (index,)
            if isinstance(node, Compute):
                if node.cycles:
                    yield Delay(node.cycles)
            elif isinstance(node, DramAccess):
                latency = self._dram_latency(frame, site, node)
                self.dram_events.append(DramEvent(self.now, node.bursts * node.burst_bytes))
                if latency:
                    yield Delay(latency)
            elif isinstance(node, Call):
                yield from self.function(self._callee_frame(frame, site, node.callee))
            elif isinstance(node, Loop):
                loop_id = self.tree.sites.get((frame.instance, site)) if frame.instance is not None else None
                if node.pipelined:
                    yield from self.pipelined_loop(node, loop_id, frame, site)
                else:
                    yield from self.sequential_loop(node, loop_id, frame, site)
            elif isinstance(node, Parallel):
                yield AllOf(tuple(
                    self.body(branch, frame, site + (i,)) for i, branch in enumerate(node.branches)
                ))

    def _callee_frame(self, frame: _Frame, site: SitePath, callee: str) -> _Frame:
        path = frame.call_path + (site,)
        anchor = self.tree.anchor
        if frame.instance is not None:
            return _Frame(callee, self.tree.sites[(frame.instance, site)], None, path)
        if frame.anchor_pos is not None and anchor[frame.anchor_pos] == site:
            if frame.anchor_pos + 1 == len(anchor):
                return _Frame(callee, self.tree.root, None, path)
            return _Frame(callee, None, frame.anchor_pos + 1, path)
        if anchor is None and callee == self.tree.root_function:
            return _Frame(callee, self.tree.root, None, path)
        return _Frame(callee, None, None, path)

    def sequential_loop(self, loop: Loop, node: Optional[int], frame: _Frame,
                        site: SitePath) -> Generator:
        start = self.now
        iterations: List[Interval] = []
        if node is not None:
            self._toggle(node, Edge.RISE)
        for i in range(loop.trip_count):
            recorded = node is not None and i < self.truncate
            iteration_start = self.now
            if recorded:
                self._toggle(node, Edge.RISE, i)
            yield from self.body(loop.body, frame, site)
            if recorded:
                self._toggle(node, Edge.FALL, i)
            iterations.append((iteration_start, self.now))
        if node is not None:
            self._toggle(node, Edge.FALL)
            self.intervals[node].append((start, self.now))
            self.iterations[node].append(iterations)

    def pipelined_loop(self, loop: Loop, node: Optional[int], frame: _Frame,
                       site: SitePath) -> Generator:
        start = self.now
        trip = loop.trip_count
        if trip == 0:
            duration, moved = 0, 0
        else:
            duration, moved = self._instant_duration(loop.body, frame, site)
        for i in range(trip):
            if moved:
                self.dram_events.append(DramEvent(start + i * loop.ii, moved))
        end = start + loop.ii * (trip - 1) + duration if trip else start

        if node is None:
            if end > start:
                yield Delay(end - start)
            return

        # (cycle, rank, iteration, edge); ranks keep loop edges outermost
        edges = [(start, 0, -1, Edge.RISE), (end, 3, -1, Edge.FALL)]
        for i in range(trip):
            edges.append((start + i * loop.ii, 1, i, Edge.RISE))
            edges.append((start + i * loop.ii + duration, 2, i, Edge.FALL))
        edges.sort(key=lambda e: (e[0], e[1], e[2]))

        for cycle, _, i, edge in edges:
            if cycle > self.now:
                yield Delay(cycle - self.now)
            if i < 0:
                self._toggle(node, edge)
            elif i < self.truncate:
                self._toggle(node, edge, i)

        self.intervals[node].append((start, end))
        self.iterations[node].append(
            [(start + i * loop.ii, start + i * loop.ii + duration) for i in range(trip)]
        )

    def execute(self) -> int:
        tree = self.tree
        top = self.m.top
        if tree.anchor == () or (tree.anchor is None and top == tree.root_function):
            frame = _Frame(top, tree.root, None, ())
        elif tree.anchor is None:
            frame = _Frame(top, None, None, ())
        else:
            frame = _Frame(top, None, 0, ())
        self.scheduler.start(self.function(frame))
        return self.scheduler.run()

    def trace(self, total: int) -> ExecutionTrace:
        return ExecutionTrace(
            intervals=self.intervals,
            iterations=self.iterations,
            total_cycles=total,
            dram_events=self.dram_events,
            mode=self.mode.value,
            seed=self.seed,
        )


def _mode(mode: Any) -> LatencyMode:
    return mode if isinstance(mode, LatencyMode) else LatencyMode(mode)


def default_tree(m: DesignManifest) -> HierarchyTree:
    """Pragma-rooted tree, or the whole design when nothing is marked"""
    return build_hierarchy(m, m.pragma_function or m.top)


def run(
    m: DesignManifest,
    mode: Any = LatencyMode.COSIM,
    seed: int = 0,
    tree: Optional[HierarchyTree] = None,
    settings: Optional[SimSettings] = None
) -> ExecutionTrace:
    """
    Execute a design without profiling.

    Args:
        m: Validated (post-inlining) manifest
        mode: "cosim" (fixed burst latency) or "hw" (seeded dynamic latency)
        seed: Seed for hw-mode latency draws
        tree: Hierarchy whose nodes are traced (pragma-rooted when omitted)
        settings: Truncation and dump share (from Config when omitted)

    Returns:
        ExecutionTrace oracle; total_cycles is the end of the top function
    """
    latency_mode = _mode(mode)
    tree = tree or default_tree(m)
    settings = settings or SimSettings.from_config()
    execution = _Execution(m, tree, latency_mode, seed, None, set(),
                           settings.truncate_loop_iters, settings.dump_bandwidth_share)
    total = execution.execute()
    logger.debug(f"{m.name} [{latency_mode.value}, seed {seed}]: {total} cycles")
    return execution.trace(total)


def run_profiled(
    m: DesignManifest,
    tree: HierarchyTree,
    allocation: CounterAllocation,
    mode: Any = LatencyMode.COSIM,
    seed: int = 0,
    dump_bandwidth_share: Optional[float] = None
) -> ProfiledRun:
    """
    Execute a design with the profiler attached.

    Every allocated probe receives its activation edges; loop probes also
    receive per-iteration edges for the first truncate_loop_iters
    iterations. Profiler dumps share the DRAM channel with the kernel.

    Args:
        m: Validated (post-inlining) manifest matching `tree`
        tree: Hierarchy the allocation was planned on
        allocation: Adapted counter allocation
        mode: "cosim" or "hw"
        seed: Seed for hw-mode latency draws
        dump_bandwidth_share: Fraction of DRAM bandwidth a dump takes from
            concurrent kernel accesses (profiler.dump_bandwidth_share when omitted)

    Returns:
        ProfiledRun with oracle, raw log, dump traffic (S_dram) and wall cycles

    Raises:
        CounterOverflowError: the run outlasts the global counter
        EdgeOrderViolation: inconsistent toggle sequence
    """
    latency_mode = _mode(mode)
    if dump_bandwidth_share is None:
        dump_bandwidth_share = SimSettings.from_config().dump_bandwidth_share
    # truncation is fixed by the allocation the probes were sized for
    settings = SimSettings(allocation.truncate_loop_iters, dump_bandwidth_share)
    rtl_names = {p.node: tree.node(p.node).rtl_name for p in allocation.probes}
    profiler = ProfilerState(allocation, m.platform.bytes_per_cycle(m.clock_mhz), rtl_names)
    execution = _Execution(
        m, tree, latency_mode, seed, profiler, set(rtl_names),
        settings.truncate_loop_iters, settings.dump_bandwidth_share,
    )
    total = execution.execute()
    log = profiler.finalize()

    oracle = execution.trace(total)
    for dump in log.dumps:
        oracle.dram_events.append(DramEvent(dump.completion_cycle, dump.bytes, "dump"))
    oracle.dram_events.sort(key=lambda e: (e.cycle, e.source))

    logger.info(f"Profiled {m.name} [{latency_mode.value}, seed {seed}]: {total} cycles, "
                f"{len(log.dumps)} dumps, {log.dumped_bytes} bytes offloaded")
    return ProfiledRun(
        oracle=oracle,
        log=log,
        dram_traffic=log.dumped_bytes,
        wall_cycles=total,
        dumps=list(log.dumps),
    )
