"""
Profiler IP Model
Global cycle counter, edge-triggered performance counters and the dump protocol
"""

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional, Tuple, Union

from src.instrument.allocation import CounterAllocation
from src.profiler.timestamp_log import DumpRecord, Edge, RawTimestampLog, TimestampEntry
from src.utils.exceptions import CounterOverflowError, EdgeOrderViolation, UnknownNodeError

logger = logging.getLogger(__name__)


@dataclass
class _PendingDump:
    probe: int
    issue_cycle: int
    start_cycle: int
    completion_cycle: int


class ProfilerState:
    """
    Cycle-accurate state machine of the profiling IP.

    Each probe owns a FIFO of timestamp entries sized to its effective
    depth. When an append leaves exactly one free slot the probe's full
    flag is raised and a dump is queued on the single DRAM channel; dumps
    run FIFO, each taking the time to move the bytes queued at issue
    over the platform bandwidth, and on completion drain every entry
    present. An append to a queue with no free slot loses the entry and
    marks the run lossy.
    """

    def __init__(
        self,
        allocation: CounterAllocation,
        bytes_per_cycle: float,
        rtl_names: Optional[Dict[int, str]] = None
    ):
        """
        Initialize profiler state.

        Args:
            allocation: Per-probe queue depths and counter width
            bytes_per_cycle: Platform DRAM bytes per kernel cycle
            rtl_names: RTL instance name per probe node (for the CSV log)
        """
        self.allocation = allocation
        self.counter_width = allocation.counter_width
        self.counter_limit = 2 ** self.counter_width
        self.bytes_per_cycle = bytes_per_cycle
        self.global_counter = 0

        self.capacity: Dict[int, int] = {
            p.node: allocation.effective_depth(p) for p in allocation.probes
        }
        self.rtl_names = rtl_names or {p.node: p.rtl_name for p in allocation.probes}
        self.queues: Dict[int, Deque[TimestampEntry]] = {n: deque() for n in self.capacity}
        self.full_flags: Dict[int, bool] = {n: False for n in self.capacity}
        self.overflow_flags: Dict[int, bool] = {n: False for n in self.capacity}
        self.dump_log: List[DumpRecord] = []
        self.dumped: Dict[int, List[TimestampEntry]] = {n: [] for n in self.capacity}
        self.lost: List[TimestampEntry] = []
        self.lossy = False

        self._pending: Deque[_PendingDump] = deque()
        self._channel_free_at = 0
        self._seq = 0
        self._open: Dict[Union[int, Tuple[int, int]], bool] = {}

    # ------------------------------------------------------------ queries

    def dump_in_flight(self, cycle: int) -> bool:
        """True when a dump occupies the DRAM channel at `cycle`"""
        return any(d.start_cycle <= cycle < d.completion_cycle for d in self._pending)

    def dump_latency(self, probe: int) -> int:
        """Transfer cycles for the entries now queued at `probe`"""
        size = len(self.queues[probe]) * self.allocation.entry_bytes
        return max(1, math.ceil(size / self.bytes_per_cycle))

    # ---------------------------------------------------------- transitions

    def advance(self, to_cycle: int) -> None:
        """
        Move the global counter forward, completing due dumps.

        Raises:
            CounterOverflowError: to_cycle does not fit the counter width
            EdgeOrderViolation: to_cycle is in the past
        """
        if to_cycle < self.global_counter:
            raise EdgeOrderViolation(
                f"global counter cannot move back from {self.global_counter} to {to_cycle}"
            )
        if to_cycle >= self.counter_limit:
            raise CounterOverflowError(
                f"cycle {to_cycle} exceeds the {self.counter_width}-bit global counter"
            )
        while self._pending and self._pending[0].completion_cycle <= to_cycle:
            self._complete(self._pending.popleft())
        self.global_counter = to_cycle

    def on_toggle(self, probe: int, edge: Edge, at_cycle: int, iteration: Optional[int] = None) -> None:
        """
        Sample the global counter on a control-signal edge.

        Args:
            probe: Probe node id
            edge: Rise (start) or fall (done)
            at_cycle: Cycle of the toggle
            iteration: Loop iteration index for per-iteration edges

        Raises:
            EdgeOrderViolation: edges of the probe do not alternate
            UnknownNodeError: probe has no allocated queue
        """
        if probe not in self.queues:
            raise UnknownNodeError(f"no counter allocated for node {probe}")
        self.advance(at_cycle)

        key: Union[int, Tuple[int, int]] = probe if iteration is None else (probe, iteration)
        is_open = self._open.get(key, False)
        if (edge is Edge.RISE) == is_open:
            raise EdgeOrderViolation(
                f"{self.rtl_names.get(probe, probe)}: {edge.value} at cycle {at_cycle} "
                f"breaks rise/fall alternation"
            )
        self._open[key] = not is_open

        entry = TimestampEntry(probe, edge, at_cycle, iteration, self._seq)
        self._seq += 1
        queue = self.queues[probe]
        capacity = self.capacity[probe]

        if len(queue) >= capacity:
            if not self.overflow_flags[probe]:
                logger.warning(
                    f"Queue of {self.rtl_names.get(probe, probe)} overflowed at cycle {at_cycle}"
                )
            self.overflow_flags[probe] = True
            self.lossy = True
            self.lost.append(entry)
            return

        queue.append(entry)
        if capacity - len(queue) == 1 and not self.full_flags[probe]:
            self.full_flags[probe] = True
            self._issue_dump(probe, at_cycle)

    def _issue_dump(self, probe: int, at_cycle: int) -> None:
        start = max(at_cycle, self._channel_free_at)
        completion = start + self.dump_latency(probe)
        self._channel_free_at = completion
        self._pending.append(_PendingDump(probe, at_cycle, start, completion))
        logger.debug(f"Dump of {self.rtl_names.get(probe, probe)} issued at {at_cycle}, "
                     f"completes at {completion}")

    def _complete(self, dump: _PendingDump) -> None:
        queue = self.queues[dump.probe]
        count = len(queue)
        self.dumped[dump.probe].extend(queue)
        queue.clear()
        self.full_flags[dump.probe] = False
        self.dump_log.append(DumpRecord(
            probes=(dump.probe,),
            entry_count=count,
            bytes=count * self.allocation.entry_bytes,
            issue_cycle=dump.issue_cycle,
            completion_cycle=dump.completion_cycle,
        ))

    def finalize(self) -> RawTimestampLog:
        """
        Complete in-flight dumps and collect the log for host readback.

        Returns:
            RawTimestampLog with dumped plus residual entries per probe
        """
        while self._pending:
            self._complete(self._pending.popleft())

        entries = {}
        residual = {}
        for probe in sorted(self.queues):
            collected = self.dumped[probe] + list(self.queues[probe])
            entries[probe] = sorted(collected, key=lambda e: (e.cycle, e.seq))
            residual[probe] = len(self.queues[probe])

        if self.lossy:
            logger.warning(f"Profiled run is lossy: {len(self.lost)} timestamp(s) dropped")
        return RawTimestampLog(
            entries=entries,
            rtl_names=dict(self.rtl_names),
            counter_width=self.counter_width,
            lossy=self.lossy,
            dumps=list(self.dump_log),
            residual=residual,
            lost=list(self.lost),
        )
