"""
Raw Timestamp Log
Host-side view of everything the profiler recorded in one run
"""

import csv
import io
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple


class Edge(Enum):
    RISE = "rise"
    FALL = "fall"


@dataclass(frozen=True)
class TimestampEntry:
    """
    Global counter sample taken on a signal toggle

    `iteration` is set for per-iteration edges of loop probes and None for
    activation edges; `seq` orders samples taken in the same cycle.
    """
    probe: int
    edge: Edge
    cycle: int
    iteration: Optional[int] = None
    seq: int = field(default=0, compare=False)


@dataclass(frozen=True)
class DumpRecord:
    probes: Tuple[int, ...]
    entry_count: int
    bytes: int
    issue_cycle: int
    completion_cycle: int


@dataclass
class RawTimestampLog:
    """
    Entries per probe sorted by (cycle, seq)

    `residual` counts entries still on chip at finalize, `lost` holds
    entries dropped by full queues (only present in lossy runs).
    """
    entries: Dict[int, List[TimestampEntry]]
    rtl_names: Dict[int, str]
    counter_width: int
    lossy: bool = False
    dumps: List[DumpRecord] = field(default_factory=list)
    residual: Dict[int, int] = field(default_factory=dict)
    lost: List[TimestampEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def iter_entries(self) -> Iterator[TimestampEntry]:
        for probe in sorted(self.entries):
            yield from self.entries[probe]

    @property
    def dumped_bytes(self) -> int:
        return sum(d.bytes for d in self.dumps)

    def activation_edges(self, probe: int) -> List[TimestampEntry]:
        return [e for e in self.entries.get(probe, []) if e.iteration is None]

    def iteration_edges(self, probe: int) -> List[TimestampEntry]:
        return [e for e in self.entries.get(probe, []) if e.iteration is not None]

    def to_csv(self) -> str:
        """probe_rtl_name,edge,cycle,iteration rows, probes in preorder"""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["probe_rtl_name", "edge", "cycle", "iteration"])
        for entry in self.iter_entries():
            writer.writerow([
                self.rtl_names[entry.probe],
                entry.edge.value,
                entry.cycle,
                "" if entry.iteration is None else entry.iteration,
            ])
        return buffer.getvalue()
