"""
Profiled Trace
Source-level profiling results per function and loop instance
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

Interval = Tuple[int, int]


@dataclass
class PathProfile:
    """
    Result for one source path

    `iteration_intervals` holds, per activation, the recorded (or, for
    pipelined loops, analytically expanded) iteration intervals.
    """
    source_path: str
    rtl_name: str
    kind: str
    iterations: int
    total_cycles: int
    activations: List[Interval] = field(default_factory=list)
    iteration_intervals: List[List[Interval]] = field(default_factory=list)
    trip_count: Optional[int] = None
    synthetic: bool = False
    truncated: bool = False


@dataclass
class ProfiledTrace:
    profiles: List[PathProfile]
    mode: str
    seed: int

    def __len__(self) -> int:
        return len(self.profiles)

    def get(self, source_path: str) -> Optional[PathProfile]:
        for profile in self.profiles:
            if profile.source_path == source_path:
                return profile
        return None

    @property
    def total_cycles(self) -> int:
        """Total of the root (first) path, 0 for an empty trace"""
        return self.profiles[0].total_cycles if self.profiles else 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "profiles": [
                {
                    "source_path": p.source_path,
                    "rtl_name": p.rtl_name,
                    "kind": p.kind,
                    "iterations": p.iterations,
                    "total_cycles": p.total_cycles,
                    "activations": [list(a) for a in p.activations],
                    "iteration_intervals": [[list(i) for i in act] for act in p.iteration_intervals],
                    "trip_count": p.trip_count,
                    "synthetic": p.synthetic,
                    "truncated": p.truncated,
                }
                for p in self.profiles
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProfiledTrace":
        profiles = [
            PathProfile(
                source_path=d["source_path"],
                rtl_name=d["rtl_name"],
                kind=d["kind"],
                iterations=d["iterations"],
                total_cycles=d["total_cycles"],
                activations=[tuple(a) for a in d["activations"]],
                iteration_intervals=[[tuple(i) for i in act] for act in d["iteration_intervals"]],
                trip_count=d.get("trip_count"),
                synthetic=d.get("synthetic", False),
                truncated=d.get("truncated", False),
            )
            for d in data["profiles"]
        ]
        return cls(profiles=profiles, mode=data["mode"], seed=data["seed"])
