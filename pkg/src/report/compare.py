"""
Stage Comparison
C-synth estimates vs co-simulation vs hardware: differences and bottleneck rankings
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from src.hierarchy.tree import HierarchyTree
from src.report.profiled_trace import ProfiledTrace

logger = logging.getLogger(__name__)

STAGES = ("csynth", "cosim", "hw")
UNKNOWN = "?"


def csynth_by_source_path(tree: HierarchyTree) -> Dict[str, Optional[int]]:
    """
    Static total cycles per source path for one activation of the root.

    Each node's roll-up estimate is multiplied by the trip counts of the
    loops enclosing it inside the tree; unknown estimates or data-dependent
    enclosing loops give None.
    """
    totals: Dict[str, Optional[int]] = {}
    for node in tree.preorder():
        factor: Optional[int] = 1
        for ancestor in tree.ancestors(node.id):
            a = tree.node(ancestor)
            if a.is_loop:
                if a.data_dependent or factor is None:
                    factor = None
                else:
                    factor *= a.trip_count
        if node.est_cycles is None or factor is None:
            totals[node.source_path] = None
        else:
            totals[node.source_path] = node.est_cycles * factor
    return totals


def _ranking(values: Dict[str, Optional[int]]) -> List[str]:
    """Paths by total descending, ties by path; unknown values are left out"""
    known = [(path, v) for path, v in values.items() if v is not None]
    return [path for path, _ in sorted(known, key=lambda item: (-item[1], item[0]))]


@dataclass
class BottleneckRanking:
    paths: List[str]
    totals: Dict[str, Dict[str, Optional[int]]]
    rankings: Dict[str, List[str]]
    pct_diff: Dict[str, Dict[str, Optional[float]]] = field(default_factory=dict)
    rank_deltas: Dict[str, Dict[str, Optional[int]]] = field(default_factory=dict)

    def rank(self, stage: str, path: str) -> Optional[int]:
        """1-based rank of a path in one stage, None when unranked"""
        ranking = self.rankings[stage]
        return ranking.index(path) + 1 if path in ranking else None

    def top(self, stage: str) -> Optional[str]:
        ranking = self.rankings[stage]
        return ranking[0] if ranking else None

    def bump_chart(self) -> Dict[str, Any]:
        """Ranks per stage for a bump chart"""
        return {
            "stages": list(STAGES),
            "series": [
                {"path": path, "ranks": [self.rank(stage, path) for stage in STAGES]}
                for path in self.paths
            ],
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "paths": list(self.paths),
            "totals": self.totals,
            "rankings": self.rankings,
            "pct_diff": self.pct_diff,
            "rank_deltas": self.rank_deltas,
            "bump_chart": self.bump_chart(),
        }

    def to_table(self) -> str:
        header = ("SOURCE PATH", "CSYNTH", "COSIM", "HW", "CSYNTH vs HW", "COSIM vs HW")
        rows = []
        for path in self.paths:
            totals = self.totals[path]
            cells = [path]
            cells += [UNKNOWN if totals[s] is None else str(totals[s]) for s in STAGES]
            for stage in ("csynth", "cosim"):
                diff = self.pct_diff[path][stage]
                cells.append(UNKNOWN if diff is None else f"{diff * 100:+.1f}%")
            rows.append(tuple(cells))
        widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                 for row in [header] + rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        for stage in STAGES:
            lines.append(f"{stage} ranking: {' > '.join(self.rankings[stage]) or '-'}")
        return "\n".join(lines) + "\n"


def _pct(stage_value: Optional[int], hw_value: Optional[int]) -> Optional[float]:
    if stage_value is None or hw_value is None:
        return None
    if hw_value == 0:
        return 0.0 if stage_value == 0 else None
    return (stage_value - hw_value) / hw_value


def compare(
    csynth: Dict[str, Optional[int]],
    cosim: ProfiledTrace,
    hw: ProfiledTrace
) -> BottleneckRanking:
    """
    Three-way comparison of per-path total cycles.

    The profiling root is left out (it always ranks first). Percent
    differences are (stage - hw) / hw; unknown C-synth estimates stay
    unknown and the path is left out of the C-synth ranking.

    Args:
        csynth: Static totals per source path (see csynth_by_source_path)
        cosim: Co-simulation profiled trace
        hw: Hardware profiled trace

    Returns:
        BottleneckRanking
    """
    paths = [p.source_path for p in hw.profiles[1:]]
    cosim_totals = {p.source_path: p.total_cycles for p in cosim.profiles}
    hw_totals = {p.source_path: p.total_cycles for p in hw.profiles}

    totals = {
        path: {
            "csynth": csynth.get(path),
            "cosim": cosim_totals.get(path),
            "hw": hw_totals[path],
        }
        for path in paths
    }
    rankings = {stage: _ranking({path: totals[path][stage] for path in paths}) for stage in STAGES}
    result = BottleneckRanking(paths=paths, totals=totals, rankings=rankings)

    for path in paths:
        result.pct_diff[path] = {
            stage: _pct(totals[path][stage], totals[path]["hw"]) for stage in ("csynth", "cosim")
        }
        hw_rank = result.rank("hw", path)
        deltas: Dict[str, Optional[int]] = {}
        for stage in ("csynth", "cosim"):
            rank = result.rank(stage, path)
            deltas[stage] = None if rank is None or hw_rank is None else rank - hw_rank
        result.rank_deltas[path] = deltas

    if result.top("csynth") != result.top("hw"):
        logger.info(f"Bottleneck shifts: C-synth ranks {result.top('csynth')} first, "
                    f"hardware ranks {result.top('hw')} first")
    return result
