"""
Result Table
Per-module text table and JSON summary of a profiled trace
"""

import math
from typing import Any, Dict, List, Optional, Tuple

from src.hierarchy.mapping import MappingTable
from src.report.profiled_trace import PathProfile, ProfiledTrace

SHOWN_ITERATIONS = 4
ILA_CAPTURE_CYCLES = 131072
FOOTNOTE = "* Iterations after the fourth are omitted"

HEADER = ("SOURCE PATH", "RTL INSTANCE", "ITERATIONS", "TOTAL CYCLES", "START", "END")


def ila_windows(total_cycles: int, capture_cycles: int = ILA_CAPTURE_CYCLES) -> int:
    """Logic-analyzer captures needed to cover a run of `total_cycles`"""
    if total_cycles <= 0:
        return 0
    return math.ceil(total_cycles / capture_cycles)


def _span(profile: PathProfile) -> Tuple[str, str]:
    if not profile.activations:
        return "", ""
    return str(profile.activations[0][0]), str(profile.activations[-1][1])


def _shown_iterations(profile: PathProfile) -> List[Tuple[int, int]]:
    """First iterations of the first activation"""
    if not profile.iteration_intervals:
        return []
    return list(profile.iteration_intervals[0][:SHOWN_ITERATIONS])


def render_table(
    trace: ProfiledTrace,
    mapping: Optional[MappingTable] = None,
    ila_capture_cycles: int = ILA_CAPTURE_CYCLES
) -> Tuple[str, Dict[str, Any]]:
    """
    Render a profiled trace as a text table and a JSON-ready dict.

    Loops get one indented row per iteration for the first four
    iterations of their first activation; loops with more iterations are
    marked with `*` and the table carries the omission footnote.

    Args:
        trace: Profiled trace
        mapping: Mapping table supplying RTL names (profile names when omitted)
        ila_capture_cycles: Capture depth of the logic analyzer the run is compared with

    Returns:
        (text, data)
    """
    rows: List[Tuple[str, ...]] = []
    records = []
    footnote = False

    for p in trace.profiles:
        rtl_name = mapping.by_source(p.source_path).rtl_name if mapping is not None else p.rtl_name
        omitted = p.trip_count is not None and p.trip_count > SHOWN_ITERATIONS
        footnote = footnote or omitted
        start, end = _span(p)
        marker = "*" if omitted else ""
        rows.append((p.source_path, rtl_name, f"{p.iterations}{marker}", str(p.total_cycles), start, end))

        shown = _shown_iterations(p)
        for index, (s, e) in enumerate(shown, start=1):
            rows.append((f"  iter {index}", "", "", str(e - s), str(s), str(e)))

        records.append({
            "source_path": p.source_path,
            "rtl_name": rtl_name,
            "kind": p.kind,
            "iterations": p.iterations,
            "total_cycles": p.total_cycles,
            "start": p.activations[0][0] if p.activations else None,
            "end": p.activations[-1][1] if p.activations else None,
            "activations": [list(a) for a in p.activations],
            "shown_iterations": [list(i) for i in shown],
            "synthetic": p.synthetic,
            "truncated": p.truncated,
            "omitted_iterations": omitted,
        })

    widths = [max(len(r[i]) for r in [HEADER] + rows) for i in range(len(HEADER))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in [HEADER] + rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    if footnote:
        lines.append("")
        lines.append(FOOTNOTE)

    total = trace.total_cycles
    data = {
        "mode": trace.mode,
        "seed": trace.seed,
        "total_cycles": total,
        "ila_windows": ila_windows(total, ila_capture_cycles),
        "rows": records,
    }
    if footnote:
        data["footnote"] = FOOTNOTE
    return "\n".join(lines) + "\n", data
