"""
Trace Event Export
Chrome trace-event JSON ("X" complete events) for Perfetto / chrome://tracing
"""

from typing import Any, Dict, List, Optional

from src.report.profiled_trace import ProfiledTrace
from src.report.gantt import select_lanes


def to_trace_events(
    trace: ProfiledTrace,
    clock_mhz: float,
    top_k: Optional[int] = None,
    pid: int = 1
) -> Dict[str, Any]:
    """
    Activations as complete events.

    Timestamps are in microseconds (cycle / clock_mhz); each source path
    gets its own thread id in preorder so viewers keep the hierarchy order.
    """
    events: List[Dict[str, Any]] = []
    for tid, profile in enumerate(select_lanes(trace, top_k), start=1):
        events.append({
            "name": "thread_name",
            "ph": "M",
            "pid": pid,
            "tid": tid,
            "args": {"name": profile.source_path},
        })
        for index, (start, end) in enumerate(profile.activations):
            events.append({
                "name": profile.source_path,
                "cat": profile.kind,
                "ph": "X",
                "ts": start / clock_mhz,
                "dur": (end - start) / clock_mhz,
                "pid": pid,
                "tid": tid,
                "args": {
                    "rtl_name": profile.rtl_name,
                    "activation": index,
                    "start_cycle": start,
                    "end_cycle": end,
                },
            })
    return {
        "traceEvents": events,
        "displayTimeUnit": "ns",
        "otherData": {"mode": trace.mode, "seed": trace.seed, "clock_mhz": clock_mhz},
    }
