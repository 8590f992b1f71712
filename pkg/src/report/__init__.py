"""Source-level tables, stage comparisons and timeline exports"""

from .profiled_trace import PathProfile, ProfiledTrace
from .table import FOOTNOTE, ila_windows, render_table
from .compare import BottleneckRanking, compare, csynth_by_source_path
from .gantt import export_gantt, select_lanes
from .trace_events import to_trace_events

__all__ = [
    'PathProfile',
    'ProfiledTrace',
    'FOOTNOTE',
    'ila_windows',
    'render_table',
    'BottleneckRanking',
    'compare',
    'csynth_by_source_path',
    'export_gantt',
    'select_lanes',
    'to_trace_events',
]
