"""
Gantt Export
SVG waveform of module activations with machine-readable data attributes
"""

import logging
from typing import List, Optional
from xml.sax.saxutils import escape, quoteattr

from src.report.profiled_trace import PathProfile, ProfiledTrace

logger = logging.getLogger(__name__)

LABEL_WIDTH = 240
PLOT_WIDTH = 800
LANE_HEIGHT = 20
MARGIN = 20
AXIS_HEIGHT = 30
TICKS = 5


def select_lanes(trace: ProfiledTrace, top_k: Optional[int] = None) -> List[PathProfile]:
    """Profiles drawn as lanes: all of them, or the top_k by total cycles kept in preorder"""
    lanes = list(trace.profiles)
    if top_k is None or len(lanes) <= top_k:
        return lanes
    ranked = sorted(lanes, key=lambda p: (-p.total_cycles, p.source_path))[:top_k]
    keep = {p.source_path for p in ranked}
    logger.warning(f"Gantt chart limited to the top {top_k} of {len(lanes)} modules by total cycles")
    return [p for p in lanes if p.source_path in keep]


def export_gantt(trace: ProfiledTrace, top_k: Optional[int] = None) -> str:
    """
    Render activations as an SVG Gantt chart.

    One lane per source path; every activation is a <rect> carrying
    data-path, data-start and data-end so the geometry can be checked
    without rendering. An empty trace still gets its time axis.

    Args:
        trace: Profiled trace
        top_k: Maximum lanes (largest totals kept)

    Returns:
        SVG document text
    """
    lanes = select_lanes(trace, top_k)
    span = max((end for p in lanes for _, end in p.activations), default=0)
    scale = PLOT_WIDTH / span if span else 0.0

    height = 2 * MARGIN + AXIS_HEIGHT + LANE_HEIGHT * len(lanes)
    width = 2 * MARGIN + LABEL_WIDTH + PLOT_WIDTH
    x0 = MARGIN + LABEL_WIDTH
    axis_y = MARGIN + LANE_HEIGHT * len(lanes)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'data-mode={quoteattr(trace.mode)} data-seed="{trace.seed}" data-span="{span}">',
        '<g class="axes">',
        f'<line class="axis" x1="{x0}" y1="{axis_y}" x2="{x0 + PLOT_WIDTH}" y2="{axis_y}" stroke="black"/>',
        f'<line class="axis" x1="{x0}" y1="{MARGIN}" x2="{x0}" y2="{axis_y}" stroke="black"/>',
    ]
    for i in range(TICKS + 1):
        cycle = span * i // TICKS
        x = x0 + PLOT_WIDTH * i / TICKS
        out.append(f'<text class="tick" x="{x:.1f}" y="{axis_y + 15}" font-size="10" '
                   f'text-anchor="middle">{cycle}</text>')
    out.append(f'<text x="{x0 + PLOT_WIDTH / 2:.1f}" y="{axis_y + AXIS_HEIGHT - 2}" '
               f'font-size="10" text-anchor="middle">cycle</text>')
    out.append("</g>")

    for index, profile in enumerate(lanes):
        y = MARGIN + index * LANE_HEIGHT
        path = quoteattr(profile.source_path)
        out.append(f'<g class="lane" data-path={path} data-total="{profile.total_cycles}">')
        out.append(f'<text x="{MARGIN}" y="{y + LANE_HEIGHT - 6}" font-size="11">'
                   f'{escape(profile.source_path)}</text>')
        for start, end in profile.activations:
            out.append(
                f'<rect class="activation" data-path={path} data-start="{start}" data-end="{end}" '
                f'x="{x0 + start * scale:.2f}" y="{y + 3}" width="{(end - start) * scale:.2f}" '
                f'height="{LANE_HEIGHT - 6}" fill="steelblue"/>'
            )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
