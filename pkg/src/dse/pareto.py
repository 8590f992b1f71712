"""
Pareto Analysis
Non-dominated configurations and the balanced recommendation
"""

from typing import TYPE_CHECKING, List, Optional, Sequence

if TYPE_CHECKING:
    from src.dse.explorer import DsePoint


def dominates(q: "DsePoint", p: "DsePoint") -> bool:
    """q is at least as good as p everywhere and strictly better somewhere"""
    no_worse = q.r_util <= p.r_util and q.b_dram <= p.b_dram and q.f_max >= p.f_max
    better = q.r_util < p.r_util or q.b_dram < p.b_dram or q.f_max > p.f_max
    return no_worse and better


def pareto_frontier(points: Sequence["DsePoint"]) -> List["DsePoint"]:
    """
    Non-dominated points over (r_util min, b_dram min, f_max max).

    Returns:
        Frontier ordered by (r_util, b_dram, -f_max, config id)
    """
    frontier = [p for p in points if not any(dominates(q, p) for q in points if q is not p)]
    return sorted(frontier, key=lambda p: (p.r_util, p.b_dram, -p.f_max, p.config_id))


def select_balanced(frontier: Sequence["DsePoint"]) -> Optional["DsePoint"]:
    """
    Best compromise: smallest equal-weight sum of min-max normalised
    r_util, b_dram and latency overhead.
    """
    if not frontier:
        return None

    def normalised(values: List[float]) -> List[float]:
        low, high = min(values), max(values)
        if high == low:
            return [0.0] * len(values)
        return [(v - low) / (high - low) for v in values]

    columns = [
        normalised([p.r_util for p in frontier]),
        normalised([p.b_dram for p in frontier]),
        normalised([p.latency_overhead for p in frontier]),
    ]
    scores = [sum(col[i] for col in columns) / 3 for i in range(len(frontier))]
    best = min(range(len(frontier)), key=lambda i: (scores[i], frontier[i].config_id))
    return frontier[best]
