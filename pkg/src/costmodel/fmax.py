"""
Maximum frequency model (placeholder for post-implementation timing)
"""

from src.costmodel.resources import ResourceEstimate
from src.manifest.model import ResourceBudget

# Floor keeps the model positive on absurd overcommitment.
_MIN_FRACTION = 0.01


def utilisation(usage: ResourceEstimate, budget: ResourceBudget) -> float:
    """Largest usage/budget fraction over resources with a budget"""
    pairs = [
        (usage.lut, budget.lut),
        (usage.ff, budget.ff),
        (usage.bram_blocks, budget.bram_blocks),
    ]
    fractions = [used / available for used, available in pairs if available > 0]
    return max(fractions) if fractions else 0.0


def fmax_model(
    total_usage: ResourceEstimate,
    budget: ResourceBudget,
    f_target: float,
    beta: float = 0.5,
    u_thresh: float = 0.7
) -> float:
    """
    F_max = F_target * (1 - beta * max(0, U - u_thresh)) in MHz.

    U is the highest utilisation fraction across LUT, FF and BRAM.
    """
    u = utilisation(total_usage, budget)
    fraction = 1.0 - beta * max(0.0, u - u_thresh)
    return f_target * max(_MIN_FRACTION, fraction)
