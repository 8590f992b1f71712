"""
Resource Model
Analytical LUT / FF / BRAM estimate of the profiling IP
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

from src.instrument.allocation import CounterAllocation, Storage
from src.manifest.model import ResourceBudget
from src.utils.config import Config
from src.utils.exceptions import DegenerateBaselineError

RESOURCES = ("lut", "ff", "bram")


@dataclass(frozen=True)
class CostConstants:
    """Calibration constants in resource units (not vendor-measured values)"""
    C_axi: float = 400
    C_pc: float = 80
    C_decode: float = 16
    C_L1: float = 12
    C_L2: float = 3
    C_F1: float = 20
    C_F2: float = 8
    decode_variant: str = "monolithic"
    bram_block_bits: int = 18432

    def __post_init__(self):
        for name in ("C_axi", "C_pc", "C_decode", "C_L1", "C_L2", "C_F1", "C_F2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.decode_variant not in ("monolithic", "staged"):
            raise ValueError(f"unknown decode variant '{self.decode_variant}'")

    @classmethod
    def from_config(cls, config: Config) -> "CostConstants":
        cost = config.get("cost", {}) or {}
        known = {k: v for k, v in cost.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True)
class ResourceEstimate:
    lut: int = 0
    ff: int = 0
    bram_blocks: int = 0

    def __add__(self, other: "ResourceEstimate") -> "ResourceEstimate":
        return ResourceEstimate(
            self.lut + other.lut, self.ff + other.ff, self.bram_blocks + other.bram_blocks
        )

    def as_dict(self) -> Dict[str, int]:
        return {"lut": self.lut, "ff": self.ff, "bram": self.bram_blocks}

    @classmethod
    def from_budget(cls, budget: ResourceBudget) -> "ResourceEstimate":
        return cls(budget.lut, budget.ff, budget.bram_blocks)


def decode_cost(n_probes: int, k: CostConstants) -> float:
    """Read-out multiplexer cost: one stage per address bit, or 8-way stages"""
    if n_probes <= 1:
        return 0
    if k.decode_variant == "staged":
        levels = 0
        while 8 ** levels < n_probes:
            levels += 1
        return k.C_decode * levels
    return k.C_decode * (n_probes - 1).bit_length()


def estimate_resources(
    n_probes: int,
    depths: Sequence[int],
    storages: Sequence[Storage],
    k: CostConstants,
    counter_width: int = 32
) -> ResourceEstimate:
    """
    Estimate LUT, FF and BRAM usage of the profiling IP.

    Fixed costs cover the AXI interface, the global counter and the
    read-out decoder. Register queues add a per-counter cost plus a cost
    per slot; BRAM queues keep the per-counter cost and pack their slots
    into 18 Kbit blocks.

    Args:
        n_probes: Number of performance counters
        depths: Queue depth per counter
        storages: Storage tag per counter
        k: Cost constants
        counter_width: Timestamp width in bits

    Returns:
        ResourceEstimate
    """
    fixed = k.C_axi + k.C_pc + decode_cost(n_probes, k)
    lut = ff = fixed
    bram_bits = 0
    for depth, storage in zip(depths, storages):
        lut += k.C_L1
        ff += k.C_F1
        if storage is Storage.BRAM:
            bram_bits += depth * counter_width
        else:
            lut += k.C_L2 * depth
            ff += k.C_F2 * depth
    return ResourceEstimate(
        lut=math.ceil(lut),
        ff=math.ceil(ff),
        bram_blocks=math.ceil(bram_bits / k.bram_block_bits),
    )


def estimate_allocation(
    allocation: CounterAllocation,
    k: CostConstants,
    effective: bool = True
) -> ResourceEstimate:
    """Estimate for an allocation, on effective (post-offload) or full depths"""
    depths = [allocation.effective_depth(p) if effective else p.depth for p in allocation.probes]
    return estimate_resources(
        len(allocation.probes),
        depths,
        [p.storage for p in allocation.probes],
        k,
        allocation.counter_width,
    )


def r_util_components(
    est: ResourceEstimate,
    origin: ResourceEstimate,
    budget: ResourceBudget,
    weights: Optional[Dict[str, float]] = None
) -> Dict[str, float]:
    """
    Weighted per-resource overhead terms w_i * R_i,probe / R_i,origin.

    A resource with no kernel baseline is measured against the board
    budget instead.

    Raises:
        DegenerateBaselineError: weighted resource has neither baseline nor budget
        ValueError: weights do not sum to 1
    """
    weights = weights or {name: 1.0 / 3 for name in RESOURCES}
    if not math.isclose(sum(weights.get(name, 0.0) for name in RESOURCES), 1.0, abs_tol=1e-9):
        raise ValueError(f"resource weights must sum to 1, got {weights}")

    used = est.as_dict()
    base = origin.as_dict()
    board = {"lut": budget.lut, "ff": budget.ff, "bram": budget.bram_blocks}
    components = {}
    for name in RESOURCES:
        weight = weights.get(name, 0.0)
        if weight == 0:
            components[name] = 0.0
            continue
        denominator = base[name] or board[name]
        if denominator == 0:
            raise DegenerateBaselineError(
                f"{name}: kernel usage and budget are both 0; cannot weigh overhead"
            )
        components[name] = weight * used[name] / denominator
    return components


def delta_r_util(
    est: ResourceEstimate,
    origin: ResourceEstimate,
    budget: ResourceBudget,
    weights: Optional[Dict[str, float]] = None
) -> float:
    """Weighted resource overhead relative to the original design"""
    return sum(r_util_components(est, origin, budget, weights).values())
