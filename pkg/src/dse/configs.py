"""
Probe Configurations
Storage strategy x dump ratio grid explored by the design-space search
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, List, Optional, Sequence

from src.instrument.allocation import CounterAllocation, Storage

DEFAULT_RATIOS = (0.0, 0.25, 0.5, 0.75)


class StorageMode(Enum):
    ALL_REGISTER = "reg"
    ALL_BRAM = "bram"
    HYBRID = "hybrid"


_MODE_ORDER = {StorageMode.ALL_REGISTER: 0, StorageMode.ALL_BRAM: 1, StorageMode.HYBRID: 2}
_MODE_LETTER = {StorageMode.ALL_REGISTER: "R", StorageMode.ALL_BRAM: "B", StorageMode.HYBRID: "H"}


@dataclass(frozen=True)
class ProbeConfig:
    """
    One point of the exploration grid

    Hybrid storage keeps queues shallower than `threshold` in registers
    and moves the rest to BRAM.
    """
    storage: StorageMode
    dump_ratio: float = 0.0
    threshold: Optional[int] = None
    decode_variant: str = "monolithic"
    counter_width: Optional[int] = None

    def __post_init__(self):
        if self.storage is StorageMode.HYBRID and not self.threshold:
            raise ValueError("hybrid storage needs a depth threshold")
        if not 0 <= self.dump_ratio < 1:
            raise ValueError(f"dump ratio must be in [0, 1), got {self.dump_ratio}")

    @property
    def id(self) -> str:
        letter = _MODE_LETTER[self.storage]
        if self.storage is StorageMode.HYBRID:
            letter += str(self.threshold)
        parts = [letter, str(round(self.dump_ratio * 100))]
        if self.decode_variant != "monolithic":
            parts.append(self.decode_variant)
        if self.counter_width is not None:
            parts.append(f"w{self.counter_width}")
        return "-".join(parts)

    @property
    def sort_key(self):
        return (
            _MODE_ORDER[self.storage],
            self.threshold or 0,
            self.dump_ratio,
            self.decode_variant != "monolithic",
            self.counter_width or 0,
        )

    def storage_for(self, depth: int) -> Storage:
        if self.storage is StorageMode.ALL_REGISTER:
            return Storage.REGISTER
        if self.storage is StorageMode.ALL_BRAM:
            return Storage.BRAM
        return Storage.BRAM if depth >= self.threshold else Storage.REGISTER

    def apply_storage(self, allocation: CounterAllocation) -> CounterAllocation:
        """Allocation with every probe tagged per this configuration"""
        return allocation.with_probes([
            replace(p, storage=self.storage_for(p.depth)) for p in allocation.probes
        ])


def parse_storage(name: str, threshold: Optional[int] = None) -> ProbeConfig:
    """Config for a command-line storage name (reg, bram, hybrid)"""
    mode = StorageMode(name)
    if mode is StorageMode.HYBRID and threshold is None:
        threshold = 8
    return ProbeConfig(storage=mode, threshold=threshold if mode is StorageMode.HYBRID else None)


def enumerate_configs(
    storages: Iterable[str] = ("reg", "bram"),
    ratios: Sequence[float] = DEFAULT_RATIOS,
    hybrid_thresholds: Iterable[int] = (),
    decode_variants: Iterable[str] = ("monolithic",),
    counter_widths: Iterable[Optional[int]] = (None,),
) -> List[ProbeConfig]:
    """
    Exploration grid in canonical order (storage, ratio, decode, width).

    Args:
        storages: Uniform storage strategies ("reg", "bram")
        ratios: Dump ratios
        hybrid_thresholds: Depth thresholds of extra hybrid strategies
        decode_variants: Decoder variants
        counter_widths: Counter widths (None = chosen from estimates)

    Returns:
        Sorted list of ProbeConfig
    """
    modes = [(StorageMode(s), None) for s in storages if s != "hybrid"]
    modes += [(StorageMode.HYBRID, t) for t in hybrid_thresholds]
    configs = {
        ProbeConfig(mode, ratio, threshold, decode, width)
        for mode, threshold in modes
        for ratio in ratios
        for decode in decode_variants
        for width in counter_widths
    }
    return sorted(configs, key=lambda c: c.sort_key)
