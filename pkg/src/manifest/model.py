"""
Design Manifest Model
Immutable description of an HLS-style kernel: functions, loops, compute and DRAM bursts
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterator, Optional, Tuple, Union


class InlineHint(Enum):
    """Per-function inlining hint"""
    AUTO = "auto"
    NEVER = "never"
    ALWAYS = "always"


class InliningPolicy(Enum):
    """Design-wide inlining option"""
    INLINE_DEFAULT = "default"
    INLINE_OFF_ALL = "off-all"
    INLINE_OFF_TOP = "off-top"


@dataclass(frozen=True)
class Call:
    callee: str


@dataclass(frozen=True)
class Loop:
    name: str
    trip_count: int
    pipelined: bool = False
    ii: Optional[int] = None
    body: Tuple["BodyNode", ...] = ()
    data_dependent: bool = False


@dataclass(frozen=True)
class Compute:
    cycles: int
    name: Optional[str] = None


@dataclass(frozen=True)
class DramAccess:
    bursts: int
    burst_bytes: int
    name: Optional[str] = None


@dataclass(frozen=True)
class Parallel:
    branches: Tuple[Tuple["BodyNode", ...], ...]
    name: Optional[str] = None


BodyNode = Union[Call, Loop, Compute, DramAccess, Parallel]

# Position of a node inside a function body: indices into nested bodies,
# with parallel branches contributing (branch, index) pairs.
SitePath = Tuple[int, ...]


@dataclass(frozen=True)
class FunctionDef:
    name: str
    body: Tuple[BodyNode, ...] = ()
    pragma_realprobe: bool = False
    inline_hint: InlineHint = InlineHint.AUTO
    estimated_cycles: Optional[int] = None


@dataclass(frozen=True)
class ResourceBudget:
    """LUT / FF / BRAM counts (also used for kernel usage)"""
    lut: int = 0
    ff: int = 0
    bram_blocks: int = 0


@dataclass(frozen=True)
class PlatformModel:
    """
    Board memory model

    fixed_latency_cycles is the co-simulation per-burst latency; the hw_*
    fields drive the dynamic on-board latency model.
    """
    name: str
    fixed_latency_cycles: int
    hw_latency_min: int
    hw_latency_mean: float
    bandwidth_gbps: float

    def bytes_per_cycle(self, clock_mhz: float) -> float:
        """Effective DRAM bytes transferable per kernel clock cycle"""
        return self.bandwidth_gbps * 1e9 / (clock_mhz * 1e6)


@dataclass(frozen=True)
class DesignManifest:
    name: str
    clock_mhz: float
    platform: PlatformModel
    budget: ResourceBudget
    functions: Dict[str, FunctionDef]
    top: str
    kernel_usage: ResourceBudget = field(default_factory=ResourceBudget)

    @property
    def t_cycle_seconds(self) -> float:
        return 1.0 / (self.clock_mhz * 1e6)

    @property
    def pragma_function(self) -> Optional[str]:
        """Name of the function carrying the profiling pragma, if any"""
        for name in sorted(self.functions):
            if self.functions[name].pragma_realprobe:
                return name
        return None

    def function(self, name: str) -> FunctionDef:
        return self.functions[name]

    def with_functions(self, functions: Dict[str, FunctionDef]) -> "DesignManifest":
        return replace(self, functions=dict(functions))

    def with_pragma(self, function_name: Optional[str]) -> "DesignManifest":
        """Copy with the pragma moved to `function_name` (None clears it)"""
        functions = {
            name: replace(fdef, pragma_realprobe=(name == function_name))
            for name, fdef in self.functions.items()
        }
        return self.with_functions(functions)


def iter_sites(body: Tuple[BodyNode, ...], prefix: SitePath = ()) -> Iterator[Tuple[SitePath, BodyNode]]:
    """
    Walk a body in preorder, yielding (site path, node).

    Loop bodies extend the loop's site path with the child index;
    parallel branches extend it with (branch index, child index).
    """
    for index, node in enumerate(body):
        site = prefix + (index,)
        yield site, node
        if isinstance(node, Loop):
            yield from iter_sites(node.body, site)
        elif isinstance(node, Parallel):
            for branch_index, branch in enumerate(node.branches):
                yield from iter_sites(branch, site + (branch_index,))


def iter_callees(body: Tuple[BodyNode, ...]) -> Iterator[str]:
    """Callee names in preorder, one per call site"""
    for _, node in iter_sites(body):
        if isinstance(node, Call):
            yield node.callee
