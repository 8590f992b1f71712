"""
Random Design Generator
Seeded manifests for corpus testing of the profiler against the oracle
"""

import logging
from typing import Dict, List, Tuple

import numpy as np

from src.manifest.model import (
    BodyNode,
    Call,
    Compute,
    DesignManifest,
    DramAccess,
    FunctionDef,
    Loop,
    Parallel,
    PlatformModel,
    ResourceBudget,
)
from src.manifest.parser import PLATFORM_PRESETS, validate_manifest

logger = logging.getLogger(__name__)


class _Builder:
    def __init__(
        self,
        rng: np.random.Generator,
        max_depth: int,
        max_modules: int,
        max_loops_on_path: int,
        max_trip: int,
        min_compute: int,
    ):
        self.rng = rng
        self.max_depth = max_depth
        self.max_modules = max_modules
        self.max_loops_on_path = max_loops_on_path
        self.max_trip = max_trip
        self.min_compute = min_compute
        self.functions: Dict[str, FunctionDef] = {}
        self.modules = 1  # the pragma function itself

    def _compute(self) -> Compute:
        return Compute(cycles=int(self.rng.integers(self.min_compute, self.min_compute * 5)))

    def _dram(self) -> DramAccess:
        return DramAccess(
            bursts=int(self.rng.integers(1, 5)),
            burst_bytes=int(self.rng.choice([16, 32, 64])),
        )

    def _leaf(self) -> BodyNode:
        return self._dram() if self.rng.random() < 0.3 else self._compute()

    def _pipelined_body(self) -> Tuple[BodyNode, ...]:
        nodes: List[BodyNode] = [self._leaf() for _ in range(int(self.rng.integers(1, 3)))]
        if self.rng.random() < 0.2:
            nodes.append(Parallel(branches=((self._compute(),), (self._leaf(),))))
        return tuple(nodes)

    def body(self, depth: int, loops_on_path: int, nest: int = 0) -> Tuple[BodyNode, ...]:
        """Random body for a node at hierarchy `depth` (`nest` = enclosing parallel blocks)"""
        nodes: List[BodyNode] = []
        for _ in range(int(self.rng.integers(1, 4))):
            room = self.modules < self.max_modules - 1 and depth < self.max_depth - 1
            roll = self.rng.random()
            if room and roll < 0.3:
                nodes.extend(self._call(depth, loops_on_path))
            elif room and roll < 0.5 and loops_on_path < self.max_loops_on_path:
                nodes.append(self._loop(depth, loops_on_path))
            elif 0.5 <= roll < 0.6 and nest < 2:
                nodes.append(Parallel(branches=tuple(
                    self.body(depth, loops_on_path, nest + 1)
                    for _ in range(int(self.rng.integers(2, 4)))
                )))
            else:
                nodes.append(self._leaf())
        return tuple(nodes)

    def _call(self, depth: int, loops_on_path: int) -> List[BodyNode]:
        name = f"fn{len(self.functions)}"
        self.functions[name] = FunctionDef(name=name)  # reserve the name
        self.modules += 1
        self.functions[name] = FunctionDef(name=name, body=self.body(depth + 1, loops_on_path))
        # occasionally a second call site of the same function, if its instances fit
        if self.modules < self.max_modules - 1 and self.rng.random() < 0.15:
            extra = self._instance_count(name)
            if self.modules + extra <= self.max_modules:
                self.modules += extra
                return [Call(name), Call(name)]
        return [Call(name)]

    def _instance_count(self, name: str) -> int:
        count = 1
        stack = list(self.functions[name].body)
        while stack:
            node = stack.pop()
            if isinstance(node, Call):
                count += self._instance_count(node.callee)
            elif isinstance(node, Loop):
                count += 1
                stack.extend(node.body)
            elif isinstance(node, Parallel):
                for branch in node.branches:
                    stack.extend(branch)
        return count

    def _loop(self, depth: int, loops_on_path: int) -> Loop:
        self.modules += 1
        trip = int(self.rng.integers(0, self.max_trip + 1)) if self.rng.random() < 0.1 \
            else int(self.rng.integers(1, self.max_trip + 1))
        name = f"L{self.modules}"
        if self.rng.random() < 0.4:
            return Loop(name=name, trip_count=trip, pipelined=True,
                        ii=int(self.rng.integers(1, 4)), body=self._pipelined_body())
        return Loop(name=name, trip_count=trip, body=self.body(depth + 1, loops_on_path + 1))


def generate_manifest(
    seed: int,
    max_depth: int = 5,
    max_modules: int = 64,
    max_loops_on_path: int = 2,
    max_trip: int = 4,
    min_compute: int = 20,
    platform: str = "pynq-z2",
) -> DesignManifest:
    """
    Generate a random valid manifest.

    The module count under the pragma function never exceeds max_modules.
    The default trip counts keep queue demand low enough that profiled runs
    of generated designs do not overflow; larger max_trip values exercise
    truncation and dumps.

    Args:
        seed: Random seed
        max_depth: Maximum hierarchy depth below the pragma function
        max_modules: Maximum number of hierarchy nodes under the pragma function
        max_loops_on_path: Maximum loops enclosing any node
        max_trip: Maximum loop trip count
        min_compute: Minimum cycles of a compute node
        platform: Platform preset name

    Returns:
        Validated DesignManifest with top "main" and pragma on "kernel"
    """
    rng = np.random.default_rng(seed)
    builder = _Builder(rng, max_depth, max_modules, max_loops_on_path, max_trip, min_compute)
    kernel_body = builder.body(0, 0)

    functions = dict(builder.functions)
    functions["kernel"] = FunctionDef(name="kernel", body=kernel_body, pragma_realprobe=True)
    functions["main"] = FunctionDef(name="main", body=(Call("kernel"),))

    manifest = DesignManifest(
        name=f"random_{seed}",
        clock_mhz=100.0,
        platform=PlatformModel(name=platform, **PLATFORM_PRESETS[platform]),
        budget=ResourceBudget(lut=53200, ff=106400, bram_blocks=280),
        functions=functions,
        top="main",
        kernel_usage=ResourceBudget(lut=8000, ff=9000, bram_blocks=12),
    )
    validate_manifest(manifest)
    logger.debug(f"Generated {manifest.name}: {len(functions)} functions, ~{builder.modules} modules")
    return manifest
