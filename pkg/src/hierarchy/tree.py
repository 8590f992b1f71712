"""
Module Hierarchy Tree
RTL-style instance tree elaborated from a design manifest
"""

import difflib
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple

from src.manifest.model import (
    BodyNode,
    Call,
    DesignManifest,
    Loop,
    Parallel,
    SitePath,
    iter_sites,
)
from src.manifest.inlining import callees_first
from src.manifest.rollup import Rollup, static_latency_rollup
from src.utils.exceptions import NodeNotFoundError, NoPragmaError, ValidationError

logger = logging.getLogger(__name__)


class NodeKind(Enum):
    FUNCTION_INSTANCE = "function_instance"
    LOOP_INSTANCE = "loop_instance"


@dataclass
class HierNode:
    """
    One module instance

    `function` is the manifest function the node belongs to (for loops, the
    enclosing function), `definition` its roll-up key and `site` its position
    inside the enclosing function body (None for the root).
    """
    id: int
    kind: NodeKind
    rtl_name: str
    source_path: str
    parent: Optional[int]
    children: List[int] = field(default_factory=list)
    est_cycles: Optional[int] = None
    function: str = ""
    definition: str = ""
    depth: int = 0
    site: Optional[SitePath] = None
    trip_count: Optional[int] = None
    pipelined: bool = False
    ii: Optional[int] = None
    data_dependent: bool = False

    @property
    def is_loop(self) -> bool:
        return self.kind is NodeKind.LOOP_INSTANCE

    @property
    def label(self) -> str:
        """Last source path segment"""
        return self.source_path.rsplit("/", 1)[-1]


class HierarchyTree:
    """
    Instance tree rooted at node 0, ids in preorder

    `anchor` pins the root to one instance of `root_function` in the full
    design as the call-site chain from `top`; None means every invocation
    of `root_function` activates the root. `root_activations` is the number
    of such invocations per run (None when data-dependent).
    """

    def __init__(
        self,
        nodes: List[HierNode],
        sites: Dict[Tuple[int, SitePath], int],
        root_function: str,
        anchor: Optional[Tuple[SitePath, ...]],
        root_activations: Optional[int] = 1,
    ):
        self.nodes = nodes
        self.sites = sites
        self.root_function = root_function
        self.anchor = anchor
        self.root_activations = root_activations
        self.by_path = {n.source_path: n.id for n in nodes}
        self.by_rtl = {n.rtl_name: n.id for n in nodes}
        if len(self.by_path) != len(nodes):
            raise ValidationError("source paths collide in the module hierarchy")
        if len(self.by_rtl) != len(nodes):
            raise ValidationError("RTL instance names collide in the module hierarchy")

    @property
    def root(self) -> int:
        return 0

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: int) -> HierNode:
        return self.nodes[node_id]

    def preorder(self) -> Iterator[HierNode]:
        return iter(self.nodes)

    def ancestors(self, node_id: int) -> List[int]:
        """Ancestor ids from parent up to the root"""
        chain = []
        parent = self.nodes[node_id].parent
        while parent is not None:
            chain.append(parent)
            parent = self.nodes[parent].parent
        return chain

    def activations(self, node_id: int) -> Optional[int]:
        """Expected activations per run: root invocations times enclosing loop trips"""
        count = self.root_activations
        for ancestor in self.ancestors(node_id):
            node = self.nodes[ancestor]
            if not node.is_loop:
                continue
            if node.data_dependent or count is None:
                return None
            count *= node.trip_count
        return count

    def locate(self, source_path: str) -> int:
        """
        Exact-match lookup of a source path ("" = root).

        Raises:
            NodeNotFoundError: with the closest existing path as suggestion
        """
        if source_path == "":
            return self.root
        if source_path in self.by_path:
            return self.by_path[source_path]

        segments = source_path.split("/")
        prefix_id = None
        for cut in range(len(segments) - 1, 0, -1):
            prefix = "/".join(segments[:cut])
            if prefix in self.by_path:
                prefix_id = self.by_path[prefix]
                break
        if prefix_id is None:
            candidates = [self.nodes[self.root].source_path]
        else:
            candidates = [self.nodes[c].source_path for c in self.nodes[prefix_id].children]
            candidates = candidates or [self.nodes[prefix_id].source_path]
        matches = difflib.get_close_matches(source_path, candidates, n=1, cutoff=0)
        raise NodeNotFoundError(source_path, matches[0] if matches else None)

    def subtree(self, source_path: str) -> "HierarchyTree":
        """
        Re-rooted copy of the subtree at a function instance.

        Source paths restart at the instance's own segment, ids are
        renumbered in preorder and RTL names are kept.
        """
        start = self.locate(source_path)
        head = self.nodes[start]
        if head.is_loop:
            raise ValidationError(f"'{source_path}' is a loop; profiling roots must be functions")

        keep: List[int] = []
        stack = [start]
        while stack:
            node_id = stack.pop()
            keep.append(node_id)
            stack.extend(reversed(self.nodes[node_id].children))
        renumber = {old: new for new, old in enumerate(keep)}

        strip = len(head.source_path) - len(head.label)
        nodes = []
        for old in keep:
            n = self.nodes[old]
            nodes.append(replace(
                n,
                id=renumber[old],
                source_path=n.source_path[strip:],
                parent=None if old == start else renumber[n.parent],
                children=[renumber[c] for c in n.children],
                depth=n.depth - head.depth,
                site=None if old == start else n.site,
            ))

        fn_ids = {old for old in keep if not self.nodes[old].is_loop}
        sites = {
            (renumber[fn], site): renumber[target]
            for (fn, site), target in self.sites.items()
            if fn in fn_ids and target in renumber and target != start
        }

        anchor_sites = [
            self.nodes[a].site
            for a in [start] + self.ancestors(start)
            if not self.nodes[a].is_loop and self.nodes[a].parent is not None
        ]
        if start == self.root:
            anchor = self.anchor
        elif self.anchor is None:
            # a root_function-wide tree cannot pin one instance below its root
            raise ValidationError("subtree() needs a tree anchored at a single instance")
        else:
            anchor = self.anchor + tuple(reversed(anchor_sites))

        return HierarchyTree(
            nodes=nodes,
            sites=sites,
            root_function=head.function,
            anchor=anchor,
            root_activations=self.activations(start),
        )

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready form for the artifact store"""
        return {
            "root_function": self.root_function,
            "anchor": None if self.anchor is None else [list(s) for s in self.anchor],
            "root_activations": self.root_activations,
            "nodes": [
                {
                    "id": n.id,
                    "kind": n.kind.value,
                    "rtl_name": n.rtl_name,
                    "source_path": n.source_path,
                    "parent": n.parent,
                    "children": list(n.children),
                    "est_cycles": n.est_cycles,
                    "function": n.function,
                    "definition": n.definition,
                    "depth": n.depth,
                    "site": None if n.site is None else list(n.site),
                    "trip_count": n.trip_count,
                    "pipelined": n.pipelined,
                    "ii": n.ii,
                    "data_dependent": n.data_dependent,
                }
                for n in self.nodes
            ],
            "sites": [[fn, list(site), target] for (fn, site), target in sorted(self.sites.items())],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "HierarchyTree":
        nodes = [
            HierNode(
                id=d["id"],
                kind=NodeKind(d["kind"]),
                rtl_name=d["rtl_name"],
                source_path=d["source_path"],
                parent=d["parent"],
                children=list(d["children"]),
                est_cycles=d["est_cycles"],
                function=d["function"],
                definition=d["definition"],
                depth=d["depth"],
                site=None if d["site"] is None else tuple(d["site"]),
                trip_count=d["trip_count"],
                pipelined=d["pipelined"],
                ii=d["ii"],
                data_dependent=d["data_dependent"],
            )
            for d in data["nodes"]
        ]
        anchor = data["anchor"]
        return cls(
            nodes=nodes,
            sites={(fn, tuple(site)): target for fn, site, target in data["sites"]},
            root_function=data["root_function"],
            anchor=None if anchor is None else tuple(tuple(s) for s in anchor),
            root_activations=data["root_activations"],
        )


def _mangle(source_path: str) -> str:
    return source_path.replace("/", "_")


def _call_labels(body: Tuple[BodyNode, ...]) -> Dict[SitePath, str]:
    """
    Instance label per call site: callee name, or callee_k when called
    repeatedly. Labels never reuse a loop name of the same body; k skips
    taken names.
    """
    calls = [(site, node.callee) for site, node in iter_sites(body) if isinstance(node, Call)]
    taken = {node.name for _, node in iter_sites(body) if isinstance(node, Loop)}
    totals: Dict[str, int] = {}
    for _, callee in calls:
        totals[callee] = totals.get(callee, 0) + 1
    seen: Dict[str, int] = {}
    labels = {}
    for site, callee in calls:
        if totals[callee] == 1 and callee not in taken:
            label = callee
        else:
            k = seen.get(callee, 0) + 1
            while f"{callee}_{k}" in taken:
                k += 1
            seen[callee] = k
            label = f"{callee}_{k}"
        taken.add(label)
        labels[site] = label
    return labels


def invocation_counts(m: DesignManifest) -> Dict[str, Optional[int]]:
    """How many times each function runs per execution of `top` (None = data-dependent)"""
    counts: Dict[str, Optional[int]] = {name: 0 for name in m.functions}
    counts[m.top] = 1
    for caller in reversed(callees_first(m)):
        caller_count = counts[caller]

        def walk(body: Tuple[BodyNode, ...], factor: Optional[int]) -> None:
            for node in body:
                if isinstance(node, Call):
                    current = counts[node.callee]
                    if factor is None or caller_count is None or current is None:
                        counts[node.callee] = None
                    else:
                        counts[node.callee] = current + caller_count * factor
                elif isinstance(node, Loop):
                    inner = None if factor is None or node.data_dependent else factor * node.trip_count
                    walk(node.body, inner)
                elif isinstance(node, Parallel):
                    for branch in node.branches:
                        walk(branch, factor)

        walk(m.functions[caller].body, 1)
    return counts


class _Elaborator:
    def __init__(self, m: DesignManifest, rollup: Rollup):
        self.m = m
        self.rollup = rollup
        self.nodes: List[HierNode] = []
        self.sites: Dict[Tuple[int, SitePath], int] = {}
        self.loop_names: Dict[str, int] = {}

    def _add(self, **fields: Any) -> HierNode:
        node = HierNode(id=len(self.nodes), **fields)
        self.nodes.append(node)
        if node.parent is not None:
            self.nodes[node.parent].children.append(node.id)
        return node

    def function_instance(self, function: str, label: str, parent: Optional[HierNode],
                          site: Optional[SitePath]) -> HierNode:
        path = label if parent is None else f"{parent.source_path}/{label}"
        node = self._add(
            kind=NodeKind.FUNCTION_INSTANCE,
            rtl_name=f"grp_{_mangle(path)}_fu",
            source_path=path,
            parent=None if parent is None else parent.id,
            est_cycles=self.rollup.get(function),
            function=function,
            definition=function,
            depth=0 if parent is None else parent.depth + 1,
            site=site,
        )
        body = self.m.functions[function].body
        self._walk(body, (), node, node, label, [], _call_labels(body))
        return node

    def _walk(self, body: Tuple[BodyNode, ...], prefix: SitePath, parent: HierNode,
              instance: HierNode, segment: str, chain: List[str],
              labels: Dict[SitePath, str]) -> None:
        for index, item in enumerate(body):
            site = prefix + (index,)
            if isinstance(item, Call):
                child = self.function_instance(item.callee, labels[site], parent, site)
                self.sites[(instance.id, site)] = child.id
            elif isinstance(item, Loop):
                loop_chain = chain + [item.name]
                definition = "/".join([instance.function] + loop_chain)
                path = f"{parent.source_path}/{item.name}"
                rtl_name = f"{segment}_{'_'.join(loop_chain)}"
                if rtl_name in self.loop_names:
                    rtl_name = _mangle(path)
                self.loop_names[rtl_name] = len(self.nodes)
                loop = self._add(
                    kind=NodeKind.LOOP_INSTANCE,
                    rtl_name=rtl_name,
                    source_path=path,
                    parent=parent.id,
                    est_cycles=self.rollup.get(definition),
                    function=instance.function,
                    definition=definition,
                    depth=parent.depth + 1,
                    site=site,
                    trip_count=item.trip_count,
                    pipelined=item.pipelined,
                    ii=item.ii,
                    data_dependent=item.data_dependent,
                )
                self.sites[(instance.id, site)] = loop.id
                self._walk(item.body, site, loop, instance, segment, loop_chain, labels)
            elif isinstance(item, Parallel):
                for branch_index, branch in enumerate(item.branches):
                    self._walk(branch, site + (branch_index,), parent, instance, segment,
                               chain, labels)


def build_hierarchy(
    m: DesignManifest,
    root_function: Optional[str] = None,
    rollup: Optional[Rollup] = None
) -> HierarchyTree:
    """
    Elaborate the module instance tree below a function.

    One function instance per call site (repeated callees get _1, _2
    suffixes), one loop instance per loop; calls inside a loop hang below
    the loop node.

    Args:
        m: Validated (post-inlining) manifest
        root_function: Tree root; defaults to the pragma function
        rollup: Precomputed static estimates (computed when omitted)

    Returns:
        HierarchyTree with est_cycles filled from the roll-up

    Raises:
        NoPragmaError: no root given and no function carries the pragma
    """
    if root_function is None:
        root_function = m.pragma_function
        if root_function is None:
            raise NoPragmaError(f"design '{m.name}' has no function marked for profiling")
    if root_function not in m.functions:
        raise ValidationError(f"unknown function '{root_function}'")

    elaborator = _Elaborator(m, rollup if rollup is not None else static_latency_rollup(m))
    elaborator.function_instance(root_function, root_function, None, None)

    if root_function == m.top:
        anchor: Optional[Tuple[SitePath, ...]] = ()
        activations: Optional[int] = 1
    else:
        anchor = None
        activations = invocation_counts(m)[root_function]

    tree = HierarchyTree(elaborator.nodes, elaborator.sites, root_function, anchor, activations)
    logger.debug(f"Elaborated {len(tree)} instances under '{root_function}'")
    return tree
