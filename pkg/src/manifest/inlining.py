"""
Inlining Policies
Tree rewrite that splices inlined functions into their callers
"""

import logging
from dataclasses import replace
from typing import Dict, List, Set, Tuple

from src.manifest.model import (
    BodyNode,
    Call,
    Compute,
    DesignManifest,
    DramAccess,
    FunctionDef,
    InlineHint,
    InliningPolicy,
    Loop,
    Parallel,
    iter_callees,
)
from src.manifest.parser import validate_manifest
from src.utils.exceptions import ValidationError

logger = logging.getLogger(__name__)

_KIND_LABEL = {Compute: "c", DramAccess: "d", Parallel: "p"}


def reachable_functions(m: DesignManifest, root: str) -> Set[str]:
    """Names of all functions reachable from `root` through calls (root included)"""
    seen: Set[str] = set()
    stack = [root]
    while stack:
        name = stack.pop()
        if name in seen or name not in m.functions:
            continue
        seen.add(name)
        stack.extend(iter_callees(m.functions[name].body))
    return seen


def callees_first(m: DesignManifest) -> List[str]:
    """Function names ordered so that every callee precedes its callers"""
    order: List[str] = []
    done: Set[str] = set()

    def visit(name: str) -> None:
        if name in done:
            return
        done.add(name)
        for callee in sorted(set(iter_callees(m.functions[name].body))):
            visit(callee)
        order.append(name)

    for name in sorted(m.functions):
        visit(name)
    return order


def _rename(body: Tuple[BodyNode, ...], prefix: str, suffix: str) -> Tuple[BodyNode, ...]:
    """Rename every labelled node of a spliced body to `<prefix>_<label><suffix>`"""
    counters: Dict[str, int] = {}

    def label(node: BodyNode) -> str:
        if node.name is not None:
            return node.name
        kind = _KIND_LABEL[type(node)]
        index = counters.get(kind, 0)
        counters[kind] = index + 1
        return f"{kind}{index}"

    def walk(nodes: Tuple[BodyNode, ...]) -> Tuple[BodyNode, ...]:
        out = []
        for node in nodes:
            if isinstance(node, Call):
                out.append(node)
                continue
            new_name = f"{prefix}_{label(node)}{suffix}"
            if isinstance(node, Loop):
                out.append(replace(node, name=new_name, body=walk(node.body)))
            elif isinstance(node, Parallel):
                out.append(replace(node, name=new_name,
                                   branches=tuple(walk(b) for b in node.branches)))
            else:
                out.append(replace(node, name=new_name))
        return tuple(out)

    return walk(body)


class _Splicer:
    """Rewrites function bodies bottom-up for one policy application"""

    def __init__(self, m: DesignManifest, policy: InliningPolicy):
        self.m = m
        self.policy = policy
        self.pragma = m.pragma_function
        self.protected = (
            reachable_functions(m, self.pragma)
            if policy is InliningPolicy.INLINE_OFF_TOP and self.pragma
            else set()
        )
        self.bodies: Dict[str, Tuple[BodyNode, ...]] = {}
        self.inlinable: Set[str] = set()
        self.spliced: Set[str] = set()

    def _is_inlinable(self, fdef: FunctionDef, body: Tuple[BodyNode, ...]) -> bool:
        if fdef.name in (self.m.top, self.pragma):
            return False
        if fdef.inline_hint is InlineHint.ALWAYS:
            return True
        if fdef.inline_hint is InlineHint.NEVER or fdef.estimated_cycles is not None:
            return False
        return len(body) == 1 and isinstance(body[0], Compute)

    def _rewrite(self, caller: str, body: Tuple[BodyNode, ...],
                 splice_counts: Dict[str, int]) -> Tuple[BodyNode, ...]:
        out: List[BodyNode] = []
        for node in body:
            if isinstance(node, Call):
                if node.callee in self.inlinable and caller not in self.protected:
                    count = splice_counts.get(node.callee, 0) + 1
                    splice_counts[node.callee] = count
                    suffix = f"_{count}" if count > 1 else ""
                    out.extend(_rename(self.bodies[node.callee], node.callee, suffix))
                    self.spliced.add(node.callee)
                    logger.debug(f"Inlined {node.callee} into {caller}")
                else:
                    out.append(node)
            elif isinstance(node, Loop):
                out.append(replace(node, body=self._rewrite(caller, node.body, splice_counts)))
            elif isinstance(node, Parallel):
                out.append(replace(node, branches=tuple(
                    self._rewrite(caller, b, splice_counts) for b in node.branches
                )))
            else:
                out.append(node)
        return tuple(out)

    def run(self) -> Dict[str, FunctionDef]:
        for name in callees_first(self.m):
            fdef = self.m.functions[name]
            body = self._rewrite(name, fdef.body, {})
            self.bodies[name] = body
            if self._is_inlinable(fdef, body):
                self.inlinable.add(name)

        functions = {}
        for name, fdef in self.m.functions.items():
            hint = InlineHint.AUTO if name in self.protected else fdef.inline_hint
            functions[name] = replace(fdef, body=self.bodies[name], inline_hint=hint)

        # Drop functions that no longer have any call site
        removed = True
        while removed:
            removed = False
            called = {c for f in functions.values() for c in iter_callees(f.body)}
            for name in sorted(self.spliced):
                if name in functions and name not in called:
                    del functions[name]
                    removed = True
        return functions


def apply_inlining(m: DesignManifest, policy: InliningPolicy) -> DesignManifest:
    """
    Apply an inlining policy as a pure tree rewrite.

    InlineOffAll keeps every function and resets inline hints to auto.
    InlineDefault splices functions hinted `always`, and auto-hinted
    functions whose body reduces to a single Compute, into each caller.
    InlineOffTop behaves like InlineDefault except that no call site inside
    the subtree reachable from the pragma function is inlined.

    Args:
        m: Validated manifest
        policy: Inlining policy

    Returns:
        Rewritten manifest (idempotent for every policy)

    Raises:
        ValidationError: the pragma function is hinted `always`, or renamed
            nodes collide with existing names
    """
    if policy is InliningPolicy.INLINE_OFF_ALL:
        return m.with_functions({
            name: replace(fdef, inline_hint=InlineHint.AUTO)
            for name, fdef in m.functions.items()
        })

    pragma = m.pragma_function
    if pragma is not None and m.functions[pragma].inline_hint is InlineHint.ALWAYS:
        raise ValidationError(
            f"profiling target '{pragma}' is hinted inline=always and would vanish under "
            f"policy '{policy.value}'"
        )

    splicer = _Splicer(m, policy)
    result = m.with_functions(splicer.run())
    if splicer.spliced:
        logger.info(f"Inlined {len(splicer.spliced)} function(s): {sorted(splicer.spliced)}")
    validate_manifest(result)
    return result
