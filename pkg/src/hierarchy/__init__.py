"""Module hierarchy elaboration and C-to-RTL mapping"""

from .tree import HierarchyTree, HierNode, NodeKind, build_hierarchy
from .mapping import MappingRow, MappingTable, build_mapping

__all__ = [
    'HierarchyTree',
    'HierNode',
    'NodeKind',
    'build_hierarchy',
    'MappingRow',
    'MappingTable',
    'build_mapping',
]
