"""
C-to-RTL Mapping Table
One row per hierarchy node: source path, RTL instance name and node kind
"""

import csv
import io
from dataclasses import dataclass
from typing import Dict, List

from src.hierarchy.tree import HierarchyTree, NodeKind
from src.utils.exceptions import NodeNotFoundError


@dataclass(frozen=True)
class MappingRow:
    source_path: str
    rtl_name: str
    kind: NodeKind


class MappingTable:
    """Bijective source-path <-> RTL-name table in preorder"""

    def __init__(self, entries: List[MappingRow]):
        self.entries = list(entries)
        self._by_source: Dict[str, MappingRow] = {r.source_path: r for r in self.entries}
        self._by_rtl: Dict[str, MappingRow] = {r.rtl_name: r for r in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def by_source(self, source_path: str) -> MappingRow:
        if source_path not in self._by_source:
            raise NodeNotFoundError(source_path)
        return self._by_source[source_path]

    def by_rtl(self, rtl_name: str) -> MappingRow:
        if rtl_name not in self._by_rtl:
            raise NodeNotFoundError(rtl_name)
        return self._by_rtl[rtl_name]

    def to_rows(self) -> List[Dict[str, str]]:
        return [
            {"source_path": r.source_path, "rtl_name": r.rtl_name, "kind": r.kind.value}
            for r in self.entries
        ]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["source_path", "rtl_name", "kind"])
        for r in self.entries:
            writer.writerow([r.source_path, r.rtl_name, r.kind.value])
        return buffer.getvalue()

    def to_table(self) -> str:
        """Fixed-width text table"""
        header = ("SOURCE PATH", "RTL INSTANCE", "KIND")
        rows = [(r.source_path, r.rtl_name, r.kind.value) for r in self.entries]
        widths = [max(len(row[i]) for row in [header] + rows) for i in range(3)]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                 for row in [header] + rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def build_mapping(tree: HierarchyTree) -> MappingTable:
    """Mapping table over every tree node, in preorder"""
    return MappingTable([
        MappingRow(source_path=n.source_path, rtl_name=n.rtl_name, kind=n.kind)
        for n in tree.preorder()
    ])
