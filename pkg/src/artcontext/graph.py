"""Typed knowledge graph: data model, graph algorithms, persistence.

The graph stores typed nodes (artists, themes, cultural context, styles,
movements) and free-text relations with provenance back to source chunks.
Edges are undirected for topology (degree, neighbors, edge degree) but the
original (source, target) orientation is kept for readable rendering.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Set, Tuple

from .errors import (
    ConflictError,
    DanglingEdgeError,
    GraphFormatError,
    IntegrityError,
    NotFoundError,
    ValidationError,
)

logger = logging.getLogger(__name__)

Provenance = Tuple[str, int]


class NodeType(Enum):
    """The six node categories every stored node belongs to."""

    ARTIST = "Artist"
    THEME = "Theme"
    CULTURE_HISTORY = "Culture & History"
    STYLE_TECHNIQUE = "Art style & technique"
    MOVEMENT_SCHOOL = "Art Movement & school"
    OTHER = "Others"

    @classmethod
    def parse(cls, text: str) -> Optional["NodeType"]:
        """Case-insensitive match on canonical names; None if unrecognized."""
        wanted = text.strip().lower()
        for member in cls:
            if member.value.lower() == wanted:
                return member
        return None

    @property
    def slug(self) -> str:
        return self.name.lower()


def make_node_id(name: str, node_type: NodeType) -> str:
    """Canonical id: lowercase whitespace-collapsed name plus type suffix.

    Names differing only in case or spacing collide on purpose, which keeps
    duplicate detection and merging deterministic.
    """
    slug = " ".join(name.lower().split())
    return f"{slug}::{node_type.slug}"


def merge_text(a: str, b: str) -> str:
    """Concatenate two descriptions with ' | ', dropping duplicate pieces."""
    parts: List[str] = []
    for blob in (a, b):
        for piece in blob.split(" | "):
            piece = piece.strip()
            if piece and piece not in parts:
                parts.append(piece)
    return " | ".join(parts)


@dataclass
class KgNode:
    """A typed entity with free-text description and chunk provenance.

    raw_type keeps the extractor's verbatim type string so that schema
    filtering can tell "Others" apart from "never parsed"; it defaults to
    the canonical type name for hand-built nodes.
    """

    id: str
    name: str
    node_type: NodeType
    description: str = ""
    provenance: Set[Provenance] = field(default_factory=set)
    raw_type: str = ""

    def __post_init__(self) -> None:
        if not self.raw_type:
            self.raw_type = self.node_type.value


@dataclass
class KgEdge:
    """A free-text relation; (source, target) keeps the written orientation."""

    source: str
    target: str
    description: str = ""
    provenance: Set[Provenance] = field(default_factory=set)

    @property
    def key(self) -> Tuple[str, str]:
        return (self.source, self.target) if self.source <= self.target else (self.target, self.source)


def edge_key(u: str, v: str) -> Tuple[str, str]:
    return (u, v) if u <= v else (v, u)


@dataclass
class TypeStats:
    label: str
    nodes: int
    edges: int
    avg_description_words: float


@dataclass
class GraphStats:
    """Per-type node/edge counts and mean description length, plus totals."""

    rows: List[TypeStats]
    total: TypeStats

    def as_dict(self) -> Dict[str, object]:
        def row(r: TypeStats) -> Dict[str, object]:
            return {
                "type": r.label,
                "nodes": r.nodes,
                "edges": r.edges,
                "avg_description_words": round(r.avg_description_words, 2),
            }

        return {"rows": [row(r) for r in self.rows], "total": row(self.total)}

    def render(self) -> str:
        header = ("Type", "Nodes", "Edges", "Avg words")
        lines = [list(header)]
        for r in self.rows + [self.total]:
            lines.append([r.label, str(r.nodes), str(r.edges), f"{r.avg_description_words:.2f}"])
        widths = [max(len(line[i]) for line in lines) for i in range(4)]
        out = []
        for idx, line in enumerate(lines):
            out.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip())
            if idx == 0:
                out.append("  ".join("-" * widths[i] for i in range(4)))
        return "\n".join(out)


class Ackg:
    """In-memory typed graph with symmetric adjacency and unique pair edges."""

    def __init__(self) -> None:
        self.nodes: Dict[str, KgNode] = {}
        self._adj: Dict[str, Set[str]] = {}
        self._edges: Dict[Tuple[str, str], KgEdge] = {}

    # ---- counts and lookups ----

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def has_node(self, node_id: str) -> bool:
        return node_id in self.nodes

    def get_node(self, node_id: str) -> KgNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise NotFoundError(f"unknown node: {node_id!r}") from None

    def has_edge(self, u: str, v: str) -> bool:
        return edge_key(u, v) in self._edges

    def get_edge(self, u: str, v: str) -> KgEdge:
        try:
            return self._edges[edge_key(u, v)]
        except KeyError:
            raise NotFoundError(f"unknown edge: {u!r} -- {v!r}") from None

    def edges(self) -> List[KgEdge]:
        """All edges sorted by unordered endpoint pair."""
        return [self._edges[k] for k in sorted(self._edges)]

    def neighbors(self, node_id: str) -> List[str]:
        if node_id not in self.nodes:
            raise NotFoundError(f"unknown node: {node_id!r}")
        return sorted(self._adj[node_id])

    # ---- mutation ----

    def upsert_node(self, node: KgNode) -> str:
        """Insert or merge a node; returns its id.

        Existing nodes keep name and type; descriptions and provenance are
        merged. A differently-typed node under the same id is a conflict.
        """
        if not node.name.strip():
            raise ValidationError("node name must be non-empty")
        existing = self.nodes.get(node.id)
        if existing is None:
            self.nodes[node.id] = node
            self._adj.setdefault(node.id, set())
            return node.id
        if existing.node_type is not node.node_type:
            raise ConflictError(
                f"node {node.id!r} already stored as {existing.node_type.value}, "
                f"got {node.node_type.value}"
            )
        existing.description = merge_text(existing.description, node.description)
        existing.provenance |= node.provenance
        return existing.id

    def add_edge(
        self,
        source: str,
        target: str,
        description: str = "",
        provenance: Optional[Iterable[Provenance]] = None,
    ) -> None:
        """Add or merge the undirected edge {source, target}."""
        for endpoint in (source, target):
            if endpoint not in self.nodes:
                raise DanglingEdgeError(f"edge endpoint not in graph: {endpoint!r}")
        if source == target:
            raise ValidationError(f"self-loop rejected: {source!r}")
        prov = set(provenance or ())
        key = edge_key(source, target)
        existing = self._edges.get(key)
        if existing is None:
            self._edges[key] = KgEdge(source, target, description, prov)
            self._adj[source].add(target)
            self._adj[target].add(source)
        else:
            existing.description = merge_text(existing.description, description)
            existing.provenance |= prov

    def merge_nodes(self, survivor_id: str, absorbed_id: str) -> None:
        """Fold absorbed into survivor, re-pointing edges and unioning payloads.

        Self-loops produced by the re-pointing are dropped; duplicate edges
        merge their descriptions and provenance.
        """
        if survivor_id == absorbed_id:
            raise ValidationError("cannot merge a node into itself")
        survivor = self.get_node(survivor_id)
        absorbed = self.get_node(absorbed_id)

        survivor.description = merge_text(survivor.description, absorbed.description)
        survivor.provenance |= absorbed.provenance

        for neighbor in sorted(self._adj[absorbed_id]):
            old = self._edges.pop(edge_key(absorbed_id, neighbor))
            self._adj[neighbor].discard(absorbed_id)
            if neighbor == survivor_id:
                continue  # would become a self-loop
            new_source = survivor_id if old.source == absorbed_id else old.source
            new_target = survivor_id if old.target == absorbed_id else old.target
            key = edge_key(new_source, new_target)
            existing = self._edges.get(key)
            if existing is None:
                self._edges[key] = KgEdge(new_source, new_target, old.description, set(old.provenance))
                self._adj[survivor_id].add(neighbor)
                self._adj[neighbor].add(survivor_id)
            else:
                existing.description = merge_text(existing.description, old.description)
                existing.provenance |= old.provenance

        del self._adj[absorbed_id]
        del self.nodes[absorbed_id]

    def remove_node(self, node_id: str) -> None:
        """Remove a node and every incident edge."""
        if node_id not in self.nodes:
            raise NotFoundError(f"unknown node: {node_id!r}")
        for neighbor in sorted(self._adj[node_id]):
            del self._edges[edge_key(node_id, neighbor)]
            self._adj[neighbor].discard(node_id)
        del self._adj[node_id]
        del self.nodes[node_id]

    # ---- graph algorithms ----

    def degree(self, node_id: str) -> int:
        if node_id not in self.nodes:
            raise NotFoundError(f"unknown node: {node_id!r}")
        return len(self._adj[node_id])

    def edge_degree(self, u: str, v: str) -> int:
        """|N(u) union N(v)| - 2 for an existing edge {u, v}.

        Each endpoint sits in the other's neighbor set, so subtracting 2
        counts exactly the distinct neighbors beyond the endpoints.
        """
        if edge_key(u, v) not in self._edges:
            raise NotFoundError(f"unknown edge: {u!r} -- {v!r}")
        return len(self._adj[u] | self._adj[v]) - 2

    def induced_edges(self, node_ids: Iterable[str]) -> List[KgEdge]:
        """Edges with both endpoints inside node_ids, sorted by endpoint pair."""
        wanted = set(node_ids)
        for node_id in wanted:
            if node_id not in self.nodes:
                raise NotFoundError(f"unknown node: {node_id!r}")
        return [
            self._edges[key]
            for key in sorted(self._edges)
            if key[0] in wanted and key[1] in wanted
        ]

    def stats(self) -> GraphStats:
        rows: List[TypeStats] = []
        for node_type in NodeType:
            members = [n for n in self.nodes.values() if n.node_type is node_type]
            incident = sum(
                1
                for key in self._edges
                if self.nodes[key[0]].node_type is node_type
                or self.nodes[key[1]].node_type is node_type
            )
            words = [len(n.description.split()) for n in members]
            avg = sum(words) / len(words) if words else 0.0
            rows.append(TypeStats(node_type.value, len(members), incident, avg))
        all_words = [len(n.description.split()) for n in self.nodes.values()]
        total = TypeStats(
            "Total",
            len(self.nodes),
            len(self._edges),
            sum(all_words) / len(all_words) if all_words else 0.0,
        )
        return GraphStats(rows, total)


# ---- persistence ----


def _node_record(node: KgNode) -> Dict[str, object]:
    return {
        "kind": "node",
        "id": node.id,
        "name": node.name,
        "type": node.raw_type,
        "description": node.description,
        "provenance": [list(p) for p in sorted(node.provenance)],
    }


def _edge_record(edge: KgEdge) -> Dict[str, object]:
    return {
        "kind": "edge",
        "source": edge.source,
        "target": edge.target,
        "description": edge.description,
        "provenance": [list(p) for p in sorted(edge.provenance)],
    }


def save_graph(graph: Ackg, destination: str) -> None:
    """Write the graph as UTF-8 JSON lines, nodes first, deterministic order."""
    with open(destination, "w", encoding="utf-8") as handle:
        for node_id in sorted(graph.nodes):
            handle.write(json.dumps(_node_record(graph.nodes[node_id]), ensure_ascii=False))
            handle.write("\n")
        for edge in graph.edges():
            handle.write(json.dumps(_edge_record(edge), ensure_ascii=False))
            handle.write("\n")


def _parse_provenance(raw: object, line_no: int) -> Set[Provenance]:
    if raw is None:
        return set()
    if not isinstance(raw, list):
        raise GraphFormatError("provenance must be a list", line_no)
    out: Set[Provenance] = set()
    for entry in raw:
        if (
            not isinstance(entry, (list, tuple))
            or len(entry) != 2
            or not isinstance(entry[0], str)
            or not isinstance(entry[1], int)
        ):
            raise GraphFormatError(f"bad provenance entry: {entry!r}", line_no)
        out.add((entry[0], entry[1]))
    return out


def load_graph(source: str) -> Ackg:
    """Parse a JSON-lines graph file; tolerant of record order.

    Raises GraphFormatError (with line number) on malformed records and
    IntegrityError when an edge references a node absent from the file.
    """
    node_records: List[Tuple[int, Dict[str, object]]] = []
    edge_records: List[Tuple[int, Dict[str, object]]] = []
    with open(source, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise GraphFormatError(f"invalid JSON ({exc.msg})", line_no) from None
            if not isinstance(record, dict):
                raise GraphFormatError("record must be a JSON object", line_no)
            kind = record.get("kind")
            if kind == "node":
                node_records.append((line_no, record))
            elif kind == "edge":
                edge_records.append((line_no, record))
            else:
                raise GraphFormatError(f"unknown record kind: {kind!r}", line_no)

    graph = Ackg()
    for line_no, record in node_records:
        try:
            node_id = record["id"]
            name = record["name"]
            raw_type = record["type"]
        except KeyError as exc:
            raise GraphFormatError(f"node record missing field {exc.args[0]!r}", line_no) from None
        if not isinstance(node_id, str) or not isinstance(name, str) or not isinstance(raw_type, str):
            raise GraphFormatError("node id/name/type must be strings", line_no)
        node = KgNode(
            id=node_id,
            name=name,
            node_type=NodeType.parse(raw_type) or NodeType.OTHER,
            description=str(record.get("description", "")),
            provenance=_parse_provenance(record.get("provenance"), line_no),
            raw_type=raw_type,
        )
        try:
            graph.upsert_node(node)
        except (ValidationError, ConflictError) as exc:
            raise GraphFormatError(str(exc), line_no) from None

    for line_no, record in edge_records:
        try:
            source_id = record["source"]
            target_id = record["target"]
        except KeyError as exc:
            raise GraphFormatError(f"edge record missing field {exc.args[0]!r}", line_no) from None
        for endpoint in (source_id, target_id):
            if endpoint not in graph.nodes:
                raise IntegrityError(
                    f"line {line_no}: edge references missing node {endpoint!r}"
                )
        if source_id == target_id:
            raise GraphFormatError(f"self-loop edge on {source_id!r}", line_no)
        graph.add_edge(
            source_id,
            target_id,
            str(record.get("description", "")),
            _parse_provenance(record.get("provenance"), line_no),
        )
    return graph
