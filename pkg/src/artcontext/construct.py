"""Corpus to graph: chunking, LLM extraction, aggregation, cleaning.

The pipeline is: manifest -> sliding-window chunks -> per-chunk extraction
through the gateway -> aggregation into a raw graph -> fuzzy name dedup ->
type filtering. Cleaning only ever shrinks the graph.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import PipelineError, ValidationError
from .gateway import ChatMessage, ChatRequest, Gateway
from .graph import Ackg, KgNode, NodeType, make_node_id, save_graph
from .templates import fill, load_prompt

logger = logging.getLogger(__name__)

CATEGORIES = ("Artists", "ArtSchools", "ArtTypes", "CulturalEvents", "ArtMovements")

DEFAULT_WINDOW_TOKENS = 1000
DEFAULT_OVERLAP_TOKENS = 100
DEFAULT_DEDUP_THRESHOLD = 0.95

# Trailing tokens from this set block a merge when they differ; keeps
# "Elizabeth I" and "Elizabeth II" apart no matter how similar the names are.
ROMAN_NUMERALS = frozenset(
    "I II III IV V VI VII VIII IX X XI XII XIII XIV XV XVI XVII XVIII XIX XX".split()
)


# ---- manifest ----


@dataclass
class ManifestEntry:
    id: str
    path: str
    category: str


@dataclass
class CorpusManifest:
    entries: List[ManifestEntry]

    def validate(self) -> None:
        seen: Set[str] = set()
        for entry in self.entries:
            if not entry.id:
                raise ValidationError("manifest entry with empty id")
            if entry.id in seen:
                raise ValidationError(f"duplicate document id: {entry.id!r}")
            seen.add(entry.id)
            if entry.category not in CATEGORIES:
                raise ValidationError(
                    f"unknown category {entry.category!r} for document {entry.id!r}"
                )


def load_manifest(path: str) -> CorpusManifest:
    """Parse a manifest: a JSON array of {id, path, category} objects."""
    with open(path, "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, list):
        raise ValidationError("manifest must be a JSON array")
    entries = []
    for item in raw:
        if not isinstance(item, dict):
            raise ValidationError(f"manifest entry must be an object: {item!r}")
        try:
            entries.append(ManifestEntry(str(item["id"]), str(item["path"]), str(item["category"])))
        except KeyError as exc:
            raise ValidationError(f"manifest entry missing field {exc.args[0]!r}") from None
    manifest = CorpusManifest(entries)
    manifest.validate()
    return manifest


# ---- chunking ----


@dataclass
class Chunk:
    doc_id: str
    index: int
    text: str
    start: int
    end: int  # token span [start, end)


def chunk_document(
    text: str,
    window_tokens: int = DEFAULT_WINDOW_TOKENS,
    overlap_tokens: int = DEFAULT_OVERLAP_TOKENS,
    doc_id: str = "",
    strict_stride: bool = False,
) -> List[Chunk]:
    """Split whitespace tokens into overlapping windows.

    Default stepping is window - overlap, so consecutive chunks share
    exactly `overlap_tokens` tokens. strict_stride instead steps by
    `overlap_tokens` itself, for experiments where the smaller figure is
    read as the stride.
    """
    if overlap_tokens < 0 or window_tokens <= overlap_tokens:
        raise ValidationError(
            f"need window_tokens > overlap_tokens >= 0, got ({window_tokens}, {overlap_tokens})"
        )
    step = overlap_tokens if strict_stride else window_tokens - overlap_tokens
    if step < 1:
        raise ValidationError("strict_stride requires a positive stride")
    tokens = text.split()
    if not tokens:
        return []
    chunks: List[Chunk] = []
    start = 0
    index = 0
    total = len(tokens)
    while True:
        end = min(start + window_tokens, total)
        chunks.append(Chunk(doc_id, index, " ".join(tokens[start:end]), start, end))
        if end >= total:
            break
        start += step
        index += 1
    return chunks


# ---- extraction ----


@dataclass
class ExtractionRecord:
    kind: str  # "entity" or "relationship"
    name: str = ""
    raw_type: str = ""
    source: str = ""
    target: str = ""
    description: str = ""
    doc_id: str = ""
    chunk_index: int = 0


def parse_extraction_output(text: str) -> Tuple[List[ExtractionRecord], List[str]]:
    """Parse delimited records, one per line; malformed lines yield warnings.

    Recognized shapes:
      ("entity"<|>NAME<|>TYPE<|>DESCRIPTION)
      ("relationship"<|>SOURCE<|>TARGET<|>DESCRIPTION)
    Lines without the field delimiter are ignored as prose. Unknown raw type
    strings are kept verbatim so filtering can report them later.
    """
    records: List[ExtractionRecord] = []
    warnings: List[str] = []
    for line in text.splitlines():
        line = line.strip()
        if "<|>" not in line:
            continue
        body = line.lstrip("(").rstrip(")")
        fields = [f.strip().strip('"') for f in body.split("<|>")]
        kind = fields[0].lower()
        if kind == "entity":
            if len(fields) != 4 or not fields[1]:
                warnings.append(f"malformed entity line skipped: {line!r}")
                continue
            records.append(
                ExtractionRecord(
                    kind="entity", name=fields[1], raw_type=fields[2], description=fields[3]
                )
            )
        elif kind == "relationship":
            if len(fields) != 4 or not fields[1] or not fields[2]:
                warnings.append(f"malformed relationship line skipped: {line!r}")
                continue
            records.append(
                ExtractionRecord(
                    kind="relationship", source=fields[1], target=fields[2], description=fields[3]
                )
            )
        else:
            warnings.append(f"unknown record kind skipped: {line!r}")
    return records, warnings


def extract_candidates(
    gateway: Gateway,
    chunk: Chunk,
    entity_types: Sequence[str],
    prompt_dir: Optional[str] = None,
    template: Optional[str] = None,
) -> List[ExtractionRecord]:
    """One chat call per chunk; lenient parse; provenance attached."""
    if not chunk.text.strip():
        raise ValidationError("cannot extract from an empty chunk")
    if template is None:
        template = load_prompt("extraction.txt", prompt_dir)
    prompt = fill(template, entity_types=", ".join(entity_types), input_text=chunk.text)
    response = gateway.chat(ChatRequest([ChatMessage("user", prompt)], max_tokens=4096))
    records, warnings = parse_extraction_output(response.text)
    for warning in warnings:
        logger.warning("chunk %s#%d: %s", chunk.doc_id, chunk.index, warning)
    if not records and response.text.strip():
        logger.warning(
            "chunk %s#%d: no extraction records found in response", chunk.doc_id, chunk.index
        )
    for record in records:
        record.doc_id = chunk.doc_id
        record.chunk_index = chunk.index
    return records


def aggregate_candidates(records: Iterable[ExtractionRecord]) -> Tuple[Ackg, List[str]]:
    """Fold extraction records into a raw (uncleaned) graph.

    Entities first, then relationships, in ascending (doc id, chunk index)
    order so the result does not depend on extraction completion order.
    Relationship endpoints resolve by name slug; the unresolvable ones are
    dropped with a warning.
    """
    ordered = sorted(enumerate(records), key=lambda item: (item[1].doc_id, item[1].chunk_index, item[0]))
    graph = Ackg()
    warnings: List[str] = []

    for _, record in ordered:
        if record.kind != "entity":
            continue
        raw_type = record.raw_type.strip()
        node_type = NodeType.parse(raw_type) or NodeType.OTHER
        name = record.name.strip()
        node = KgNode(
            id=make_node_id(name, node_type),
            name=name,
            node_type=node_type,
            description=record.description.strip(),
            provenance={(record.doc_id, record.chunk_index)},
            raw_type=raw_type,
        )
        graph.upsert_node(node)

    slug_to_ids: Dict[str, List[str]] = {}
    for node_id in sorted(graph.nodes):
        slug = node_id.rsplit("::", 1)[0]
        slug_to_ids.setdefault(slug, []).append(node_id)

    def resolve(name: str) -> Optional[str]:
        slug = " ".join(name.lower().split())
        ids = slug_to_ids.get(slug)
        return ids[0] if ids else None  # ascending id wins on type ambiguity

    for _, record in ordered:
        if record.kind != "relationship":
            continue
        source_id = resolve(record.source)
        target_id = resolve(record.target)
        if source_id is None or target_id is None:
            missing = record.source if source_id is None else record.target
            warnings.append(
                f"dropped relationship {record.source!r} -> {record.target!r}: "
                f"no extracted entity named {missing!r}"
            )
            continue
        if source_id == target_id:
            warnings.append(
                f"dropped relationship {record.source!r} -> {record.target!r}: self-loop"
            )
            continue
        graph.add_edge(
            source_id,
            target_id,
            record.description.strip(),
            {(record.doc_id, record.chunk_index)},
        )
    for warning in warnings:
        logger.warning(warning)
    return graph, warnings


# ---- cleaning ----


def normalized_levenshtein(a: str, b: str) -> float:
    """1 - editDistance(a, b) / max(len); two empty strings count as 1.0."""
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ch_a in enumerate(a, start=1):
        current = [i]
        for j, ch_b in enumerate(b, start=1):
            cost = 0 if ch_a == ch_b else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return 1.0 - previous[-1] / max(len(a), len(b))


def roman_numeral_guard(name_a: str, name_b: str) -> bool:
    """True when both names end in distinct Roman numerals (never merge)."""
    tail_a = name_a.split()[-1].upper() if name_a.split() else ""
    tail_b = name_b.split()[-1].upper() if name_b.split() else ""
    return (
        tail_a in ROMAN_NUMERALS
        and tail_b in ROMAN_NUMERALS
        and tail_a != tail_b
    )


@dataclass
class MergeEntry:
    """One evidencing pair: similarity is re-checkable from the names."""

    survivor_id: str
    absorbed_id: str
    survivor_name: str
    absorbed_name: str
    node_type: str
    similarity: float


@dataclass
class RemovedNode:
    node_id: str
    name: str
    raw_type: str
    reason: str


@dataclass
class CleaningReport:
    nodes_before: int
    nodes_after: int
    edges_before: int
    edges_after: int
    merges: List[MergeEntry] = field(default_factory=list)
    removed: List[RemovedNode] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict[str, object]:
        return {
            "nodes_before": self.nodes_before,
            "nodes_after": self.nodes_after,
            "edges_before": self.edges_before,
            "edges_after": self.edges_after,
            "merges": [
                {
                    "survivor_id": m.survivor_id,
                    "absorbed_id": m.absorbed_id,
                    "survivor_name": m.survivor_name,
                    "absorbed_name": m.absorbed_name,
                    "node_type": m.node_type,
                    "similarity": m.similarity,
                }
                for m in self.merges
            ],
            "removed": [
                {"id": r.node_id, "name": r.name, "type": r.raw_type, "reason": r.reason}
                for r in self.removed
            ],
            "warnings": list(self.warnings),
        }

    def render(self) -> str:
        lines = [
            f"nodes: {self.nodes_before} -> {self.nodes_after}",
            f"edges: {self.edges_before} -> {self.edges_after}",
            f"merges: {len(self.merges)}",
        ]
        for m in self.merges:
            lines.append(
                f"  kept {m.survivor_name!r}, absorbed {m.absorbed_name!r} "
                f"({m.node_type}, similarity {m.similarity:.4f})"
            )
        lines.append(f"removed: {len(self.removed)}")
        for r in self.removed:
            lines.append(f"  {r.name!r}: {r.reason}")
        return "\n".join(lines)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.as_dict(), handle, ensure_ascii=False, indent=2)
            handle.write("\n")


def dedup_nodes(
    graph: Ackg, threshold: float = DEFAULT_DEDUP_THRESHOLD
) -> Tuple[Ackg, CleaningReport]:
    """Merge near-duplicate names of the same type, transitively.

    Similarity is normalized Levenshtein over trimmed names and must exceed
    the threshold strictly. The lexicographically earlier name survives; the
    Roman numeral guard keeps regnal names distinct.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValidationError(f"threshold must be in (0, 1], got {threshold}")
    nodes_before = graph.node_count
    edges_before = graph.edge_count

    parent: Dict[str, str] = {nid: nid for nid in graph.nodes}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    by_type: Dict[NodeType, List[str]] = {}
    for node_id, node in graph.nodes.items():
        by_type.setdefault(node.node_type, []).append(node_id)

    def name_key(node_id: str) -> Tuple[str, str]:
        return (graph.nodes[node_id].name, node_id)

    merges: List[MergeEntry] = []
    for node_type in NodeType:
        members = sorted(by_type.get(node_type, ()), key=name_key)
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                a, b = members[i], members[j]  # name(a) <= name(b)
                name_a = graph.nodes[a].name.strip()
                name_b = graph.nodes[b].name.strip()
                if roman_numeral_guard(name_a, name_b):
                    continue
                similarity = normalized_levenshtein(name_a, name_b)
                if similarity <= threshold:
                    continue
                merges.append(
                    MergeEntry(a, b, graph.nodes[a].name, graph.nodes[b].name, node_type.value, similarity)
                )
                root_a, root_b = find(a), find(b)
                if root_a != root_b:
                    # the root with the earlier (name, id) key survives
                    keep, drop = sorted((root_a, root_b), key=name_key)
                    parent[drop] = keep

    components: Dict[str, List[str]] = {}
    for node_id in parent:
        components.setdefault(find(node_id), []).append(node_id)
    for survivor, members in sorted(components.items(), key=lambda kv: name_key(kv[0])):
        for absorbed in sorted(members, key=name_key):
            if absorbed != survivor:
                graph.merge_nodes(survivor, absorbed)

    report = CleaningReport(
        nodes_before=nodes_before,
        nodes_after=graph.node_count,
        edges_before=edges_before,
        edges_after=graph.edge_count,
        merges=merges,
    )
    return graph, report


def filter_by_type(
    graph: Ackg, allowed: Optional[Iterable[NodeType]] = None
) -> Tuple[Ackg, List[RemovedNode]]:
    """Drop nodes whose raw type does not parse or is outside the allowed set."""
    allowed_set = set(allowed) if allowed is not None else set(NodeType)
    removed: List[RemovedNode] = []
    for node_id in sorted(graph.nodes):
        node = graph.nodes[node_id]
        parsed = NodeType.parse(node.raw_type)
        if parsed is None:
            reason = f"raw type {node.raw_type!r} is not in the schema"
        elif parsed not in allowed_set:
            reason = f"type {parsed.value!r} is not allowed"
        else:
            continue
        removed.append(RemovedNode(node_id, node.name, node.raw_type, reason))
        graph.remove_node(node_id)
        logger.info("filtered node %s: %s", node_id, reason)
    return graph, removed


# ---- end to end ----


@dataclass
class ConstructConfig:
    window_tokens: int = DEFAULT_WINDOW_TOKENS
    overlap_tokens: int = DEFAULT_OVERLAP_TOKENS
    strict_stride: bool = False
    dedup_threshold: float = DEFAULT_DEDUP_THRESHOLD
    allowed_types: Tuple[NodeType, ...] = tuple(NodeType)
    prompt_dir: Optional[str] = None
    graph_path: Optional[str] = None
    raw_graph_path: Optional[str] = None
    report_path: Optional[str] = None


def build_ackg(
    gateway: Gateway,
    manifest: CorpusManifest,
    config: Optional[ConstructConfig] = None,
) -> Tuple[Ackg, CleaningReport]:
    """Run the whole construction pipeline over a corpus manifest."""
    config = config or ConstructConfig()
    manifest.validate()

    chunks: List[Chunk] = []
    for entry in sorted(manifest.entries, key=lambda e: e.id):
        try:
            with open(entry.path, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise PipelineError("ingest", f"cannot read {entry.path!r}: {exc}") from exc
        chunks.extend(
            chunk_document(
                text,
                config.window_tokens,
                config.overlap_tokens,
                doc_id=entry.id,
                strict_stride=config.strict_stride,
            )
        )

    entity_types = [t.value for t in NodeType]
    try:
        template = load_prompt("extraction.txt", config.prompt_dir)
    except Exception as exc:
        raise PipelineError("extract", str(exc)) from exc
    records: List[ExtractionRecord] = []
    for chunk in chunks:
        try:
            records.extend(
                extract_candidates(gateway, chunk, entity_types, template=template)
            )
        except Exception as exc:
            raise PipelineError(
                "extract", f"chunk {chunk.doc_id}#{chunk.index}: {exc}"
            ) from exc

    raw_graph, agg_warnings = aggregate_candidates(records)
    nodes_before = raw_graph.node_count
    edges_before = raw_graph.edge_count
    if config.raw_graph_path:
        save_graph(raw_graph, config.raw_graph_path)

    graph, dedup_report = dedup_nodes(raw_graph, config.dedup_threshold)
    graph, removed = filter_by_type(graph, config.allowed_types)

    report = CleaningReport(
        nodes_before=nodes_before,
        nodes_after=graph.node_count,
        edges_before=edges_before,
        edges_after=graph.edge_count,
        merges=dedup_report.merges,
        removed=removed,
        warnings=agg_warnings,
    )
    if config.graph_path:
        save_graph(graph, config.graph_path)
    if config.report_path:
        report.save(config.report_path)
    return graph, report
