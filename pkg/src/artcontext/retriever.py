"""Multi-granularity structured context retrieval.

Stages: concept detection -> query text -> embedding -> coarse top-k' seeds
-> edge-degree expansion to k candidates -> multimodal rank score (s_ms) and
full-graph degree score (s_gc) -> per-set softmax combination with weight
lambda -> prune to the top-m subgraph with its induced edges. Every ordering
is deterministic; under the mock gateway the whole pipeline is a pure
function of its inputs.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import ConceptDetectionError, PipelineError, ValidationError
from .gateway import ChatMessage, ChatRequest, Gateway, ImageAttachment
from .graph import Ackg, KgEdge, KgNode
from .index import VectorIndex, cosine, top_k
from .templates import fill, load_prompt

logger = logging.getLogger(__name__)

ATTRIBUTE_ORDER = ("title", "artist", "technique", "timeframe", "type", "school")

RANK_DESCRIPTION_BUDGET = 256

_LIST_ITEM_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s*(.+?)\s*$")


@dataclass
class PaintingQuery:
    """A painting given by image and/or attributes, plus an optional question."""

    image: Optional[Union[str, bytes]] = None
    image_media_type: str = "image/jpeg"
    attributes: Dict[str, str] = field(default_factory=dict)
    question: Optional[str] = None

    def validate(self) -> None:
        if self.image is None and not self.attributes:
            raise ValidationError("painting needs an image or at least one attribute")

    def attribute_lines(self) -> List[str]:
        """Attribute lines in fixed key order, unknown keys after, sorted."""
        lines = []
        for key in ATTRIBUTE_ORDER:
            value = str(self.attributes.get(key, "")).strip()
            if value:
                lines.append(f"{key}: {value}")
        for key in sorted(self.attributes):
            if key in ATTRIBUTE_ORDER:
                continue
            value = str(self.attributes[key]).strip()
            if value:
                lines.append(f"{key}: {value}")
        return lines

    def attachments(self) -> List[ImageAttachment]:
        if self.image is None:
            return []
        return [ImageAttachment(self.image, self.image_media_type)]


@dataclass
class ConceptList:
    concepts: List[str]
    target: int


@dataclass
class RetrieverConfig:
    k_coarse: int = 5
    k_expanded: int = 10
    m: int = 5
    lam: float = 0.5
    n_concepts: int = 5
    rank_mode: str = "linear"  # or "reciprocal"

    def validate(self) -> None:
        if not 1 <= self.k_coarse <= self.k_expanded:
            raise ValidationError(
                f"need 1 <= k_coarse <= k_expanded, got ({self.k_coarse}, {self.k_expanded})"
            )
        if not 1 <= self.m <= self.k_expanded:
            raise ValidationError(f"need 1 <= m <= k_expanded, got m={self.m}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValidationError(f"lambda must be in [0, 1], got {self.lam}")
        if self.n_concepts < 1:
            raise ValidationError("n_concepts must be >= 1")
        if self.rank_mode not in ("linear", "reciprocal"):
            raise ValidationError(f"unknown rank_mode: {self.rank_mode!r}")


@dataclass
class ScoredNode:
    node_id: str
    s_ms: float
    s_gc: float
    s: float = 0.0


@dataclass
class RetrievalProvenance:
    query_text: str = ""
    concepts: List[str] = field(default_factory=list)
    seeds: List[str] = field(default_factory=list)
    expansion_added: List[str] = field(default_factory=list)
    ranked: List[str] = field(default_factory=list)
    ranking_fallback: bool = False


@dataclass
class ContextSubgraph:
    """The pruned subgraph: scored nodes (score descending) plus induced edges."""

    nodes: List[KgNode]
    edges: List[KgEdge]
    scores: List[ScoredNode]  # aligned with nodes
    provenance: RetrievalProvenance = field(default_factory=RetrievalProvenance)

    @property
    def node_ids(self) -> List[str]:
        return [n.id for n in self.nodes]


@dataclass
class MultimodalRanking:
    s_ms: Dict[str, float]
    ranked_ids: List[str]
    used_fallback: bool = False


# ---- stage operations ----


def _painting_text(painting: PaintingQuery) -> str:
    lines = painting.attribute_lines()
    if painting.question:
        lines.append(f"question: {painting.question}")
    return "\n".join(lines) if lines else "(image only, no metadata)"


def parse_concept_lines(text: str) -> List[str]:
    """Pull concepts out of a bulleted or numbered list, order preserved."""
    concepts = []
    for line in text.splitlines():
        match = _LIST_ITEM_RE.match(line)
        if match and match.group(1).strip():
            concepts.append(match.group(1).strip())
    return concepts


def detect_concepts(
    gateway: Gateway,
    painting: PaintingQuery,
    n: int,
    prompt_dir: Optional[str] = None,
) -> ConceptList:
    """One vision call; normalize to exactly n concepts.

    Extras are truncated; a short list triggers one retry, then padding from
    attribute values, then cycling. Zero parseable concepts is an error.
    """
    painting.validate()
    if n < 1:
        raise ValidationError("concept count must be >= 1")
    template = load_prompt("concepts.txt", prompt_dir)
    prompt = fill(template, n_concepts=str(n), painting=_painting_text(painting))
    request = ChatRequest(
        [ChatMessage("user", prompt)], image_attachments=painting.attachments()
    )
    concepts = parse_concept_lines(gateway.chat(request).text)
    if len(concepts) < n:
        retried = parse_concept_lines(gateway.chat(request).text)
        if len(retried) > len(concepts):
            concepts = retried
    if not concepts:
        raise ConceptDetectionError("no parseable concepts after retry")
    if len(concepts) > n:
        concepts = concepts[:n]
    if len(concepts) < n:
        pool = [v.strip() for v in painting.attributes.values() if str(v).strip()]
        for value in pool:
            if len(concepts) == n:
                break
            if value not in concepts:
                concepts.append(value)
        cursor = 0
        while len(concepts) < n:  # still short: cycle what we have
            concepts.append(concepts[cursor])
            cursor += 1
    return ConceptList(concepts, n)


def build_query_text(attributes: Dict[str, str], concepts: Sequence[str]) -> str:
    """Deterministic query string: attribute lines, then the concept line."""
    scratch = PaintingQuery(attributes=dict(attributes), image=None)
    lines = scratch.attribute_lines() if attributes else []
    cleaned = [c.strip() for c in concepts if c.strip()]
    if cleaned:
        lines.append("Concepts: " + "; ".join(cleaned))
    if not lines:
        raise ValidationError("need at least one attribute or concept")
    return "\n".join(lines)


def coarse_retrieve(index: VectorIndex, query_vector, k_coarse: int) -> List[str]:
    """Seed ids in rank order; empty index yields no seeds."""
    if index.count == 0:
        return []
    return [hit.node_id for hit in top_k(index, query_vector, k_coarse)]


def expand_by_edge_degree(graph: Ackg, seeds: Sequence[str], k: int) -> List[str]:
    """Grow the seed set along the highest edge-degree frontier edges.

    After every addition the frontier is recomputed, so edges reachable
    through a new node compete immediately. Ties break on the ascending
    endpoint-id pair. Seeds are never evicted.
    """
    for seed in seeds:
        if not graph.has_node(seed):
            raise ValidationError(f"seed not in graph: {seed!r}")
    selected = list(dict.fromkeys(seeds))
    if len(selected) > k:
        raise ValidationError(f"more seeds ({len(selected)}) than k ({k})")
    inside = set(selected)
    while len(selected) < k:
        frontier: List[Tuple[int, Tuple[str, str], str]] = []
        for node_id in selected:
            for neighbor in graph.neighbors(node_id):
                if neighbor in inside:
                    continue
                edge = graph.get_edge(node_id, neighbor)
                frontier.append((graph.edge_degree(node_id, neighbor), edge.key, neighbor))
        if not frontier:
            break
        frontier.sort(key=lambda item: (-item[0], item[1]))
        addition = frontier[0][2]
        selected.append(addition)
        inside.add(addition)
    return selected


def parse_rank_numbers(text: str, count: int) -> List[int]:
    """Extract a 1-based candidate permutation from the model's reply."""
    order: List[int] = []
    for token in re.findall(r"\d+", text):
        value = int(token)
        if 1 <= value <= count and value not in order:
            order.append(value)
    return order


def rank_multimodal(
    gateway: Gateway,
    painting: PaintingQuery,
    candidates: Sequence[KgNode],
    fallback_order: Optional[Sequence[str]] = None,
    prompt_dir: Optional[str] = None,
    rank_mode: str = "linear",
) -> MultimodalRanking:
    """Score candidates from the model's ranking position.

    s_ms(rank r) = K - r + 1 with rank 1 best (or 1/r in reciprocal mode).
    Candidates the model omits are appended after the ranked ones in id
    order. An unparseable ranking after one retry falls back to
    fallback_order (or id order) and flags the result.
    """
    if not candidates:
        raise ValidationError("rank_multimodal needs at least one candidate")
    template = load_prompt("ranking.txt", prompt_dir)
    listing = "\n".join(
        f"{i}. {node.name} ({node.node_type.value}): {node.description[:RANK_DESCRIPTION_BUDGET]}"
        for i, node in enumerate(candidates, start=1)
    )
    prompt = fill(
        template,
        count=str(len(candidates)),
        painting=_painting_text(painting),
        candidates=listing,
    )
    request = ChatRequest(
        [ChatMessage("user", prompt)], image_attachments=painting.attachments()
    )
    order = parse_rank_numbers(gateway.chat(request).text, len(candidates))
    if not order:
        order = parse_rank_numbers(gateway.chat(request).text, len(candidates))

    used_fallback = False
    if not order:
        used_fallback = True
        base = list(fallback_order) if fallback_order else sorted(n.id for n in candidates)
        ranked_ids = [nid for nid in base if any(n.id == nid for n in candidates)]
        ranked_ids += sorted(n.id for n in candidates if n.id not in ranked_ids)
    else:
        ranked_ids = [candidates[i - 1].id for i in order]
        ranked_ids += sorted(n.id for n in candidates if n.id not in ranked_ids)

    total = len(ranked_ids)
    if rank_mode == "reciprocal":
        s_ms = {nid: 1.0 / rank for rank, nid in enumerate(ranked_ids, start=1)}
    else:
        s_ms = {nid: float(total - rank + 1) for rank, nid in enumerate(ranked_ids, start=1)}
    return MultimodalRanking(s_ms=s_ms, ranked_ids=ranked_ids, used_fallback=used_fallback)


def centrality_scores(graph: Ackg, candidates: Sequence[str]) -> Dict[str, float]:
    """s_gc is the degree in the full graph, not the candidate subgraph."""
    return {node_id: float(graph.degree(node_id)) for node_id in candidates}


def softmax(values: Sequence[float]) -> List[float]:
    """Stable softmax; the max shift makes constant shifts bit-exact no-ops."""
    if not values:
        raise ValidationError("softmax over an empty set")
    peak = max(values)
    exps = [math.exp(v - peak) for v in values]
    total = sum(exps)
    return [e / total for e in exps]


def combine_scores(scored: Sequence[ScoredNode], lam: float) -> List[ScoredNode]:
    """s = lam * softmax(s_ms) + (1 - lam) * softmax(s_gc), per candidate set."""
    if not scored:
        raise ValidationError("combine_scores needs at least one candidate")
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"lambda must be in [0, 1], got {lam}")
    p_ms = softmax([sn.s_ms for sn in scored])
    p_gc = softmax([sn.s_gc for sn in scored])
    for sn, ms, gc in zip(scored, p_ms, p_gc):
        sn.s = lam * ms + (1.0 - lam) * gc
    return list(scored)


def prune_to_subgraph(
    graph: Ackg,
    scored: Sequence[ScoredNode],
    m: int,
    provenance: Optional[RetrievalProvenance] = None,
) -> ContextSubgraph:
    """Keep the top-m nodes by combined score and their induced edges."""
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m}")
    chosen = sorted(scored, key=lambda sn: (-sn.s, sn.node_id))[: min(m, len(scored))]
    ids = [sn.node_id for sn in chosen]
    return ContextSubgraph(
        nodes=[graph.get_node(nid) for nid in ids],
        edges=graph.induced_edges(ids),
        scores=list(chosen),
        provenance=provenance or RetrievalProvenance(),
    )


# ---- end to end ----


def retrieve_context(
    gateway: Gateway,
    graph: Ackg,
    index: VectorIndex,
    painting: PaintingQuery,
    config: Optional[RetrieverConfig] = None,
    prompt_dir: Optional[str] = None,
) -> ContextSubgraph:
    """Run every retrieval stage; errors carry the failing stage's tag."""
    config = config or RetrieverConfig()
    config.validate()
    painting.validate()

    def stage(name: str, func, *args, **kwargs):
        try:
            return func(*args, **kwargs)
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(name, str(exc)) from exc

    concepts = stage("concepts", detect_concepts, gateway, painting, config.n_concepts, prompt_dir)
    query_text = stage("query", build_query_text, painting.attributes, concepts.concepts)
    query_vector = stage("embed", lambda: gateway.embed([query_text])[0].values)
    seeds = stage("coarse", coarse_retrieve, index, query_vector, config.k_coarse)
    candidates = stage("expand", expand_by_edge_degree, graph, seeds, config.k_expanded)

    provenance = RetrievalProvenance(
        query_text=query_text,
        concepts=list(concepts.concepts),
        seeds=list(seeds),
        expansion_added=[c for c in candidates if c not in seeds],
    )
    if not candidates:
        return ContextSubgraph(nodes=[], edges=[], scores=[], provenance=provenance)

    def cosine_order() -> List[str]:
        keyed = [
            (-(cosine(index.vector(nid), query_vector) if index.has(nid) else 0.0), nid)
            for nid in candidates
        ]
        return [nid for _, nid in sorted(keyed)]

    ranking = stage(
        "rank",
        rank_multimodal,
        gateway,
        painting,
        [graph.get_node(nid) for nid in candidates],
        fallback_order=cosine_order(),
        prompt_dir=prompt_dir,
        rank_mode=config.rank_mode,
    )
    provenance.ranked = list(ranking.ranked_ids)
    provenance.ranking_fallback = ranking.used_fallback

    s_gc = stage("score", centrality_scores, graph, candidates)
    scored = [ScoredNode(nid, ranking.s_ms[nid], s_gc[nid]) for nid in candidates]
    stage("score", combine_scores, scored, config.lam)
    return stage("prune", prune_to_subgraph, graph, scored, config.m, provenance)


# ---- canonical JSON rendering (shared by CLI and service) ----


def subgraph_to_dict(subgraph: ContextSubgraph) -> Dict[str, object]:
    return {
        "nodes": [
            {
                "id": node.id,
                "name": node.name,
                "type": node.node_type.value,
                "description": node.description,
                "s_ms": score.s_ms,
                "s_gc": score.s_gc,
                "s": score.s,
            }
            for node, score in zip(subgraph.nodes, subgraph.scores)
        ],
        "edges": [
            {"source": e.source, "target": e.target, "description": e.description}
            for e in subgraph.edges
        ],
        "provenance": {
            "query_text": subgraph.provenance.query_text,
            "concepts": list(subgraph.provenance.concepts),
            "seeds": list(subgraph.provenance.seeds),
            "expansion_added": list(subgraph.provenance.expansion_added),
            "ranked": list(subgraph.provenance.ranked),
            "ranking_fallback": subgraph.provenance.ranking_fallback,
        },
    }


def subgraph_to_json(subgraph: ContextSubgraph) -> str:
    return json.dumps(subgraph_to_dict(subgraph), ensure_ascii=False, indent=2)
