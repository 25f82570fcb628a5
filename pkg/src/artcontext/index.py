"""In-memory cosine index over node embeddings, with bit-exact persistence.

Search is exhaustive and deterministic: scores are computed per row with the
same scalar cosine the tests can call directly, ties break on ascending node
id. At the scale this pipeline targets (tens of thousands of nodes) there is
no need for approximate structures.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .errors import IntegrityError, NotFoundError, PipelineError, ValidationError
from .gateway import Gateway
from .graph import Ackg, KgNode

logger = logging.getLogger(__name__)

DEFAULT_TEXT_BUDGET = 512
DEFAULT_BATCH_SIZE = 64

VectorLike = Union[Sequence[float], np.ndarray]


@dataclass
class RetrievalHit:
    node_id: str
    similarity: float


def node_text(node: KgNode, budget: int = DEFAULT_TEXT_BUDGET) -> str:
    """The string that represents a node in embedding space."""
    text = f"{node.name} ({node.node_type.value}): {node.description}"
    return text[:budget]


def cosine(u: VectorLike, v: VectorLike) -> float:
    """Plain cosine similarity; a zero vector compares as 0.0."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = float(np.dot(a, a)) ** 0.5
    norm_b = float(np.dot(b, b)) ** 0.5
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a, b)) / (norm_a * norm_b)


class VectorIndex:
    """node id -> vector, fixed dim, rows stored as float32."""

    def __init__(self, ids: List[str], matrix: np.ndarray):
        if matrix.ndim != 2:
            raise ValidationError("index matrix must be 2-dimensional")
        if len(ids) != matrix.shape[0]:
            raise ValidationError(
                f"id count {len(ids)} does not match row count {matrix.shape[0]}"
            )
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate node ids in index")
        self.ids = list(ids)
        self.matrix = matrix.astype(np.float32, copy=False)
        self._row_of: Dict[str, int] = {nid: row for row, nid in enumerate(self.ids)}

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def count(self) -> int:
        return int(self.matrix.shape[0])

    def vector(self, node_id: str) -> np.ndarray:
        try:
            return self.matrix[self._row_of[node_id]]
        except KeyError:
            raise NotFoundError(f"node not in index: {node_id!r}") from None

    def has(self, node_id: str) -> bool:
        return node_id in self._row_of


def build_index(
    gateway: Gateway,
    graph: Ackg,
    text_budget: int = DEFAULT_TEXT_BUDGET,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> VectorIndex:
    """Embed every node, batched, in ascending id order."""
    ids = sorted(graph.nodes)
    if not ids:
        return VectorIndex([], np.zeros((0, 0), dtype=np.float32))
    rows: List[List[float]] = []
    for start in range(0, len(ids), batch_size):
        batch = ids[start : start + batch_size]
        texts = [node_text(graph.nodes[nid], text_budget) for nid in batch]
        try:
            vectors = gateway.embed(texts)
        except Exception as exc:
            raise PipelineError(
                "embed", f"batch {start}..{start + len(batch) - 1} ({batch[0]}...): {exc}"
            ) from exc
        rows.extend(v.values for v in vectors)
    matrix = np.asarray(rows, dtype=np.float32)
    return VectorIndex(ids, matrix)


def top_k(index: VectorIndex, query: VectorLike, k: int) -> List[RetrievalHit]:
    """Exhaustive search: similarity descending, ties on ascending node id."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if index.count == 0:
        return []
    hits = [
        RetrievalHit(node_id, cosine(index.matrix[row], query))
        for row, node_id in enumerate(index.ids)
    ]
    hits.sort(key=lambda h: (-h.similarity, h.node_id))
    return hits[: min(k, index.count)]


# ---- persistence: flat binary matrix plus JSON id sidecar ----


def sidecar_path(path: str) -> str:
    return path + ".ids.json"


def save_index(index: VectorIndex, path: str) -> None:
    with open(path, "wb") as handle:
        handle.write(struct.pack("<II", index.dim, index.count))
        handle.write(index.matrix.astype("<f4", copy=False).tobytes())
    with open(sidecar_path(path), "w", encoding="utf-8") as handle:
        json.dump(index.ids, handle, ensure_ascii=False)
        handle.write("\n")


def load_index(path: str) -> VectorIndex:
    with open(path, "rb") as handle:
        header = handle.read(8)
        if len(header) != 8:
            raise IntegrityError("index file too short for header")
        dim, count = struct.unpack("<II", header)
        payload = handle.read()
    expected = dim * count * 4
    if len(payload) != expected:
        raise IntegrityError(
            f"index payload is {len(payload)} bytes, header implies {expected}"
        )
    matrix = np.frombuffer(payload, dtype="<f4").reshape(count, dim).copy()
    with open(sidecar_path(path), "r", encoding="utf-8") as handle:
        ids = json.load(handle)
    if not isinstance(ids, list) or len(ids) != count:
        raise IntegrityError("id sidecar does not match index header")
    return VectorIndex([str(i) for i in ids], matrix)
