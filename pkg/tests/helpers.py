"""Builders shared across test modules."""

from __future__ import annotations

import random
from typing import Dict, List, Set, Tuple

from artcontext import Ackg, KgNode, NodeType, make_node_id

TYPE_CYCLE = list(NodeType)

WORDS = [
    "harbor", "dawn", "weaver", "loom", "portrait", "fresco", "guild",
    "pigment", "canvas", "etching", "marble", "allegory", "pastoral",
    "baroque", "gothic", "salon", "patron", "votive", "panel", "tempera",
]


def make_node(i: int, node_type: NodeType = None, description: str = "") -> KgNode:
    node_type = node_type or TYPE_CYCLE[i % len(TYPE_CYCLE)]
    name = f"{WORDS[i % len(WORDS)].capitalize()} {i:03d}"
    if not description:
        description = f"{name} concerns {WORDS[(i * 7) % len(WORDS)]} and {WORDS[(i * 3) % len(WORDS)]}"
    return KgNode(make_node_id(name, node_type), name, node_type, description)


def random_graph(rng: random.Random, max_nodes: int = 20, edge_probability: float = 0.3) -> Ackg:
    """A random undirected graph over typed nodes."""
    graph = Ackg()
    count = rng.randint(1, max_nodes)
    nodes = [make_node(i) for i in range(count)]
    for node in nodes:
        graph.upsert_node(node)
    for i in range(count):
        for j in range(i + 1, count):
            if rng.random() < edge_probability:
                graph.add_edge(nodes[i].id, nodes[j].id, f"relates {i} {j}")
    return graph


def adjacency_of(graph: Ackg) -> Dict[str, Set[str]]:
    return {node_id: set(graph.neighbors(node_id)) for node_id in graph.nodes}


def edge_pairs(graph: Ackg) -> List[Tuple[str, str]]:
    return [edge.key for edge in graph.edges()]


def art_graph_30() -> Ackg:
    """A deterministic 30-node graph: a ring plus a few chords and hubs."""
    graph = Ackg()
    nodes = [make_node(i) for i in range(30)]
    for node in nodes:
        graph.upsert_node(node)
    for i in range(30):
        graph.add_edge(nodes[i].id, nodes[(i + 1) % 30].id, f"ring link {i}")
    for i in range(0, 30, 3):
        graph.add_edge(nodes[i].id, nodes[(i + 7) % 30].id, f"chord {i}")
    for i in (2, 11, 19):
        for j in (5, 13, 23):
            if nodes[i].id != nodes[j].id and not graph.has_edge(nodes[i].id, nodes[j].id):
                graph.add_edge(nodes[i].id, nodes[j].id, f"hub link {i} {j}")
    return graph
