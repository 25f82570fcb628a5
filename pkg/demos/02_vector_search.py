"""
Embedding graph nodes and searching them by cosine similarity
=============================================================

Each node is rendered to one line of text, embedded, and stacked into an
in-memory matrix. Search is exhaustive cosine over that matrix. The mock
gateway's embeddings are hash buckets over tokens, not semantics, but they
are deterministic and shared tokens still pull vectors together, which is
all the demo needs.
"""

import tempfile
from pathlib import Path

from artcontext import (
    Ackg,
    KgNode,
    MockGateway,
    NodeType,
    build_index,
    cosine,
    load_index,
    make_node_id,
    node_text,
    save_index,
    top_k,
)

# ---- a hand-written eight-node graph ----

ENTITIES = [
    ("Abel Grimmer", NodeType.ARTIST, "Antwerp painter of seasons and village scenes"),
    ("Pieter Bruegel the Elder", NodeType.ARTIST, "Netherlandish master of peasant life and landscape"),
    ("Seasons Cycle", NodeType.THEME, "Panel series showing the labors of each season"),
    ("Village Landscape", NodeType.THEME, "Everyday village life set in an open landscape"),
    ("Antwerp", NodeType.CULTURE_HISTORY, "Flemish trade metropolis and painting center"),
    ("Flemish School", NodeType.MOVEMENT_SCHOOL, "Southern Netherlandish painting tradition"),
    ("Oil on Panel", NodeType.STYLE_TECHNIQUE, "Oil paint on prepared wooden boards"),
    ("Landscape Painting", NodeType.STYLE_TECHNIQUE, "Open country as the main subject of a picture"),
]

graph = Ackg()
for name, node_type, description in ENTITIES:
    graph.upsert_node(KgNode(make_node_id(name, node_type), name, node_type, description))

sample = graph.nodes["abel grimmer::artist"]
print("a node embeds as this single line:")
print(f"  {node_text(sample)}")

# ---- build the index ----

gateway = MockGateway()
index = build_index(gateway, graph)
print(f"\nindex: {index.count} vectors, {index.dim} dimensions")

# ---- query it ----
# The mock hashes whitespace tokens, so scores grow with shared tokens:
# the first query shares five with the Seasons Cycle line, the second four
# with the Oil on Panel line, and the runners-up only one or two.

for query in ("the labors of each season", "oil paint on wooden boards"):
    vector = gateway.embed([query])[0].values
    print(f"\ntop 3 for {query!r}:")
    for hit in top_k(index, vector, 3):
        print(f"  {hit.similarity:.4f}  {hit.node_id}")

# Identical token multisets embed identically, word order does not matter.
a = gateway.embed(["harvest village summer"])[0].values
b = gateway.embed(["summer harvest village"])[0].values
print(f"\ncosine of reordered queries: {cosine(a, b):.1f}")

# ---- persistence round trip ----
# The matrix goes to a small binary file (header, then float32 rows) with a
# JSON sidecar of node ids. Loading restores the exact same vectors.

workdir = Path(tempfile.mkdtemp(prefix="artcontext-demo-"))
index_path = workdir / "index.bin"
save_index(index, str(index_path))
reloaded = load_index(str(index_path))
assert reloaded.ids == index.ids

size = index_path.stat().st_size
print(f"\nsaved {size} bytes to {index_path}")
query = gateway.embed(["seasons cycle"])[0].values
before = [(h.node_id, round(h.similarity, 6)) for h in top_k(index, query, 3)]
after = [(h.node_id, round(h.similarity, 6)) for h in top_k(reloaded, query, 3)]
print(f"same results after reload: {before == after}")
