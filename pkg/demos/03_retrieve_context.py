"""
Retrieving a painting-specific context subgraph
===============================================

The retriever runs in stages: detect concepts for the painting, embed the
combined query, take the top cosine seeds, grow them along high edge-degree
frontier edges, rank the candidates with the (mock) multimodal model, fuse
that ranking with full-graph degree, and keep the top few nodes plus the
edges among them. The provenance block records what every stage did.
"""

from artcontext import (
    Ackg,
    KgNode,
    MockGateway,
    NodeType,
    PaintingQuery,
    RetrieverConfig,
    build_index,
    make_node_id,
    retrieve_context,
    subgraph_to_json,
)

# ---- a fourteen-node graph around one painting's world ----

ENTITIES = [
    ("Abel Grimmer", NodeType.ARTIST, "Antwerp painter of seasons, months, and village scenes"),
    ("Pieter Bruegel the Elder", NodeType.ARTIST, "Netherlandish master of peasant life and landscape"),
    ("Jacob Grimmer", NodeType.ARTIST, "Antwerp landscape painter and father of Abel"),
    ("Hans Bol", NodeType.ARTIST, "Draughtsman whose prints carried Bruegel's motifs onward"),
    ("Seasons Cycle", NodeType.THEME, "Panel series showing the labors of each season"),
    ("Labors of the Months", NodeType.THEME, "Calendar imagery of rural work through the year"),
    ("Village Landscape", NodeType.THEME, "Everyday village life set in an open landscape"),
    ("Antwerp", NodeType.CULTURE_HISTORY, "Flemish trade metropolis and painting center around 1600"),
    ("Calendar Tradition", NodeType.CULTURE_HISTORY, "Book-of-hours calendar pages behind seasonal painting"),
    ("Guild of Saint Luke", NodeType.CULTURE_HISTORY, "Painters' guild regulating Antwerp workshops"),
    ("Flemish School", NodeType.MOVEMENT_SCHOOL, "Southern Netherlandish painting tradition"),
    ("Oil on Panel", NodeType.STYLE_TECHNIQUE, "Oil paint on prepared wooden boards"),
    ("Landscape Painting", NodeType.STYLE_TECHNIQUE, "Open country as the main subject of a picture"),
    ("Copper Engraving", NodeType.STYLE_TECHNIQUE, "Printmaking medium spreading compositions across Europe"),
]

RELATIONS = [
    ("Abel Grimmer", "Jacob Grimmer", "Abel was the son of Jacob Grimmer"),
    ("Abel Grimmer", "Seasons Cycle", "Grimmer specialised in panels of the seasons"),
    ("Abel Grimmer", "Pieter Bruegel the Elder", "Grimmer borrowed compositions Bruegel made famous"),
    ("Abel Grimmer", "Antwerp", "Grimmer lived and worked in Antwerp"),
    ("Abel Grimmer", "Guild of Saint Luke", "Grimmer entered the guild as a master in 1592"),
    ("Abel Grimmer", "Oil on Panel", "Grimmer painted small panels in oil"),
    ("Jacob Grimmer", "Antwerp", "Jacob Grimmer was active in Antwerp"),
    ("Jacob Grimmer", "Landscape Painting", "Jacob Grimmer painted landscapes"),
    ("Pieter Bruegel the Elder", "Seasons Cycle", "Bruegel set the model with his cycle of 1565"),
    ("Pieter Bruegel the Elder", "Labors of the Months", "Bruegel drew on the labors of the months"),
    ("Pieter Bruegel the Elder", "Flemish School", "Bruegel is a central figure of the school"),
    ("Seasons Cycle", "Labors of the Months", "The painted cycles descend from the labors"),
    ("Labors of the Months", "Calendar Tradition", "The labors appear on calendar pages"),
    ("Village Landscape", "Seasons Cycle", "Season panels are set in village landscapes"),
    ("Village Landscape", "Landscape Painting", "Village scenes are painted as landscapes"),
    ("Antwerp", "Guild of Saint Luke", "The guild regulated Antwerp workshops"),
    ("Antwerp", "Flemish School", "Antwerp was a center of the school"),
    ("Flemish School", "Oil on Panel", "Panel was the school's preferred support"),
    ("Hans Bol", "Copper Engraving", "Bol made designs for engravings"),
    ("Hans Bol", "Pieter Bruegel the Elder", "Bol spread Bruegel's motifs in print"),
    ("Copper Engraving", "Antwerp", "Antwerp publishers printed the engravings"),
]


def build_demo_graph():
    graph = Ackg()
    ids = {}
    for name, node_type, description in ENTITIES:
        node_id = make_node_id(name, node_type)
        ids[name] = node_id
        graph.upsert_node(KgNode(node_id, name, node_type, description))
    for source, target, description in RELATIONS:
        graph.add_edge(ids[source], ids[target], description)
    return graph


graph = build_demo_graph()
print(f"graph: {graph.node_count} nodes, {graph.edge_count} edges")

# ---- scripted model replies ----
# Concept detection and candidate ranking are chat calls, so the mock keys
# on a marker phrase from each prompt template and returns a canned reply.

gateway = MockGateway({
    "Task: concept detection": (
        "1. Rural landscape\n"
        "2. Agricultural life\n"
        "3. Flemish village scenes\n"
        "4. Seasonal labor\n"
        "5. Everyday devotion"
    ),
    "Task: candidate ranking": "7, 3, 10, 1, 5, 2, 9, 4, 8, 6",
})
index = build_index(gateway, graph)

painting = PaintingQuery(attributes={
    "title": "Summer",
    "artist": "Abel Grimmer",
    "technique": "oil on panel",
    "timeframe": "1607",
    "type": "landscape",
    "school": "Flemish",
})

# ---- run the pipeline and walk the provenance ----

subgraph = retrieve_context(gateway, graph, index, painting)
trail = subgraph.provenance

print("\nquery text sent to the embedder:")
for line in trail.query_text.splitlines():
    print(f"  {line}")

print(f"\ncoarse seeds (top {len(trail.seeds)} by cosine):")
for node_id in trail.seeds:
    print(f"  {node_id}")
print("added by edge-degree expansion:")
for node_id in trail.expansion_added:
    print(f"  {node_id}")
print(f"model ranking used fallback: {trail.ranking_fallback}")

print("\nfinal subgraph, score descending:")
print(f"{'node':<38} {'s_ms':>6} {'s_gc':>6} {'s':>8}")
for node, scores in zip(subgraph.nodes, subgraph.scores):
    print(f"{node.id:<38} {scores.s_ms:>6.1f} {scores.s_gc:>6.1f} {scores.s:>8.4f}")
print("edges kept (both endpoints inside):")
for edge in subgraph.edges:
    print(f"  {edge.source} -- {edge.target}")

# ---- the fusion weight trades ranking against centrality ----
# lambda 1.0 trusts the model ranking alone, lambda 0.0 reduces to graph
# degree. The default 0.5 blends them.

for lam in (1.0, 0.0):
    alt = retrieve_context(gateway, graph, index, painting, RetrieverConfig(lam=lam))
    names = [node.name for node in alt.nodes]
    print(f"\nlambda {lam}: {names}")

# The whole result serializes to canonical JSON; this exact text is what the
# CLI prints and the HTTP service returns.
print("\nserialized form starts:")
for line in subgraph_to_json(subgraph).splitlines()[:9]:
    print(f"  {line}")
