"""
Generating a context-grounded explanation of a painting
=======================================================

explain() chains retrieval and generation: fetch the context subgraph,
linearize it into entity and relation lines, assemble the full prompt
(system text, few-shot examples, metadata, context, instruction), and send
one chat call. The result keeps the exact prompt and the ids it cited, so
every explanation can be audited.
"""

from artcontext import (
    Ackg,
    KgNode,
    MockGateway,
    NodeType,
    PaintingQuery,
    build_index,
    explain,
    make_node_id,
)

# ---- an eight-node graph, the painting's immediate world ----

ENTITIES = [
    ("Abel Grimmer", NodeType.ARTIST, "Antwerp painter of seasons, months, and village scenes"),
    ("Pieter Bruegel the Elder", NodeType.ARTIST, "Netherlandish master of peasant life and landscape"),
    ("Seasons Cycle", NodeType.THEME, "Panel series showing the labors of each season"),
    ("Labors of the Months", NodeType.THEME, "Calendar imagery of rural work through the year"),
    ("Village Landscape", NodeType.THEME, "Everyday village life set in an open landscape"),
    ("Antwerp", NodeType.CULTURE_HISTORY, "Flemish trade metropolis and painting center around 1600"),
    ("Flemish School", NodeType.MOVEMENT_SCHOOL, "Southern Netherlandish painting tradition"),
    ("Oil on Panel", NodeType.STYLE_TECHNIQUE, "Oil paint on prepared wooden boards"),
]

RELATIONS = [
    ("Abel Grimmer", "Seasons Cycle", "Grimmer specialised in panels of the seasons"),
    ("Abel Grimmer", "Pieter Bruegel the Elder", "Grimmer borrowed compositions Bruegel made famous"),
    ("Abel Grimmer", "Antwerp", "Grimmer lived and worked in Antwerp"),
    ("Abel Grimmer", "Oil on Panel", "Grimmer painted small panels in oil"),
    ("Pieter Bruegel the Elder", "Seasons Cycle", "Bruegel set the model with his cycle of 1565"),
    ("Pieter Bruegel the Elder", "Flemish School", "Bruegel is a central figure of the school"),
    ("Seasons Cycle", "Labors of the Months", "The painted cycles descend from the labors"),
    ("Seasons Cycle", "Village Landscape", "Season panels are set in village landscapes"),
    ("Antwerp", "Flemish School", "Antwerp was a center of the school"),
    ("Flemish School", "Oil on Panel", "Panel was the school's preferred support"),
]

graph = Ackg()
ids = {}
for name, node_type, description in ENTITIES:
    node_id = make_node_id(name, node_type)
    ids[name] = node_id
    graph.upsert_node(KgNode(node_id, name, node_type, description))
for source, target, description in RELATIONS:
    graph.add_edge(ids[source], ids[target], description)

# ---- scripted replies for all three chat stages ----

EXPLANATION = (
    "Grimmer's Summer sets the grain harvest beside a village church, a "
    "scene inherited from the labors of the months on calendar pages and "
    "from Bruegel's painted season cycles. The small oil on panel format "
    "and the matter-of-fact village setting are typical of Antwerp "
    "workshop production around 1600."
)

FOCUSED_ANSWER = (
    "The panel is one station of a seasons cycle, the painted descendant "
    "of the calendar pages in books of hours, so its harvest scene stands "
    "for a month of the rural year rather than a single observed day."
)

gateway = MockGateway({
    "Task: concept detection": (
        "1. Rural landscape\n"
        "2. Agricultural life\n"
        "3. Flemish village scenes\n"
        "4. Seasonal labor\n"
        "5. Everyday devotion"
    ),
    "Task: candidate ranking": "3, 1, 7, 5, 2, 8, 4, 6",
    "Describe and explain this painting": EXPLANATION,
    "relate to the calendar tradition": FOCUSED_ANSWER,
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

# ---- the default instruction ----

result = explain(gateway, graph, index, painting)

print("context nodes the prompt cites:")
for node_id in result.cited_nodes:
    print(f"  {node_id}")

print("\nthe assembled prompt, verbatim:")
print("-" * 72)
print(result.prompt)
print("-" * 72)

print("\nexplanation:")
print(result.explanation)
if result.usage:
    prompt_words, completion_words = result.usage
    print(f"\nusage: {prompt_words} prompt words, {completion_words} completion words")

# ---- asking a specific question instead ----
# The question replaces the default instruction inside the same template.

focused = explain(
    gateway, graph, index, painting,
    question="How does this panel relate to the calendar tradition?",
)
print("\nfocused question answer:")
print(focused.explanation)
