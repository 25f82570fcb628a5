"""
Building an art context knowledge graph from a tiny corpus
==========================================================

Walks the construction pipeline one stage at a time: manifest, chunking,
LLM extraction, aggregation into a typed graph, near-duplicate cleaning,
and persistence. Everything runs offline: the mock gateway answers each
document's extraction prompt with a canned reply keyed on a phrase from
that document.
"""

import json
import tempfile
from pathlib import Path

from artcontext import (
    MockGateway,
    NodeType,
    aggregate_candidates,
    chunk_document,
    dedup_nodes,
    extract_candidates,
    filter_by_type,
    load_graph,
    load_manifest,
    save_graph,
)

# ---- a two-document corpus ----
# Note the two spellings of Bruegel: doc 1 writes "Brueghel", doc 2 writes
# "Bruegel". The cleaner has to reconcile them later.

GRIMMER_DOC = (
    "Abel Grimmer was baptised in Antwerp in 1570, the son of the landscape "
    "painter Jacob Grimmer. He entered the Guild of Saint Luke as a master "
    "in 1592 and specialised in small panels of the seasons, the months, and "
    "village life, often borrowing compositions that Pieter Brueghel the "
    "Elder had made famous a generation earlier. His Summer of 1607 shows "
    "grain harvest beside a village church."
)

CALENDAR_DOC = (
    "The calendar cycles descend from the labors of the months painted in "
    "books of hours. Flemish workshops around 1600 turned these calendar "
    "pages into series of panel paintings, one for each season. Pieter "
    "Bruegel the Elder set the model with his cycle of 1565, and Antwerp "
    "painters kept the format alive for the export market."
)

GRIMMER_EXTRACTION = """\
("entity"<|>ABEL GRIMMER<|>Artist<|>Antwerp painter of seasons, months, and village scenes)
("entity"<|>JACOB GRIMMER<|>Artist<|>Antwerp landscape painter and father of Abel Grimmer)
("entity"<|>PIETER BRUEGHEL THE ELDER<|>Artist<|>Master whose compositions Abel Grimmer borrowed)
("entity"<|>ANTWERP<|>Culture & History<|>Flemish trade metropolis and painting center)
("entity"<|>GUILD OF SAINT LUKE<|>Culture & History<|>Painters' guild that admitted Grimmer as master in 1592)
("entity"<|>SEASONS CYCLE<|>Theme<|>Series of panels showing the labors of each season)
("relationship"<|>ABEL GRIMMER<|>JACOB GRIMMER<|>Abel was the son of Jacob Grimmer)
("relationship"<|>ABEL GRIMMER<|>GUILD OF SAINT LUKE<|>Grimmer entered the guild as a master in 1592)
("relationship"<|>ABEL GRIMMER<|>SEASONS CYCLE<|>Grimmer specialised in panels of the seasons)
("relationship"<|>ABEL GRIMMER<|>PIETER BRUEGHEL THE ELDER<|>Grimmer borrowed compositions Brueghel made famous)
"""

CALENDAR_EXTRACTION = """\
("entity"<|>LABORS OF THE MONTHS<|>Theme<|>Calendar imagery of rural work through the year)
("entity"<|>BOOKS OF HOURS<|>Culture & History<|>Devotional manuscripts whose calendar pages carried month scenes)
("entity"<|>PIETER BRUEGEL THE ELDER<|>Artist<|>Set the model for painted season cycles with his 1565 series)
("entity"<|>SEASONS CYCLE<|>Theme<|>Panel series with one painting for each season)
("entity"<|>ANTWERP<|>Culture & History<|>Export center where workshops kept the format alive)
("relationship"<|>SEASONS CYCLE<|>LABORS OF THE MONTHS<|>The painted cycles descend from the labors of the months)
("relationship"<|>LABORS OF THE MONTHS<|>BOOKS OF HOURS<|>The labors were painted in books of hours)
("relationship"<|>PIETER BRUEGEL THE ELDER<|>SEASONS CYCLE<|>Bruegel set the model with his cycle of 1565)
("relationship"<|>ANTWERP<|>SEASONS CYCLE<|>Antwerp workshops produced the cycles for export)
"""

# Each marker is a phrase that appears only in that document's chunk, so the
# mock returns the right canned extraction for each prompt.
gateway = MockGateway({
    "baptised in Antwerp in 1570": GRIMMER_EXTRACTION,
    "calendar cycles descend": CALENDAR_EXTRACTION,
})

workdir = Path(tempfile.mkdtemp(prefix="artcontext-demo-"))
(workdir / "grimmer.txt").write_text(GRIMMER_DOC, encoding="utf-8")
(workdir / "calendar.txt").write_text(CALENDAR_DOC, encoding="utf-8")
manifest_path = workdir / "manifest.json"
manifest_path.write_text(json.dumps([
    {"id": "grimmer", "path": str(workdir / "grimmer.txt"), "category": "Artists"},
    {"id": "calendar", "path": str(workdir / "calendar.txt"), "category": "CulturalEvents"},
], indent=2))

manifest = load_manifest(str(manifest_path))
print(f"manifest: {len(manifest.entries)} documents in {workdir}")

# ---- stage 1: chunking ----
# These documents are far below the default 1000-token window, so each one
# becomes a single chunk. Longer documents get overlapping windows.

chunks = []
for entry in sorted(manifest.entries, key=lambda e: e.id):
    text = Path(entry.path).read_text(encoding="utf-8")
    chunks.extend(chunk_document(text, 1000, 100, doc_id=entry.id))
for chunk in chunks:
    print(f"chunk {chunk.doc_id}#{chunk.index}: tokens [{chunk.start}, {chunk.end})")

# ---- stage 2: extraction, one chat call per chunk ----

entity_types = [t.value for t in NodeType]
records = []
for chunk in chunks:
    found = extract_candidates(gateway, chunk, entity_types)
    print(f"chunk {chunk.doc_id}#{chunk.index}: {len(found)} records")
    records.extend(found)

# ---- stage 3: aggregate into a raw graph ----
# Repeated mentions of the same name and type land on one node; their
# descriptions are joined. ANTWERP and SEASONS CYCLE appear in both
# documents, so the raw graph already has fewer nodes than entity records.

raw_graph, warnings = aggregate_candidates(records)
print(f"\nraw graph: {raw_graph.node_count} nodes, {raw_graph.edge_count} edges")
for warning in warnings:
    print(f"  warning: {warning}")

antwerp = raw_graph.nodes["antwerp::culture_history"]
print(f"merged description for ANTWERP:\n  {antwerp.description}")

# ---- stage 4: clean near-duplicate names ----
# "PIETER BRUEGHEL THE ELDER" and "PIETER BRUEGEL THE ELDER" differ by one
# letter. Their similarity is 0.96, above the 0.95 bar, so they merge; the
# alphabetically earlier spelling survives and the borrowed-composition edge
# is re-pointed onto the surviving node.

graph, report = dedup_nodes(raw_graph, 0.95)
graph, removed = filter_by_type(graph)
print()
print(report.render())
for gone in removed:
    print(f"filtered: {gone.name} ({gone.reason})")

# ---- stage 5: persist and summarize ----

graph_path = workdir / "graph.jsonl"
save_graph(graph, str(graph_path))
reloaded = load_graph(str(graph_path))
assert reloaded.node_count == graph.node_count

print(f"\nsaved to {graph_path}")
print("first two lines of the file:")
with open(graph_path, encoding="utf-8") as handle:
    for _ in range(2):
        print("  " + next(handle).rstrip())

print()
print(graph.stats().render())
