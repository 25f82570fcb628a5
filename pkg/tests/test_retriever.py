import json
import math
import random

import pytest

from artcontext import (
    Ackg,
    ConceptDetectionError,
    KgNode,
    MockGateway,
    NodeType,
    PaintingQuery,
    PipelineError,
    RetrieverConfig,
    ScoredNode,
    ValidationError,
    build_index,
    build_query_text,
    centrality_scores,
    coarse_retrieve,
    combine_scores,
    detect_concepts,
    expand_by_edge_degree,
    mock_embedding,
    parse_concept_lines,
    parse_rank_numbers,
    prune_to_subgraph,
    rank_multimodal,
    retrieve_context,
    softmax,
    subgraph_to_dict,
    subgraph_to_json,
    top_k,
)

import oracles
from conftest import CONCEPT_FIXTURE, DEFAULT_FIXTURES


def theme(graph, node_id, name=None, description="d"):
    node = KgNode(node_id, name or node_id.split("::")[0], NodeType.THEME, description)
    graph.upsert_node(node)
    return node


# ---- painting query ----

def test_painting_requires_image_or_attributes():
    with pytest.raises(ValidationError):
        PaintingQuery().validate()
    PaintingQuery(image=b"\x01").validate()
    PaintingQuery(attributes={"title": "Summer"}).validate()


def test_attribute_lines_fixed_order_then_extras_sorted():
    painting = PaintingQuery(attributes={
        "school": "Flemish",
        "title": "Summer",
        "zzz": "last",
        "artist": "Abel Grimmer",
        "aaa": "first extra",
        "type": "",
    })
    assert painting.attribute_lines() == [
        "title: Summer",
        "artist: Abel Grimmer",
        "school: Flemish",
        "aaa: first extra",
        "zzz: last",
    ]


# ---- concept detection ----

def test_parse_concept_lines_mixed_markers():
    text = "Sure, here they are:\n1. Harvest\n2) Village life\n- Flemish school\n* Devotion\n\nnothing else"
    assert parse_concept_lines(text) == ["Harvest", "Village life", "Flemish school", "Devotion"]


def test_detect_concepts_exactly_n(painting):
    gateway = MockGateway(dict(DEFAULT_FIXTURES))
    result = detect_concepts(gateway, painting, 5)
    assert result.concepts == [
        "Rural landscape",
        "Agricultural life",
        "Flemish village scenes",
        "Seasonal labor",
        "Everyday devotion",
    ]
    assert len(gateway.calls) == 1


def test_detect_concepts_truncates_extras(painting):
    gateway = MockGateway(dict(DEFAULT_FIXTURES))
    result = detect_concepts(gateway, painting, 3)
    assert result.concepts == ["Rural landscape", "Agricultural life", "Flemish village scenes"]


def test_detect_concepts_pads_from_attributes(painting):
    gateway = MockGateway({"Task: concept detection": "1. Harvest"})
    result = detect_concepts(gateway, painting, 4)
    assert result.concepts[0] == "Harvest"
    assert len(result.concepts) == 4
    assert result.concepts[1:] == ["Summer", "Abel Grimmer", "oil on panel"]
    assert len(gateway.calls) == 2  # short answer triggered one retry


def test_detect_concepts_cycles_when_attributes_run_out():
    painting = PaintingQuery(attributes={"title": "Summer"})
    gateway = MockGateway({"Task: concept detection": "1. Harvest"})
    result = detect_concepts(gateway, painting, 4)
    assert result.concepts == ["Harvest", "Summer", "Harvest", "Summer"]


def test_detect_concepts_no_list_is_an_error(painting):
    gateway = MockGateway({"Task: concept detection": "I cannot see the painting."})
    with pytest.raises(ConceptDetectionError):
        detect_concepts(gateway, painting, 5)
    assert len(gateway.calls) == 2  # the retry happened


def test_detect_concepts_prompt_carries_metadata_and_image(painting):
    gateway = MockGateway(dict(DEFAULT_FIXTURES))
    painting.image = b"\x89PNG fake"
    detect_concepts(gateway, painting, 5)
    request = gateway.calls[0]
    assert "title: Summer" in request.full_text()
    assert len(request.image_attachments) == 1


# ---- query text ----

def test_build_query_text_layout(painting):
    text = build_query_text(painting.attributes, ["Harvest", " Village life "])
    assert text.splitlines()[0] == "title: Summer"
    assert text.splitlines()[-1] == "Concepts: Harvest; Village life"


def test_build_query_text_requires_content():
    with pytest.raises(ValidationError):
        build_query_text({}, ["", "  "])
    assert build_query_text({}, ["Harvest"]) == "Concepts: Harvest"


# ---- coarse retrieval ----

def test_coarse_retrieve_orders_by_similarity(art_graph, art_index):
    vector = mock_embedding("Pastoral 012 concerns loom and panel").values
    seeds = coarse_retrieve(art_index, vector, 5)
    assert len(seeds) == 5
    expected = [h.node_id for h in top_k(art_index, vector, 5)]
    assert seeds == expected


def test_coarse_retrieve_empty_index():
    index = build_index(MockGateway(), Ackg())
    assert coarse_retrieve(index, [1.0, 0.0], 5) == []


# ---- expansion ----

def hub_chain_graph():
    graph = Ackg()
    for node_id in ("h::theme", "l1::theme", "l2::theme", "l3::theme", "l4::theme",
                    "x::theme", "y::theme", "z1::theme", "z2::theme", "z3::theme",
                    "z4::theme", "z5::theme"):
        theme(graph, node_id)
    for leaf in ("l1", "l2", "l3", "l4"):
        graph.add_edge("h::theme", f"{leaf}::theme", "spoke")
    graph.add_edge("h::theme", "x::theme", "bridge")
    graph.add_edge("x::theme", "y::theme", "bridge")
    for z in ("z1", "z2", "z3", "z4", "z5"):
        graph.add_edge("y::theme", f"{z}::theme", "fan")
    return graph


def test_expand_recomputes_frontier_after_each_addition():
    graph = hub_chain_graph()
    # h-x has edge degree 5 and beats the spokes (4); once x is in, x-y has
    # degree 6 and must win immediately, which a static frontier would miss.
    got = expand_by_edge_degree(graph, ["h::theme"], 4)
    assert got == ["h::theme", "x::theme", "y::theme", "z1::theme"]


def test_expand_breaks_edge_degree_ties_on_edge_key():
    graph = Ackg()
    for node_id in ("c::theme", "b::theme", "a::theme"):
        theme(graph, node_id)
    graph.add_edge("c::theme", "b::theme", "x")
    graph.add_edge("c::theme", "a::theme", "y")
    got = expand_by_edge_degree(graph, ["c::theme"], 2)
    assert got == ["c::theme", "a::theme"]


def test_expand_stops_at_component_boundary():
    graph = Ackg()
    for node_id in ("a::theme", "b::theme", "c::theme"):
        theme(graph, node_id)
    graph.add_edge("a::theme", "b::theme", "x")
    got = expand_by_edge_degree(graph, ["a::theme"], 10)
    assert got == ["a::theme", "b::theme"]


def test_expand_keeps_seed_order_and_dedupes():
    graph = hub_chain_graph()
    got = expand_by_edge_degree(graph, ["y::theme", "h::theme", "y::theme"], 2)
    assert got == ["y::theme", "h::theme"]


def test_expand_validates_inputs():
    graph = hub_chain_graph()
    with pytest.raises(ValidationError):
        expand_by_edge_degree(graph, ["ghost::theme"], 5)
    with pytest.raises(ValidationError):
        expand_by_edge_degree(graph, ["h::theme", "x::theme"], 1)


def test_expand_never_evicts_seeds(art_graph):
    ids = sorted(art_graph.nodes)
    seeds = [ids[0], ids[17]]
    got = expand_by_edge_degree(art_graph, seeds, 10)
    assert got[:2] == seeds
    assert len(got) == 10
    assert len(set(got)) == 10


# ---- ranking ----

def test_parse_rank_numbers_dedupes_and_bounds():
    assert parse_rank_numbers("3, 1, 3, 99, 2", 5) == [3, 1, 2]
    assert parse_rank_numbers("no digits here", 5) == []


def test_rank_multimodal_linear_scores(painting):
    graph = Ackg()
    candidates = [theme(graph, f"c{i}::theme") for i in range(1, 5)]
    gateway = MockGateway({"Task: candidate ranking": "2, 4, 1, 3"})
    ranking = rank_multimodal(gateway, painting, candidates)
    assert ranking.ranked_ids == ["c2::theme", "c4::theme", "c1::theme", "c3::theme"]
    assert ranking.s_ms == {"c2::theme": 4.0, "c4::theme": 3.0, "c1::theme": 2.0, "c3::theme": 1.0}
    assert not ranking.used_fallback


def test_rank_multimodal_appends_omissions_in_id_order(painting):
    graph = Ackg()
    candidates = [theme(graph, f"c{i}::theme") for i in range(1, 6)]
    gateway = MockGateway({"Task: candidate ranking": "4, 2"})
    ranking = rank_multimodal(gateway, painting, candidates)
    assert ranking.ranked_ids == [
        "c4::theme", "c2::theme", "c1::theme", "c3::theme", "c5::theme",
    ]
    assert ranking.s_ms["c4::theme"] == 5.0
    assert ranking.s_ms["c5::theme"] == 1.0


def test_rank_multimodal_fallback_after_retry(painting):
    graph = Ackg()
    candidates = [theme(graph, f"c{i}::theme") for i in range(1, 4)]
    gateway = MockGateway({"Task: candidate ranking": "I would rather not rank."})
    ranking = rank_multimodal(
        gateway, painting, candidates, fallback_order=["c3::theme", "c1::theme", "c2::theme"]
    )
    assert ranking.used_fallback
    assert ranking.ranked_ids == ["c3::theme", "c1::theme", "c2::theme"]
    assert len(gateway.calls) == 2


def test_rank_multimodal_reciprocal_mode(painting):
    graph = Ackg()
    candidates = [theme(graph, f"c{i}::theme") for i in range(1, 4)]
    gateway = MockGateway({"Task: candidate ranking": "3, 1, 2"})
    ranking = rank_multimodal(gateway, painting, candidates, rank_mode="reciprocal")
    assert ranking.s_ms == {
        "c3::theme": 1.0,
        "c1::theme": 0.5,
        "c2::theme": pytest.approx(1.0 / 3.0),
    }


def test_rank_multimodal_lists_candidates_in_prompt(painting):
    graph = Ackg()
    candidates = [
        theme(graph, "night watch::theme", "Night Watch", "militia group portrait"),
    ]
    gateway = MockGateway({"Task: candidate ranking": "1"})
    rank_multimodal(gateway, painting, candidates)
    prompt = gateway.calls[0].full_text()
    assert "1. Night Watch (Theme): militia group portrait" in prompt


def test_rank_multimodal_rejects_empty(painting):
    with pytest.raises(ValidationError):
        rank_multimodal(MockGateway(), painting, [])


# ---- scoring ----

def test_centrality_is_full_graph_degree(art_graph):
    ids = sorted(art_graph.nodes)[:4]
    scores = centrality_scores(art_graph, ids)
    for node_id in ids:
        assert scores[node_id] == float(art_graph.degree(node_id))


def test_softmax_fixed_two_values():
    assert softmax([2.0, 1.0]) == [
        pytest.approx(0.7310585786300049, abs=1e-15),
        pytest.approx(0.2689414213699951, abs=1e-15),
    ]


def test_softmax_sums_to_one_and_matches_unshifted_oracle():
    rng = random.Random(41)
    for _ in range(50):
        values = [rng.uniform(-5, 5) for _ in range(rng.randrange(1, 12))]
        got = softmax(values)
        assert math.isclose(sum(got), 1.0, abs_tol=1e-9)
        expected = oracles.softmax_unshifted(values)
        assert all(math.isclose(g, e, abs_tol=1e-12) for g, e in zip(got, expected))


def test_softmax_shift_invariance_is_exact():
    values = [3.0, 1.0, 4.0, 1.0, 5.0]
    for shift in (-9.0, 2.5, 100.0):
        assert softmax([v + shift for v in values]) == softmax(values)


def test_softmax_empty_rejected():
    with pytest.raises(ValidationError):
        softmax([])


def test_combine_scores_fixed_case():
    scored = [ScoredNode("a::theme", 2.0, 0.0), ScoredNode("b::theme", 1.0, 0.0)]
    combine_scores(scored, 0.5)
    assert scored[0].s == pytest.approx(0.6155292893150024, abs=1e-15)
    assert scored[1].s == pytest.approx(0.38447071068499755, abs=1e-15)
    assert sum(sn.s for sn in scored) == pytest.approx(1.0, abs=1e-12)


def test_combine_scores_lambda_extremes_follow_components():
    rng = random.Random(42)
    for _ in range(50):
        count = rng.randrange(2, 9)
        scored = [
            ScoredNode(f"n{i:02d}::theme", float(rng.randrange(0, 50)), float(rng.randrange(0, 20)))
            for i in range(count)
        ]
        pure_ms = combine_scores([ScoredNode(s.node_id, s.s_ms, s.s_gc) for s in scored], 1.0)
        order_ms = [s.node_id for s in sorted(pure_ms, key=lambda s: (-s.s, s.node_id))]
        by_ms = [s.node_id for s in sorted(scored, key=lambda s: (-s.s_ms, s.node_id))]
        assert order_ms == by_ms
        pure_gc = combine_scores([ScoredNode(s.node_id, s.s_ms, s.s_gc) for s in scored], 0.0)
        order_gc = [s.node_id for s in sorted(pure_gc, key=lambda s: (-s.s, s.node_id))]
        by_gc = [s.node_id for s in sorted(scored, key=lambda s: (-s.s_gc, s.node_id))]
        assert order_gc == by_gc


def test_combine_scores_validates():
    with pytest.raises(ValidationError):
        combine_scores([], 0.5)
    with pytest.raises(ValidationError):
        combine_scores([ScoredNode("a::theme", 1.0, 1.0)], 1.5)


# ---- pruning ----

def test_prune_keeps_top_m_with_id_tiebreak(art_graph):
    ids = sorted(art_graph.nodes)[:6]
    scored = [ScoredNode(nid, 0.0, 0.0, s=1.0) for nid in ids[:3]]
    scored += [ScoredNode(nid, 0.0, 0.0, s=0.5) for nid in ids[3:]]
    subgraph = prune_to_subgraph(art_graph, scored, 2)
    assert subgraph.node_ids == sorted(ids[:3])[:2]
    assert oracles.top_m_ids([(sn.node_id, sn.s) for sn in scored], 2) == subgraph.node_ids


def test_prune_includes_induced_edges_only(art_graph):
    ids = sorted(art_graph.nodes)
    scored = [ScoredNode(nid, 0.0, 0.0, s=1.0 - i * 0.01) for i, nid in enumerate(ids[:8])]
    subgraph = prune_to_subgraph(art_graph, scored, 5)
    kept = set(subgraph.node_ids)
    assert len(kept) == 5
    expected = [e.key for e in art_graph.induced_edges(kept)]
    assert [e.key for e in subgraph.edges] == expected
    for edge in subgraph.edges:
        assert edge.source in kept and edge.target in kept


def test_prune_rejects_bad_m(art_graph):
    with pytest.raises(ValidationError):
        prune_to_subgraph(art_graph, [ScoredNode("x::theme", 0, 0)], 0)


# ---- end to end ----

def test_retrieve_context_full_pipeline(art_graph, art_index, scripted_gateway, painting):
    subgraph = retrieve_context(scripted_gateway, art_graph, art_index, painting)
    assert len(subgraph.nodes) == 5
    assert len(subgraph.scores) == 5
    ids = set(subgraph.node_ids)
    for edge in subgraph.edges:
        assert edge.source in ids and edge.target in ids
    scores = [sn.s for sn in subgraph.scores]
    assert scores == sorted(scores, reverse=True)
    assert sum(sn.s for sn in subgraph.scores) <= 1.0 + 1e-9
    prov = subgraph.provenance
    assert prov.concepts == parse_concept_lines(CONCEPT_FIXTURE)
    assert len(prov.seeds) == 5
    assert len(prov.seeds) + len(prov.expansion_added) == 10
    assert len(prov.ranked) == 10
    assert not prov.ranking_fallback
    assert prov.query_text.startswith("title: Summer")
    assert prov.query_text.endswith(
        "Concepts: Rural landscape; Agricultural life; Flemish village scenes; "
        "Seasonal labor; Everyday devotion"
    )


def test_retrieve_context_is_deterministic(art_graph, art_index, painting):
    renders = set()
    for _ in range(5):
        gateway = MockGateway(dict(DEFAULT_FIXTURES))
        subgraph = retrieve_context(gateway, art_graph, art_index, painting)
        renders.add(subgraph_to_json(subgraph))
    assert len(renders) == 1


def test_retrieve_context_respects_config(art_graph, art_index, scripted_gateway, painting):
    config = RetrieverConfig(k_coarse=3, k_expanded=6, m=2, lam=0.25, n_concepts=2)
    subgraph = retrieve_context(scripted_gateway, art_graph, art_index, painting, config)
    assert len(subgraph.nodes) == 2
    assert len(subgraph.provenance.seeds) == 3
    assert len(subgraph.provenance.concepts) == 2


def test_retrieve_context_lambda_extremes_change_selection(art_graph, art_index, painting):
    def run(lam):
        gateway = MockGateway(dict(DEFAULT_FIXTURES))
        config = RetrieverConfig(lam=lam)
        return retrieve_context(gateway, art_graph, art_index, painting, config)

    pure_rank = run(1.0)
    ranked = pure_rank.provenance.ranked
    assert pure_rank.node_ids == ranked[:5]  # top of the rank list wins
    pure_centrality = run(0.0)
    candidates = pure_centrality.provenance.seeds + pure_centrality.provenance.expansion_added
    best = sorted(candidates, key=lambda nid: (-art_graph.degree(nid), nid))[:5]
    assert pure_centrality.node_ids == best


def test_retrieve_context_ranking_fallback_flagged(art_graph, art_index, painting):
    fixtures = dict(DEFAULT_FIXTURES)
    fixtures["Task: candidate ranking"] = "no usable permutation"
    gateway = MockGateway(fixtures)
    subgraph = retrieve_context(gateway, art_graph, art_index, painting)
    assert subgraph.provenance.ranking_fallback
    assert len(subgraph.nodes) == 5


def test_retrieve_context_empty_graph_yields_empty_subgraph(painting, scripted_gateway):
    graph = Ackg()
    index = build_index(MockGateway(), graph)
    subgraph = retrieve_context(scripted_gateway, graph, index, painting)
    assert subgraph.nodes == [] and subgraph.edges == [] and subgraph.scores == []
    assert subgraph.provenance.concepts  # the stages before retrieval still ran


def test_retrieve_context_stage_tag_on_failure(art_graph, art_index, painting):
    class ExplodingGateway:
        def chat(self, request):
            raise RuntimeError("socket closed")

        def embed(self, texts):
            raise RuntimeError("socket closed")

    with pytest.raises(PipelineError) as excinfo:
        retrieve_context(ExplodingGateway(), art_graph, art_index, painting)
    assert excinfo.value.stage == "concepts"
    assert str(excinfo.value).startswith("[concepts]")


def test_retrieve_context_validates_config(art_graph, art_index, scripted_gateway, painting):
    with pytest.raises(ValidationError):
        retrieve_context(
            scripted_gateway, art_graph, art_index, painting, RetrieverConfig(k_coarse=9, k_expanded=5)
        )


# ---- rendering ----

def test_subgraph_json_shape(art_graph, art_index, scripted_gateway, painting):
    subgraph = retrieve_context(scripted_gateway, art_graph, art_index, painting)
    payload = json.loads(subgraph_to_json(subgraph))
    assert set(payload) == {"nodes", "edges", "provenance"}
    for node in payload["nodes"]:
        assert set(node) == {"id", "name", "type", "description", "s_ms", "s_gc", "s"}
    for edge in payload["edges"]:
        assert set(edge) == {"source", "target", "description"}
    assert payload["provenance"]["ranking_fallback"] is False
    assert payload == subgraph_to_dict(subgraph)
