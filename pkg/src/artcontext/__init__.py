"""Provider-agnostic graph-RAG pipeline for artwork explanation.

Build a typed art-context knowledge graph from a corpus, retrieve a
painting-specific subgraph with a multi-granularity structured retriever,
and generate grounded explanations, all behind a mockable LLM gateway.
"""

from .errors import (
    ArtContextError,
    ConceptDetectionError,
    ConfigurationError,
    ConflictError,
    DanglingEdgeError,
    EmptyResponseError,
    GraphFormatError,
    IntegrityError,
    NotFoundError,
    PipelineError,
    TemplateError,
    TransportError,
    ValidationError,
)
from .gateway import (
    MOCK_EMBEDDING_DIM,
    ChatMessage,
    ChatRequest,
    ChatResponse,
    EmbeddingVector,
    GatewayConfig,
    ImageAttachment,
    MockGateway,
    RemoteGateway,
    create_gateway,
    fnv1a64,
    mock_embedding,
    mock_script,
)
from .graph import (
    Ackg,
    GraphStats,
    KgEdge,
    KgNode,
    NodeType,
    load_graph,
    make_node_id,
    save_graph,
)
from .construct import (
    Chunk,
    CleaningReport,
    ConstructConfig,
    CorpusManifest,
    ExtractionRecord,
    ManifestEntry,
    aggregate_candidates,
    build_ackg,
    chunk_document,
    dedup_nodes,
    extract_candidates,
    filter_by_type,
    load_manifest,
    normalized_levenshtein,
    parse_extraction_output,
    roman_numeral_guard,
)
from .index import (
    RetrievalHit,
    VectorIndex,
    build_index,
    cosine,
    load_index,
    node_text,
    save_index,
    top_k,
)
from .retriever import (
    ConceptList,
    ContextSubgraph,
    PaintingQuery,
    RetrieverConfig,
    ScoredNode,
    build_query_text,
    coarse_retrieve,
    combine_scores,
    centrality_scores,
    detect_concepts,
    expand_by_edge_degree,
    parse_concept_lines,
    parse_rank_numbers,
    prune_to_subgraph,
    rank_multimodal,
    retrieve_context,
    softmax,
    subgraph_to_dict,
    subgraph_to_json,
)
from .generate import (
    DEFAULT_INSTRUCTION,
    FewShotExample,
    GenerationResult,
    PromptTemplate,
    build_prompt,
    explain,
    linearize_subgraph,
)
from .metrics import (
    EvalPair,
    MetricReport,
    bleu,
    evaluate_corpus,
    lcs_length,
    rouge_l,
    tokenize,
)
from .config import AppConfig, load_config
from .cli import run_cli

__version__ = "0.1.0"


def __getattr__(name: str):
    # the HTTP layer pulls in fastapi; load it only when asked for
    if name == "create_app":
        from .service import create_app

        return create_app
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")

__all__ = [
    "Ackg",
    "AppConfig",
    "ArtContextError",
    "DEFAULT_INSTRUCTION",
    "MOCK_EMBEDDING_DIM",
    "ChatMessage",
    "ChatRequest",
    "ChatResponse",
    "Chunk",
    "CleaningReport",
    "ConceptDetectionError",
    "ConceptList",
    "ConfigurationError",
    "ConflictError",
    "ConstructConfig",
    "ContextSubgraph",
    "CorpusManifest",
    "DanglingEdgeError",
    "EmbeddingVector",
    "EmptyResponseError",
    "EvalPair",
    "ExtractionRecord",
    "FewShotExample",
    "GatewayConfig",
    "GenerationResult",
    "GraphFormatError",
    "GraphStats",
    "ImageAttachment",
    "IntegrityError",
    "KgEdge",
    "KgNode",
    "ManifestEntry",
    "MetricReport",
    "MockGateway",
    "NodeType",
    "NotFoundError",
    "PaintingQuery",
    "PipelineError",
    "PromptTemplate",
    "RemoteGateway",
    "RetrievalHit",
    "RetrieverConfig",
    "ScoredNode",
    "TemplateError",
    "TransportError",
    "ValidationError",
    "VectorIndex",
    "aggregate_candidates",
    "build_ackg",
    "build_index",
    "build_prompt",
    "build_query_text",
    "bleu",
    "centrality_scores",
    "chunk_document",
    "coarse_retrieve",
    "combine_scores",
    "cosine",
    "create_app",
    "create_gateway",
    "dedup_nodes",
    "detect_concepts",
    "evaluate_corpus",
    "expand_by_edge_degree",
    "explain",
    "extract_candidates",
    "filter_by_type",
    "fnv1a64",
    "lcs_length",
    "linearize_subgraph",
    "load_config",
    "load_graph",
    "load_index",
    "load_manifest",
    "make_node_id",
    "mock_embedding",
    "mock_script",
    "node_text",
    "normalized_levenshtein",
    "parse_concept_lines",
    "parse_extraction_output",
    "parse_rank_numbers",
    "prune_to_subgraph",
    "rank_multimodal",
    "retrieve_context",
    "rouge_l",
    "roman_numeral_guard",
    "run_cli",
    "save_graph",
    "save_index",
    "softmax",
    "subgraph_to_dict",
    "subgraph_to_json",
    "tokenize",
    "top_k",
]
