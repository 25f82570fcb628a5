"""Read-only HTTP service over a loaded graph and index.

Bodies are parsed by hand so malformed input maps to 400 with a field
diagnostic; unknown nodes map to 404; gateway and pipeline failures map to
502 with the failing stage's tag. POST /retrieve shares the exact JSON
renderer with the CLI, so both produce byte-identical output.
"""

from __future__ import annotations

import base64
import binascii
import json
import logging
from dataclasses import replace
from typing import Dict, Optional, Tuple

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .config import AppConfig
from .errors import (
    ArtContextError,
    ConfigurationError,
    EmptyResponseError,
    NotFoundError,
    PipelineError,
    TransportError,
    ValidationError,
)
from .gateway import Gateway, create_gateway
from .generate import PromptTemplate, explain
from .graph import Ackg, load_graph
from .index import VectorIndex, load_index
from .retriever import (
    PaintingQuery,
    RetrieverConfig,
    retrieve_context,
    subgraph_to_json,
)

logger = logging.getLogger(__name__)

_OVERRIDE_FIELDS = {
    "k_coarse": ("k_coarse", int),
    "k": ("k_expanded", int),
    "m": ("m", int),
    "lambda": ("lam", float),
    "concepts": ("n_concepts", int),
    "rank_mode": ("rank_mode", str),
}


def _bad_request(detail: str) -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": detail})


def _parse_body(raw: bytes, base_config: RetrieverConfig) -> Tuple[PaintingQuery, RetrieverConfig]:
    """Validate the /retrieve and /explain body; ValidationError maps to 400."""
    if not raw:
        raise ValidationError("request body is empty")
    try:
        body = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"body is not valid JSON: {exc.msg}") from None
    if not isinstance(body, dict):
        raise ValidationError("body must be a JSON object")

    attributes_raw = body.get("attributes") or {}
    if not isinstance(attributes_raw, dict):
        raise ValidationError("field 'attributes' must be an object")
    attributes: Dict[str, str] = {}
    for key, value in attributes_raw.items():
        if isinstance(value, (dict, list)):
            raise ValidationError(f"attribute {key!r} must be a scalar")
        if value is not None and str(value).strip():
            attributes[str(key)] = str(value)

    question = body.get("question")
    if question is not None and not isinstance(question, str):
        raise ValidationError("field 'question' must be a string")

    image: Optional[bytes] = None
    image_b64 = body.get("image_base64")
    if image_b64 is not None:
        if not isinstance(image_b64, str):
            raise ValidationError("field 'image_base64' must be a base64 string")
        try:
            image = base64.b64decode(image_b64, validate=True)
        except (binascii.Error, ValueError):
            raise ValidationError("field 'image_base64' is not valid base64") from None

    config = replace(base_config)
    overrides = body.get("overrides") or {}
    if not isinstance(overrides, dict):
        raise ValidationError("field 'overrides' must be an object")
    for key, value in overrides.items():
        if key not in _OVERRIDE_FIELDS:
            raise ValidationError(f"unknown override {key!r}")
        attr, cast = _OVERRIDE_FIELDS[key]
        try:
            setattr(config, attr, cast(value))
        except (TypeError, ValueError):
            raise ValidationError(f"override {key!r} has a bad value: {value!r}") from None
    config.validate()

    painting = PaintingQuery(image=image, attributes=attributes, question=question)
    painting.validate()
    return painting, config


def _error_response(exc: Exception) -> JSONResponse:
    if isinstance(exc, ValidationError):
        return _bad_request(str(exc))
    if isinstance(exc, NotFoundError):
        return JSONResponse(status_code=404, content={"error": str(exc)})
    if isinstance(exc, PipelineError):
        return JSONResponse(status_code=502, content={"error": str(exc), "stage": exc.stage})
    if isinstance(exc, (TransportError, EmptyResponseError, ConfigurationError)):
        return JSONResponse(status_code=502, content={"error": str(exc), "stage": "gateway"})
    if isinstance(exc, ArtContextError):
        return _bad_request(str(exc))
    logger.exception("unhandled service error")
    return JSONResponse(status_code=500, content={"error": "internal error"})


def create_app(
    config: AppConfig,
    gateway: Optional[Gateway] = None,
    graph: Optional[Ackg] = None,
    index: Optional[VectorIndex] = None,
    template: Optional[PromptTemplate] = None,
) -> FastAPI:
    """Build the service; graph and index load once and stay read-only."""
    if graph is None:
        graph = load_graph(config.require_graph())
    if index is None:
        index = load_index(config.require_index())
    if gateway is None:
        gateway = create_gateway(config.gateway)
    prompt_dir = config.prompt_dir or None

    app = FastAPI(title="artcontext", docs_url=None, redoc_url=None)

    @app.get("/healthz")
    async def healthz() -> JSONResponse:
        return JSONResponse(
            {
                "status": "ok",
                "nodes": graph.node_count,
                "edges": graph.edge_count,
                "vectors": index.count,
                "dim": index.dim,
            }
        )

    @app.get("/graph/nodes/{node_id:path}")
    async def get_node(node_id: str) -> JSONResponse:
        try:
            node = graph.get_node(node_id)
            neighbors = graph.neighbors(node_id)
        except NotFoundError as exc:
            return JSONResponse(status_code=404, content={"error": str(exc)})
        return JSONResponse(
            {
                "id": node.id,
                "name": node.name,
                "type": node.node_type.value,
                "description": node.description,
                "provenance": [list(p) for p in sorted(node.provenance)],
                "degree": len(neighbors),
                "neighbors": neighbors,
            }
        )

    @app.post("/retrieve")
    async def retrieve(request: Request) -> Response:
        try:
            painting, retriever_config = _parse_body(await request.body(), config.retriever)
            subgraph = retrieve_context(
                gateway, graph, index, painting, retriever_config, prompt_dir=prompt_dir
            )
        except Exception as exc:
            return _error_response(exc)
        return Response(content=subgraph_to_json(subgraph) + "\n", media_type="application/json")

    @app.post("/explain")
    async def explain_endpoint(request: Request) -> Response:
        try:
            painting, retriever_config = _parse_body(await request.body(), config.retriever)
            result = explain(
                gateway,
                graph,
                index,
                painting,
                retriever_config,
                template=template,
                prompt_dir=prompt_dir,
                char_budget=config.char_budget,
            )
        except Exception as exc:
            return _error_response(exc)
        return JSONResponse(result.as_dict())

    return app
