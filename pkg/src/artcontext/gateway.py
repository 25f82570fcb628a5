"""Single boundary for all language-model traffic.

Everything that talks to a chat, vision, or embedding model goes through a
Gateway. Two backends exist: a remote HTTP provider speaking the common
chat-completion JSON dialect, and a fully deterministic in-process mock for
offline tests. No other module performs network I/O.
"""

from __future__ import annotations

import base64
import json
import logging
import math
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import requests

from .errors import (
    ConfigurationError,
    EmptyResponseError,
    TransportError,
    ValidationError,
)

logger = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")
MOCK_EMBEDDING_DIM = 256

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1


@dataclass
class ChatMessage:
    role: str
    text: str


@dataclass
class ImageAttachment:
    """An image by path or raw bytes, with its media type."""

    data: Union[str, bytes]
    media_type: str = "image/jpeg"

    def as_base64(self) -> str:
        if isinstance(self.data, bytes):
            raw = self.data
        else:
            with open(self.data, "rb") as handle:
                raw = handle.read()
        return base64.b64encode(raw).decode("ascii")


@dataclass
class ChatRequest:
    messages: List[ChatMessage]
    image_attachments: List[ImageAttachment] = field(default_factory=list)
    temperature: float = 0.0
    max_tokens: int = 1024

    def validate(self) -> None:
        if not self.messages:
            raise ValidationError("chat request needs at least one message")
        for message in self.messages:
            if message.role not in ROLES:
                raise ValidationError(f"unknown role: {message.role!r}")
        if self.image_attachments and not any(m.role == "user" for m in self.messages):
            raise ValidationError("images can only ride on a user message")

    def last_user_text(self) -> str:
        for message in reversed(self.messages):
            if message.role == "user":
                return message.text
        return self.messages[-1].text

    def full_text(self) -> str:
        return "\n".join(m.text for m in self.messages)


@dataclass
class ChatResponse:
    text: str
    usage: Optional[Tuple[int, int]] = None


@dataclass
class EmbeddingVector:
    values: List[float]
    dim: int

    def __post_init__(self) -> None:
        if self.dim != len(self.values):
            raise ValidationError("embedding dim does not match vector length")
        if any(not math.isfinite(v) for v in self.values):
            raise ValidationError("embedding contains a non-finite value")


@dataclass
class GatewayConfig:
    """Provider wiring; credentials come only from the named env variable."""

    backend: str = "mock"
    endpoint: str = ""
    credential_env: str = ""
    chat_model: str = "gpt-4o-mini"
    vision_model: str = "gpt-4o-mini"
    embedding_model: str = "text-embedding-3-small"
    max_attempts: int = 3
    backoff_base: float = 0.5
    timeout: float = 60.0
    max_in_flight: int = 4
    fixtures_path: str = ""  # mock backend only: JSON file of marker -> response

    def validate(self) -> None:
        if self.backend not in ("remote", "mock"):
            raise ConfigurationError(f"unknown gateway backend: {self.backend!r}")
        if self.backend == "remote":
            if not self.endpoint:
                raise ConfigurationError("remote backend requires an endpoint URL")
            if not self.credential_env:
                raise ConfigurationError("remote backend requires a credential env variable name")
        if self.max_attempts < 1:
            raise ConfigurationError("max_attempts must be >= 1")


def _validate_embed_input(texts: Sequence[str]) -> None:
    if not texts:
        raise ValidationError("embed requires at least one text")
    for text in texts:
        if not text.strip():
            raise ValidationError("embed texts must be non-empty after trimming")


# ---- deterministic mock backend ----


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a over UTF-8 bytes; stable across runs and platforms."""
    value = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        value = ((value ^ byte) * _FNV_PRIME) & _U64
    return value


def mock_embedding(text: str) -> EmbeddingVector:
    """Hash whitespace tokens into 256 buckets, then L2-normalize.

    A tokenless input maps to the zero-guard vector (first dimension 1) so
    downstream cosine math never divides by zero.
    """
    counts = [0.0] * MOCK_EMBEDDING_DIM
    tokens = text.split()
    if not tokens:
        counts[0] = 1.0
        return EmbeddingVector(counts, MOCK_EMBEDDING_DIM)
    for token in tokens:
        counts[fnv1a64(token) % MOCK_EMBEDDING_DIM] += 1.0
    norm = math.sqrt(sum(c * c for c in counts))
    return EmbeddingVector([c / norm for c in counts], MOCK_EMBEDDING_DIM)


class MockGateway:
    """Scripted chat plus hash-based embeddings; pure function of its inputs.

    fixtures map prompt markers to canned responses; the first marker found
    as a substring of the concatenated prompt wins. Unmatched prompts echo
    the last user message.
    """

    def __init__(self, fixtures: Optional[Dict[str, str]] = None):
        self.fixtures: Dict[str, str] = dict(fixtures or {})
        self.calls: List[ChatRequest] = []

    def chat(self, request: ChatRequest) -> ChatResponse:
        request.validate()
        self.calls.append(request)
        prompt = request.full_text()
        text = None
        for marker, canned in self.fixtures.items():
            if marker in prompt:
                text = canned
                break
        if text is None:
            text = request.last_user_text()
        usage = (len(prompt.split()), len(text.split()))
        return ChatResponse(text=text, usage=usage)

    def embed(self, texts: Sequence[str]) -> List[EmbeddingVector]:
        _validate_embed_input(texts)
        return [mock_embedding(t) for t in texts]


def mock_script(fixtures: Dict[str, str]) -> MockGateway:
    """Build a mock gateway from a marker -> canned response map."""
    return MockGateway(fixtures)


# ---- remote HTTP backend ----


class RemoteGateway:
    """Chat-completion style HTTP provider with retries and backoff.

    The credential is read from the environment variable named in config,
    checked before any network call. A semaphore bounds in-flight requests.
    """

    def __init__(self, config: GatewayConfig):
        config.validate()
        self.config = config
        self._session = requests.Session()
        self._gate = threading.Semaphore(max(1, config.max_in_flight))

    def _credential(self) -> str:
        value = os.environ.get(self.config.credential_env, "")
        if not value:
            raise ConfigurationError(
                f"credential variable {self.config.credential_env!r} is not set"
            )
        return value

    def _post(self, path: str, payload: Dict[str, object]) -> Dict[str, object]:
        headers = {"Authorization": f"Bearer {self._credential()}"}
        url = self.config.endpoint.rstrip("/") + path
        last_error: Optional[str] = None
        for attempt in range(self.config.max_attempts):
            if attempt:
                time.sleep(self.config.backoff_base * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    response = self._session.post(
                        url, json=payload, headers=headers, timeout=self.config.timeout
                    )
            except requests.RequestException as exc:
                last_error = f"request failed: {exc}"
                logger.warning("gateway attempt %d/%d: %s", attempt + 1, self.config.max_attempts, last_error)
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_error = f"HTTP {response.status_code}"
                logger.warning("gateway attempt %d/%d: %s", attempt + 1, self.config.max_attempts, last_error)
                continue
            if response.status_code >= 400:
                raise TransportError(f"HTTP {response.status_code}: {response.text[:500]}")
            try:
                return response.json()
            except ValueError:
                last_error = "non-JSON response body"
                continue
        raise TransportError(f"gave up after {self.config.max_attempts} attempts: {last_error}")

    def _wire_messages(self, request: ChatRequest) -> List[Dict[str, object]]:
        wire: List[Dict[str, object]] = [
            {"role": m.role, "content": m.text} for m in request.messages
        ]
        if request.image_attachments:
            # attach images to the last user message as data-URI parts
            for entry in reversed(wire):
                if entry["role"] == "user":
                    parts: List[Dict[str, object]] = [{"type": "text", "text": entry["content"]}]
                    for image in request.image_attachments:
                        parts.append(
                            {
                                "type": "image_url",
                                "image_url": {
                                    "url": f"data:{image.media_type};base64,{image.as_base64()}"
                                },
                            }
                        )
                    entry["content"] = parts
                    break
        return wire

    def chat(self, request: ChatRequest) -> ChatResponse:
        request.validate()
        self._credential()  # fail fast before building the payload
        model = self.config.vision_model if request.image_attachments else self.config.chat_model
        payload: Dict[str, object] = {
            "model": model,
            "messages": self._wire_messages(request),
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        body = self._post("/chat/completions", payload)
        choices = body.get("choices") or []
        if not choices:
            raise EmptyResponseError("provider returned no choices")
        message = (choices[0] or {}).get("message") or {}
        text = message.get("content") or ""
        if not text.strip():
            raise EmptyResponseError("provider returned an empty completion")
        usage = None
        raw_usage = body.get("usage") or {}
        if isinstance(raw_usage, dict) and "prompt_tokens" in raw_usage:
            usage = (
                int(raw_usage.get("prompt_tokens", 0)),
                int(raw_usage.get("completion_tokens", 0)),
            )
        return ChatResponse(text=text, usage=usage)

    def embed(self, texts: Sequence[str]) -> List[EmbeddingVector]:
        _validate_embed_input(texts)
        self._credential()
        payload = {"model": self.config.embedding_model, "input": list(texts)}
        body = self._post("/embeddings", payload)
        data = body.get("data") or []
        if len(data) != len(texts):
            raise EmptyResponseError(
                f"provider returned {len(data)} embeddings for {len(texts)} inputs"
            )
        ordered = sorted(data, key=lambda item: item.get("index", 0))
        return [
            EmbeddingVector([float(v) for v in item["embedding"]], len(item["embedding"]))
            for item in ordered
        ]


Gateway = Union[MockGateway, RemoteGateway]


def create_gateway(config: GatewayConfig, fixtures: Optional[Dict[str, str]] = None) -> Gateway:
    config.validate()
    if config.backend == "mock":
        if fixtures is None and config.fixtures_path:
            with open(config.fixtures_path, "r", encoding="utf-8") as handle:
                fixtures = json.load(handle)
            if not isinstance(fixtures, dict):
                raise ConfigurationError("fixtures file must hold a JSON object")
        return MockGateway(fixtures)
    return RemoteGateway(config)


def chat(config: GatewayConfig, request: ChatRequest) -> ChatResponse:
    return create_gateway(config).chat(request)


def embed(config: GatewayConfig, texts: Sequence[str]) -> List[EmbeddingVector]:
    return create_gateway(config).embed(texts)
