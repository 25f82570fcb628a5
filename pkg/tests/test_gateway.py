import json
import math

import pytest

from artcontext import (
    MOCK_EMBEDDING_DIM,
    ChatMessage,
    ChatRequest,
    ConfigurationError,
    EmptyResponseError,
    GatewayConfig,
    ImageAttachment,
    MockGateway,
    RemoteGateway,
    TransportError,
    ValidationError,
    create_gateway,
    fnv1a64,
    mock_embedding,
    mock_script,
)

import oracles


# ---- request validation ----

def test_chat_request_needs_messages():
    with pytest.raises(ValidationError):
        ChatRequest(messages=[]).validate()


def test_chat_request_rejects_unknown_role():
    with pytest.raises(ValidationError):
        ChatRequest(messages=[ChatMessage("oracle", "hi")]).validate()


def test_images_require_a_user_message():
    request = ChatRequest(
        messages=[ChatMessage("system", "rules")],
        image_attachments=[ImageAttachment(b"\x89PNG", "image/png")],
    )
    with pytest.raises(ValidationError):
        request.validate()


def test_attachment_base64_accepts_bytes_and_path(tmp_path):
    image = tmp_path / "dot.png"
    image.write_bytes(b"abc")
    from_bytes = ImageAttachment(b"abc", "image/png").as_base64()
    from_path = ImageAttachment(str(image), "image/png").as_base64()
    assert from_bytes == from_path == "YWJj"


# ---- deterministic embedding ----

def test_fnv1a64_reference_values():
    # classic published test vectors for 64-bit FNV-1a
    assert fnv1a64("") == 0xCBF29CE484222325
    assert fnv1a64("a") == 0xAF63DC4C8601EC8C
    assert fnv1a64("foobar") == 0x85944171F73967E8


def test_mock_embedding_is_unit_norm_and_stable():
    first = mock_embedding("sunlit harbor at dawn")
    second = mock_embedding("sunlit harbor at dawn")
    assert first.dim == MOCK_EMBEDDING_DIM
    assert first.values == second.values
    assert math.isclose(sum(v * v for v in first.values), 1.0, rel_tol=0, abs_tol=1e-9)


def test_mock_embedding_matches_bucket_oracle():
    text = "the weaver repeats the weaver"
    counts = [0.0] * MOCK_EMBEDDING_DIM
    for token in text.split():
        counts[fnv1a64(token) % MOCK_EMBEDDING_DIM] += 1.0
    norm = math.sqrt(sum(c * c for c in counts))
    expected = [c / norm for c in counts]
    got = mock_embedding(text).values
    assert all(math.isclose(g, e, abs_tol=1e-12) for g, e in zip(got, expected))


def test_mock_embedding_empty_text_unit_vector():
    vector = mock_embedding("   ")
    assert vector.values[0] == 1.0
    assert sum(vector.values) == 1.0


def test_mock_embedding_whitespace_insensitive_tokens():
    assert mock_embedding("a  b\nc").values == mock_embedding("a b c").values


# ---- mock chat ----

def test_mock_chat_echoes_last_user_message():
    gateway = MockGateway()
    response = gateway.chat(ChatRequest(messages=[
        ChatMessage("system", "be brief"),
        ChatMessage("user", "first"),
        ChatMessage("assistant", "ok"),
        ChatMessage("user", "final question"),
    ]))
    assert response.text == "final question"


def test_mock_chat_fixture_marker_precedence_is_insertion_order():
    gateway = MockGateway({"alpha": "A", "alp": "B"})
    response = gateway.chat(
        ChatRequest(messages=[ChatMessage("user", "contains alpha marker")])
    )
    assert response.text == "A"


def test_mock_chat_matches_marker_in_any_message():
    gateway = MockGateway({"Task: concept detection": "1. light"})
    request = ChatRequest(messages=[
        ChatMessage("system", "Task: concept detection.\nList ideas."),
        ChatMessage("user", "the painting"),
    ])
    assert gateway.chat(request).text == "1. light"


def test_mock_chat_usage_counts_whitespace_words():
    gateway = MockGateway({"ping": "pong pong"})
    response = gateway.chat(
        ChatRequest(messages=[ChatMessage("user", "ping me now")])
    )
    assert response.usage == (3, 2)


def test_mock_chat_records_calls():
    gateway = MockGateway()
    gateway.chat(ChatRequest(messages=[ChatMessage("user", "one")]))
    gateway.chat(ChatRequest(messages=[ChatMessage("user", "two")]))
    assert len(gateway.calls) == 2
    assert gateway.calls[1].last_user_text() == "two"


def test_mock_script_builds_marker_table():
    gateway = mock_script([("alpha", "A"), ("beta", "B")])
    response = gateway.chat(ChatRequest(messages=[ChatMessage("user", "beta here")]))
    assert response.text == "B"


def test_mock_embed_batch_order_preserved():
    gateway = MockGateway()
    vectors = gateway.embed(["one", "two"])
    assert vectors[0].values == mock_embedding("one").values
    assert vectors[1].values == mock_embedding("two").values


def test_mock_reproducibility_across_instances():
    a = MockGateway().embed(["A Sunday on La Grande Jatte"])[0]
    b = MockGateway().embed(["A Sunday on La Grande Jatte"])[0]
    assert a.values == b.values


def test_mock_cosine_disjoint_tokens_is_zero():
    a = mock_embedding("weaver")
    b = mock_embedding("portrait")
    dot = sum(x * y for x, y in zip(a.values, b.values))
    assert dot == 0.0


# ---- config and remote transport ----

def test_gateway_config_rejects_unknown_backend():
    with pytest.raises(ConfigurationError):
        GatewayConfig(backend="quantum").validate()


def test_remote_backend_requires_endpoint():
    with pytest.raises(ConfigurationError):
        GatewayConfig(backend="remote", endpoint="").validate()


def test_remote_missing_credential_env_fails_before_network(monkeypatch):
    monkeypatch.delenv("ART_TEST_KEY", raising=False)
    gateway = RemoteGateway(GatewayConfig(
        backend="remote",
        endpoint="https://gateway.invalid/v1",
        credential_env="ART_TEST_KEY",
    ))
    with pytest.raises(ConfigurationError):
        gateway.chat(ChatRequest(messages=[ChatMessage("user", "hi")]))


def test_remote_retries_then_raises_transport_error(monkeypatch):
    monkeypatch.setenv("ART_TEST_KEY", "secret")
    config = GatewayConfig(
        backend="remote",
        endpoint="https://gateway.invalid/v1",
        credential_env="ART_TEST_KEY",
        max_attempts=3,
        backoff_base=0.0,
    )
    gateway = RemoteGateway(config)
    attempts = []

    class FakeResponse:
        status_code = 503
        text = "unavailable"

        def json(self):
            return {}

    def fake_post(url, **kwargs):
        attempts.append(url)
        return FakeResponse()

    monkeypatch.setattr(gateway._session, "post", fake_post)
    with pytest.raises(TransportError):
        gateway.chat(ChatRequest(messages=[ChatMessage("user", "hi")]))
    assert len(attempts) == config.max_attempts


def test_remote_4xx_fails_without_retry(monkeypatch):
    monkeypatch.setenv("ART_TEST_KEY", "secret")
    gateway = RemoteGateway(GatewayConfig(
        backend="remote",
        endpoint="https://gateway.invalid/v1",
        credential_env="ART_TEST_KEY",
        backoff_base=0.0,
    ))
    attempts = []

    class FakeResponse:
        status_code = 400
        text = "bad request"

        def json(self):
            return {}

    monkeypatch.setattr(
        gateway._session,
        "post",
        lambda url, **kwargs: attempts.append(url) or FakeResponse(),
    )
    with pytest.raises(TransportError):
        gateway.chat(ChatRequest(messages=[ChatMessage("user", "hi")]))
    assert len(attempts) == 1


def test_remote_empty_text_raises_empty_response(monkeypatch):
    monkeypatch.setenv("ART_TEST_KEY", "secret")
    gateway = RemoteGateway(GatewayConfig(
        backend="remote",
        endpoint="https://gateway.invalid/v1",
        credential_env="ART_TEST_KEY",
    ))

    class FakeResponse:
        status_code = 200
        text = "{}"

        def json(self):
            return {"choices": [{"message": {"content": ""}}]}

    monkeypatch.setattr(gateway._session, "post", lambda url, **kwargs: FakeResponse())
    with pytest.raises(EmptyResponseError):
        gateway.chat(ChatRequest(messages=[ChatMessage("user", "hi")]))


def test_remote_attaches_image_to_last_user_message(monkeypatch):
    monkeypatch.setenv("ART_TEST_KEY", "secret")
    gateway = RemoteGateway(GatewayConfig(
        backend="remote",
        endpoint="https://gateway.invalid/v1",
        credential_env="ART_TEST_KEY",
        chat_model="text-model",
        vision_model="vision-model",
    ))
    captured = {}

    class FakeResponse:
        status_code = 200
        text = "{}"

        def json(self):
            return {"choices": [{"message": {"content": "described"}}]}

    def fake_post(url, **kwargs):
        captured["url"] = url
        captured["payload"] = kwargs.get("json")
        captured["headers"] = kwargs.get("headers")
        return FakeResponse()

    monkeypatch.setattr(gateway._session, "post", fake_post)
    request = ChatRequest(
        messages=[ChatMessage("system", "x"), ChatMessage("user", "describe")],
        image_attachments=[ImageAttachment(b"\x00\x01", "image/png")],
    )
    response = gateway.chat(request)
    assert response.text == "described"
    assert captured["payload"]["model"] == "vision-model"
    assert captured["headers"]["Authorization"] == "Bearer secret"
    user_content = captured["payload"]["messages"][-1]["content"]
    kinds = [part["type"] for part in user_content]
    assert kinds == ["text", "image_url"]
    assert user_content[1]["image_url"]["url"].startswith("data:image/png;base64,")


def test_create_gateway_mock_default_and_fixture_file(tmp_path):
    gateway = create_gateway(GatewayConfig())
    assert isinstance(gateway, MockGateway)
    fixtures_path = tmp_path / "fixtures.json"
    fixtures_path.write_text(json.dumps({"marker": "scripted"}))
    config = GatewayConfig(fixtures_path=str(fixtures_path))
    scripted = create_gateway(config)
    response = scripted.chat(ChatRequest(messages=[ChatMessage("user", "marker hit")]))
    assert response.text == "scripted"


def test_create_gateway_remote_type():
    config = GatewayConfig(
        backend="remote",
        endpoint="https://gateway.invalid/v1",
        credential_env="ART_TEST_KEY",
    )
    assert isinstance(create_gateway(config), RemoteGateway)
