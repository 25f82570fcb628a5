"""Application configuration: defaults, TOML file, environment, flag overrides.

Precedence, highest first: explicit flag overrides, ARTCONTEXT_* environment
variables, the TOML config file, built-in defaults. Credentials themselves
never appear here; only the *name* of the environment variable that holds
them is configurable.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

try:
    import tomllib as tomli  # Python 3.11+
except ModuleNotFoundError:
    import tomli

from .construct import ConstructConfig
from .errors import ConfigurationError
from .gateway import GatewayConfig
from .retriever import RetrieverConfig

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "ARTCONTEXT_CONFIG"


@dataclass
class AppConfig:
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    retriever: RetrieverConfig = field(default_factory=RetrieverConfig)
    construct: ConstructConfig = field(default_factory=ConstructConfig)
    graph_path: str = ""
    index_path: str = ""
    prompt_dir: str = ""
    host: str = "127.0.0.1"
    port: int = 8008
    char_budget: int = 16000

    def require_graph(self) -> str:
        if not self.graph_path:
            raise ConfigurationError("no graph path configured (flag, env, or config file)")
        return self.graph_path

    def require_index(self) -> str:
        if not self.index_path:
            raise ConfigurationError("no index path configured (flag, env, or config file)")
        return self.index_path


def _as_bool(value: object) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


# (override key, env var, file section, file key, cast)
_KEYS = [
    ("graph", "ARTCONTEXT_GRAPH", "paths", "graph", str),
    ("index", "ARTCONTEXT_INDEX", "paths", "index", str),
    ("prompts", "ARTCONTEXT_PROMPTS", "paths", "prompts", str),
    ("backend", "ARTCONTEXT_BACKEND", "gateway", "backend", str),
    ("endpoint", "ARTCONTEXT_ENDPOINT", "gateway", "endpoint", str),
    ("credential_env", "ARTCONTEXT_CREDENTIAL_ENV", "gateway", "credential_env", str),
    ("chat_model", "ARTCONTEXT_CHAT_MODEL", "gateway", "chat_model", str),
    ("vision_model", "ARTCONTEXT_VISION_MODEL", "gateway", "vision_model", str),
    ("embedding_model", "ARTCONTEXT_EMBEDDING_MODEL", "gateway", "embedding_model", str),
    ("fixtures", "ARTCONTEXT_FIXTURES", "gateway", "fixtures", str),
    ("timeout", "ARTCONTEXT_TIMEOUT", "gateway", "timeout", float),
    ("max_attempts", "ARTCONTEXT_MAX_ATTEMPTS", "gateway", "max_attempts", int),
    ("max_in_flight", "ARTCONTEXT_MAX_IN_FLIGHT", "gateway", "max_in_flight", int),
    ("k_coarse", "ARTCONTEXT_K_COARSE", "retriever", "k_coarse", int),
    ("k", "ARTCONTEXT_K", "retriever", "k", int),
    ("m", "ARTCONTEXT_M", "retriever", "m", int),
    ("lam", "ARTCONTEXT_LAMBDA", "retriever", "lambda", float),
    ("concepts", "ARTCONTEXT_CONCEPTS", "retriever", "concepts", int),
    ("rank_mode", "ARTCONTEXT_RANK_MODE", "retriever", "rank_mode", str),
    ("window", "ARTCONTEXT_WINDOW", "construct", "window", int),
    ("overlap", "ARTCONTEXT_OVERLAP", "construct", "overlap", int),
    ("strict_stride", "ARTCONTEXT_STRICT_STRIDE", "construct", "strict_stride", _as_bool),
    ("threshold", "ARTCONTEXT_THRESHOLD", "construct", "threshold", float),
    ("host", "ARTCONTEXT_HOST", "service", "host", str),
    ("port", "ARTCONTEXT_PORT", "service", "port", int),
    ("budget", "ARTCONTEXT_BUDGET", "generate", "budget", int),
]


def load_config(
    path: Optional[str] = None,
    overrides: Optional[Mapping[str, object]] = None,
    env: Optional[Mapping[str, str]] = None,
) -> AppConfig:
    """Layer flag overrides over environment over file over defaults."""
    env = dict(os.environ) if env is None else dict(env)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    path = path or env.get(CONFIG_ENV_VAR) or ""

    file_data: Dict[str, object] = {}
    if path:
        try:
            with open(path, "rb") as handle:
                file_data = tomli.load(handle)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file {path!r}: {exc}") from exc
        except tomli.TOMLDecodeError as exc:
            raise ConfigurationError(f"invalid config file {path!r}: {exc}") from exc

    values: Dict[str, object] = {}
    for override_key, env_var, section, file_key, cast in _KEYS:
        raw: object = None
        if override_key in overrides:
            raw = overrides[override_key]
        elif env.get(env_var, "") != "":
            raw = env[env_var]
        else:
            section_data = file_data.get(section)
            if isinstance(section_data, dict) and file_key in section_data:
                raw = section_data[file_key]
        if raw is None:
            continue
        try:
            values[override_key] = cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad value for {override_key!r}: {raw!r} ({exc})") from exc

    config = AppConfig()
    gw = config.gateway
    gw.backend = values.get("backend", gw.backend)
    gw.endpoint = values.get("endpoint", gw.endpoint)
    gw.credential_env = values.get("credential_env", gw.credential_env)
    gw.chat_model = values.get("chat_model", gw.chat_model)
    gw.vision_model = values.get("vision_model", gw.vision_model)
    gw.embedding_model = values.get("embedding_model", gw.embedding_model)
    gw.fixtures_path = values.get("fixtures", gw.fixtures_path)
    gw.timeout = values.get("timeout", gw.timeout)
    gw.max_attempts = values.get("max_attempts", gw.max_attempts)
    gw.max_in_flight = values.get("max_in_flight", gw.max_in_flight)

    rt = config.retriever
    rt.k_coarse = values.get("k_coarse", rt.k_coarse)
    rt.k_expanded = values.get("k", rt.k_expanded)
    rt.m = values.get("m", rt.m)
    rt.lam = values.get("lam", rt.lam)
    rt.n_concepts = values.get("concepts", rt.n_concepts)
    rt.rank_mode = values.get("rank_mode", rt.rank_mode)

    ct = config.construct
    ct.window_tokens = values.get("window", ct.window_tokens)
    ct.overlap_tokens = values.get("overlap", ct.overlap_tokens)
    ct.strict_stride = values.get("strict_stride", ct.strict_stride)
    ct.dedup_threshold = values.get("threshold", ct.dedup_threshold)

    config.graph_path = values.get("graph", config.graph_path)
    config.index_path = values.get("index", config.index_path)
    config.prompt_dir = values.get("prompts", config.prompt_dir)
    config.host = values.get("host", config.host)
    config.port = values.get("port", config.port)
    config.char_budget = values.get("budget", config.char_budget)
    ct.prompt_dir = config.prompt_dir or None

    config.gateway.validate()
    config.retriever.validate()
    return config
