"""Service configuration: JSON file loading, validation, and client wiring.

Schema (all keys optional unless noted)::

    {
      "listen": "127.0.0.1:8080",
      "index_path": "advisory.idx",            # required for ask/serve/eval
      "rulebook_path": "rules.json",           # default: bundled starter rulebook
      "prompt_template_path": "prompt.txt",    # default: bundled template
      "endpoints": "mock" | {
          "embed":     {"url": "...", "timeout_ms": 10000, "retries": 0},
          "translate": {"url": "...", ...},
          "generate":  {"url": "...", ...}
      },
      "pipeline": {"chunk_size": 600, "chunk_overlap": 50, "top_k": 4,
                   "ood_threshold": 0.25, "dim": 384},
      "cors_origins": ["http://localhost:5173"],
      "ingest_enabled": true
    }

Endpoint URLs may be overridden per capability with the environment
variables ``AGRIRAG_EMBED_URL``, ``AGRIRAG_TRANSLATE_URL`` and
``AGRIRAG_GENERATE_URL``; setting one switches that capability to the
remote backend even when the file says "mock".
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .enrichment import DEFAULT_RULEBOOK_PATH
from .errors import ConfigurationError
from .gateway import (
    BackendEndpoint,
    Clients,
    HttpEmbedder,
    HttpGenerator,
    HttpTranslator,
    MockEmbedder,
    MockGenerator,
    MockTranslator,
)
from .pipeline import DEFAULT_PROMPT_TEMPLATE_PATH, PipelineConfig

CAPABILITIES = ("embed", "translate", "generate")

_ENV_URL_VARS = {cap: f"AGRIRAG_{cap.upper()}_URL" for cap in CAPABILITIES}

_LEXICON_DIR = Path(__file__).parent / "data"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    index_path: Path | None = None
    rulebook_path: Path = DEFAULT_RULEBOOK_PATH
    prompt_template_path: Path = DEFAULT_PROMPT_TEMPLATE_PATH
    # None means the built-in mock backend for that capability.
    endpoints: dict[str, BackendEndpoint | None] = field(
        default_factory=lambda: {cap: None for cap in CAPABILITIES}
    )
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    cors_origins: list[str] = field(default_factory=list)
    ingest_enabled: bool = True

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise ConfigurationError(f"port must be in [1, 65535], got {self.port}")

    def require_paths(self, index: bool = True) -> None:
        """Fail fast when a referenced file is missing (serve/ask startup)."""
        checks = [("rulebook_path", self.rulebook_path), ("prompt_template_path", self.prompt_template_path)]
        if index:
            if self.index_path is None:
                raise ConfigurationError("index_path is not configured")
            checks.append(("index_path", self.index_path))
        for name, path in checks:
            if not Path(path).exists():
                raise ConfigurationError(f"{name} does not exist: {path}")

    def to_dict(self) -> dict:
        """Stable dict form, used for the eval report's config hash."""
        return {
            "listen": f"{self.host}:{self.port}",
            "index_path": str(self.index_path) if self.index_path else None,
            "rulebook_path": str(self.rulebook_path),
            "prompt_template_path": str(self.prompt_template_path),
            "endpoints": {
                cap: (
                    None
                    if ep is None
                    else {"url": ep.url, "timeout_ms": ep.timeout_ms, "retries": ep.retries}
                )
                for cap, ep in sorted(self.endpoints.items())
            },
            "pipeline": {
                "chunk_size": self.pipeline.chunk_size,
                "chunk_overlap": self.pipeline.chunk_overlap,
                "top_k": self.pipeline.top_k,
                "ood_threshold": self.pipeline.ood_threshold,
                "dim": self.pipeline.dim,
            },
            "cors_origins": list(self.cors_origins),
            "ingest_enabled": self.ingest_enabled,
        }


def _parse_listen(listen: str) -> tuple[str, int]:
    host, sep, port_s = listen.rpartition(":")
    if not sep or not host:
        raise ConfigurationError(f"listen must look like 'host:port', got {listen!r}")
    try:
        port = int(port_s)
    except ValueError as exc:
        raise ConfigurationError(f"listen port is not an integer: {listen!r}") from exc
    return host, port


def _parse_endpoint(cap: str, raw: dict) -> BackendEndpoint:
    if not isinstance(raw, dict) or "url" not in raw:
        raise ConfigurationError(f"endpoints.{cap} must be an object with a 'url'")
    try:
        return BackendEndpoint(
            url=str(raw["url"]),
            timeout_ms=int(raw.get("timeout_ms", 10_000)),
            retries=int(raw.get("retries", 0)),
        )
    except ValueError as exc:
        raise ConfigurationError(f"endpoints.{cap}: {exc}") from exc


def load_config(path: str | Path, base_dir: Path | None = None) -> ServiceConfig:
    """Load a config file; relative paths resolve against the file's directory."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {path} must be a JSON object")
    base = base_dir if base_dir is not None else path.parent

    def resolve(key: str, default: Path | None) -> Path | None:
        if key not in raw:
            return default
        return (base / str(raw[key])).resolve() if not Path(str(raw[key])).is_absolute() else Path(str(raw[key]))

    host, port = _parse_listen(str(raw.get("listen", "127.0.0.1:8080")))

    endpoints_raw = raw.get("endpoints", "mock")
    endpoints: dict[str, BackendEndpoint | None]
    if endpoints_raw == "mock":
        endpoints = {cap: None for cap in CAPABILITIES}
    elif isinstance(endpoints_raw, dict):
        endpoints = {}
        for cap in CAPABILITIES:
            if cap not in endpoints_raw:
                raise ConfigurationError(f"endpoints is missing the {cap!r} backend")
            endpoints[cap] = _parse_endpoint(cap, endpoints_raw[cap])
    else:
        raise ConfigurationError("endpoints must be \"mock\" or an object with embed/translate/generate")

    for cap, env_var in _ENV_URL_VARS.items():
        url = os.environ.get(env_var)
        if url:
            current = endpoints[cap]
            endpoints[cap] = BackendEndpoint(
                url=url,
                timeout_ms=current.timeout_ms if current else 10_000,
                retries=current.retries if current else 0,
            )

    pipe_raw = raw.get("pipeline", {})
    if not isinstance(pipe_raw, dict):
        raise ConfigurationError("pipeline must be a JSON object")
    known = {
        "chunk_size", "chunk_overlap", "top_k", "ood_threshold", "dim",
        "gen_max_tokens", "gen_temperature", "refusal_out_of_domain", "refusal_not_in_context",
    }
    unknown = set(pipe_raw) - known
    if unknown:
        raise ConfigurationError(f"unknown pipeline keys: {sorted(unknown)}")
    try:
        pipeline = PipelineConfig(**pipe_raw)
    except TypeError as exc:
        raise ConfigurationError(f"bad pipeline section: {exc}") from exc

    cors = raw.get("cors_origins", [])
    if not isinstance(cors, list) or not all(isinstance(o, str) for o in cors):
        raise ConfigurationError("cors_origins must be a list of strings")

    return ServiceConfig(
        host=host,
        port=port,
        index_path=resolve("index_path", None),
        rulebook_path=resolve("rulebook_path", DEFAULT_RULEBOOK_PATH),
        prompt_template_path=resolve("prompt_template_path", DEFAULT_PROMPT_TEMPLATE_PATH),
        endpoints=endpoints,
        pipeline=pipeline,
        cors_origins=cors,
        ingest_enabled=bool(raw.get("ingest_enabled", True)),
    )


def load_mock_lexicons() -> dict[str, dict[str, str]]:
    return {
        "bn_to_en": json.loads((_LEXICON_DIR / "lexicon_bn_en.json").read_text(encoding="utf-8")),
        "en_to_bn": json.loads((_LEXICON_DIR / "lexicon_en_bn.json").read_text(encoding="utf-8")),
    }


def build_clients(config: ServiceConfig) -> Clients:
    """Construct the capability clients the config asks for (mock or remote)."""
    embed_ep = config.endpoints.get("embed")
    translate_ep = config.endpoints.get("translate")
    generate_ep = config.endpoints.get("generate")
    embedder = (
        MockEmbedder(dim=config.pipeline.dim)
        if embed_ep is None
        else HttpEmbedder(embed_ep, dim=config.pipeline.dim)
    )
    translator = (
        MockTranslator(load_mock_lexicons()) if translate_ep is None else HttpTranslator(translate_ep)
    )
    generator = MockGenerator() if generate_ep is None else HttpGenerator(generate_ep)
    return Clients(embedder=embedder, translator=translator, generator=generator)
