"""Shared fixtures: the bundled synthetic corpus, mock clients, a built index."""

from __future__ import annotations

from pathlib import Path

import pytest

from agrirag.config import ServiceConfig, build_clients, load_config
from agrirag.corpus import ingest_corpus
from agrirag.enrichment import load_rules
from agrirag.index import IndexEntry, VectorIndex

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"
CORPUS_DIR = FIXTURES / "corpus"
CASES_PATH = FIXTURES / "eval_cases.jsonl"
CONFIG_PATH = FIXTURES / "config.mock.json"


@pytest.fixture(scope="session")
def mock_config() -> ServiceConfig:
    return load_config(CONFIG_PATH)


@pytest.fixture(scope="session")
def clients(mock_config):
    return build_clients(mock_config)


@pytest.fixture(scope="session")
def rulebook(mock_config):
    return load_rules(mock_config.rulebook_path)


@pytest.fixture(scope="session")
def fixture_chunks(mock_config):
    return ingest_corpus(
        CORPUS_DIR,
        chunk_size=mock_config.pipeline.chunk_size,
        chunk_overlap=mock_config.pipeline.chunk_overlap,
    )


@pytest.fixture(scope="session")
def fixture_index(mock_config, clients, fixture_chunks) -> VectorIndex:
    index = VectorIndex(mock_config.pipeline.dim)
    vectors = clients.embedder.embed_batch([c.text for c in fixture_chunks])
    index.add([IndexEntry.from_chunk(c, v) for c, v in zip(fixture_chunks, vectors)])
    return index


@pytest.fixture()
def indexed_config(tmp_path, mock_config, fixture_index) -> ServiceConfig:
    """A config whose index_path points at a freshly saved fixture index."""
    index_path = tmp_path / "fixture.idx"
    fixture_index.save(index_path)
    return ServiceConfig(
        host=mock_config.host,
        port=mock_config.port,
        index_path=index_path,
        rulebook_path=mock_config.rulebook_path,
        prompt_template_path=mock_config.prompt_template_path,
        endpoints={cap: None for cap in ("embed", "translate", "generate")},
        pipeline=mock_config.pipeline,
        cors_origins=list(mock_config.cors_origins),
    )
