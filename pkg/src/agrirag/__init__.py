"""Cross-lingual retrieval-augmented advisory engine for Bengali agricultural queries."""

__version__ = "0.1.0"

from .corpus import Chunk, Document, chunk_text, ingest_corpus, load_documents
from .enrichment import EnrichmentResult, KeywordRule, enrich, load_rules
from .gateway import (
    UNAVAILABLE_MARKER,
    BackendEndpoint,
    Clients,
    GenerationRequest,
    MockEmbedder,
    MockGenerator,
    MockTranslator,
    mock_embed,
)
from .index import IndexEntry, SearchHit, VectorIndex, cosine_similarity
from .pipeline import (
    AnswerTrace,
    PipelineConfig,
    answer_query,
    build_grounded_prompt,
    reject_out_of_domain,
    source_distribution,
)

__all__ = [
    "AnswerTrace",
    "BackendEndpoint",
    "Chunk",
    "Clients",
    "Document",
    "EnrichmentResult",
    "GenerationRequest",
    "IndexEntry",
    "KeywordRule",
    "MockEmbedder",
    "MockGenerator",
    "MockTranslator",
    "PipelineConfig",
    "SearchHit",
    "UNAVAILABLE_MARKER",
    "VectorIndex",
    "answer_query",
    "build_grounded_prompt",
    "chunk_text",
    "cosine_similarity",
    "enrich",
    "ingest_corpus",
    "load_documents",
    "load_rules",
    "mock_embed",
    "reject_out_of_domain",
    "source_distribution",
]
