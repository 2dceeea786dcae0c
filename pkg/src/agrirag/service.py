"""HTTP service exposing the advisory pipeline.

Endpoints:

- ``POST /v1/ask``     run one query, return the full trace (HTTP 200 for
  every advisory outcome including rejections; 502 when a backend failed)
- ``POST /v1/ingest``  rebuild the index from a corpus directory and swap it
  in atomically; in-flight asks finish against the old index
- ``GET  /v1/stats``   in-memory counters since process start
- ``GET  /v1/health``  liveness probe

Shared state is one swappable index reference plus counters behind a lock;
handlers run synchronously in the threadpool, so any number of asks may be
in flight while an ingest publishes a new index.
"""

from __future__ import annotations

import logging
import threading
from collections import Counter
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .config import ServiceConfig, build_clients
from .corpus import chunk_text, load_documents
from .enrichment import load_rules
from .index import IndexEntry, VectorIndex
from .pipeline import AnswerTrace, answer_query, load_prompt_template

logger = logging.getLogger(__name__)


class AskRequest(BaseModel):
    query: str = Field(min_length=1)
    top_k: int | None = Field(default=None, ge=1)


class IngestRequest(BaseModel):
    corpus_dir: str


class AppState:
    """Everything the handlers share: config, clients, the published index,
    and monotonic counters."""

    def __init__(self, config: ServiceConfig):
        config.require_paths(index=True)
        self.config = config
        self.clients = build_clients(config)
        self.rulebook = load_rules(config.rulebook_path)
        self.template = load_prompt_template(config.prompt_template_path)
        self.index = VectorIndex.load(config.index_path)
        self._counter_lock = threading.Lock()
        self._ingest_lock = threading.Lock()
        self.queries_served = 0
        self.status_counts: Counter[str] = Counter()
        self.source_counts: Counter[str] = Counter()

    def ask(self, query_bn: str, top_k: int | None = None) -> AnswerTrace:
        # Snapshot the published reference once; the whole query runs against it
        # even if an ingest swaps in a new index mid-flight.
        index = self.index
        trace = answer_query(
            query_bn,
            self.config.pipeline,
            index,
            self.rulebook,
            self.clients,
            template=self.template,
            top_k=top_k,
        )
        with self._counter_lock:
            self.queries_served += 1
            self.status_counts[trace.status] += 1
            for hit in trace.hits:
                self.source_counts[hit.source_name] += 1
        return trace

    def ingest(self, corpus_dir: str | Path) -> tuple[int, int]:
        """Build a fresh index from the directory and publish it atomically."""
        with self._ingest_lock:
            documents = load_documents(corpus_dir)
            chunks = [
                chunk
                for doc in documents
                for chunk in chunk_text(
                    doc,
                    chunk_size=self.config.pipeline.chunk_size,
                    chunk_overlap=self.config.pipeline.chunk_overlap,
                )
            ]
            new_index = VectorIndex(self.config.pipeline.dim)
            if chunks:
                vectors = self.clients.embedder.embed_batch([c.text for c in chunks])
                new_index.add(
                    [IndexEntry.from_chunk(c, v) for c, v in zip(chunks, vectors)]
                )
            if self.config.index_path is not None:
                new_index.save(self.config.index_path)
            self.index = new_index  # single reference assignment: the swap
            logger.info("ingested %d docs into %d chunks", len(documents), len(chunks))
            return len(documents), len(chunks)

    def stats(self) -> dict:
        index = self.index
        with self._counter_lock:
            return {
                "index_size": len(index),
                "dim": index.dim,
                "queries_served": self.queries_served,
                "source_distribution": dict(self.source_counts),
                "status_counts": dict(self.status_counts),
            }


def create_app(config: ServiceConfig, state: AppState | None = None) -> FastAPI:
    app = FastAPI(title="agrirag", version=__version__)
    app.state.engine = state if state is not None else AppState(config)

    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.cors_origins,
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        errors = exc.errors()
        if any(e.get("type") == "json_invalid" for e in errors):
            return JSONResponse(status_code=400, content={"error": "malformed JSON body"})
        return JSONResponse(
            status_code=422,
            content={"error": "validation failed", "detail": [e.get("msg", "") for e in errors]},
        )

    @app.post("/v1/ask")
    def ask(body: AskRequest):
        if not body.query.strip():
            raise HTTPException(status_code=422, detail="query must be non-empty")
        trace = app.state.engine.ask(body.query, top_k=body.top_k)
        payload = trace.to_dict()
        if trace.status == "backend_error":
            return JSONResponse(status_code=502, content=payload)
        return JSONResponse(status_code=200, content=payload)

    @app.post("/v1/ingest")
    def ingest(body: IngestRequest):
        engine: AppState = app.state.engine
        if not engine.config.ingest_enabled:
            raise HTTPException(status_code=403, detail="ingestion is disabled")
        corpus_dir = Path(body.corpus_dir)
        if not corpus_dir.is_dir():
            return JSONResponse(
                status_code=404,
                content={"error": "corpus directory not found", "path": str(corpus_dir)},
            )
        docs, chunks = engine.ingest(corpus_dir)
        return {"docs": docs, "chunks": chunks}

    @app.get("/v1/stats")
    def stats():
        return app.state.engine.stats()

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    return app
