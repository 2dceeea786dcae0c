"""Five-stage advisory pipeline with grounding, rejection, and full tracing.

Stage order: translate_in -> enrich -> retrieve -> generate -> translate_out.
Two safety gates sit on top: queries whose best retrieval score falls below
the out-of-domain threshold are refused before generation, and generated
answers containing the unavailable-information sentinel are refused after
it. Refusal messages are fixed Bengali strings from configuration, never
machine-translated at runtime, so the two refusal kinds stay distinct and
deterministic.
"""

from __future__ import annotations

import logging
import re
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from .enrichment import KeywordRule, enrich
from .errors import ConfigurationError, TransportError
from .gateway import (
    DEFAULT_EMBEDDING_DIM,
    UNAVAILABLE_MARKER,
    Clients,
    GenerationRequest,
)
from .index import SearchHit, VectorIndex

logger = logging.getLogger(__name__)

STAGES = ("translate_in", "enrich", "retrieve", "generate", "translate_out")

Status = Literal["answered", "rejected_out_of_domain", "not_in_context", "backend_error"]

DEFAULT_PROMPT_TEMPLATE_PATH = Path(__file__).parent / "data" / "prompt_template.txt"

REFUSAL_OUT_OF_DOMAIN_BN = (
    "দুঃখিত, এই প্রশ্নটি আমার কৃষি পরামর্শের আওতার বাইরে। "
    "আমি শুধুমাত্র ধান চাষ সংক্রান্ত প্রশ্নের উত্তর দিতে পারি।"
)
REFUSAL_NOT_IN_CONTEXT_BN = (
    "দুঃখিত, আমার কাছে থাকা নথিপত্রে এই প্রশ্নের নির্ভরযোগ্য উত্তর খুঁজে পাইনি।"
)

_PLACEHOLDER = re.compile(r"\{(context|question)\}")


@dataclass(frozen=True)
class PipelineConfig:
    chunk_size: int = 600
    chunk_overlap: int = 50
    top_k: int = 4
    ood_threshold: float = 0.25
    dim: int = DEFAULT_EMBEDDING_DIM
    gen_max_tokens: int = 512
    gen_temperature: float = 0.0
    refusal_out_of_domain: str = REFUSAL_OUT_OF_DOMAIN_BN
    refusal_not_in_context: str = REFUSAL_NOT_IN_CONTEXT_BN

    def __post_init__(self):
        if not 0 <= self.ood_threshold <= 1:
            raise ConfigurationError(
                f"ood_threshold must be in [0, 1], got {self.ood_threshold}"
            )
        if self.top_k < 1:
            raise ConfigurationError(f"top_k must be >= 1, got {self.top_k}")
        if not 0 <= self.chunk_overlap < self.chunk_size:
            raise ConfigurationError(
                f"need 0 <= chunk_overlap < chunk_size, got "
                f"overlap={self.chunk_overlap} size={self.chunk_size}"
            )
        if self.dim < 1:
            raise ConfigurationError(f"dim must be >= 1, got {self.dim}")
        if not self.refusal_out_of_domain or not self.refusal_not_in_context:
            raise ConfigurationError("refusal messages must be non-empty")
        if self.refusal_out_of_domain == self.refusal_not_in_context:
            raise ConfigurationError(
                "out-of-domain and not-in-context refusals must be distinct strings"
            )


@dataclass
class AnswerTrace:
    """Complete per-query record: stage texts, hits, timings, and status."""

    query_bn: str
    query_en: str = ""
    enriched_query: str = ""
    injected_terms: list[str] = field(default_factory=list)
    matched_rules: list[str] = field(default_factory=list)
    hits: list[SearchHit] = field(default_factory=list)
    prompt: str = ""
    answer_en: str = ""
    answer_bn: str = ""
    status: Status = "backend_error"
    timings_ms: dict[str, float] = field(
        default_factory=lambda: {stage: 0.0 for stage in (*STAGES, "total")}
    )
    error_stage: str | None = None
    error_message: str | None = None
    translate_in_passthrough: bool = False
    translate_out_passthrough: bool = False

    def to_dict(self) -> dict:
        return {
            "query_bn": self.query_bn,
            "query_en": self.query_en,
            "enriched_query": self.enriched_query,
            "injected_terms": list(self.injected_terms),
            "matched_rules": list(self.matched_rules),
            "hits": [h.to_dict() for h in self.hits],
            "prompt": self.prompt,
            "answer_en": self.answer_en,
            "answer_bn": self.answer_bn,
            "status": self.status,
            "timings_ms": dict(self.timings_ms),
            "error_stage": self.error_stage,
            "error_message": self.error_message,
            "translate_in_passthrough": self.translate_in_passthrough,
            "translate_out_passthrough": self.translate_out_passthrough,
        }


def load_prompt_template(path: str | Path | None = None) -> str:
    """Read and validate a prompt template ({context} and {question} required)."""
    template_path = Path(path) if path is not None else DEFAULT_PROMPT_TEMPLATE_PATH
    try:
        template = template_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read prompt template {template_path}: {exc}") from exc
    for placeholder in ("{context}", "{question}"):
        if placeholder not in template:
            raise ConfigurationError(
                f"prompt template {template_path} is missing the {placeholder} placeholder"
            )
    return template


def build_grounded_prompt(question_en: str, hits: list[SearchHit], template: str) -> str:
    """Fill the template with ranked context snippets and the question.

    Each hit renders as ``[source_name, pN] text`` in rank order.
    Substitution is a single pass, so placeholder-like braces inside
    snippets or the question are inserted verbatim, never expanded.
    """
    if not hits:
        raise ValueError("cannot build a grounded prompt without hits")
    for placeholder in ("{context}", "{question}"):
        if placeholder not in template:
            raise ConfigurationError(f"prompt template is missing {placeholder}")
    blocks = []
    for hit in hits:
        tag = f"[{hit.source_name}, p{hit.page}]" if hit.page is not None else f"[{hit.source_name}]"
        blocks.append(f"{tag} {hit.text}")
    context_block = "\n\n".join(blocks)
    return _PLACEHOLDER.sub(
        lambda m: context_block if m.group(1) == "context" else question_en, template
    )


def reject_out_of_domain(hits: list[SearchHit], ood_threshold: float) -> bool:
    """True iff there are no hits or the best score is strictly below threshold."""
    if not hits:
        return True
    return hits[0].score < ood_threshold


def source_distribution(traces: list[AnswerTrace]) -> dict[str, int]:
    """Count retrieved hits per source_name across traces (any status)."""
    counts: Counter[str] = Counter()
    for trace in traces:
        counts.update(hit.source_name for hit in trace.hits)
    return dict(counts)


def answer_query(
    query_bn: str,
    config: PipelineConfig,
    index: VectorIndex,
    rulebook: list[KeywordRule],
    clients: Clients,
    template: str | None = None,
    top_k: int | None = None,
    prompt_template_path: str | Path | None = None,
) -> AnswerTrace:
    """Run the five stages for one query, recording the full trace.

    Backend transport failures surface as status="backend_error" with the
    failing stage named; they never raise out of this function.
    """
    if not query_bn or not query_bn.strip():
        raise ValueError("query must be non-empty")
    if template is None:
        template = load_prompt_template(prompt_template_path)
    k = top_k if top_k is not None else config.top_k
    if k < 1:
        raise ValueError(f"top_k must be >= 1, got {k}")

    trace = AnswerTrace(query_bn=query_bn)
    t_start = time.perf_counter()
    stage = "translate_in"
    try:
        t0 = time.perf_counter()
        result = clients.translator.translate(query_bn, "bn_to_en")
        trace.timings_ms["translate_in"] = (time.perf_counter() - t0) * 1000.0
        trace.query_en = result.text
        trace.translate_in_passthrough = result.passthrough

        stage = "enrich"
        t0 = time.perf_counter()
        enrichment = enrich(query_bn, trace.query_en, rulebook)
        trace.timings_ms["enrich"] = (time.perf_counter() - t0) * 1000.0
        trace.enriched_query = enrichment.enriched_query
        trace.injected_terms = enrichment.injected_terms
        trace.matched_rules = enrichment.matched_rules

        stage = "retrieve"
        t0 = time.perf_counter()
        try:
            query_vec = clients.embedder.embed(trace.enriched_query)
            trace.hits = index.search_top_k(query_vec, k)
        except ValueError:
            # Token-free queries cannot be embedded; treat as nothing retrieved.
            trace.hits = []
        trace.timings_ms["retrieve"] = (time.perf_counter() - t0) * 1000.0

        if reject_out_of_domain(trace.hits, config.ood_threshold):
            trace.status = "rejected_out_of_domain"
            trace.answer_bn = config.refusal_out_of_domain
            trace.timings_ms["total"] = (time.perf_counter() - t_start) * 1000.0
            return trace

        stage = "generate"
        t0 = time.perf_counter()
        trace.prompt = build_grounded_prompt(trace.enriched_query, trace.hits, template)
        trace.answer_en = clients.generator.generate(
            GenerationRequest(
                prompt=trace.prompt,
                max_tokens=config.gen_max_tokens,
                temperature=config.gen_temperature,
            )
        )
        trace.timings_ms["generate"] = (time.perf_counter() - t0) * 1000.0

        if UNAVAILABLE_MARKER in trace.answer_en.strip():
            trace.status = "not_in_context"
            trace.answer_bn = config.refusal_not_in_context
            trace.timings_ms["total"] = (time.perf_counter() - t_start) * 1000.0
            return trace

        stage = "translate_out"
        t0 = time.perf_counter()
        result = clients.translator.translate(trace.answer_en, "en_to_bn")
        trace.timings_ms["translate_out"] = (time.perf_counter() - t0) * 1000.0
        trace.answer_bn = result.text
        trace.translate_out_passthrough = result.passthrough
        trace.status = "answered"
        trace.timings_ms["total"] = (time.perf_counter() - t_start) * 1000.0
        return trace
    except TransportError as exc:
        logger.warning("backend failure at stage %s: %s", stage, exc)
        trace.status = "backend_error"
        trace.error_stage = stage
        trace.error_message = str(exc)
        trace.timings_ms["total"] = (time.perf_counter() - t_start) * 1000.0
        return trace
