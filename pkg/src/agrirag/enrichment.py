"""Keyword injection that bridges colloquial farmer vocabulary and scientific terms.

A rulebook maps colloquial variants (Bengali and/or English) to standardized
English scientific terms. Variants are matched against BOTH the original
Bengali query and its English translation: matching pre-translation is what
rescues exactly the colloquialisms that machine translation garbles.
Matched terms are appended to the translated query, never substituted, so
all original user signal survives for the embedder.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import RulebookError
from .textutil import contains_on_token_boundary

# Shipped starter rulebook (~20 rice pest/fertilizer mappings, illustrative).
DEFAULT_RULEBOOK_PATH = Path(__file__).parent / "data" / "rulebook.json"


@dataclass(frozen=True)
class KeywordRule:
    rule_id: str
    variants: list[str]
    inject: list[str]
    note: str = ""


@dataclass(frozen=True)
class EnrichmentResult:
    enriched_query: str
    matched_rules: list[str] = field(default_factory=list)
    injected_terms: list[str] = field(default_factory=list)


def load_rules(path: str | Path) -> list[KeywordRule]:
    """Load and validate a rulebook file, preserving file order."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise RulebookError("rulebook must be a JSON array of rule objects")
    rules: list[KeywordRule] = []
    positions: dict[str, int] = {}
    for i, obj in enumerate(raw):
        rule_id = str(obj.get("rule_id", "")).strip()
        if not rule_id:
            raise RulebookError(f"rule at index {i} has no rule_id")
        if rule_id in positions:
            raise RulebookError(
                f"duplicate rule_id {rule_id!r} at indexes {positions[rule_id]} and {i}"
            )
        positions[rule_id] = i
        variants = [str(v).strip() for v in obj.get("variants", [])]
        inject = [str(t).strip() for t in obj.get("inject", [])]
        if not variants or any(not v for v in variants):
            raise RulebookError(f"rule {rule_id!r} at index {i} has empty variants")
        if not inject or any(not t for t in inject):
            raise RulebookError(f"rule {rule_id!r} at index {i} has empty inject list")
        rules.append(
            KeywordRule(
                rule_id=rule_id,
                variants=variants,
                inject=inject,
                note=str(obj.get("note", "")),
            )
        )
    return rules


def _rule_matches(rule: KeywordRule, query_bn: str, query_en: str) -> bool:
    return any(
        contains_on_token_boundary(query_bn, v) or contains_on_token_boundary(query_en, v)
        for v in rule.variants
    )


def _build_enriched(query_en: str, matched: list[KeywordRule]) -> tuple[str, list[str]]:
    """Append inject terms of matched rules in rulebook order, skipping
    terms already present (on token boundaries) in the text built so far."""
    enriched = query_en
    injected: list[str] = []
    for rule in matched:
        for term in rule.inject:
            if contains_on_token_boundary(enriched, term):
                continue
            enriched = f"{enriched} {term}" if enriched else term
            injected.append(term)
    return enriched, injected


def enrich(query_bn: str, query_en: str, rulebook: list[KeywordRule]) -> EnrichmentResult:
    """Inject scientific terms for every rule matching the query.

    Matching runs to a fixpoint: terms injected by one rule may trigger
    further rules (e.g. a colloquialism maps to "stem borer", which another
    rule maps to its binomial name). That makes enrichment idempotent:
    re-enriching an already enriched query adds nothing.
    """
    if not query_en:
        raise ValueError("query_en must be non-empty")
    matched: list[KeywordRule] = []
    matched_ids: set[str] = set()
    while True:
        enriched, injected = _build_enriched(query_en, matched)
        newly = [
            rule
            for rule in rulebook
            if rule.rule_id not in matched_ids and _rule_matches(rule, query_bn, enriched)
        ]
        if not newly:
            return EnrichmentResult(
                enriched_query=enriched,
                matched_rules=[r.rule_id for r in matched],
                injected_terms=injected,
            )
        for rule in newly:
            matched_ids.add(rule.rule_id)
        matched = [r for r in rulebook if r.rule_id in matched_ids]
