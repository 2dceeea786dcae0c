"""Rulebook validation and keyword-injection behaviour."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agrirag.enrichment import DEFAULT_RULEBOOK_PATH, KeywordRule, enrich, load_rules
from agrirag.errors import RulebookError


def rule(rule_id, variants, inject):
    return KeywordRule(rule_id=rule_id, variants=variants, inject=inject)


@pytest.fixture(scope="module")
def starter_rules():
    return load_rules(DEFAULT_RULEBOOK_PATH)


# ---------------------------------------------------------------- load_rules


def test_load_rules_preserves_order(tmp_path):
    path = tmp_path / "rules.json"
    path.write_text(
        json.dumps(
            [
                {"rule_id": "two", "variants": ["b"], "inject": ["B"]},
                {"rule_id": "one", "variants": ["a"], "inject": ["A"]},
            ]
        ),
        encoding="utf-8",
    )
    rules = load_rules(path)
    assert [r.rule_id for r in rules] == ["two", "one"]


def test_load_rules_empty_inject_rejected(tmp_path):
    path = tmp_path / "rules.json"
    path.write_text(
        json.dumps([{"rule_id": "r", "variants": ["a"], "inject": []}]), encoding="utf-8"
    )
    with pytest.raises(RulebookError, match="index 0"):
        load_rules(path)


def test_load_rules_blank_variant_rejected(tmp_path):
    path = tmp_path / "rules.json"
    path.write_text(
        json.dumps([{"rule_id": "r", "variants": ["  "], "inject": ["x"]}]), encoding="utf-8"
    )
    with pytest.raises(RulebookError):
        load_rules(path)


def test_load_rules_duplicate_id_names_both_positions(tmp_path):
    path = tmp_path / "rules.json"
    path.write_text(
        json.dumps(
            [
                {"rule_id": "dup", "variants": ["a"], "inject": ["A"]},
                {"rule_id": "mid", "variants": ["m"], "inject": ["M"]},
                {"rule_id": "dup", "variants": ["b"], "inject": ["B"]},
            ]
        ),
        encoding="utf-8",
    )
    with pytest.raises(RulebookError, match="0 and 2"):
        load_rules(path)


def test_starter_rulebook_is_valid(starter_rules):
    assert len(starter_rules) >= 20


# ---------------------------------------------------------------- enrich


def test_enrich_matches_bengali_variant():
    rules = [rule("sb", ["মাজরা", "magra"], ["stem borer"])]
    result = enrich("ধানে মাজরা লেগেছে", "rice pest attack", rules)
    assert result.enriched_query.endswith("stem borer")
    assert result.matched_rules == ["sb"]
    assert result.injected_terms == ["stem borer"]


def test_enrich_skips_terms_already_present():
    rules = [rule("blast", ["blast"], ["rice blast", "Pyricularia oryzae"])]
    result = enrich("", "symptoms of rice blast", rules)
    assert result.enriched_query == "symptoms of rice blast Pyricularia oryzae"
    assert result.injected_terms == ["Pyricularia oryzae"]


def test_enrich_no_match_is_identity():
    rules = [rule("sb", ["মাজরা"], ["stem borer"])]
    result = enrich("আবহাওয়া কেমন", "weather how is it", rules)
    assert result.enriched_query == "weather how is it"
    assert result.matched_rules == []
    assert result.injected_terms == []


def test_enrich_requires_query_en():
    with pytest.raises(ValueError):
        enrich("কিছু", "", [])


def test_enrich_matching_is_case_insensitive_for_latin():
    rules = [rule("blast", ["Blast"], ["Pyricularia oryzae"])]
    result = enrich("", "BLAST on my rice", rules)
    assert result.matched_rules == ["blast"]


def test_enrich_token_boundaries_latin():
    rules = [rule("blast", ["blast"], ["Pyricularia oryzae"])]
    assert enrich("", "blasting the rocks", rules).matched_rules == []
    assert enrich("", "a blast, indeed", rules).matched_rules == ["blast"]


def test_enrich_token_boundaries_bengali():
    # "ব্লাস্ট" must not match inside the inflected "ব্লাস্টের"
    rules = [rule("blast", ["ব্লাস্ট"], ["Pyricularia oryzae"])]
    assert enrich("ব্লাস্টের লক্ষণ", "x", rules).matched_rules == []
    assert enrich("ব্লাস্ট লক্ষণ", "x", rules).matched_rules == ["blast"]


def test_enrich_chained_rules_reach_fixpoint():
    rules = [
        rule("colloquial", ["মাজরা"], ["stem borer"]),
        rule("species", ["stem borer"], ["Scirpophaga incertulas"]),
    ]
    result = enrich("মাজরা পোকা", "insect attack", rules)
    assert result.injected_terms == ["stem borer", "Scirpophaga incertulas"]
    assert result.matched_rules == ["colloquial", "species"]


def test_enrich_dedupes_across_rules():
    rules = [
        rule("r1", ["lesion"], ["rice blast"]),
        rule("r2", ["spots"], ["rice blast", "leaf spot"]),
    ]
    result = enrich("", "lesion spots on leaves", rules)
    assert result.injected_terms == ["rice blast", "leaf spot"]


def test_enrich_prefix_preserved(starter_rules):
    q = "ধানের ব্লাস্ট রোগের লক্ষণ কী?"
    result = enrich(q, "rice blast disease symptoms what?", starter_rules)
    assert result.enriched_query.startswith("rice blast disease symptoms what?")


def test_enrich_idempotent_on_fixture_queries(starter_rules):
    for q_bn, q_en in [
        ("ধানে মাজরা পোকার আক্রমণ", "in rice insect attack"),
        ("পোড়া রোগ", "burn sickness"),
        ("", "urea dose per hectare"),
        ("কারেন্ট পোকা", "current insect"),
    ]:
        first = enrich(q_bn, q_en, starter_rules)
        second = enrich(q_bn, first.enriched_query, starter_rules)
        assert second.enriched_query == first.enriched_query
        assert second.injected_terms == []


def test_enrich_monotone_under_rule_removal(starter_rules):
    q_bn, q_en = "ধানে মাজরা পোকার আক্রমণ হলে কী করব?", "in rice insect attack if what to do"
    full = enrich(q_bn, q_en, starter_rules)
    for dropped in range(len(starter_rules)):
        subset = [r for i, r in enumerate(starter_rules) if i != dropped]
        reduced = enrich(q_bn, q_en, subset)
        assert set(reduced.injected_terms) <= set(full.injected_terms)


_query_alphabet = st.sampled_from(
    "ধানের ব্লাস্ট মাজরা পোকা কারেন্ট সেচ ইউরিয়া পটাশ rice blast stem borer urea zinc "
    "what dose when field". split()
    + ["?", ","]
)


@settings(max_examples=300, deadline=None)
@given(st.lists(_query_alphabet, min_size=1, max_size=10))
def test_enrich_idempotence_property(words):
    rules = load_rules(DEFAULT_RULEBOOK_PATH)
    query = " ".join(words)
    first = enrich(query, query, rules)
    second = enrich(query, first.enriched_query, rules)
    assert second.enriched_query == first.enriched_query
    assert second.injected_terms == []


@settings(max_examples=300, deadline=None)
@given(st.lists(_query_alphabet, min_size=1, max_size=10))
def test_enrich_prefix_property(words):
    rules = load_rules(DEFAULT_RULEBOOK_PATH)
    query = " ".join(words)
    result = enrich("", query, rules)
    assert result.enriched_query.startswith(query)
    # injected terms are not already present as tokens of the original query
    lowered = query.casefold().split()
    for term in result.injected_terms:
        if " " not in term:
            assert term.casefold() not in lowered
