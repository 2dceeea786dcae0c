"""Replays categorized query fixtures through the pipeline and reports verdicts.

The cases file is JSON-lines, one case per line::

    {"case_id": "disease_blast", "query_bn": "...", "category": "disease_diagnosis",
     "expected_status": "answered", "expected_source": "FAO Rice Pest Guide",
     "expected_terms": ["Pyricularia oryzae"]}

A case passes when the pipeline status matches, every expected term appears
in the enriched query or the English answer, and (when given) the top-1 hit
comes from the expected source. Verdicts are mechanical on purpose; the
expectations live in the data, not in the code.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import ServiceConfig, build_clients
from .enrichment import KeywordRule, load_rules
from .gateway import Clients
from .index import VectorIndex
from .pipeline import (
    STAGES,
    AnswerTrace,
    answer_query,
    load_prompt_template,
    source_distribution,
)

CATEGORIES = ("disease_diagnosis", "dosage_instruction", "out_of_domain", "other")
STATUSES = ("answered", "rejected_out_of_domain", "not_in_context", "backend_error")


@dataclass(frozen=True)
class EvalCase:
    case_id: str
    query_bn: str
    category: str
    expected_status: str
    expected_source: str | None = None
    expected_terms: list[str] = field(default_factory=list)


@dataclass
class CaseVerdict:
    case_id: str
    category: str
    passed: bool
    reason: str
    status: str
    expected_status: str
    top_source: str | None
    expected_source: str | None
    injected_terms: list[str]
    timings_ms: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "category": self.category,
            "passed": self.passed,
            "reason": self.reason,
            "status": self.status,
            "expected_status": self.expected_status,
            "top_source": self.top_source,
            "expected_source": self.expected_source,
            "injected_terms": list(self.injected_terms),
            "timings_ms": dict(self.timings_ms),
        }


@dataclass
class EvalReport:
    verdicts: list[CaseVerdict]
    invalid_lines: list[dict]
    pass_rate: float
    category_pass_rates: dict[str, float]
    timing_stats: dict[str, dict[str, float]]
    source_distribution: dict[str, int]
    config_hash: str
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "run": {
                "config_hash": self.config_hash,
                "timestamp": self.timestamp,
                "case_count": len(self.verdicts),
                "invalid_lines": list(self.invalid_lines),
            },
            "pass_rate": self.pass_rate,
            "category_pass_rates": dict(self.category_pass_rates),
            "timing_stats": {k: dict(v) for k, v in self.timing_stats.items()},
            "source_distribution": dict(self.source_distribution),
            "cases": [v.to_dict() for v in self.verdicts],
        }

    @property
    def all_passed(self) -> bool:
        return bool(self.verdicts) and all(v.passed for v in self.verdicts)


def load_cases(path: str | Path) -> tuple[list[EvalCase], list[dict]]:
    """Parse a JSON-lines cases file; malformed lines are reported, not fatal."""
    cases: list[EvalCase] = []
    invalid: list[dict] = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            case_id = str(obj["case_id"])
            category = str(obj["category"])
            expected_status = str(obj["expected_status"])
            if case_id in seen_ids:
                raise ValueError(f"duplicate case_id {case_id!r}")
            if category not in CATEGORIES:
                raise ValueError(f"unknown category {category!r}")
            if expected_status not in STATUSES:
                raise ValueError(f"unknown expected_status {expected_status!r}")
            if category == "out_of_domain" and expected_status != "rejected_out_of_domain":
                raise ValueError("out_of_domain cases must expect rejected_out_of_domain")
            query_bn = str(obj["query_bn"])
            if not query_bn.strip():
                raise ValueError("query_bn is empty")
            cases.append(
                EvalCase(
                    case_id=case_id,
                    query_bn=query_bn,
                    category=category,
                    expected_status=expected_status,
                    expected_source=obj.get("expected_source"),
                    expected_terms=[str(t) for t in obj.get("expected_terms", [])],
                )
            )
            seen_ids.add(case_id)
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            invalid.append({"line": line_no, "error": str(exc)})
    return cases, invalid


def judge_case(case: EvalCase, trace: AnswerTrace) -> CaseVerdict:
    reasons: list[str] = []
    if trace.status != case.expected_status:
        reasons.append(f"status={trace.status} expected={case.expected_status}")
    haystack = f"{trace.enriched_query}\n{trace.answer_en}".casefold()
    for term in case.expected_terms:
        if term.casefold() not in haystack:
            reasons.append(f"missing term {term!r}")
    top_source = trace.hits[0].source_name if trace.hits else None
    if case.expected_source is not None and top_source != case.expected_source:
        reasons.append(f"top source {top_source!r} expected {case.expected_source!r}")
    return CaseVerdict(
        case_id=case.case_id,
        category=case.category,
        passed=not reasons,
        reason="; ".join(reasons) if reasons else "ok",
        status=trace.status,
        expected_status=case.expected_status,
        top_source=top_source,
        expected_source=case.expected_source,
        injected_terms=trace.injected_terms,
        timings_ms=trace.timings_ms,
    )


def _timing_stats(traces: list[AnswerTrace]) -> dict[str, dict[str, float]]:
    stats: dict[str, dict[str, float]] = {}
    for stage in (*STAGES, "total"):
        values = [t.timings_ms[stage] for t in traces]
        if values:
            arr = np.asarray(values, dtype=np.float64)
            stats[stage] = {
                "mean": float(arr.mean()),
                "p50": float(np.percentile(arr, 50)),
                "p95": float(np.percentile(arr, 95)),
            }
        else:
            stats[stage] = {"mean": 0.0, "p50": 0.0, "p95": 0.0}
    return stats


def run_eval(
    cases_path: str | Path,
    config: ServiceConfig,
    index: VectorIndex | None = None,
    rulebook: list[KeywordRule] | None = None,
    clients: Clients | None = None,
) -> EvalReport:
    """Execute every case once and assemble the report (sorted by case_id)."""
    cases, invalid = load_cases(cases_path)
    if index is None:
        config.require_paths(index=True)
        index = VectorIndex.load(config.index_path)
    if rulebook is None:
        rulebook = load_rules(config.rulebook_path)
    if clients is None:
        clients = build_clients(config)
    template = load_prompt_template(config.prompt_template_path)

    verdicts: list[CaseVerdict] = []
    traces: list[AnswerTrace] = []
    for case in sorted(cases, key=lambda c: c.case_id):
        trace = answer_query(
            case.query_bn, config.pipeline, index, rulebook, clients, template=template
        )
        traces.append(trace)
        verdicts.append(judge_case(case, trace))

    by_category: dict[str, list[CaseVerdict]] = {}
    for verdict in verdicts:
        by_category.setdefault(verdict.category, []).append(verdict)
    category_pass_rates = {
        cat: sum(v.passed for v in vs) / len(vs) for cat, vs in sorted(by_category.items())
    }
    pass_rate = sum(v.passed for v in verdicts) / len(verdicts) if verdicts else 0.0

    config_json = json.dumps(config.to_dict(), sort_keys=True, ensure_ascii=False)
    return EvalReport(
        verdicts=verdicts,
        invalid_lines=invalid,
        pass_rate=pass_rate,
        category_pass_rates=category_pass_rates,
        timing_stats=_timing_stats(traces),
        source_distribution=source_distribution(traces),
        config_hash=hashlib.sha256(config_json.encode("utf-8")).hexdigest(),
        timestamp=datetime.now(timezone.utc).isoformat(),
    )


def write_report(report: EvalReport, path: str | Path, format: str = "json") -> None:
    path = Path(path)
    if format == "json":
        path.write_text(
            json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
    elif format == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [
                    "case_id", "category", "passed", "reason", "status",
                    "expected_status", "top_source", "expected_source",
                    "injected_terms", "total_ms",
                ]
            )
            for v in report.verdicts:
                writer.writerow(
                    [
                        v.case_id, v.category, v.passed, v.reason, v.status,
                        v.expected_status, v.top_source or "", v.expected_source or "",
                        "|".join(v.injected_terms), f"{v.timings_ms['total']:.3f}",
                    ]
                )
            writer.writerow([])
            writer.writerow(["SUMMARY", "pass_rate", f"{report.pass_rate:.4f}"])
            for cat, rate in report.category_pass_rates.items():
                writer.writerow(["SUMMARY", f"pass_rate[{cat}]", f"{rate:.4f}"])
            for stage, stats in report.timing_stats.items():
                writer.writerow(["SUMMARY", f"mean_ms[{stage}]", f"{stats['mean']:.3f}"])
            writer.writerow(["SUMMARY", "config_hash", report.config_hash])
    else:
        raise ValueError(f"unknown report format {format!r}")
