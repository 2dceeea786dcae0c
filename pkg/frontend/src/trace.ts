// Renders the "why this answer" panel: translated and enriched queries with
// injected terms highlighted, ranked sources with provenance, and a
// horizontal latency bar. Everything shown comes verbatim from the trace;
// the UI computes presentation only (bar widths), never relevance.

import type { AnswerTrace, SearchHit } from "./api.js";

export const STAGES = [
  "translate_in",
  "enrich",
  "retrieve",
  "generate",
  "translate_out",
] as const;

export interface LatencySegment {
  stage: string;
  ms: number;
  percent: number;
}

/** Split the five stage timings into bar segments whose widths are
 *  proportional to the stage durations (percent of the stage sum). */
export function latencySegments(timings: Record<string, number>): LatencySegment[] {
  const values = STAGES.map((stage) => Math.max(0, timings[stage] ?? 0));
  const sum = values.reduce((acc, v) => acc + v, 0);
  return STAGES.map((stage, i) => ({
    stage,
    ms: values[i],
    percent: sum > 0 ? (values[i] / sum) * 100 : 100 / STAGES.length,
  }));
}

/** Wrap case-insensitive occurrences of the given terms in <mark> elements.
 *  Builds DOM nodes from text, so Bengali stays codepoint-faithful and no
 *  trace content is ever interpreted as HTML. */
export function highlightTerms(text: string, terms: string[]): DocumentFragment {
  const fragment = document.createDocumentFragment();
  const cleaned = terms.filter((t) => t.trim().length > 0);
  if (cleaned.length === 0) {
    fragment.appendChild(document.createTextNode(text));
    return fragment;
  }
  const lowered = text.toLowerCase();
  const needles = cleaned.map((t) => t.toLowerCase());
  let pos = 0;
  while (pos < text.length) {
    let bestStart = -1;
    let bestLen = 0;
    for (const needle of needles) {
      const at = lowered.indexOf(needle, pos);
      if (at !== -1 && (bestStart === -1 || at < bestStart ||
          (at === bestStart && needle.length > bestLen))) {
        bestStart = at;
        bestLen = needle.length;
      }
    }
    if (bestStart === -1) {
      fragment.appendChild(document.createTextNode(text.slice(pos)));
      break;
    }
    if (bestStart > pos) {
      fragment.appendChild(document.createTextNode(text.slice(pos, bestStart)));
    }
    const mark = document.createElement("mark");
    mark.textContent = text.slice(bestStart, bestStart + bestLen);
    fragment.appendChild(mark);
    pos = bestStart + bestLen;
  }
  return fragment;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderSourceRow(hit: SearchHit): HTMLElement {
  const row = el("div", "source-row");
  const head = el("div", "source-head");
  head.appendChild(el("span", "source-rank", `#${hit.rank}`));
  head.appendChild(el("span", "source-name", hit.source_name));
  if (hit.page !== null) {
    head.appendChild(el("span", "source-page", `p. ${hit.page}`));
  }
  head.appendChild(el("span", "source-score", hit.score.toFixed(3)));
  row.appendChild(head);
  const snippet = hit.text.length > 220 ? `${hit.text.slice(0, 220)}…` : hit.text;
  row.appendChild(el("div", "source-snippet", snippet));
  return row;
}

function renderLatencyBar(timings: Record<string, number>): HTMLElement {
  const wrapper = el("div", "latency");
  const bar = el("div", "latency-bar");
  for (const segment of latencySegments(timings)) {
    const piece = el("div", `latency-segment stage-${segment.stage}`);
    piece.style.width = `${segment.percent.toFixed(2)}%`;
    piece.title = `${segment.stage}: ${segment.ms.toFixed(1)} ms`;
    bar.appendChild(piece);
  }
  wrapper.appendChild(bar);
  const total = timings["total"] ?? 0;
  const legend = el("div", "latency-legend");
  for (const segment of latencySegments(timings)) {
    const item = el("span", `legend-item stage-${segment.stage}`);
    item.appendChild(el("i", "legend-swatch"));
    item.appendChild(
      document.createTextNode(` ${segment.stage} ${segment.ms.toFixed(1)} ms`),
    );
    legend.appendChild(item);
  }
  legend.appendChild(el("span", "legend-total", `total ${total.toFixed(1)} ms`));
  wrapper.appendChild(legend);
  return wrapper;
}

/** The collapsible per-turn panel. `expanded` mirrors ChatTurn state. */
export function renderTracePanel(trace: AnswerTrace, expanded = false): HTMLDetailsElement {
  const panel = el("details", "trace-panel") as HTMLDetailsElement;
  panel.open = expanded;
  panel.appendChild(el("summary", "trace-summary", "কীভাবে উত্তর এল (trace)"));

  const queries = el("div", "trace-queries");
  const enRow = el("div", "trace-row");
  enRow.appendChild(el("span", "trace-label", "English query"));
  enRow.appendChild(el("span", "trace-value", trace.query_en));
  queries.appendChild(enRow);

  const enrichedRow = el("div", "trace-row");
  enrichedRow.appendChild(el("span", "trace-label", "Enriched query"));
  const enrichedValue = el("span", "trace-value enriched-query");
  enrichedValue.appendChild(highlightTerms(trace.enriched_query, trace.injected_terms));
  enrichedRow.appendChild(enrichedValue);
  queries.appendChild(enrichedRow);
  panel.appendChild(queries);

  const sources = el("div", "sources-panel");
  sources.appendChild(el("div", "sources-title", "Sources"));
  for (const hit of trace.hits) {
    sources.appendChild(renderSourceRow(hit));
  }
  panel.appendChild(sources);

  panel.appendChild(renderLatencyBar(trace.timings_ms));
  return panel;
}
