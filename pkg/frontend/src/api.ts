// Typed client for the advisory service JSON API.
// The UI talks to exactly three endpoints: /v1/ask, /v1/stats, /v1/health.

export type TraceStatus =
  | "answered"
  | "rejected_out_of_domain"
  | "not_in_context"
  | "backend_error";

export interface SearchHit {
  chunk_id: string;
  score: number;
  rank: number;
  doc_id: string;
  source_name: string;
  page: number | null;
  text: string;
}

export interface AnswerTrace {
  query_bn: string;
  query_en: string;
  enriched_query: string;
  injected_terms: string[];
  matched_rules: string[];
  hits: SearchHit[];
  prompt: string;
  answer_en: string;
  answer_bn: string;
  status: TraceStatus;
  timings_ms: Record<string, number>;
  error_stage: string | null;
  error_message: string | null;
  translate_in_passthrough: boolean;
  translate_out_passthrough: boolean;
}

export interface ServiceStats {
  index_size: number;
  dim: number;
  queries_served: number;
  source_distribution: Record<string, number>;
  status_counts: Record<string, number>;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Where the service lives. Priority: ?api= query param, then localStorage,
 *  then same-origin, then the default local service port. */
export function resolveApiBase(loc: Location, storage: Storage): string {
  const fromQuery = new URLSearchParams(loc.search).get("api");
  if (fromQuery) {
    storage.setItem("agrirag_api_base", fromQuery);
    return fromQuery.replace(/\/$/, "");
  }
  const stored = storage.getItem("agrirag_api_base");
  if (stored) return stored.replace(/\/$/, "");
  if (loc.port === "8500") return "";
  return "http://127.0.0.1:8500";
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  /** POST /v1/ask. A 502 still carries a full trace (backend_error), so it
   *  resolves normally; other non-OK statuses reject with ApiError. */
  async ask(query: string, topK?: number): Promise<AnswerTrace> {
    const body: Record<string, unknown> = { query };
    if (topK !== undefined) body.top_k = topK;
    const resp = await this.fetchImpl(`${this.baseUrl}/v1/ask`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok && resp.status !== 502) {
      throw new ApiError(`ask failed: HTTP ${resp.status}`, resp.status);
    }
    return (await resp.json()) as AnswerTrace;
  }

  async stats(): Promise<ServiceStats> {
    const resp = await this.fetchImpl(`${this.baseUrl}/v1/stats`);
    if (!resp.ok) throw new ApiError(`stats failed: HTTP ${resp.status}`, resp.status);
    return (await resp.json()) as ServiceStats;
  }

  async health(): Promise<boolean> {
    try {
      const resp = await this.fetchImpl(`${this.baseUrl}/v1/health`);
      if (!resp.ok) return false;
      const body = (await resp.json()) as { status?: string };
      return body.status === "ok";
    } catch {
      return false;
    }
  }
}
