// Chat state and turn rendering. One in-flight ask at a time: the input is
// disabled while a request is pending, and a network failure keeps the
// typed text so the user can retry.

import { ApiClient, type AnswerTrace } from "./api.js";
import { renderTracePanel } from "./trace.js";

export interface ChatTurn {
  userQueryBn: string;
  trace: AnswerTrace | null; // null when the request itself failed
  errorMessage: string | null;
  expanded: boolean;
}

const STATUS_LABELS: Record<string, string> = {
  rejected_out_of_domain: "প্রশ্নটি কৃষি বিষয়ের বাইরে (out of domain)",
  not_in_context: "নথিতে উত্তর পাওয়া যায়নি (not in the documents)",
  backend_error: "সার্ভার ত্রুটি (backend error)",
};

export class ChatController {
  readonly turns: ChatTurn[] = [];
  private pending = false;

  constructor(
    private readonly api: ApiClient,
    private readonly log: HTMLElement,
    private readonly input: HTMLInputElement,
    private readonly button: HTMLButtonElement,
  ) {}

  get isPending(): boolean {
    return this.pending;
  }

  async submit(rawText?: string): Promise<void> {
    const text = (rawText ?? this.input.value).trim();
    if (!text || this.pending) return;
    this.setPending(true);
    this.appendUserBubble(text);
    try {
      const trace = await this.api.ask(text);
      const turn: ChatTurn = { userQueryBn: text, trace, errorMessage: null, expanded: false };
      this.turns.push(turn);
      this.appendAnswer(turn);
      this.input.value = "";
    } catch (err) {
      // network-level failure: keep the input so the user can retry
      const message = err instanceof Error ? err.message : String(err);
      const turn: ChatTurn = { userQueryBn: text, trace: null, errorMessage: message, expanded: false };
      this.turns.push(turn);
      this.appendNetworkError(turn);
      this.input.value = text;
    } finally {
      this.setPending(false);
    }
  }

  private setPending(pending: boolean): void {
    this.pending = pending;
    this.input.disabled = pending;
    this.button.disabled = pending;
  }

  private appendUserBubble(text: string): void {
    const bubble = document.createElement("div");
    bubble.className = "bubble user";
    bubble.textContent = text;
    this.log.appendChild(bubble);
    this.scrollToEnd();
  }

  private appendAnswer(turn: ChatTurn): void {
    const trace = turn.trace!;
    const bubble = document.createElement("div");
    bubble.className = `bubble assistant status-${trace.status}`;

    const answer = document.createElement("div");
    answer.className = "answer-text";
    answer.textContent = trace.answer_bn || trace.answer_en || "";
    bubble.appendChild(answer);

    if (trace.status === "answered") {
      const panel = renderTracePanel(trace, turn.expanded);
      panel.addEventListener("toggle", () => {
        turn.expanded = panel.open;
      });
      bubble.appendChild(panel);
    } else {
      const note = document.createElement("div");
      note.className = "status-note";
      note.textContent = STATUS_LABELS[trace.status] ?? trace.status;
      bubble.appendChild(note);
      if (trace.status === "backend_error") {
        const detail = document.createElement("div");
        detail.className = "error-detail";
        detail.textContent = `Failing stage: ${trace.error_stage ?? "unknown"}`;
        bubble.appendChild(detail);
        bubble.appendChild(this.retryButton(turn.userQueryBn));
      }
    }
    this.log.appendChild(bubble);
    this.scrollToEnd();
  }

  private appendNetworkError(turn: ChatTurn): void {
    const bubble = document.createElement("div");
    bubble.className = "bubble assistant network-error";
    const note = document.createElement("div");
    note.className = "status-note";
    note.textContent = `সার্ভারে পৌঁছানো যায়নি: ${turn.errorMessage}`;
    bubble.appendChild(note);
    bubble.appendChild(this.retryButton(turn.userQueryBn));
    this.log.appendChild(bubble);
    this.scrollToEnd();
  }

  private retryButton(query: string): HTMLButtonElement {
    const retry = document.createElement("button");
    retry.className = "retry";
    retry.type = "button";
    retry.textContent = "আবার চেষ্টা করুন (retry)";
    retry.addEventListener("click", () => void this.submit(query));
    return retry;
  }

  private scrollToEnd(): void {
    this.log.scrollTop = this.log.scrollHeight;
  }
}
