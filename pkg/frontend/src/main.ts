import { ApiClient, resolveApiBase } from "./api.js";
import { ChatController } from "./chat.js";

const STATS_POLL_MS = 15_000;

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function refreshFooter(api: ApiClient, footer: HTMLElement): Promise<void> {
  const healthy = await api.health();
  if (!healthy) {
    footer.textContent = "service unreachable";
    footer.classList.add("down");
    return;
  }
  try {
    const stats = await api.stats();
    footer.classList.remove("down");
    footer.textContent =
      `${stats.index_size} chunks · dim ${stats.dim} · ${stats.queries_served} queries served`;
  } catch {
    footer.textContent = "service unreachable";
    footer.classList.add("down");
  }
}

function start(): void {
  const api = new ApiClient(resolveApiBase(window.location, window.localStorage));
  const controller = new ChatController(
    api,
    byId("chat-log"),
    byId<HTMLInputElement>("query-input"),
    byId<HTMLButtonElement>("send-button"),
  );
  byId<HTMLFormElement>("query-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void controller.submit();
  });
  const footer = byId("stats-footer");
  void refreshFooter(api, footer);
  window.setInterval(() => void refreshFooter(api, footer), STATS_POLL_MS);
}

start();
