import { ApiClient, ApiError } from "./api.js";
import { renderChat } from "./chat.js";
import { renderMap } from "./map.js";
import { readEventStream } from "./sse.js";
import { Store } from "./store.js";
import { renderTrace } from "./trace.js";

/** Wires the store, API client and panel renderers into one page.
 * Thin client: every number shown is fetched from the engine. */

export interface App {
  root: HTMLElement;
  store: Store;
  sendPrompt: (text: string) => Promise<void>;
  openTrace: (runId?: string) => Promise<void>;
}

export function createApp(doc: Document, api: ApiClient): App {
  const store = new Store();
  let activeRevision = 0;

  const root = doc.createElement("div");
  root.className = "app";
  const main = doc.createElement("div");
  main.className = "app-main";
  const chatPane = doc.createElement("section");
  chatPane.className = "pane chat-pane";
  const mapPane = doc.createElement("section");
  mapPane.className = "pane map-pane";
  main.appendChild(chatPane);
  main.appendChild(mapPane);
  const drawer = doc.createElement("aside");
  drawer.className = "trace-drawer";
  drawer.hidden = true;
  root.appendChild(main);
  root.appendChild(drawer);

  async function ensureSession(): Promise<string> {
    const state = store.get();
    if (state.sessionId) {
      return state.sessionId;
    }
    const sessionId = await api.createSession();
    store.update((s) => ({ ...s, sessionId }));
    return sessionId;
  }

  async function refreshMap(): Promise<void> {
    const state = store.get();
    if (!state.sessionId) {
      return;
    }
    const mapState = await api.getMap(state.sessionId);
    store.update((s) => ({ ...s, mapState }));
  }

  async function openTrace(runId?: string): Promise<void> {
    const target = runId ?? store.get().runId;
    store.update((s) => ({ ...s, traceOpen: true }));
    if (!target) {
      store.update((s) => ({ ...s, trace: null, traceError: "no run yet" }));
      return;
    }
    try {
      const trace = await api.getTrace(target);
      activeRevision = trace.schedules.length
        ? trace.schedules[trace.schedules.length - 1].revision
        : 0;
      store.update((s) => ({ ...s, trace, traceError: null }));
    } catch (error) {
      const message =
        error instanceof ApiError && error.status === 404
          ? "trace not found"
          : `failed to load trace: ${String(error)}`;
      store.update((s) => ({ ...s, trace: null, traceError: message }));
    }
  }

  async function sendPrompt(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed || store.get().running) {
      return;
    }
    store.update((s) => ({
      ...s,
      messages: [...s.messages, { role: "user", text: trimmed }],
      chips: [],
      toolCalls: [],
      verdict: null,
      terminal: null,
      error: null,
      running: true,
      lastPrompt: trimmed,
    }));
    let runId: string;
    try {
      const sessionId = await ensureSession();
      runId = await api.sendChat(sessionId, trimmed);
    } catch (error) {
      const message =
        error instanceof ApiError && error.status === 409
          ? "run in progress"
          : error instanceof ApiError
            ? error.message
            : String(error);
      store.update((s) => ({ ...s, running: false, error: message }));
      return;
    }
    store.update((s) => ({ ...s, runId }));
    try {
      await readEventStream(api.eventsUrl(runId), (event) => store.apply(event), api.fetcher);
    } catch (error) {
      store.update((s) => ({ ...s, running: false, error: String(error) }));
      return;
    }
    store.update((s) => (s.running ? { ...s, running: false } : s));
    try {
      await refreshMap();
      await openTrace(runId);
    } catch {
      // panels refresh best-effort; the chat transcript already carries the answer
    }
  }

  function render(): void {
    const state = store.get();
    renderChat(doc, chatPane, state, {
      onSend: (text) => {
        void sendPrompt(text);
      },
      onRetry: () => {
        const prompt = store.get().lastPrompt;
        store.update((s) => ({
          ...s,
          error: null,
          messages: s.messages.slice(0, -1),
        }));
        if (prompt) {
          void sendPrompt(prompt);
        }
      },
      onOpenTrace: () => {
        void openTrace();
      },
    });
    renderMap(doc, mapPane, state.mapState, state.hiddenLayers, {
      onToggleLayer: (index) => {
        store.update((s) => ({
          ...s,
          hiddenLayers: s.hiddenLayers.includes(index)
            ? s.hiddenLayers.filter((i) => i !== index)
            : [...s.hiddenLayers, index],
        }));
      },
    });
    drawer.hidden = !state.traceOpen;
    if (state.traceOpen) {
      renderTrace(doc, drawer, state.trace, state.traceError, activeRevision, (revision) => {
        activeRevision = revision;
        store.update((s) => ({ ...s }));
      });
    }
  }

  store.subscribe(render);
  render();
  return { root, store, sendPrompt, openTrace };
}
