import type { Chip, UiState } from "./store.js";

/** Chat pane: message history, schedule chips, tool-call feed, composer. */

export interface ChatHandlers {
  onSend: (text: string) => void;
  onRetry: () => void;
  onOpenTrace: () => void;
}

function el(doc: Document, tag: string, className?: string, text?: string): HTMLElement {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function chipNode(doc: Document, chip: Chip): HTMLElement {
  const node = el(doc, "span", `chip chip-${chip.status}`, chip.agent);
  node.title = chip.subprompt;
  node.dataset.agent = chip.agent;
  node.dataset.status = chip.status;
  return node;
}

export function renderChat(
  doc: Document,
  container: HTMLElement,
  state: UiState,
  handlers: ChatHandlers,
): void {
  container.textContent = "";
  container.classList.add("chat-panel");

  const history = el(doc, "div", "chat-history");
  for (const turn of state.messages) {
    history.appendChild(el(doc, "div", `chat-turn chat-${turn.role}`, turn.text));
  }
  container.appendChild(history);

  if (state.chips.length > 0) {
    const row = el(doc, "div", "chip-row");
    row.appendChild(el(doc, "span", "chip-label", `schedule r${state.revision}:`));
    for (const chip of state.chips) {
      row.appendChild(chipNode(doc, chip));
    }
    container.appendChild(row);
  }

  if (state.toolCalls.length > 0) {
    const feed = el(doc, "ul", "tool-feed");
    for (const call of state.toolCalls) {
      feed.appendChild(
        el(doc, "li", `tool-line tool-${call.status}`, `${call.agent}.${call.tool} → ${call.status}`),
      );
    }
    container.appendChild(feed);
  }

  if (state.verdict && !state.verdict.complete) {
    container.appendChild(el(doc, "div", "verdict-note", `incomplete: ${state.verdict.missing}`));
  }

  if (state.error) {
    const banner = el(doc, "div", "error-banner");
    banner.appendChild(el(doc, "span", "error-text", state.error));
    const retry = el(doc, "button", "retry-button", "retry");
    retry.addEventListener("click", () => handlers.onRetry());
    banner.appendChild(retry);
    container.appendChild(banner);
  }

  const composer = el(doc, "div", "composer");
  const input = doc.createElement("input");
  input.type = "text";
  input.className = "composer-input";
  input.placeholder = "Ask for a geospatial analysis…";
  const send = doc.createElement("button");
  send.className = "send-button";
  send.textContent = state.running ? "running…" : "send";
  send.disabled = state.running;
  const submit = () => {
    if (!input.value.trim() || state.running) {
      return;
    }
    handlers.onSend(input.value);
    input.value = "";
  };
  send.addEventListener("click", submit);
  input.addEventListener("keydown", (event: Event) => {
    if ((event as KeyboardEvent).key === "Enter") {
      submit();
    }
  });
  composer.appendChild(input);
  composer.appendChild(send);
  if (state.runId) {
    const inspect = el(doc, "button", "inspect-button", "inspect trace");
    inspect.addEventListener("click", () => handlers.onOpenTrace());
    composer.appendChild(inspect);
  }
  container.appendChild(composer);
}
