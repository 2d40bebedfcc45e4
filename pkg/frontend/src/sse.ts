import type { RunEvent } from "./types.js";

/**
 * Incremental text/event-stream frame parser.  Feed it chunks; it yields
 * the JSON payload of each `data:` frame in arrival order.
 */
export class SseParser {
  private buffer = "";

  push(chunk: string): RunEvent[] {
    this.buffer += chunk;
    const events: RunEvent[] = [];
    let boundary = this.buffer.indexOf("\n\n");
    while (boundary >= 0) {
      const frame = this.buffer.slice(0, boundary);
      this.buffer = this.buffer.slice(boundary + 2);
      const data = frame
        .split("\n")
        .filter((line) => line.startsWith("data: "))
        .map((line) => line.slice("data: ".length))
        .join("\n");
      if (data) {
        events.push(JSON.parse(data) as RunEvent);
      }
      boundary = this.buffer.indexOf("\n\n");
    }
    return events;
  }
}

/**
 * Read one run's event stream to completion over fetch (EventSource is
 * unavailable in some hosts and unnecessary for a finite stream).
 */
export async function readEventStream(
  url: string,
  onEvent: (event: RunEvent) => void,
  fetchImpl: typeof fetch = fetch,
): Promise<void> {
  const response = await fetchImpl(url, {
    headers: { accept: "text/event-stream" },
  });
  if (!response.ok || !response.body) {
    throw new Error(`event stream failed with status ${response.status}`);
  }
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  const parser = new SseParser();
  for (;;) {
    const { done, value } = await reader.read();
    if (done) {
      break;
    }
    for (const event of parser.push(decoder.decode(value, { stream: true }))) {
      onEvent(event);
    }
  }
}
