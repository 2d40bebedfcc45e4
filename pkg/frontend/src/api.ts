import type { AgentInfo, MapState, TraceJson } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

/** Thin typed client over the engine's HTTP API; no business logic here. */
export class ApiClient {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = fetch,
  ) {}

  url(path: string): string {
    return `${this.base}${path}`;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.url(path), init);
    } catch (error) {
      throw new ApiError(0, `network error: ${String(error)}`);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON error bodies fall through with a generic message
    }
    if (!response.ok) {
      const message =
        body && typeof body === "object" && "error" in body
          ? String((body as { error: unknown }).error)
          : `request failed with status ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return body as T;
  }

  async createSession(): Promise<string> {
    const body = await this.request<{ session_id: string }>("/api/sessions", {
      method: "POST",
    });
    return body.session_id;
  }

  async sendChat(sessionId: string, text: string): Promise<string> {
    const body = await this.request<{ run_id: string }>("/api/chat", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ session_id: sessionId, text }),
    });
    return body.run_id;
  }

  eventsUrl(runId: string): string {
    return this.url(`/api/events/${runId}`);
  }

  getMap(sessionId: string): Promise<MapState> {
    return this.request<MapState>(`/api/map/${sessionId}`);
  }

  getTrace(runId: string): Promise<TraceJson> {
    return this.request<TraceJson>(`/api/traces/${runId}`);
  }

  async getAgents(): Promise<AgentInfo[]> {
    const body = await this.request<{ agents: AgentInfo[] }>("/api/agents");
    return body.agents;
  }

  get fetcher(): FetchLike {
    return this.fetchImpl;
  }
}
