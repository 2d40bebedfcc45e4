import type { MapState, RunEvent, ScheduleStep, TraceJson } from "./types.js";

export type ChipStatus = "pending" | "active" | "done" | "failed" | "blocked";

export interface Chip {
  agent: string;
  subprompt: string;
  status: ChipStatus;
}

export interface ChatTurn {
  role: "user" | "assistant" | "system";
  text: string;
}

export interface ToolCallRow {
  agent: string;
  tool: string;
  status: string;
  chip: number;
}

export interface UiState {
  sessionId: string | null;
  messages: ChatTurn[];
  chips: Chip[];
  revision: number;
  toolCalls: ToolCallRow[];
  running: boolean;
  runId: string | null;
  lastPrompt: string | null;
  verdict: { complete: boolean; missing: string } | null;
  terminal: string | null;
  error: string | null;
  mapState: MapState | null;
  hiddenLayers: number[];
  trace: TraceJson | null;
  traceError: string | null;
  traceOpen: boolean;
}

export function initialState(): UiState {
  return {
    sessionId: null,
    messages: [],
    chips: [],
    revision: 0,
    toolCalls: [],
    running: false,
    runId: null,
    lastPrompt: null,
    verdict: null,
    terminal: null,
    error: null,
    mapState: null,
    hiddenLayers: [],
    trace: null,
    traceError: null,
    traceOpen: false,
  };
}

function activeChipIndex(chips: Chip[]): number {
  return chips.findIndex((chip) => chip.status === "active");
}

/** Pure event reducer; the UI renders whatever this produces. */
export function applyEvent(state: UiState, event: RunEvent): UiState {
  const next: UiState = { ...state, chips: state.chips.map((c) => ({ ...c })) };
  switch (event.type) {
    case "schedule": {
      next.chips = event.subtasks.map((step: ScheduleStep) => ({
        agent: step.agent,
        subprompt: step.subprompt,
        status: "pending",
      }));
      next.revision = event.revision;
      break;
    }
    case "agent_start": {
      const index = next.chips.findIndex(
        (chip) => chip.status === "pending" && chip.agent === event.agent,
      );
      const fallback = next.chips.findIndex((chip) => chip.status === "pending");
      const target = index >= 0 ? index : fallback;
      if (target >= 0) {
        next.chips[target] = { ...next.chips[target], status: "active" };
      }
      break;
    }
    case "tool_call": {
      next.toolCalls = [
        ...state.toolCalls,
        {
          agent: event.agent,
          tool: event.tool,
          status: event.status,
          chip: activeChipIndex(next.chips),
        },
      ];
      break;
    }
    case "agent_done": {
      const index = activeChipIndex(next.chips);
      if (index >= 0) {
        const status: ChipStatus =
          event.status === "done"
            ? "done"
            : event.status === "needs_dependency"
              ? "blocked"
              : "failed";
        next.chips[index] = { ...next.chips[index], status };
      }
      break;
    }
    case "verdict": {
      next.verdict = { complete: event.complete, missing: event.missing };
      break;
    }
    case "final": {
      next.running = false;
      next.terminal = event.terminal;
      next.messages = [
        ...state.messages,
        { role: "assistant", text: event.answer || `(terminal: ${event.terminal})` },
      ];
      break;
    }
  }
  return next;
}

type Listener = (state: UiState) => void;

/** Single store; every state change is serialized through update(). */
export class Store {
  private state: UiState = initialState();
  private listeners: Listener[] = [];

  get(): UiState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  update(mutate: (state: UiState) => UiState): void {
    this.state = mutate(this.state);
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  apply(event: RunEvent): void {
    this.update((state) => applyEvent(state, event));
  }
}
