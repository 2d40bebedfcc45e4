/** Wire types mirroring the engine's HTTP API. */

export interface ScheduleStep {
  agent: string;
  subprompt: string;
}

export interface ScheduleEvent {
  type: "schedule";
  subtasks: ScheduleStep[];
  revision: number;
}

export interface AgentStartEvent {
  type: "agent_start";
  agent: string;
  subprompt: string;
}

export interface ToolCallEvent {
  type: "tool_call";
  agent: string;
  tool: string;
  status: string;
}

export interface AgentDoneEvent {
  type: "agent_done";
  agent: string;
  status: string;
}

export interface VerdictEvent {
  type: "verdict";
  complete: boolean;
  missing: string;
}

export interface FinalEvent {
  type: "final";
  terminal: string;
  answer: string;
}

export type RunEvent =
  | ScheduleEvent
  | AgentStartEvent
  | ToolCallEvent
  | AgentDoneEvent
  | VerdictEvent
  | FinalEvent;

export interface MapLayer {
  product: string;
  region: string;
  date: string;
  style: string;
}

export interface MapAnnotation {
  kind: string;
  label: string;
  cells: [number, number][];
  grid_size?: number;
  values?: number[];
  boxes?: number[][];
}

export interface MapState {
  layers: MapLayer[];
  annotations: MapAnnotation[];
}

export interface TraceToolCall {
  agent: string;
  tool: string;
  args: Record<string, unknown>;
  result_status: string;
  result_payload: string;
  accessed: string[];
}

export interface TraceSchedule {
  subtasks: ScheduleStep[];
  revision: number;
}

export interface TokenUsageTotals {
  prompt_tokens: number;
  completion_tokens: number;
  total_tokens: number;
}

export interface TraceJson {
  task_id: string;
  strategy: string;
  executed_steps: TraceToolCall[];
  schedules: TraceSchedule[];
  token_usage: TokenUsageTotals & { calls: TokenUsageTotals[] };
  final_answer: string;
  terminal: string;
}

export interface AgentInfo {
  name: string;
  role: string;
  tools: number;
}
