/**
 * The v:1 session protocol: one JSON document per frame, newline-delimited
 * on stream transports. These types mirror the engine's wire contract
 * exactly; nothing in the UI invents numbers that did not arrive in an
 * event.
 */

export type Op =
  | "create_session"
  | "load_preset"
  | "add_variable"
  | "add_factor"
  | "remove_node"
  | "set_prior"
  | "node_send"
  | "step"
  | "set_policy"
  | "set_damping"
  | "get_state"
  | "reset";

export interface SessionCommand {
  v: 1;
  op: Op;
  args: Record<string, unknown>;
  request_id: string;
}

export interface BeliefPayload {
  /** Mean vector, or null while the belief precision is singular. */
  mean: number[] | null;
  /** Row-major covariance, or null while uninformed. */
  cov: number[][] | null;
}

export interface VariableState extends BeliefPayload {
  dim: number;
  initial: number[] | null;
}

export interface FactorState {
  id: string | number;
  type: string;
  neighbors: (string | number)[];
}

export interface PolicyJson {
  kind: string;
  seed?: number;
  order?: (string | number)[];
  focus?: { id: string | number; radius: number };
}

export interface SessionState {
  variables: Record<string, VariableState>;
  factors: FactorState[];
  damping: number;
  policy: PolicyJson;
}

export interface SessionEvent {
  v: 1;
  request_id: string | null;
  status: "ok" | "error";
  state_delta: Record<string, BeliefPayload>;
  messages_sent: number;
  delta: number | null;
  total_energy: number | null;
  error?: { code: string; message: string };
  session?: string;
  state?: SessionState;
}

export function encodeCommand(cmd: SessionCommand): string {
  return JSON.stringify(cmd) + "\n";
}

export function parseEvent(line: string): SessionEvent {
  const doc = JSON.parse(line) as SessionEvent;
  if (doc.v !== 1) {
    throw new Error(`unsupported protocol version in frame: ${line}`);
  }
  return doc;
}

/** Reassembles newline-delimited frames from arbitrary stream chunks. */
export class FrameDecoder {
  private buffer = "";

  push(chunk: string | Uint8Array): SessionEvent[] {
    this.buffer +=
      typeof chunk === "string" ? chunk : new TextDecoder().decode(chunk);
    const events: SessionEvent[] = [];
    for (;;) {
      const nl = this.buffer.indexOf("\n");
      if (nl < 0) break;
      const line = this.buffer.slice(0, nl).trim();
      this.buffer = this.buffer.slice(nl + 1);
      if (line.length > 0) events.push(parseEvent(line));
    }
    return events;
  }

  /** Bytes still waiting for their newline. */
  pending(): number {
    return this.buffer.length;
  }
}
