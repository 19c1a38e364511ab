/**
 * Session client: sequential command/response pipeline over any transport
 * that preserves frame boundaries (TCP with newline framing, WebSocket with
 * one document per message).
 */

import {
  Op,
  PolicyJson,
  SessionCommand,
  SessionEvent,
  encodeCommand,
  parseEvent,
} from "./protocol.js";

export interface Transport {
  send(line: string): void;
  onFrame(cb: (line: string) => void): void;
  onClose(cb: () => void): void;
  close(): void;
}

interface Pending {
  request_id: string;
  resolve: (event: SessionEvent) => void;
  reject: (err: Error) => void;
}

export class PlaygroundClient {
  private pending: Pending[] = [];
  private counter = 0;
  private session: string | null = null;
  private listeners: ((event: SessionEvent) => void)[] = [];

  constructor(private transport: Transport) {
    transport.onFrame((line) => this.dispatch(parseEvent(line)));
    transport.onClose(() => {
      const dropped = this.pending.splice(0);
      for (const p of dropped) p.reject(new Error("connection closed"));
    });
  }

  /** Every event, in arrival order (for logging and replay capture). */
  onEvent(cb: (event: SessionEvent) => void): void {
    this.listeners.push(cb);
  }

  private dispatch(event: SessionEvent): void {
    for (const cb of this.listeners) cb(event);
    const head = this.pending[0];
    if (head && event.request_id === head.request_id) {
      this.pending.shift();
      head.resolve(event);
    }
  }

  request(op: Op, args: Record<string, unknown> = {}): Promise<SessionEvent> {
    const request_id = `ui${++this.counter}`;
    const cmd: SessionCommand = { v: 1, op, args, request_id };
    return new Promise((resolve, reject) => {
      this.pending.push({ request_id, resolve, reject });
      this.transport.send(encodeCommand(cmd));
    });
  }

  private sessionArgs(extra: Record<string, unknown> = {}) {
    if (this.session === null) throw new Error("no session yet");
    return { session: this.session, ...extra };
  }

  async createSession(): Promise<string> {
    const event = await this.request("create_session");
    if (event.status !== "ok" || !event.session) {
      throw new Error(`create_session failed: ${event.error?.message}`);
    }
    this.session = event.session;
    return event.session;
  }

  loadPreset(name: string, opts: { seed?: number; loss?: string; huber_t?: number } = {}) {
    return this.request("load_preset", this.sessionArgs({ name, ...opts }));
  }

  nodeSend(id: string | number) {
    return this.request("node_send", this.sessionArgs({ id }));
  }

  step() {
    return this.request("step", this.sessionArgs());
  }

  setPolicy(policy: PolicyJson) {
    return this.request("set_policy", this.sessionArgs({ policy }));
  }

  setDamping(beta: number) {
    return this.request("set_damping", this.sessionArgs({ beta }));
  }

  addVariable(id: string | number, dim: number,
              opts: { prior?: { eta: number[]; lambda: number[][] }; initial?: number[] } = {}) {
    return this.request("add_variable", this.sessionArgs({ id, dim, ...opts }));
  }

  addFactor(id: string | number, type: string, neighbors: (string | number)[],
            params: Record<string, unknown>) {
    return this.request("add_factor", this.sessionArgs({ id, type, neighbors, ...params }));
  }

  removeNode(id: string | number) {
    return this.request("remove_node", this.sessionArgs({ id }));
  }

  setPrior(id: string | number, eta: number[] | null, lambda?: number[][]) {
    return this.request("set_prior", this.sessionArgs({ id, eta, lambda }));
  }

  getState() {
    return this.request("get_state", this.sessionArgs());
  }

  reset() {
    return this.request("reset", this.sessionArgs());
  }

  close(): void {
    this.transport.close();
  }
}

/** Node-side transport: raw TCP with newline framing (the minimal binding). */
export async function connectTcp(host: string, port: number): Promise<Transport> {
  const net = await import("node:net");
  const socket = net.createConnection({ host, port });
  await new Promise<void>((resolve, reject) => {
    socket.once("connect", resolve);
    socket.once("error", reject);
  });
  let buffer = "";
  let frameCb: (line: string) => void = () => undefined;
  let closeCb: () => void = () => undefined;
  socket.on("data", (chunk: Uint8Array) => {
    buffer += chunk.toString();
    for (;;) {
      const nl = buffer.indexOf("\n");
      if (nl < 0) break;
      const line = buffer.slice(0, nl);
      buffer = buffer.slice(nl + 1);
      if (line.trim().length > 0) frameCb(line);
    }
  });
  socket.on("close", () => closeCb());
  return {
    send: (line) => void socket.write(line),
    onFrame: (cb) => {
      frameCb = cb;
    },
    onClose: (cb) => {
      closeCb = cb;
    },
    close: () => socket.end(),
  };
}

/** Browser transport: one JSON document per WebSocket message (via the bridge). */
export function connectWebSocket(url: string): Promise<Transport> {
  return new Promise((resolve, reject) => {
    const ws = new WebSocket(url);
    let frameCb: (line: string) => void = () => undefined;
    let closeCb: () => void = () => undefined;
    ws.onopen = () =>
      resolve({
        send: (line) => ws.send(line),
        onFrame: (cb) => {
          frameCb = cb;
        },
        onClose: (cb) => {
          closeCb = cb;
        },
        close: () => ws.close(),
      });
    ws.onerror = () => reject(new Error(`cannot reach ${url}`));
    ws.onmessage = (msg) => {
      for (const line of String(msg.data).split("\n")) {
        if (line.trim().length > 0) frameCb(line);
      }
    };
    ws.onclose = () => closeCb();
  });
}
