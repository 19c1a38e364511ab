/**
 * Interaction logic kept DOM-free so it can be unit tested: clicking nodes,
 * running schedules at a cadence, and mapping edit gestures to commands.
 */

import { PlaygroundClient } from "./client.js";
import { SessionEvent } from "./protocol.js";
import { GraphView } from "./state.js";

/** Click a node: issue node_send, apply the delta to exactly the listed nodes. */
export async function clickNode(client: PlaygroundClient, view: GraphView,
                                id: string): Promise<string[]> {
  const event = await client.nodeSend(id);
  if (event.status !== "ok") {
    throw new Error(event.error?.message ?? "node_send failed");
  }
  return view.applyEvent(event);
}

export interface RunnerReport {
  steps: number;
  lastEvent: SessionEvent | null;
  stopped: "paused" | "converged" | "error" | null;
}

/**
 * Issues `step` commands at a fixed cadence until paused, converged
 * (delta < tol with every belief informed), or an error event arrives.
 */
export class ScheduleRunner {
  private running = false;
  report: RunnerReport = { steps: 0, lastEvent: null, stopped: null };

  constructor(private client: PlaygroundClient, private view: GraphView,
              private tol = 1e-8,
              private sleep: (ms: number) => Promise<void> =
                (ms) => new Promise((r) => setTimeout(r, ms)),
              private cadenceMs = 60) {}

  get isRunning(): boolean {
    return this.running;
  }

  pause(): void {
    this.running = false;
    if (this.report.stopped === null) this.report.stopped = "paused";
  }

  async play(maxSteps = 10_000): Promise<RunnerReport> {
    this.running = true;
    this.report = { steps: 0, lastEvent: null, stopped: null };
    while (this.running && this.report.steps < maxSteps) {
      const event = await this.client.step();
      this.report.lastEvent = event;
      this.report.steps += 1;
      if (event.status !== "ok") {
        this.report.stopped = "error";
        this.running = false;
        break;
      }
      this.view.applyEvent(event);
      const informed = [...this.view.nodes.values()].every((n) => !n.uninformed);
      if (event.delta !== null && event.delta < this.tol && informed) {
        this.report.stopped = "converged";
        this.running = false;
        break;
      }
      await this.sleep(this.cadenceMs);
    }
    if (this.report.stopped === null) this.report.stopped = "paused";
    return this.report;
  }
}

let editCounter = 0;

/** Canvas gestures map one-to-one onto session commands. */
export const gestures = {
  /** Click on empty canvas in edit mode: a new 2D node at that position. */
  addNode(client: PlaygroundClient, world: number[]) {
    const id = `n${++editCounter}`;
    return client.addVariable(id, 2, { initial: [world[0] ?? 0, world[1] ?? 0] })
      .then((event) => ({ id, event }));
  },

  /** Drag from one node to another: a relative-position factor between them. */
  linkNodes(client: PlaygroundClient, view: GraphView, from: string, to: string,
            sigma = 0.1) {
    const a = view.position(from);
    const b = view.position(to);
    if (a === null || b === null) throw new Error("both nodes need positions");
    const id = `f${++editCounter}`;
    return client.addFactor(id, "relpos2d", [from, to], {
      dx: (b[0] ?? 0) - (a[0] ?? 0),
      dy: (b[1] ?? 0) - (a[1] ?? 0),
      sigma,
    }).then((event) => ({ id, event }));
  },

  /** Double-click a node: anchor it where it currently sits. */
  anchorNode(client: PlaygroundClient, view: GraphView, id: string,
             sigma = 1e-2) {
    const pos = view.position(id);
    if (pos === null) throw new Error("node has no position to anchor at");
    const lam = 1 / (sigma * sigma);
    return client.setPrior(id, [lam * (pos[0] ?? 0), lam * (pos[1] ?? 0)],
                           [[lam, 0], [0, lam]]);
  },

  resetEditCounter(): void {
    editCounter = 0;
  },
};

/**
 * After any edit the view re-syncs from get_state, so a rejected command
 * leaves the display exactly where the engine is (revert-by-resync).
 */
export async function syncView(client: PlaygroundClient, view: GraphView): Promise<void> {
  const event = await client.getState();
  if (event.status === "ok" && event.state) {
    view.applyState(event.state);
  }
}
