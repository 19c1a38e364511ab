import { describe, expect, it } from "vitest";

import { SessionEvent, SessionState } from "../src/protocol.js";
import { GraphView } from "../src/state.js";
import { drawGraph, pickNode, Camera, Draw2D } from "../src/render.js";

const SNAPSHOT: SessionState = {
  variables: {
    a: { dim: 2, mean: [0, 0], cov: [[0.01, 0], [0, 0.01]], initial: [0, 0] },
    b: { dim: 2, mean: null, cov: null, initial: [1, 0] },
    c: { dim: 2, mean: null, cov: null, initial: null },
  },
  factors: [{ id: "ab", type: "relpos2d", neighbors: ["a", "b"] }],
  damping: 0.7,
  policy: { kind: "synchronous" },
};

function okEvent(delta: Record<string, { mean: number[] | null; cov: number[][] | null }>,
                 messages = 1): SessionEvent {
  return {
    v: 1, request_id: "r", status: "ok", state_delta: delta,
    messages_sent: messages, delta: 0.5, total_energy: 1.25,
  };
}

describe("GraphView", () => {
  it("marks singular beliefs as uninformed and keeps layout hints", () => {
    const view = new GraphView();
    view.applyState(SNAPSHOT);
    expect(view.nodes.get("a")!.uninformed).toBe(false);
    expect(view.nodes.get("b")!.uninformed).toBe(true);
    expect(view.position("b")).toEqual([1, 0]);
    expect(view.position("c")).toBeNull();
  });

  it("applies a delta to exactly the listed nodes", () => {
    const view = new GraphView();
    view.applyState(SNAPSHOT);
    const before = structuredClone(view.nodes.get("a")!.mean);
    const changed = view.applyEvent(
      okEvent({ b: { mean: [1.05, 0.01], cov: [[0.02, 0], [0, 0.02]] } }));
    expect(changed).toEqual(["b"]);
    expect(view.nodes.get("b")!.uninformed).toBe(false);
    expect(view.nodes.get("a")!.mean).toEqual(before);
    expect(view.messagesTotal).toBe(1);
    expect(view.lastEnergy).toBe(1.25);
  });

  it("rejects deltas naming nodes the engine never reported", () => {
    const view = new GraphView();
    view.applyState(SNAPSHOT);
    expect(() => view.applyEvent(
      okEvent({ ghost: { mean: [0], cov: [[1]] } }))).toThrow(/ghost/);
  });

  it("error events change nothing", () => {
    const view = new GraphView();
    view.applyState(SNAPSHOT);
    const event: SessionEvent = {
      v: 1, request_id: "r", status: "error", state_delta: {},
      messages_sent: 0, delta: null, total_energy: null,
      error: { code: "UnknownNode", message: "no node x" },
    };
    expect(view.applyEvent(event)).toEqual([]);
    expect(view.messagesTotal).toBe(0);
  });
});

class RecordingCtx implements Draw2D {
  calls: string[] = [];
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 1;
  beginPath() { this.calls.push("beginPath"); }
  moveTo() { this.calls.push("moveTo"); }
  lineTo() { this.calls.push("lineTo"); }
  arc() { this.calls.push("arc"); }
  ellipse() { this.calls.push("ellipse"); }
  stroke() { this.calls.push("stroke"); }
  fill() { this.calls.push("fill"); }
  fillText(text: string) { this.calls.push(`text:${text}`); }
}

const CAMERA: Camera = { scale: 100, toScreen: (p) => [p[0]! * 100, -p[1]! * 100] };

describe("rendering", () => {
  it("draws ellipses only for informed 2D nodes", () => {
    const view = new GraphView();
    view.applyState(SNAPSHOT);
    const ctx = new RecordingCtx();
    drawGraph(ctx, view, CAMERA);
    expect(ctx.calls.filter((c) => c === "ellipse")).toHaveLength(1);
    // a and b draw as circles (c has no position at all)
    expect(ctx.calls.filter((c) => c === "arc").length).toBe(2);
  });

  it("pickNode finds the node under the cursor", () => {
    const view = new GraphView();
    view.applyState(SNAPSHOT);
    expect(pickNode(view, CAMERA, 2, 1, 10)).toBe("a");
    expect(pickNode(view, CAMERA, 100, 0, 10)).toBe("b");
    expect(pickNode(view, CAMERA, 55, -40, 10)).toBeNull();
  });
});
