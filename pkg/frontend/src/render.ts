/**
 * Canvas rendering. Drawing goes through the Draw2D subset so tests can
 * record calls without a DOM; the browser passes a real 2D context.
 */

import { covarianceEllipse } from "./ellipse.js";
import { GraphView } from "./state.js";

export interface Draw2D {
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  ellipse(x: number, y: number, rx: number, ry: number, rot: number,
          a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
}

export interface Camera {
  /** World -> screen. */
  toScreen(p: number[]): [number, number];
  scale: number;
}

export interface RenderOptions {
  /** Display-only multiplier on the 1-sigma ellipse. */
  ellipseScale: number;
  nodeRadius: number;
}

export const DEFAULTS: RenderOptions = { ellipseScale: 1.0, nodeRadius: 6 };

export function drawGraph(ctx: Draw2D, view: GraphView, camera: Camera,
                          options: RenderOptions = DEFAULTS): void {
  // Factor edges first so nodes draw on top.
  ctx.strokeStyle = "#b8c4d0";
  ctx.lineWidth = 1;
  for (const factor of view.factors) {
    const ends = factor.neighbors
      .map((n) => view.position(String(n)))
      .filter((p): p is number[] => p !== null);
    if (ends.length < 2) continue;
    ctx.beginPath();
    const [x0, y0] = camera.toScreen(ends[0]!);
    ctx.moveTo(x0, y0);
    for (const end of ends.slice(1)) {
      const [x, y] = camera.toScreen(end);
      ctx.lineTo(x, y);
    }
    ctx.stroke();
  }

  for (const node of view.nodes.values()) {
    const pos = view.position(node.id);
    if (pos === null) continue;
    const [sx, sy] = camera.toScreen(pos);
    if (!node.uninformed && node.cov !== null && node.dim >= 2) {
      const e = covarianceEllipse(node.cov);
      ctx.strokeStyle = "#7aa6ff";
      ctx.beginPath();
      ctx.ellipse(sx, sy, e.rx * camera.scale * options.ellipseScale,
                  e.ry * camera.scale * options.ellipseScale, -e.angle, 0,
                  2 * Math.PI);
      ctx.stroke();
    }
    if (!node.uninformed && node.cov !== null && node.dim === 1) {
      const bar = Math.sqrt(Math.max(node.cov[0]?.[0] ?? 0, 0));
      ctx.strokeStyle = "#7aa6ff";
      ctx.beginPath();
      ctx.moveTo(sx, sy - bar * camera.scale * options.ellipseScale);
      ctx.lineTo(sx, sy + bar * camera.scale * options.ellipseScale);
      ctx.stroke();
    }
    ctx.fillStyle = node.uninformed ? "#d8d8d8" : "#2b6cb0";
    ctx.beginPath();
    ctx.arc(sx, sy, options.nodeRadius, 0, 2 * Math.PI);
    ctx.fill();
    if (node.selected) {
      ctx.strokeStyle = "#e53e3e";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(sx, sy, options.nodeRadius + 3, 0, 2 * Math.PI);
      ctx.stroke();
      ctx.lineWidth = 1;
    }
    ctx.fillStyle = "#444";
    ctx.fillText(node.id, sx + options.nodeRadius + 2, sy - options.nodeRadius);
  }
}

/** Nearest node within `tolerance` screen pixels of a click, if any. */
export function pickNode(view: GraphView, camera: Camera, sx: number, sy: number,
                         tolerance = 10): string | null {
  let best: string | null = null;
  let bestDist = tolerance;
  for (const node of view.nodes.values()) {
    const pos = view.position(node.id);
    if (pos === null) continue;
    const [x, y] = camera.toScreen(pos);
    const dist = Math.hypot(x - sx, y - sy);
    if (dist <= bestDist) {
      best = node.id;
      bestDist = dist;
    }
  }
  return best;
}
