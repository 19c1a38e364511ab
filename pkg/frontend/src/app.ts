/**
 * Browser entry point: wires the canvas, toolbar and the session client
 * together. Expects the ws<->tcp bridge (npm run bridge) in front of a
 * running `gbp serve`.
 */

import { PlaygroundClient, connectWebSocket } from "./client.js";
import { ScheduleRunner, clickNode, gestures, syncView } from "./controls.js";
import { Camera, drawGraph, pickNode } from "./render.js";
import { GraphView } from "./state.js";

const PRESETS = ["chain", "loop", "grid", "linefit_outlier", "linefit_step", "pose_sim"];
const SCHEDULES = ["synchronous", "random", "sweep", "round_robin", "residual"];

function el<K extends keyof HTMLElementTagNameMap>(tag: K, attrs: Record<string, string> = {},
                                                   text = ""): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

async function boot(): Promise<void> {
  const url = new URLSearchParams(location.search).get("bridge")
    ?? "ws://127.0.0.1:8734";
  const status = el("div", { id: "status" }, `connecting to ${url} ...`);
  document.body.append(status);

  let client: PlaygroundClient;
  try {
    client = new PlaygroundClient(await connectWebSocket(url));
  } catch (err) {
    status.textContent = `cannot reach the bridge at ${url} - start `
      + "`gbp serve` and `npm run bridge`, then reload.";
    throw err;
  }

  const view = new GraphView();
  const canvas = el("canvas", { width: "900", height: "560" });
  const toolbar = el("div", { id: "toolbar" });
  document.body.prepend(toolbar);
  document.body.append(canvas);
  const ctx = canvas.getContext("2d")!;

  const camera: Camera = {
    scale: 80,
    toScreen: (p) => [450 + (p[0] ?? 0) * 80, 280 - (p[1] ?? 0) * 80],
  };
  const toWorld = (sx: number, sy: number) => [(sx - 450) / 80, (280 - sy) / 80];

  const presetSel = el("select");
  for (const p of PRESETS) presetSel.append(el("option", { value: p }, p));
  const scheduleSel = el("select");
  for (const s of SCHEDULES) scheduleSel.append(el("option", { value: s }, s));
  const lossSel = el("select");
  for (const l of ["huber", "squared"]) lossSel.append(el("option", { value: l }, l));
  const damping = el("input", { type: "range", min: "0.05", max: "1", step: "0.05", value: "0.7" });
  const ellipseScale = el("input", { type: "range", min: "0.2", max: "5", step: "0.2", value: "1" });
  const playBtn = el("button", {}, "play");
  const pauseBtn = el("button", {}, "pause");
  const stepBtn = el("button", {}, "step");
  const resetBtn = el("button", {}, "reset");
  const editToggle = el("input", { type: "checkbox", id: "edit" });
  toolbar.append("preset:", presetSel, "loss:", lossSel, "schedule:", scheduleSel,
                 "damping:", damping, playBtn, pauseBtn, stepBtn, resetBtn,
                 "edit:", editToggle, "ellipse x", ellipseScale);

  let runner = new ScheduleRunner(client, view, 1e-8);
  let dragFrom: string | null = null;

  function redraw(): void {
    ctx.setTransform(1, 0, 0, 1, 0, 0);
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    drawGraph(ctx, view, camera,
              { ellipseScale: Number(ellipseScale.value), nodeRadius: 6 });
    status.textContent =
      `nodes ${view.nodes.size}  messages ${view.messagesTotal}`
      + `  delta ${view.lastDelta === null ? "-" : view.lastDelta.toExponential(2)}`
      + `  energy ${view.lastEnergy === null ? "-" : view.lastEnergy.toFixed(3)}`;
  }

  async function loadSelectedPreset(): Promise<void> {
    runner.pause();
    await client.loadPreset(presetSel.value, { loss: lossSel.value });
    await syncView(client, view);
    redraw();
  }

  await client.createSession();
  await loadSelectedPreset();

  presetSel.onchange = () => void loadSelectedPreset();
  lossSel.onchange = () => void loadSelectedPreset();
  scheduleSel.onchange = () =>
    void client.setPolicy({ kind: scheduleSel.value, seed: 0 }).then(redraw);
  damping.onchange = () =>
    void client.setDamping(Number(damping.value)).then(redraw);
  ellipseScale.oninput = () => redraw();
  resetBtn.onclick = () =>
    void client.reset().then(() => syncView(client, view)).then(redraw);
  stepBtn.onclick = () =>
    void client.step().then((event) => {
      view.applyEvent(event);
      redraw();
    });
  playBtn.onclick = () => {
    runner = new ScheduleRunner(client, view, 1e-8,
                                (ms) => new Promise((r) => setTimeout(r, ms)));
    void (async () => {
      const done = runner.play();
      const tick = setInterval(redraw, 80);
      await done;
      clearInterval(tick);
      redraw();
    })();
  };
  pauseBtn.onclick = () => runner.pause();

  canvas.onmousedown = (evt) => {
    const rect = canvas.getBoundingClientRect();
    const sx = evt.clientX - rect.left;
    const sy = evt.clientY - rect.top;
    const hit = pickNode(view, camera, sx, sy);
    if (!editToggle.checked) {
      if (hit !== null) {
        view.select(hit);
        void clickNode(client, view, hit)
          .then(redraw)
          .catch((err) => (status.textContent = String(err)));
      }
      return;
    }
    if (hit === null) {
      const world = toWorld(sx, sy);
      void gestures.addNode(client, world)
        .then(() => syncView(client, view)).then(redraw)
        .catch(() => syncView(client, view).then(redraw));
    } else if (evt.detail >= 2) {
      void gestures.anchorNode(client, view, hit)
        .then(() => syncView(client, view)).then(redraw)
        .catch(() => syncView(client, view).then(redraw));
    } else {
      dragFrom = hit;
    }
  };
  canvas.onmouseup = (evt) => {
    if (!editToggle.checked || dragFrom === null) return;
    const rect = canvas.getBoundingClientRect();
    const hit = pickNode(view, camera, evt.clientX - rect.left, evt.clientY - rect.top);
    const from = dragFrom;
    dragFrom = null;
    if (hit !== null && hit !== from) {
      void gestures.linkNodes(client, view, from, hit)
        .then(() => syncView(client, view)).then(redraw)
        .catch(() => syncView(client, view).then(redraw));
    }
  };
  redraw();
}

if (typeof document !== "undefined") {
  void boot();
}
