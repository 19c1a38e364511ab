/**
 * WebSocket <-> TCP bridge: browsers cannot open raw sockets, so this node
 * process forwards frames between the page and `gbp serve` verbatim (one
 * JSON document per WebSocket message, newline-delimited on the TCP side).
 *
 *   node dist/bridge.js [--engine-port 8733] [--listen-port 8734]
 */

import net from "node:net";
import { WebSocketServer, WebSocket } from "ws";

function arg(name: string, fallback: number): number {
  const idx = process.argv.indexOf(`--${name}`);
  if (idx >= 0 && process.argv[idx + 1] !== undefined) {
    return Number(process.argv[idx + 1]);
  }
  return fallback;
}

const enginePort = arg("engine-port", 8733);
const listenPort = arg("listen-port", 8734);

const wss = new WebSocketServer({ host: "127.0.0.1", port: listenPort });
console.log(`bridge: ws://127.0.0.1:${listenPort} <-> tcp 127.0.0.1:${enginePort}`);

wss.on("connection", (ws: WebSocket) => {
  const tcp = net.createConnection({ host: "127.0.0.1", port: enginePort });
  let buffer = "";
  tcp.on("data", (chunk) => {
    buffer += chunk.toString();
    for (;;) {
      const nl = buffer.indexOf("\n");
      if (nl < 0) break;
      const line = buffer.slice(0, nl);
      buffer = buffer.slice(nl + 1);
      if (line.trim().length > 0) ws.send(line);
    }
  });
  tcp.on("close", () => ws.close());
  tcp.on("error", () => ws.close());
  ws.on("message", (data) => {
    const text = data.toString();
    tcp.write(text.endsWith("\n") ? text : text + "\n");
  });
  ws.on("close", () => tcp.end());
});
