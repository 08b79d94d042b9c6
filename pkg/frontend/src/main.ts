/**
 * Browser entry point: wire the connection, the pad surface, and the
 * view together. The conductor address comes from `?ws=` or defaults
 * to port 8765 on the page's host.
 */

import { Connection } from "./connection.js";
import { PadSurface } from "./surface.js";
import { View } from "./view.js";

const params = new URLSearchParams(window.location.search);
const url = params.get("ws")
  ?? `ws://${window.location.hostname || "localhost"}:8765`;

const connection = new Connection(url, {
  onLayout: (layout) => view.renderLayout(layout),
  onState: (state) => view.renderState(state),
  onStatus: (status, detail) => view.renderConnection(status, detail),
  onLatency: (ms) => view.renderLatency(ms),
});

const surface = new PadSurface((frame) => connection.sendPad(frame));
const view = new View(document.getElementById("app")!, surface);

window.addEventListener("keydown", (ev) => {
  if (ev.repeat) return;
  if (surface.keyDown(ev.key)) {
    view.refreshHeld();
    ev.preventDefault();
  }
});
window.addEventListener("keyup", (ev) => {
  if (surface.keyUp(ev.key)) {
    view.refreshHeld();
    ev.preventDefault();
  }
});
// hygiene: losing focus must never leave pads held
window.addEventListener("blur", () => {
  surface.releaseAll();
  view.refreshHeld();
});

connection.start();
