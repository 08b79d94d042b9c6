/**
 * DOM rendering: the pad grid plus the status line (key, current
 * transform, history, connection, latency). Labels come only from the
 * layout frame the conductor sent, never from local tables.
 */

import { ConnectionStatus } from "./connection.js";
import {
  LayoutFrame,
  StateFrame,
  keyDisplay,
  transformLabel,
} from "./protocol.js";
import { PadSurface } from "./surface.js";

export class View {
  private pads: HTMLButtonElement[][] = [];
  private anchorMidi = 60;
  private readonly grid: HTMLElement;
  private readonly key: HTMLElement;
  private readonly current: HTMLElement;
  private readonly history: HTMLElement;
  private readonly connection: HTMLElement;
  private readonly latency: HTMLElement;

  constructor(root: HTMLElement, private readonly surface: PadSurface) {
    this.grid = child(root, "div", "grid");
    const status = child(root, "div", "status");
    this.key = child(status, "span", "key");
    this.current = child(status, "span", "current");
    this.latency = child(status, "span", "latency");
    this.connection = child(status, "span", "connection");
    this.history = child(root, "ol", "history");
  }

  renderLayout(layout: LayoutFrame): void {
    this.anchorMidi = layout.anchor_midi;
    this.grid.replaceChildren();
    this.pads = layout.grid.map((cells, row) =>
      cells.map((cell, col) => {
        const pad = document.createElement("button");
        pad.className = "pad";
        pad.textContent = cell.label;
        pad.disabled = cell.role === null;
        pad.addEventListener("pointerdown", () => {
          this.surface.press(row, col);
          this.refreshHeld();
        });
        for (const done of ["pointerup", "pointerleave", "pointercancel"]) {
          pad.addEventListener(done, () => {
            this.surface.release(row, col);
            this.refreshHeld();
          });
        }
        this.grid.appendChild(pad);
        return pad;
      }),
    );
  }

  renderState(state: StateFrame): void {
    this.key.textContent = `key ${keyDisplay(this.anchorMidi, state.key_offset)}`;
    this.current.textContent = transformLabel(state.current);
    this.history.replaceChildren(
      ...state.history.map((t) => {
        const item = document.createElement("li");
        item.textContent = transformLabel(t);
        return item;
      }),
    );
  }

  renderConnection(status: ConnectionStatus, detail: string): void {
    this.connection.textContent = status === "open" ? "" : `${status}: ${detail}`;
    this.connection.className = `connection ${status}`;
  }

  renderLatency(ms: number): void {
    this.latency.textContent = `${ms.toFixed(1)} ms`;
  }

  refreshHeld(): void {
    this.pads.forEach((cells, row) =>
      cells.forEach((pad, col) =>
        pad.classList.toggle("held", this.surface.isHeld(row, col)),
      ),
    );
  }
}

function child(parent: HTMLElement, tag: string, className: string): HTMLElement {
  const element = document.createElement(tag);
  element.className = className;
  parent.appendChild(element);
  return element;
}
