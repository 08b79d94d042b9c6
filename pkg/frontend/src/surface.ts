/**
 * Held-pad bookkeeping between input devices and the connection.
 *
 * Pointer and keyboard handlers call press/release; the surface keeps
 * the set of pads that are actually down on the server and guarantees
 * down/up symmetry: a pad only counts as held once its down frame was
 * really sent, repeats are ignored while held, and releaseAll (wired to
 * window blur) sends an up for everything still held.
 */

import { PadFrame, padFrame } from "./protocol.js";

/** 4x4 keyboard layout: digits row, then qwer/asdf/zxcv. */
const KEY_ROWS = ["1234", "qwer", "asdf", "zxcv"];

export function padForKey(key: string): [number, number] | null {
  for (let row = 0; row < KEY_ROWS.length; row += 1) {
    const col = KEY_ROWS[row]!.indexOf(key.toLowerCase());
    if (col !== -1) return [row, col];
  }
  return null;
}

export type SendPad = (frame: PadFrame) => boolean;

export class PadSurface {
  private held = new Set<string>();

  /** send returns false when the frame was dropped (not connected). */
  constructor(private readonly send: SendPad) {}

  press(row: number, col: number): boolean {
    const id = `${row},${col}`;
    if (this.held.has(id)) return false;
    if (!this.send(padFrame(row, col, "down"))) return false;
    this.held.add(id);
    return true;
  }

  release(row: number, col: number): boolean {
    const id = `${row},${col}`;
    if (!this.held.delete(id)) return false;
    this.send(padFrame(row, col, "up"));
    return true;
  }

  /** Tap: press and immediately release (click-style gesture). */
  tap(row: number, col: number): void {
    if (this.press(row, col)) this.release(row, col);
  }

  keyDown(key: string): boolean {
    const pad = padForKey(key);
    return pad !== null && this.press(pad[0], pad[1]);
  }

  keyUp(key: string): boolean {
    const pad = padForKey(key);
    return pad !== null && this.release(pad[0], pad[1]);
  }

  /** Release every held pad (window blur, page hide, disconnect). */
  releaseAll(): number {
    let released = 0;
    for (const id of [...this.held]) {
      const [row, col] = id.split(",").map(Number);
      if (this.release(row!, col!)) released += 1;
    }
    return released;
  }

  isHeld(row: number, col: number): boolean {
    return this.held.has(`${row},${col}`);
  }

  get heldCount(): number {
    return this.held.size;
  }
}
