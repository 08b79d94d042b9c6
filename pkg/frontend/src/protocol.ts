/**
 * Frame types and display helpers for the conductor's UI protocol.
 *
 * The conductor sends one layout frame at connect time and a state
 * snapshot after every applied gesture; the client sends pad frames.
 * Everything is one JSON object per WebSocket message. The UI never
 * computes transforms itself: labels, key names and history are all
 * derived from what the conductor sent.
 */

export interface PadCell {
  role: string | null;
  label: string;
}

export interface LayoutFrame {
  type: "layout";
  grid: PadCell[][];
  anchor_midi: number;
  base: number;
}

export interface AffineJson {
  kind: "affine";
  mu: number;
  tau: number;
  key_offset: number;
}

export interface PeriodicJson {
  kind: "periodic";
  interval: number;
  image: number[];
  key_offset: number;
}

export type TransformJson = AffineJson | PeriodicJson;

export interface StateFrame {
  type: "state";
  key_offset: number;
  current: TransformJson;
  history: TransformJson[];
  seq: number;
}

export type ServerFrame = LayoutFrame | StateFrame;

export interface PadFrame {
  type: "pad";
  row: number;
  col: number;
  state: "down" | "up";
}

export function padFrame(row: number, col: number, state: "down" | "up"): PadFrame {
  return { type: "pad", row, col, state };
}

/** Parse one inbound message; anything malformed is null (and ignored). */
export function parseServerFrame(raw: string): ServerFrame | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const frame = data as Record<string, unknown>;
  if (frame.type === "layout" && isGrid(frame.grid)
      && typeof frame.anchor_midi === "number" && typeof frame.base === "number") {
    return frame as unknown as LayoutFrame;
  }
  if (frame.type === "state" && typeof frame.key_offset === "number"
      && typeof frame.seq === "number" && isTransform(frame.current)
      && Array.isArray(frame.history) && frame.history.every(isTransform)) {
    return frame as unknown as StateFrame;
  }
  return null;
}

function isGrid(value: unknown): boolean {
  return Array.isArray(value) && value.length === 4 && value.every(
    (row) => Array.isArray(row) && row.length === 4 && row.every(
      (cell) => typeof cell === "object" && cell !== null
        && typeof (cell as PadCell).label === "string",
    ),
  );
}

function isTransform(value: unknown): value is TransformJson {
  if (typeof value !== "object" || value === null) return false;
  const t = value as Record<string, unknown>;
  if (typeof t.key_offset !== "number") return false;
  if (t.kind === "affine") {
    return typeof t.mu === "number" && typeof t.tau === "number";
  }
  if (t.kind === "periodic") {
    return typeof t.interval === "number" && Array.isArray(t.image)
      && t.image.every((x) => typeof x === "number");
  }
  return false;
}

// ---------------------------------------------------------------------------
// display helpers

const NOTE_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

export function noteName(pitch: number): string {
  return NOTE_NAMES[((pitch % 12) + 12) % 12]!;
}

/** The key the band is in: anchor pitch shifted by the running key offset. */
export function keyDisplay(anchorMidi: number, keyOffset: number): string {
  return noteName(anchorMidi + keyOffset);
}

/** Degree names for the affine transforms the degree pads fire. */
const DEGREE_BY_MU_TAU = new Map<string, string>([
  ["1,0", "I"],
  ["-1,-3", "ii"],
  ["-1,-1", "iii"],
  ["1,5", "IV"],
  ["1,7", "V"],
  ["-1,4", "vi"],
  ["-1,6", "vii"],
  ["1,2", "II"],
]);

/** Degree notation when the transform is one of the named ones, explicit
 *  coefficients otherwise. */
export function transformLabel(t: TransformJson): string {
  if (t.kind === "periodic") {
    return `P⟨${t.interval}⟩`;
  }
  const degree = DEGREE_BY_MU_TAU.get(`${t.mu},${t.tau}`);
  return degree ?? `A⟨${t.mu},${t.tau}⟩`;
}
