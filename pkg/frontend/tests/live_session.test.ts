/**
 * Scripted session against the real conductor process.
 *
 * Spawns `livescaler conductor` with an ephemeral UI port and a UDP
 * broadcast target owned by this test, then drives the published pad
 * protocol through the client classes: press I, hold Mod and press II
 * (modulate two semitones up), press I again. The UDP side must see
 * <1,0> at key offset 0, then identity at offset 2, then <1,0> at
 * offset 2; the UI side must display the key D. A window blur while
 * holding Mod must release it on the server too.
 */

import { ChildProcess, spawn } from "node:child_process";
import { createSocket, Socket } from "node:dgram";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import WebSocket from "ws";
import { afterAll, beforeAll, expect, it } from "vitest";

import { Connection, SocketLike } from "../src/connection.js";
import { LayoutFrame, StateFrame, keyDisplay } from "../src/protocol.js";
import { PadSurface } from "../src/surface.js";

interface WireRecord {
  v: number;
  seq: number;
  kind: string;
  mu?: number;
  tau?: number;
  key_offset: number;
  anchor_midi: number;
  base: number;
}

let udp: Socket;
let conductor: ChildProcess;
let conductorOut = "";
let conductorErr = "";
let connection: Connection;
let surface: PadSurface;

const records: WireRecord[] = [];
const states: StateFrame[] = [];
let layout: LayoutFrame | null = null;

async function until(check: () => boolean, what: string, timeoutMs = 10_000) {
  const deadline = Date.now() + timeoutMs;
  while (!check()) {
    if (Date.now() > deadline) {
      throw new Error(`timed out waiting for ${what}\nstderr: ${conductorErr}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
}

beforeAll(async () => {
  // a UDP socket owned by the test receives the conductor's broadcasts
  udp = createSocket("udp4");
  udp.on("message", (data) => records.push(JSON.parse(data.toString())));
  await new Promise<void>((resolve) => udp.bind(0, "127.0.0.1", resolve));
  const udpPort = udp.address().port;

  const dir = mkdtempSync(join(tmpdir(), "livescaler-ui-"));
  const config = join(dir, "conductor.conf");
  writeFileSync(config, `broadcast = udp:127.0.0.1:${udpPort}\n`);

  conductor = spawn(
    "python3",
    ["-m", "livescaler", "conductor", "--config", config,
     "--ui-listen", "127.0.0.1:0"],
  );
  conductor.stdout!.on("data", (chunk) => { conductorOut += chunk; });
  conductor.stderr!.on("data", (chunk) => { conductorErr += chunk; });
  await until(() => conductorOut.includes("ws://"), "conductor startup");
  const url = conductorOut.match(/ws:\/\/[\d.]+:\d+/)![0];

  connection = new Connection(url, {
    onLayout: (frame) => { layout = frame; },
    onState: (frame) => { states.push(frame); },
  }, {
    factory: (target) => new WebSocket(target) as unknown as SocketLike,
  });
  surface = new PadSurface((frame) => connection.sendPad(frame));
  connection.start();
  await until(() => layout !== null, "layout frame");
}, 30_000);

afterAll(async () => {
  connection?.stop();
  udp?.close();
  if (conductor && conductor.exitCode === null) {
    conductor.kill("SIGTERM");
    await new Promise((resolve) => conductor.on("exit", resolve));
  }
});

function padOf(role: string): [number, number] {
  for (let row = 0; row < 4; row += 1) {
    for (let col = 0; col < 4; col += 1) {
      if (layout!.grid[row]![col]!.role === role) return [row, col];
    }
  }
  throw new Error(`no pad with role ${role}`);
}

it("runs the scripted modulation session", { timeout: 30_000 }, async () => {
  expect(states.length).toBeGreaterThan(0); // resync snapshot at connect
  const [iRow, iCol] = padOf("I");
  const [modRow, modCol] = padOf("mod");
  const [iiRow, iiCol] = padOf("II");

  surface.tap(iRow, iCol);
  await until(() => records.length >= 1, "first broadcast");

  surface.press(modRow, modCol);
  surface.tap(iiRow, iiCol);
  surface.release(modRow, modCol);
  await until(() => records.length >= 2, "modulation broadcast");

  surface.tap(iRow, iCol);
  await until(() => records.length >= 3, "third broadcast");

  const triple = records.slice(0, 3).map(
    (r) => [r.kind, r.mu, r.tau, r.key_offset]);
  expect(triple).toEqual([
    ["affine", 1, 0, 0],
    ["affine", 1, 0, 2],
    ["affine", 1, 0, 2],
  ]);
  expect(records[1]!.seq).toBeGreaterThan(records[0]!.seq);
  expect(records[2]!.seq).toBeGreaterThan(records[1]!.seq);

  // the key display derives from the snapshot and the connect-time layout
  await until(() => states.length > 0 && states.at(-1)!.key_offset === 2,
              "snapshot after modulation");
  expect(keyDisplay(layout!.anchor_midi, states.at(-1)!.key_offset)).toBe("D");
});

it("blur releases held pads on the server as well", { timeout: 30_000 }, async () => {
  const [modRow, modCol] = padOf("mod");
  const [vRow, vCol] = padOf("V");

  surface.press(modRow, modCol);
  expect(surface.heldCount).toBe(1);
  surface.releaseAll(); // what the window blur handler calls
  expect(surface.heldCount).toBe(0);

  // if Mod were still held server-side this press would modulate the key
  // to A instead of broadcasting the V degree transform
  const seen = records.length;
  surface.tap(vRow, vCol);
  await until(() => records.length > seen, "broadcast after blur");
  const record = records.at(-1)!;
  expect([record.kind, record.mu, record.tau, record.key_offset])
    .toEqual(["affine", 1, 7, 2]);
});
