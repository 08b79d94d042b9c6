/**
 * One WebSocket to the conductor, kept alive.
 *
 * The socket is built by an injectable factory so tests can plug in a
 * fake or the `ws` package. On every (re)connect the conductor pushes
 * the layout and a fresh snapshot, so resync is free. Gestures sent
 * while disconnected are dropped, never queued: a chord change firing
 * seconds late would be worse than one that never fired, so the caller
 * gets a visible warning instead.
 */

import {
  LayoutFrame,
  PadFrame,
  StateFrame,
  parseServerFrame,
} from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
  onclose: ((ev: any) => void) | null;
  onerror: ((ev: any) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface ConnectionHandlers {
  onLayout?: (layout: LayoutFrame) => void;
  onState?: (state: StateFrame) => void;
  onStatus?: (status: ConnectionStatus, detail: string) => void;
  /** Round trip from a sent gesture to the snapshot it triggered. */
  onLatency?: (ms: number) => void;
}

export interface ConnectionOptions {
  factory?: SocketFactory;
  baseDelayMs?: number;
  maxDelayMs?: number;
}

/** Exponential backoff, capped: 250ms, 500ms, ... by default. */
export function backoffDelayMs(attempt: number, base = 250, cap = 4000): number {
  return Math.min(cap, base * 2 ** attempt);
}

export class Connection {
  status: ConnectionStatus = "closed";

  private socket: SocketLike | null = null;
  private attempts = 0;
  private stopped = true;
  private sentAt: number | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly handlers: ConnectionHandlers,
    private readonly opts: ConnectionOptions = {},
  ) {}

  start(): void {
    this.stopped = false;
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.socket?.close();
  }

  /** Send one pad frame; false (plus a status warning) when not connected. */
  sendPad(frame: PadFrame): boolean {
    if (this.status !== "open" || this.socket === null) {
      this.handlers.onStatus?.(this.status, "not connected: gesture dropped");
      return false;
    }
    this.sentAt = performance.now();
    this.socket.send(JSON.stringify(frame));
    return true;
  }

  private connect(): void {
    this.setStatus("connecting", this.url);
    const factory = this.opts.factory ?? defaultFactory;
    const socket = factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.setStatus("open", this.url);
    };
    socket.onmessage = (ev: { data: unknown }) => this.receive(String(ev.data));
    socket.onerror = () => {
      // the close handler owns recovery; errors always end in a close
    };
    socket.onclose = () => {
      this.socket = null;
      this.sentAt = null;
      if (this.stopped) {
        this.setStatus("closed", "stopped");
      } else {
        const delay = backoffDelayMs(
          this.attempts, this.opts.baseDelayMs, this.opts.maxDelayMs,
        );
        this.attempts += 1;
        this.setStatus("connecting", `retrying in ${delay} ms`);
        this.timer = setTimeout(() => this.connect(), delay);
      }
    };
  }

  private receive(raw: string): void {
    const frame = parseServerFrame(raw);
    if (frame === null) return;
    if (frame.type === "layout") {
      this.handlers.onLayout?.(frame);
      return;
    }
    if (this.sentAt !== null) {
      this.handlers.onLatency?.(performance.now() - this.sentAt);
      this.sentAt = null;
    }
    this.handlers.onState?.(frame);
  }

  private setStatus(status: ConnectionStatus, detail: string): void {
    this.status = status;
    this.handlers.onStatus?.(status, detail);
  }
}

function defaultFactory(url: string): SocketLike {
  return new WebSocket(url) as unknown as SocketLike;
}
