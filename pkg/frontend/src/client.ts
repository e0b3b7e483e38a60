/**
 * WebSocket engine client. The socket constructor is injected so the
 * same class runs in the browser (window.WebSocket) and under node
 * tests (the ws package). Every outbound message passes the schema
 * guard; anything invalid is dropped loudly rather than sent.
 */

import { InboundMsg, isValidOutbound, OutboundMsg } from "./schema.js";
import { Store } from "./store.js";

export interface WebSocketLike {
  readyState: number;
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type WebSocketCtor = new (url: string) => WebSocketLike;

const OPEN = 1;

export interface ClientOptions {
  reconnectMs?: number;
  onDropped?: (msg: OutboundMsg) => void;
}

export class EngineClient {
  private socket: WebSocketLike | null = null;
  private closed = false;
  private reconnectTimer: unknown = null;
  dropped = 0;

  constructor(
    private readonly url: string,
    private readonly makeSocket: WebSocketCtor,
    readonly store: Store,
    private readonly options: ClientOptions = {},
  ) {}

  connect(): void {
    this.closed = false;
    const socket = new this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => this.store.setConnected(true);
    socket.onmessage = (ev) => {
      try {
        this.store.applyInbound(JSON.parse(String(ev.data)) as InboundMsg);
      } catch {
        // a malformed frame from the server is not actionable client-side
      }
    };
    socket.onclose = () => {
      this.store.setConnected(false);
      this.socket = null;
      if (!this.closed) {
        const delay = this.options.reconnectMs ?? 800;
        this.reconnectTimer = setTimeout(() => this.connect(), delay);
      }
    };
    socket.onerror = () => {
      // onclose follows; reconnect logic lives there
    };
  }

  send(msg: OutboundMsg): boolean {
    if (!isValidOutbound(msg)) {
      this.dropped += 1;
      this.options.onDropped?.(msg);
      console.warn("dropping out-of-schema message", msg);
      return false;
    }
    if (this.socket === null || this.socket.readyState !== OPEN) {
      return false;
    }
    this.socket.send(JSON.stringify(msg));
    return true;
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer as never);
      this.reconnectTimer = null;
    }
    this.socket?.close();
    this.socket = null;
  }
}
