// WebSocket wrapper: validates every outgoing frame, decodes incoming
// ones, reconnects with exponential backoff.

import { ClientMsgT, ServerMsgT, decodeServerMsg, encodeClientMsg } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onopen: ((this: any, ev: any) => any) | null;
  onclose: ((this: any, ev: any) => any) | null;
  onmessage: ((this: any, ev: any) => any) | null;
  onerror: ((this: any, ev: any) => any) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientCallbacks {
  onMessage(msg: ServerMsgT): void;
  onStatus(status: "connecting" | "open" | "closed"): void;
}

export class RecorderClient {
  private socket: SocketLike | null = null;
  private retryMs = 500;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly callbacks: ClientCallbacks,
    private readonly factory: SocketFactory,
    private readonly maxRetryMs = 8000,
  ) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    this.callbacks.onStatus("connecting");
    const sock = this.factory(this.url);
    this.socket = sock;
    sock.onopen = () => {
      this.retryMs = 500;
      this.callbacks.onStatus("open");
    };
    sock.onmessage = (ev) => {
      try {
        this.callbacks.onMessage(decodeServerMsg(String(ev.data)));
      } catch {
        // ignore frames that fail validation; the server owns the schema
      }
    };
    sock.onclose = () => {
      this.socket = null;
      this.callbacks.onStatus("closed");
      if (!this.closed) {
        this.timer = setTimeout(() => this.open(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, this.maxRetryMs);
      }
    };
    sock.onerror = () => {
      // onclose follows; nothing extra to do
    };
  }

  /** Validate and send; throws on schema violations, returns false while
   * disconnected. */
  send(msg: ClientMsgT): boolean {
    const encoded = encodeClientMsg(msg);
    if (this.socket === null) return false;
    this.socket.send(encoded);
    return true;
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.socket?.close();
  }
}
