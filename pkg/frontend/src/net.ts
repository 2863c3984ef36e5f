/**
 * WebSocket client: validates everything in and out, keeps only the latest
 * snapshot (the server coalesces too, so there is never a backlog to drain),
 * and exposes connection status for the stale-state banner.
 */
import {
  type InputMessage,
  type ServerMessage,
  type Snapshot,
  parseServerMessage,
} from "./protocol";

export type Status = "connecting" | "connected" | "disconnected";

export class Client {
  latest: Snapshot | null = null;
  status: Status = "connecting";
  hints: string[] = [];
  lastError: string | null = null;
  onMessage: ((msg: ServerMessage) => void) | null = null;
  private ws: WebSocket;

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.onopen = () => {
      this.status = "connected";
    };
    this.ws.onclose = () => {
      this.status = "disconnected";
    };
    this.ws.onerror = () => {
      this.status = "disconnected";
    };
    this.ws.onmessage = (ev) => this.handle(String(ev.data));
  }

  private handle(text: string): void {
    let msg: ServerMessage;
    try {
      msg = parseServerMessage(text);
    } catch (e) {
      this.lastError = `unparseable server message: ${e}`;
      return;
    }
    if (msg.type === "snapshot") {
      this.latest = msg;
    } else if (msg.type === "hint") {
      this.hints[msg.index - 1] = msg.text; // displayed verbatim
    } else if (msg.type === "error") {
      this.lastError = msg.message;
    }
    this.onMessage?.(msg);
  }

  /** Send one validated input; dropped (and surfaced) when disconnected. */
  send(msg: InputMessage): boolean {
    if (this.ws.readyState !== WebSocket.OPEN) {
      this.lastError = "not connected: input dropped";
      return false;
    }
    this.ws.send(JSON.stringify(msg));
    return true;
  }
}
