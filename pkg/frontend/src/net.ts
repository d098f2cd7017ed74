// WebSocket client with capped-backoff reconnect. Each (re)connection gets a
// fresh panel snapshot from the server, which is all the state the UI needs.

import { chatSubmit, parseServerMessage, ServerMessage } from "./protocol.js";

export interface Connection {
  send(username: string, text: string): boolean;
  close(): void;
}

export function connect(
  url: string,
  onMessage: (msg: ServerMessage) => void,
  onStatus: (connected: boolean) => void,
): Connection {
  let ws: WebSocket | null = null;
  let closed = false;
  let retryMs = 500;

  const open = () => {
    ws = new WebSocket(url);
    ws.onopen = () => {
      retryMs = 500;
      onStatus(true);
    };
    ws.onmessage = (ev) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg) onMessage(msg);
    };
    ws.onclose = () => {
      onStatus(false);
      if (!closed) {
        setTimeout(open, retryMs);
        retryMs = Math.min(retryMs * 2, 8000);
      }
    };
    ws.onerror = () => {
      // onclose drives the retry
    };
  };
  open();

  return {
    send(username: string, text: string): boolean {
      if (!ws || ws.readyState !== WebSocket.OPEN) return false;
      ws.send(JSON.stringify(chatSubmit(username, text)));
      return true;
    },
    close() {
      closed = true;
      ws?.close();
    },
  };
}

export function wsUrlFor(location: { protocol: string; host: string }): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}/v1/ws`;
}
