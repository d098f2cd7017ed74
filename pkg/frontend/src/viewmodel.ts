// The single source of client state. Applying a server message returns the
// updated model; panels are trusted verbatim (no client-side vote math).

import type { FrameUpdate, PanelUpdate, ServerMessage } from "./protocol.js";

export interface ChatLine {
  username: string;
  text: string;
}

export interface ViewModel {
  connected: boolean;
  buffering: boolean;
  frame: FrameUpdate | null;
  panel: PanelUpdate | null;
  chat: ChatLine[];
  lastError: string | null;
}

export const CHAT_LIMIT = 120;
export const STALE_AFTER_MS = 1500;

export function emptyViewModel(): ViewModel {
  return {
    connected: false,
    buffering: true,
    frame: null,
    panel: null,
    chat: [],
    lastError: null,
  };
}

export function applyMessage(vm: ViewModel, msg: ServerMessage): ViewModel {
  switch (msg.type) {
    case "frame":
      return { ...vm, frame: msg, buffering: false };
    case "panel": {
      const panel: PanelUpdate = {
        ...msg,
        command: {
          ...msg.command,
          seconds_remaining: Math.max(0, msg.command.seconds_remaining),
        },
      };
      return { ...vm, panel };
    }
    case "chat_echo": {
      const chat = [...vm.chat, { username: msg.username, text: msg.text }];
      if (chat.length > CHAT_LIMIT) chat.splice(0, chat.length - CHAT_LIMIT);
      return { ...vm, chat };
    }
    case "error":
      return { ...vm, lastError: msg.detail };
    case "ack":
      return msg.accepted ? vm : { ...vm, lastError: `rejected (${msg.parsed_as})` };
  }
}

export function setConnected(vm: ViewModel, connected: boolean): ViewModel {
  // a reconnect rebuilds everything from the next panel snapshot
  return connected
    ? { ...vm, connected, lastError: null }
    : { ...vm, connected, buffering: true };
}

export function markStale(vm: ViewModel): ViewModel {
  return vm.buffering ? vm : { ...vm, buffering: true };
}

export function countdownText(vm: ViewModel): string {
  if (!vm.panel) return "--";
  const s = Math.max(0, Math.round(vm.panel.command.seconds_remaining));
  return `${Math.floor(s / 60)}:${String(s % 60).padStart(2, "0")}`;
}
