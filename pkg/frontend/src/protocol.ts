// Wire message types for the platform protocol (version 1).
// Server pushes panel/frame/chat_echo/error/ack; the client sends chat.

export const PROTOCOL_VERSION = 1;

export type Vec3 = [number, number, number];

export interface FrameUpdate {
  v: number;
  type: "frame";
  tick: number;
  eval_id: number;
  robot_id: number;
  species: string;
  color: string;
  step: number;
  joint_angles: number[];
  segment_endpoints: [Vec3, Vec3][];
}

export interface RobotPanel {
  robot_id: number;
  species: string;
  age_ticks: number;
  color: string;
  yes: number;
  no: number;
  likes: number;
  dislikes: number;
}

export interface PanelUpdate {
  v: number;
  type: "panel";
  tick: number;
  robot: RobotPanel | null;
  command: { text: string; code: number; seconds_remaining: number };
  top_commands: { text: string; score: number }[];
  top_users: { username: string; points: number }[];
  last_user: string | null;
}

export interface ChatEcho {
  v: number;
  type: "chat_echo";
  username: string;
  text: string;
}

export interface Ack {
  v: number;
  type: "ack";
  accepted: boolean;
  parsed_as: string;
}

export interface ErrorReply {
  v: number;
  type: "error";
  detail: string;
}

export type ServerMessage = FrameUpdate | PanelUpdate | ChatEcho | Ack | ErrorReply;

export interface ChatSubmit {
  v: number;
  type: "chat";
  username: string;
  text: string;
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const msg = doc as { type?: unknown; v?: unknown };
  if (msg.v !== PROTOCOL_VERSION) return null;
  switch (msg.type) {
    case "frame":
    case "panel":
    case "chat_echo":
    case "ack":
    case "error":
      return doc as ServerMessage;
    default:
      return null;
  }
}

export function chatSubmit(username: string, text: string): ChatSubmit {
  return { v: PROTOCOL_VERSION, type: "chat", username, text };
}
