// DOM wiring: one render loop, one websocket, one view model.

import { connect, wsUrlFor } from "./net.js";
import { renderFrame } from "./render.js";
import { voteText, outgoingText, VoteKind } from "./chat.js";
import {
  ViewModel,
  applyMessage,
  countdownText,
  emptyViewModel,
  markStale,
  setConnected,
  STALE_AFTER_MS,
} from "./viewmodel.js";

let vm: ViewModel = emptyViewModel();
let lastFrameAt = 0;

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const chatLog = document.getElementById("chat-log")!;
const chatInput = document.getElementById("chat-input") as HTMLInputElement;
const userInput = document.getElementById("username") as HTMLInputElement;
const sendBtn = document.getElementById("send") as HTMLButtonElement;
const status = document.getElementById("status")!;

const conn = connect(
  wsUrlFor(window.location),
  (msg) => {
    if (msg.type === "frame") lastFrameAt = performance.now();
    vm = applyMessage(vm, msg);
    if (msg.type === "chat_echo") renderChat();
    if (msg.type === "panel") renderPanels();
  },
  (connected) => {
    vm = setConnected(vm, connected);
    status.textContent = connected ? "live" : "reconnecting...";
    chatInput.disabled = sendBtn.disabled = !connected;
  },
);

function renderChat(): void {
  chatLog.innerHTML = vm.chat
    .slice(-30)
    .map((l) => `<div><b>${escapeHtml(l.username)}</b> ${escapeHtml(l.text)}</div>`)
    .join("");
  chatLog.scrollTop = chatLog.scrollHeight;
}

function escapeHtml(s: string): string {
  return s.replace(/[&<>"']/g, (c) => `&#${c.charCodeAt(0)};`);
}

function setText(id: string, text: string): void {
  const el = document.getElementById(id);
  if (el) el.textContent = text;
}

function renderPanels(): void {
  const p = vm.panel;
  if (!p) return;
  if (p.robot) {
    setText("robot-info",
      `#${p.robot.robot_id} ${p.robot.species} age ${p.robot.age_ticks}`);
    setText("robot-votes",
      `y ${p.robot.yes} / n ${p.robot.no}  likes ${p.robot.likes} / dislikes ${p.robot.dislikes}`);
  }
  setText("command", `"${p.command.text}"`);
  setText("countdown", countdownText(vm));
  setText("top-commands",
    p.top_commands.map((c) => `${c.text}: ${c.score}`).join("\n") || "(none yet)");
  setText("top-users",
    p.top_users.map((u) => `${u.username}: ${u.points}`).join("\n") || "(none yet)");
  setText("last-user", p.last_user ?? "-");
}

function send(text: string | null): void {
  const out = text === null ? null : outgoingText(text);
  if (!out) return;
  conn.send(userInput.value || "viewer", out);
}

sendBtn.addEventListener("click", () => {
  send(chatInput.value);
  chatInput.value = "";
});
chatInput.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter") {
    send(chatInput.value);
    chatInput.value = "";
  }
});
for (const kind of ["yes", "no", "like", "dislike"] as VoteKind[]) {
  document.getElementById(`btn-${kind}`)?.addEventListener("click", () => {
    send(voteText(vm, kind));
  });
}

function loop(): void {
  if (performance.now() - lastFrameAt > STALE_AFTER_MS) {
    vm = markStale(vm);
  }
  if (vm.frame) {
    renderFrame(ctx, vm.frame, canvas.width, canvas.height, vm.buffering);
  }
  requestAnimationFrame(loop);
}
requestAnimationFrame(loop);
