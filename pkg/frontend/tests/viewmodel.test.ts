import { describe, expect, it } from "vitest";
import type { PanelUpdate, FrameUpdate } from "../src/protocol.js";
import {
  CHAT_LIMIT,
  applyMessage,
  countdownText,
  emptyViewModel,
  markStale,
  setConnected,
} from "../src/viewmodel.js";

const panel = (secs: number): PanelUpdate => ({
  v: 1, type: "panel", tick: 2,
  robot: { robot_id: 5, species: "snakebot", age_ticks: 1, color: "red",
           yes: 3, no: 1, likes: 2, dislikes: 0 },
  command: { text: "move", code: 0.2, seconds_remaining: secs },
  top_commands: [{ text: "move", score: 4 }],
  top_users: [{ username: "z", points: 9 }],
  last_user: "z",
});

const frame = (color = "red"): FrameUpdate => ({
  v: 1, type: "frame", tick: 2, eval_id: 9, robot_id: 5, species: "snakebot",
  color, step: 0, joint_angles: [0, 0],
  segment_endpoints: [[[0, 0, 0.1], [0.3, 0, 0.1]]],
});

describe("view model", () => {
  it("clamps the countdown at zero", () => {
    let vm = applyMessage(emptyViewModel(), panel(-5));
    expect(vm.panel!.command.seconds_remaining).toBe(0);
    expect(countdownText(vm)).toBe("0:00");
    vm = applyMessage(vm, panel(95));
    expect(countdownText(vm)).toBe("1:35");
  });

  it("panel counts come straight from the server", () => {
    const vm = applyMessage(emptyViewModel(), panel(10));
    expect(vm.panel!.robot!.yes).toBe(3);
    expect(vm.panel!.top_users[0]).toEqual({ username: "z", points: 9 });
  });

  it("frames clear the buffering flag; staleness restores it", () => {
    let vm = emptyViewModel();
    expect(vm.buffering).toBe(true);
    vm = applyMessage(vm, frame());
    expect(vm.buffering).toBe(false);
    vm = markStale(vm);
    expect(vm.buffering).toBe(true);
  });

  it("chat transcript is bounded", () => {
    let vm = emptyViewModel();
    for (let i = 0; i < CHAT_LIMIT + 25; i++) {
      vm = applyMessage(vm, { v: 1, type: "chat_echo", username: "u", text: `m${i}` });
    }
    expect(vm.chat.length).toBe(CHAT_LIMIT);
    expect(vm.chat[vm.chat.length - 1].text).toBe(`m${CHAT_LIMIT + 24}`);
  });

  it("reconnect resumes from the next panel snapshot", () => {
    let vm = applyMessage(emptyViewModel(), panel(10));
    vm = applyMessage(vm, frame());
    vm = setConnected(vm, false);
    expect(vm.buffering).toBe(true);
    vm = setConnected(vm, true);
    const fresh = panel(42);
    vm = applyMessage(vm, fresh);
    expect(vm.panel!.command.seconds_remaining).toBe(42);
  });

  it("errors and rejected acks surface", () => {
    let vm = applyMessage(emptyViewModel(), { v: 1, type: "error", detail: "bad" });
    expect(vm.lastError).toBe("bad");
    vm = applyMessage(vm, { v: 1, type: "ack", accepted: false, parsed_as: "other" });
    expect(vm.lastError).toContain("rejected");
    vm = applyMessage(vm, { v: 1, type: "ack", accepted: true, parsed_as: "command_vote" });
    expect(vm.lastError).toContain("rejected"); // accepted acks change nothing
  });
});
