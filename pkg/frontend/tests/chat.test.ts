import { describe, expect, it } from "vitest";
import { composeVote, currentColor, outgoingText, voteText } from "../src/chat.js";
import { applyMessage, emptyViewModel } from "../src/viewmodel.js";
import type { FrameUpdate } from "../src/protocol.js";

const frame = (color: string): FrameUpdate => ({
  v: 1, type: "frame", tick: 1, eval_id: 2, robot_id: 3, species: "snakebot",
  color, step: 0, joint_angles: [], segment_endpoints: [],
});

describe("vote composition", () => {
  it("builds the color-prefixed reinforcement string", () => {
    expect(composeVote("yes", "red")).toBe("!ry");
    expect(composeVote("no", "blue")).toBe("!bn");
    expect(composeVote("like", "silver")).toBe("!sl");
    expect(composeVote("dislike", "purple")).toBe("!pd");
  });

  it("clicking yes while the red robot shows sends !ry", () => {
    const vm = applyMessage(emptyViewModel(), frame("red"));
    expect(voteText(vm, "yes")).toBe("!ry");
    expect(currentColor(vm)).toBe("red");
  });

  it("no robot on screen means no vote text", () => {
    expect(voteText(emptyViewModel(), "yes")).toBeNull();
  });

  it("empty input never sends", () => {
    expect(outgoingText("")).toBeNull();
    expect(outgoingText("   ")).toBeNull();
    expect(outgoingText(" jump ")).toBe("jump");
  });
});
