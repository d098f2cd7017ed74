// Chat composition: free text goes out verbatim; the shortcut buttons build
// the color-prefixed reinforcement string for whichever robot is on screen.

import type { ViewModel } from "./viewmodel.js";

export type VoteKind = "yes" | "no" | "like" | "dislike";

const LETTER: Record<VoteKind, string> = {
  yes: "y",
  no: "n",
  like: "l",
  dislike: "d",
};

export function composeVote(kind: VoteKind, color: string): string {
  return `!${color[0]}${LETTER[kind]}`;
}

export function currentColor(vm: ViewModel): string | null {
  if (vm.frame) return vm.frame.color;
  if (vm.panel && vm.panel.robot) return vm.panel.robot.color;
  return null;
}

export function voteText(vm: ViewModel, kind: VoteKind): string | null {
  const color = currentColor(vm);
  return color ? composeVote(kind, color) : null;
}

export function outgoingText(raw: string): string | null {
  const text = raw.trim();
  return text.length ? text : null;
}
