"""Chat parsing, command voting, reinforcement attribution, and scores.

Reinforcement grammar: "!" + color initial + vote letter, e.g. "!bn" is a
no-vote for the blue robot. Anything that is a short run of plain lowercase
words counts as a command vote; everything else is chatter.
"""

from __future__ import annotations

import hashlib
import json
import re
from bisect import bisect_left, insort
from dataclasses import dataclass, field
from typing import Optional

DISPLAY_COLORS = ("red", "green", "blue", "orange", "cyan", "purple")
SILVER = "silver"
PALETTE = DISPLAY_COLORS + (SILVER,)

COLOR_BY_INITIAL = {c[0]: c for c in PALETTE}
VOTE_KINDS = {"y": "yes", "n": "no", "l": "like", "d": "dislike"}

REINFORCEMENT_RE = re.compile(r"^!([rgbocps])([ynld])$")
COMMAND_RE = re.compile(r"^[a-z]+( [a-z]+){0,4}$")
MAX_COMMAND_LEN = 32

DEFAULT_COMMAND = "move"
ATTRIBUTION_GRACE = 2.0  # seconds a finished evaluation still owns its color


@dataclass(frozen=True)
class ChatMessage:
    timestamp: float
    username: str
    raw_text: str


@dataclass(frozen=True)
class ReinforcementInput:
    color: str
    kind: str  # yes | no | like | dislike


@dataclass(frozen=True)
class CommandVote:
    text: str


@dataclass(frozen=True)
class Other:
    pass


@dataclass(frozen=True)
class Reinforcement:
    username: str
    timestamp: float
    color: str
    kind: str
    evaluation_id: int


def canonical_command(text: str) -> str:
    return " ".join(text.strip().lower().split())


def parse_message(msg) -> object:
    """Total parser: ReinforcementInput, CommandVote, or Other. Never raises."""
    text = msg.raw_text if isinstance(msg, ChatMessage) else str(msg)
    stripped = text.strip().lower()
    m = REINFORCEMENT_RE.match(stripped)
    if m:
        return ReinforcementInput(color=COLOR_BY_INITIAL[m.group(1)], kind=VOTE_KINDS[m.group(2)])
    if stripped.startswith("!"):
        return Other()
    canon = canonical_command(text)
    if canon and len(canon) <= MAX_COMMAND_LEN and COMMAND_RE.match(canon):
        return CommandVote(text=canon)
    return Other()


def close_window(votes) -> str:
    """Winning command for a finished voting window.

    `votes` maps canonical text to (count, first_seen_timestamp). The mode
    wins; ties break toward the earliest first occurrence; no votes at all
    falls back to the default command.
    """
    if not votes:
        return DEFAULT_COMMAND
    best = min(votes.items(), key=lambda kv: (-kv[1][0], kv[1][1]))
    return best[0]


class CommandLexicon:
    """Stable command -> code mapping, a real number in the open (-1, +1).

    Codes derive from a seeded hash of the canonical text, so any two runs
    with the same seed agree on every command's code regardless of the order
    commands first appear.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.codes: dict = {}

    def code(self, text: str) -> float:
        canon = canonical_command(text)
        got = self.codes.get(canon)
        if got is None:
            digest = hashlib.sha256(f"{self.seed}:{canon}".encode()).digest()
            u = int.from_bytes(digest[:8], "big") / 2.0**64
            got = min(max(2.0 * u - 1.0, -1.0 + 1e-12), 1.0 - 1e-12)
            self.codes[canon] = got
        return got

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"seed": self.seed, "codes": self.codes}, fh, indent=1, sort_keys=True)

    @staticmethod
    def load(path) -> "CommandLexicon":
        with open(path) as fh:
            d = json.load(fh)
        lex = CommandLexicon(d["seed"])
        lex.codes = dict(d["codes"])
        return lex


@dataclass
class CommandStats:
    """Per-command activity and reinforcement, scored as C=(Y2-N2)-(Y1-N1)."""

    text: str
    code: float
    t0: float
    tT: float
    total_votes: int = 0
    # (timestamp, +1 for yes / -1 for no), kept sorted by timestamp
    _reinf: list = field(default_factory=list)

    def record_vote(self, timestamp: float) -> None:
        self.total_votes += 1
        if timestamp < self.t0:
            self.t0 = timestamp
        if timestamp > self.tT:
            self.tT = timestamp

    def record_reinforcement(self, timestamp: float, kind: str) -> None:
        if kind == "yes":
            insort(self._reinf, (timestamp, 1))
        elif kind == "no":
            insort(self._reinf, (timestamp, -1))

    def halves(self) -> tuple:
        """(Y1, N1, Y2, N2); the midpoint itself belongs to the second half."""
        mid = 0.5 * (self.t0 + self.tT)
        split = bisect_left(self._reinf, (mid, -2))
        y1 = sum(1 for _, s in self._reinf[:split] if s > 0)
        n1 = split - y1
        y2 = sum(1 for _, s in self._reinf[split:] if s > 0)
        n2 = len(self._reinf) - split - y2
        return y1, n1, y2, n2


def command_score(stats: CommandStats) -> float:
    y1, n1, y2, n2 = stats.halves()
    return float((y2 - n2) - (y1 - n1))


@dataclass
class UserScore:
    username: str
    points: int = 0
    first_seen: float = 0.0


@dataclass
class ActiveEvaluation:
    evaluation_id: int
    color: str
    started: float
    ended: Optional[float] = None


class AttributionError(Exception):
    pass


def attribute_reinforcement(inp: ReinforcementInput, current: Optional[ActiveEvaluation],
                            previous: Optional[ActiveEvaluation], timestamp: float,
                            username: str) -> Reinforcement:
    """Attach a vote to the evaluation owning the color at `timestamp`.

    Latency misattribution is reproduced rather than corrected: a vote for the
    previous robot's color lands on it only within a short grace window after
    its evaluation ended; otherwise the vote is dropped.
    """
    if current is None:
        raise AttributionError("no active evaluation")
    if inp.color == current.color:
        return Reinforcement(username, timestamp, inp.color, inp.kind, current.evaluation_id)
    if (
        previous is not None
        and inp.color == previous.color
        and previous.ended is not None
        and timestamp <= previous.ended + ATTRIBUTION_GRACE
    ):
        return Reinforcement(username, timestamp, inp.color, inp.kind, previous.evaluation_id)
    raise AttributionError(f"color {inp.color!r} matches no recent evaluation")


def leaderboards(commands, users, top_n: int = 5) -> tuple:
    """(top commands by score, top users by points); ties go to the earlier."""
    cmds = sorted(
        ((command_score(c), c) for c in commands),
        key=lambda sc: (-sc[0], sc[1].t0, sc[1].text),
    )
    top_cmds = [(c.text, s) for s, c in cmds[:top_n]]
    us = sorted(users, key=lambda u: (-u.points, u.first_seen, u.username))
    top_users = [(u.username, u.points) for u in us[:top_n]]
    return top_cmds, top_users
