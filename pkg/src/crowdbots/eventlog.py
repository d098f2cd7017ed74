"""Append-only platform event log.

Newline-delimited JSON with strictly increasing, gap-free sequence numbers.
Virtual timestamps are always present; wall timestamps only in realtime
sessions, so headless runs with equal seeds produce byte-identical logs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional

EVENT_KINDS = frozenset(
    {
        "session_started",
        "robot_born",
        "robot_injected",
        "robot_replaced",
        "evaluation_started",
        "evaluation_finished",
        "command_window_closed",
        "reinforcement",
        "chat_message",
        "secondary_generation",
        "snapshot",
    }
)


@dataclass(frozen=True)
class Event:
    seq: int
    vt: float  # virtual seconds since session start
    kind: str
    payload: dict
    wt: Optional[str] = None  # wall clock, realtime sessions only

    def to_line(self) -> str:
        doc = {"seq": self.seq, "vt": self.vt, "kind": self.kind, "payload": self.payload}
        if self.wt is not None:
            doc["wt"] = self.wt
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_line(line: str) -> "Event":
        doc = json.loads(line)
        return Event(
            seq=doc["seq"], vt=doc["vt"], kind=doc["kind"],
            payload=doc["payload"], wt=doc.get("wt"),
        )


class SequenceError(Exception):
    pass


class EventLog:
    """Single-writer log; optionally mirrored to a file as lines are appended."""

    def __init__(self, path=None, wall_clock: bool = False):
        self.events: list = []
        self._fh = open(path, "w") if path else None
        self.wall_clock = wall_clock

    def append(self, kind: str, vt: float, payload: dict) -> Event:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        wt = datetime.now(timezone.utc).isoformat() if self.wall_clock else None
        ev = Event(seq=len(self.events), vt=float(vt), kind=kind, payload=payload, wt=wt)
        self.events.append(ev)
        if self._fh:
            self._fh.write(ev.to_line() + "\n")
        return ev

    def flush(self) -> None:
        if self._fh:
            self._fh.flush()

    def close(self) -> None:
        if self._fh:
            self._fh.close()
            self._fh = None


def read_events(path) -> list:
    """Parse and validate a log file: sequence numbers must be 0,1,2,..."""
    events = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            ev = Event.from_line(line)
            if ev.seq != len(events):
                raise SequenceError(
                    f"sequence violation: expected {len(events)}, found {ev.seq}"
                )
            events.append(ev)
    return events
