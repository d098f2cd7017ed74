"""Deterministic synthetic crowd.

Stands in for human viewers: votes for commands on a fixed cyclic schedule and
reinforces each broadcast evaluation by judging whether the robot's head
actually travelled. Verdicts flip with a configurable noise rate. Every vote
is an ordinary chat message, so the platform ingests oracle input and live
input through the same pipeline.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .critic.features import RETAIN_INDICES
from .simulation import EvaluationTrace

MOVE_COMMANDS = frozenset({"move"})
STILL_COMMANDS = frozenset({"stop"})


@dataclass
class OracleConfig:
    displacement_threshold: float = 0.5  # meters of net head travel = "moved"
    noise_rate: float = 0.05
    votes_min: int = 1
    votes_max: int = 5
    command_schedule: tuple = ("move", "stop")
    like_rate: float = 0.5  # chance of one like/dislike per evaluation
    users: int = 12
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.noise_rate < 0.5):
            raise ValueError("noise_rate must lie in [0, 0.5)")
        if self.displacement_threshold <= 0:
            raise ValueError("displacement_threshold must be positive")
        if self.votes_min < 0 or self.votes_max < self.votes_min:
            raise ValueError("bad votes range")
        self.command_schedule = tuple(self.command_schedule)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "OracleConfig":
        d = json.loads(text)
        return OracleConfig(**d)


BUILTIN_CONFIGS = {
    "default": OracleConfig(),
    # Starves every species of positive examples: nothing ever clears the
    # threshold, and under "stop" compliant stillness maps to negatives.
    "starved": OracleConfig(displacement_threshold=1e9, command_schedule=("stop",)),
}


def load_config(name_or_path: str) -> OracleConfig:
    if name_or_path in BUILTIN_CONFIGS:
        return BUILTIN_CONFIGS[name_or_path]
    with open(name_or_path) as fh:
        return OracleConfig.from_json(fh.read())


def head_displacement(trace: EvaluationTrace) -> float:
    """Net horizontal head travel between the first and last retained frames."""
    head = trace.head_positions
    a = head[RETAIN_INDICES[0]]
    b = head[RETAIN_INDICES[-1]]
    return float(np.hypot(b[0] - a[0], b[1] - a[1]))


def obeyed(trace: EvaluationTrace, command_text: str, config: OracleConfig):
    """Ground-truth verdict, or None for commands the oracle has no opinion on."""
    moved = head_displacement(trace) >= config.displacement_threshold
    if command_text in MOVE_COMMANDS:
        return moved
    if command_text in STILL_COMMANDS:
        return not moved
    return None


def _vote_rng(trace: EvaluationTrace, config: OracleConfig) -> np.random.Generator:
    # Pure in (trace, config): the stream is keyed off the trace content.
    digest = hashlib.sha256()
    digest.update(str(config.seed).encode())
    digest.update(np.int64(trace.robot_id).tobytes())
    digest.update(trace.command_text.encode())
    digest.update(trace.trajectory[RETAIN_INDICES].tobytes())
    key = np.frombuffer(digest.digest()[:16], dtype=np.uint64)
    return np.random.default_rng(np.random.SeedSequence(key.tolist()))


def oracle_votes(trace: EvaluationTrace, command_text: str, config: OracleConfig) -> list:
    """Reinforcement chat texts for one finished evaluation.

    Emits k yes/no votes (each independently flipped with the noise rate) and
    possibly one like/dislike. Commands outside the schedule draw no votes.
    Deterministic per (trace, config).
    """
    verdict = obeyed(trace, command_text, config)
    if verdict is None:
        return []
    rng = _vote_rng(trace, config)
    color_initial = trace.color[0] if trace.color else "r"
    k = int(rng.integers(config.votes_min, config.votes_max + 1))
    texts = []
    for _ in range(k):
        v = verdict if rng.random() >= config.noise_rate else not verdict
        texts.append(f"!{color_initial}{'y' if v else 'n'}")
    if rng.random() < config.like_rate:
        v = verdict if rng.random() >= config.noise_rate else not verdict
        texts.append(f"!{color_initial}{'l' if v else 'd'}")
    return texts


def oracle_user(config: OracleConfig, rng: np.random.Generator) -> str:
    return f"oracle{int(rng.integers(config.users)):02d}"


class OracleCrowd:
    """Tick-driven message source for a platform session."""

    def __init__(self, config: OracleConfig):
        self.config = config
        self._user_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0xCA]))

    def command_votes_for_window(self, window_index: int, window_start_vt: float) -> list:
        """(vt, username, text) command votes cast during a voting window."""
        sched = self.config.command_schedule
        if not sched:
            return []
        text = sched[window_index % len(sched)]
        out = []
        for k in range(3):
            vt = window_start_vt + 4.0 + 3.0 * k
            out.append((vt, oracle_user(self.config, self._user_rng), text))
        return out

    def reinforcement_for_evaluation(self, trace: EvaluationTrace, command_text: str,
                                     tick_start_vt: float) -> list:
        """(vt, username, text) reinforcement during the evaluation's window."""
        texts = oracle_votes(trace, command_text, self.config)
        out = []
        for k, text in enumerate(texts):
            vt = tick_start_vt + 6.0 + 2.0 * k
            out.append((vt, oracle_user(self.config, self._user_rng), text))
        return out
