"""The master loop: scheduling, evaluation broadcasting, persistence, replay.

One tick is a 30-virtual-second evaluation window. Command voting windows
close every 6 ticks; every 120 ticks the secondary population cycles through
its generations and injects one robot (shown silver on its next evaluation).
All mutation of platform state happens on the thread that calls run_tick, so
the event log is a total order.
"""

from __future__ import annotations

import hashlib
import struct
import threading
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import evolution
from .crowd import (
    ActiveEvaluation,
    AttributionError,
    CommandLexicon,
    CommandStats,
    CommandVote,
    DEFAULT_COMMAND,
    DISPLAY_COLORS,
    Other,
    ReinforcementInput,
    SILVER,
    UserScore,
    attribute_reinforcement,
    close_window,
    command_score,
    leaderboards,
    parse_message,
)
from .critic.features import build_features, write_dataset_header, write_dataset_row
from .eventlog import EventLog, read_events
from .evolution import RobotRecord
from .morphology import SPECIES_NAMES, species_table_checksum, write_species_table
from .simulation import EVAL_STEPS, evaluate, segment_endpoints
from .synthcrowd import OracleConfig, OracleCrowd

TICK_SECONDS = 30.0
PROTOCOL_VERSION = 1


@dataclass
class SessionConfig:
    seed: int = 1
    window_ticks: int = 6
    inject_every: int = 120
    generations_per_cycle: int = 120
    snapshot_every: int = 1
    realtime: bool = False
    oracle: Optional[OracleConfig] = None
    # Wall seconds spent broadcasting each tick; 0 runs flat out. The
    # realtime flag is shorthand for the full 30.
    pace_seconds: float = 0.0

    def __post_init__(self):
        if self.realtime and not self.pace_seconds:
            self.pace_seconds = TICK_SECONDS

    def to_payload(self) -> dict:
        d = {
            "seed": self.seed,
            "window_ticks": self.window_ticks,
            "inject_every": self.inject_every,
            "generations_per_cycle": self.generations_per_cycle,
            "snapshot_every": self.snapshot_every,
            "realtime": self.realtime,
            "oracle": asdict(self.oracle) if self.oracle else None,
            "species_checksum": species_table_checksum(),
            "protocol_version": PROTOCOL_VERSION,
        }
        if d["oracle"]:
            d["oracle"]["command_schedule"] = list(d["oracle"]["command_schedule"])
        return d

    @staticmethod
    def from_payload(p: dict) -> "SessionConfig":
        oracle = None
        if p.get("oracle"):
            od = dict(p["oracle"])
            od["command_schedule"] = tuple(od["command_schedule"])
            oracle = OracleConfig(**od)
        return SessionConfig(
            seed=p["seed"],
            window_ticks=p["window_ticks"],
            inject_every=p["inject_every"],
            generations_per_cycle=p["generations_per_cycle"],
            snapshot_every=p["snapshot_every"],
            realtime=False,  # replays never pace
            oracle=oracle,
        )


class ReplayError(Exception):
    pass


@dataclass
class _LiveEvaluation:
    eval_id: int
    record: RobotRecord
    color: str
    command_text: str
    command_code: float
    started: float
    ended: Optional[float] = None
    y: int = 0
    n: int = 0
    l: int = 0
    d: int = 0
    trace: object = None
    finalized: bool = False

    def active(self) -> ActiveEvaluation:
        return ActiveEvaluation(self.eval_id, self.color, self.started, self.ended)


class Platform:
    """Owns all mutable platform state; drive it with run_tick()."""

    def __init__(self, config: SessionConfig, out_dir=None,
                 listener=None, replay_messages=None):
        self.config = config
        self.listener = listener
        self.replay_messages = replay_messages  # tick -> [(vt, user, text)]
        self.out_dir = Path(out_dir) if out_dir else None

        log_path = None
        if self.out_dir:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            (self.out_dir / "datasets").mkdir(exist_ok=True)
            write_species_table(self.out_dir / "species.json")
            log_path = self.out_dir / "events.ndjson"
        self.log = EventLog(log_path, wall_clock=config.realtime)

        ss = np.random.SeedSequence(config.seed)
        kids = ss.spawn(6)
        self.rng_init = np.random.default_rng(kids[0])
        self.rng_select = np.random.default_rng(kids[1])
        self.rng_tournament = np.random.default_rng(kids[2])
        self.rng_secondary = np.random.default_rng(kids[3])
        self.rng_inject = np.random.default_rng(kids[4])

        self.tick = 0
        self.next_eval_id = 0
        self._next_robot_id = 0
        self.lexicon = CommandLexicon(config.seed)
        self.current_command = DEFAULT_COMMAND
        self.current_code = self.lexicon.code(DEFAULT_COMMAND)
        self.window_votes: dict = {}  # text -> [count, first_vt]
        self.command_stats: dict = {}  # text -> CommandStats
        self.users: dict = {}  # name -> UserScore
        self.current_eval: Optional[_LiveEvaluation] = None
        self.previous_eval: Optional[_LiveEvaluation] = None
        self.pending_injected: Optional[int] = None
        self.color_index = 0
        self._inbox: list = []
        self._inbox_lock = threading.Lock()
        self._dataset_files: dict = {}
        self.oracle = OracleCrowd(config.oracle) if config.oracle else None
        self._tick_wall_start = 0.0

        self.log.append("session_started", 0.0, config.to_payload())
        self._init_populations()

    # -- identity ------------------------------------------------------------

    def next_robot_id(self) -> int:
        rid = self._next_robot_id
        self._next_robot_id += 1
        return rid

    def _init_populations(self) -> None:
        self.secondary = evolution.init_secondary(self.rng_init, self.next_robot_id)
        self.primary = evolution.init_primary(self.rng_init, self.next_robot_id, tick=0)
        for m in self.primary:
            self.log.append(
                "robot_born",
                0.0,
                {"robot_id": m.genome.id, "species": m.genome.species,
                 "lineage": None, "source": "init"},
            )

    # -- chat intake -----------------------------------------------------------

    def submit_chat(self, username: str, text: str) -> None:
        """Thread-safe: queue a message for the next drain point."""
        with self._inbox_lock:
            self._inbox.append((time.monotonic(), str(username), str(text)))

    def _drain_inbox(self, tick_start_vt: float) -> list:
        with self._inbox_lock:
            pending = self._inbox
            self._inbox = []
        out = []
        pace = self.config.pace_seconds
        for k, (mono, user, text) in enumerate(pending):
            if pace > 0:
                # Map the wall-clock arrival onto the tick's virtual window.
                frac = max(0.0, mono - self._tick_wall_start) / pace
                offset = min(TICK_SECONDS - 1e-3, frac * TICK_SECONDS)
            else:
                offset = min(TICK_SECONDS - 1e-3, 15.0 + 1e-3 * k)
            out.append((tick_start_vt + offset, user, text))
        return out

    # -- main loop --------------------------------------------------------------

    def run_tick(self) -> None:
        self.tick += 1
        t = self.tick
        vt0 = TICK_SECONDS * (t - 1)
        self._tick_wall_start = time.monotonic()

        # Select the on-screen robot and its display color.
        if self.pending_injected is not None:
            record = next(m for m in self.primary if m.genome.id == self.pending_injected)
            color = SILVER
            self.pending_injected = None
        else:
            record = self.primary[int(self.rng_select.integers(len(self.primary)))]
            color = DISPLAY_COLORS[self.color_index % len(DISPLAY_COLORS)]
            self.color_index += 1
        self.next_eval_id += 1
        ev = _LiveEvaluation(
            eval_id=self.next_eval_id,
            record=record,
            color=color,
            command_text=self.current_command,
            command_code=self.current_code,
            started=vt0,
        )
        record.evaluations += 1
        self.previous_eval, self.current_eval = self.current_eval, ev
        self.log.append(
            "evaluation_started",
            vt0,
            {"eval_id": ev.eval_id, "tick": t, "robot_id": record.genome.id,
             "species": record.genome.species, "color": color,
             "command": ev.command_text, "code": ev.command_code},
        )

        ev.trace = evaluate(record.genome, ev.command_code, ev.command_text, color=color)
        self._broadcast_frames(ev, vt0)

        # Gather this tick's messages: synthetic crowd, live clients, or replay.
        messages = []
        if self.replay_messages is not None:
            messages.extend(self.replay_messages.get(t, []))
        elif self.oracle is not None:
            if (t - 1) % self.config.window_ticks == 0:
                w = (t - 1) // self.config.window_ticks
                messages.extend(self.oracle.command_votes_for_window(w, vt0))
            messages.extend(
                self.oracle.reinforcement_for_evaluation(ev.trace, ev.command_text, vt0)
            )
        messages.extend(self._drain_inbox(vt0))
        messages.sort(key=lambda m: m[0])

        grace_end = (self.previous_eval.ended + 2.0) if self.previous_eval else None
        for vt, user, text in messages:
            if grace_end is not None and vt >= grace_end:
                self._finalize_eval(self.previous_eval)
                grace_end = None
            self._process_message(vt, user, text)
        if self.previous_eval is not None and not self.previous_eval.finalized:
            self._finalize_eval(self.previous_eval)

        # Tournament between two other robots.
        out = evolution.tournament(
            self.primary, self.rng_tournament, exclude_id=record.genome.id,
            next_id=self.next_robot_id, tick=t,
        )
        if out.changed:
            self.log.append(
                "robot_born", vt0,
                {"robot_id": out.child_id, "species": self._species_of(out.child_id),
                 "lineage": out.winner_id, "source": "tournament"},
            )
            self.log.append(
                "robot_replaced", vt0,
                {"old_id": out.loser_id, "new_id": out.child_id, "cause": "tournament"},
            )

        ev.ended = vt0 + TICK_SECONDS

        if t % self.config.window_ticks == 0:
            self._close_window(t)
        if self.config.inject_every and t % self.config.inject_every == 0:
            self._hourly_cycle(t)
            self._write_population_snapshot(t)
        if self.config.snapshot_every and t % self.config.snapshot_every == 0:
            self.log.append("snapshot", ev.ended, {"tick": t, "state_sha256": self.state_hash()})
        self.log.flush()
        self._emit_panel()

        if self.config.pace_seconds > 0:
            elapsed = time.monotonic() - self._tick_wall_start
            if elapsed < self.config.pace_seconds:
                time.sleep(self.config.pace_seconds - elapsed)

    def _species_of(self, robot_id: int) -> str:
        for m in self.primary:
            if m.genome.id == robot_id:
                return m.genome.species
        return ""

    def run(self, ticks: int, progress: Optional[Callable] = None) -> None:
        for _ in range(ticks):
            self.run_tick()
            if progress:
                progress(self.tick)

    # -- message handling -------------------------------------------------------

    def _score_user(self, user: str, vt: float) -> None:
        u = self.users.get(user)
        if u is None:
            u = UserScore(username=user, first_seen=vt)
            self.users[user] = u
        u.points += 1

    def _process_message(self, vt: float, user: str, text: str) -> None:
        self.log.append("chat_message", vt, {"user": user, "text": text})
        if self.listener is not None:
            self.listener.on_chat(user, text)
        parsed = parse_message(text)
        if isinstance(parsed, CommandVote):
            slot = self.window_votes.get(parsed.text)
            if slot is None:
                self.window_votes[parsed.text] = [1, vt]
            else:
                slot[0] += 1
            stats = self.command_stats.get(parsed.text)
            if stats is None:
                stats = CommandStats(
                    text=parsed.text, code=self.lexicon.code(parsed.text), t0=vt, tT=vt
                )
                self.command_stats[parsed.text] = stats
            stats.record_vote(vt)
            self._score_user(user, vt)
        elif isinstance(parsed, ReinforcementInput):
            current = self.current_eval.active() if self.current_eval else None
            previous = self.previous_eval.active() if (
                self.previous_eval and not self.previous_eval.finalized
            ) else None
            try:
                r = attribute_reinforcement(parsed, current, previous, vt, user)
            except AttributionError as err:
                self.log.append(
                    "reinforcement", vt,
                    {"user": user, "color": parsed.color, "kind": parsed.kind,
                     "accepted": False, "reason": str(err)},
                )
                return
            target = self.current_eval if r.evaluation_id == self.current_eval.eval_id \
                else self.previous_eval
            rec = target.record
            if r.kind == "yes":
                target.y += 1
                rec.yeses += 1
            elif r.kind == "no":
                target.n += 1
                rec.nos += 1
            elif r.kind == "like":
                target.l += 1
                rec.likes += 1
            else:
                target.d += 1
                rec.dislikes += 1
            stats = self.command_stats.get(target.command_text)
            if stats is not None and r.kind in ("yes", "no"):
                stats.record_reinforcement(vt, r.kind)
            self._score_user(user, vt)
            self.log.append(
                "reinforcement", vt,
                {"user": user, "color": r.color, "kind": r.kind,
                 "eval_id": r.evaluation_id, "accepted": True},
            )
        else:
            assert isinstance(parsed, Other)

    def _finalize_eval(self, ev: _LiveEvaluation) -> None:
        if ev.finalized:
            return
        ev.finalized = True
        # Tallies freeze once the post-broadcast attribution grace expires.
        self.log.append(
            "evaluation_finished", ev.ended + 2.0,
            {"eval_id": ev.eval_id, "robot_id": ev.record.genome.id,
             "yes": ev.y, "no": ev.n, "like": ev.l, "dislike": ev.d},
        )
        self._write_dataset_row(ev)
        ev.trace = None  # traces are large; the features are already extracted

    def _write_dataset_row(self, ev: _LiveEvaluation) -> None:
        if self.out_dir is None or ev.trace is None:
            return
        species = ev.record.genome.species
        fh = self._dataset_files.get(species)
        if fh is None:
            path = self.out_dir / "datasets" / f"{species}.tsv"
            fh = open(path, "w")
            write_dataset_header(fh)
            self._dataset_files[species] = fh
        write_dataset_row(
            fh, ev.eval_id, species, ev.command_text, ev.y, ev.n, build_features(ev.trace)
        )

    # -- schedule boundaries -----------------------------------------------------

    def _close_window(self, t: int) -> None:
        votes = {text: (c, first) for text, (c, first) in self.window_votes.items()}
        winner = close_window(votes)
        self.current_command = winner
        self.current_code = self.lexicon.code(winner)
        self.log.append(
            "command_window_closed", TICK_SECONDS * t,
            {"window": t // self.config.window_ticks, "winner": winner,
             "code": self.current_code,
             "votes": {k: v[0] for k, v in sorted(self.window_votes.items())}},
        )
        self.window_votes = {}

    def _hourly_cycle(self, t: int) -> None:
        vt = TICK_SECONDS * t
        cycle = t // self.config.inject_every
        for g in range(self.config.generations_per_cycle):
            replaced = []
            for name in SPECIES_NAMES:
                sub = self.secondary.subpops[name]
                replaced.append(
                    evolution.hill_climb_generation(sub, self.rng_secondary, self.next_robot_id)
                )
            self.log.append(
                "secondary_generation", vt,
                {"cycle": cycle, "generation": g, "replaced": replaced},
            )
        out = evolution.inject(
            self.secondary, self.primary, self.rng_inject, self.next_robot_id, tick=t
        )
        self.pending_injected = out.injected_id
        self.log.append(
            "robot_injected", vt,
            {"robot_id": out.injected_id, "species": out.species,
             "replaced_id": out.replaced_id, "refill_id": out.refill_id},
        )
        self.log.append(
            "robot_replaced", vt,
            {"old_id": out.replaced_id, "new_id": out.injected_id, "cause": "injection"},
        )

    # -- population snapshots ------------------------------------------------------

    def _write_population_snapshot(self, t: int) -> None:
        if self.out_dir is None:
            return
        snap_dir = self.out_dir / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        save_population_snapshot(self, snap_dir / f"tick_{t:06d}.npz")

    # -- state digest -------------------------------------------------------------

    def state_hash(self) -> str:
        h = hashlib.sha256()
        h.update(struct.pack("<qqq", self.tick, self.next_eval_id, self._next_robot_id))
        h.update(self.current_command.encode())
        h.update(struct.pack("<d", self.current_code))
        h.update(struct.pack("<q", -1 if self.pending_injected is None else self.pending_injected))
        h.update(struct.pack("<q", self.color_index))
        for m in self.primary:
            g = m.genome
            h.update(struct.pack("<qqqqqqq", g.id, m.likes, m.dislikes, m.yeses,
                                 m.nos, m.evaluations, m.born_tick))
            h.update(g.species.encode())
            h.update(g.body.default_angles.tobytes())
            h.update(g.controller.w_in.tobytes())
            h.update(g.controller.w_hh.tobytes())
            h.update(g.controller.w_out.tobytes())
        for name in SPECIES_NAMES:
            sub = self.secondary.subpops[name]
            for g, f in zip(sub.genomes, sub.fitness):
                h.update(struct.pack("<qd", g.id, f))
                h.update(g.controller.w_in.tobytes())
                h.update(g.body.default_angles.tobytes())
        for text in sorted(self.lexicon.codes):
            h.update(text.encode())
            h.update(struct.pack("<d", self.lexicon.codes[text]))
        for text in sorted(self.command_stats):
            s = self.command_stats[text]
            h.update(text.encode())
            h.update(struct.pack("<ddq", s.t0, s.tT, s.total_votes))
            for ts, sign in s._reinf:
                h.update(struct.pack("<dq", ts, sign))
        for name in sorted(self.users):
            u = self.users[name]
            h.update(name.encode())
            h.update(struct.pack("<qd", u.points, u.first_seen))
        for text, (c, first) in sorted(self.window_votes.items()):
            h.update(text.encode())
            h.update(struct.pack("<qd", c, first))
        return h.hexdigest()

    # -- live views ------------------------------------------------------------

    def panel_snapshot(self) -> dict:
        ev = self.current_eval
        top_cmds, top_users = leaderboards(self.command_stats.values(), self.users.values())
        last_user = None
        for e in reversed(self.log.events):
            if e.kind == "chat_message":
                last_user = e.payload["user"]
                break
        window_end = TICK_SECONDS * self.config.window_ticks * (
            (self.tick - 1) // self.config.window_ticks + 1
        )
        now = TICK_SECONDS * self.tick
        return {
            "v": PROTOCOL_VERSION,
            "type": "panel",
            "tick": self.tick,
            "robot": None if ev is None else {
                "robot_id": ev.record.genome.id,
                "species": ev.record.genome.species,
                "age_ticks": self.tick - ev.record.born_tick,
                "color": ev.color,
                "yes": ev.y, "no": ev.n,
                "likes": ev.record.likes, "dislikes": ev.record.dislikes,
            },
            "command": {
                "text": self.current_command,
                "code": self.current_code,
                "seconds_remaining": max(0.0, window_end - now),
            },
            "top_commands": [{"text": t, "score": s} for t, s in top_cmds],
            "top_users": [{"username": u, "points": p} for u, p in top_users],
            "last_user": last_user,
        }

    def _emit_panel(self) -> None:
        if self.listener is not None:
            self.listener.on_panel(self.panel_snapshot())

    def _broadcast_frames(self, ev: _LiveEvaluation, vt0: float) -> None:
        if self.listener is None:
            return
        pace = self.config.pace_seconds
        # At most 30 messages per wall second; headless sessions emit a
        # 30-frame sketch of the evaluation without sleeping.
        n_frames = max(1, min(EVAL_STEPS, int(pace * 30))) if pace > 0 else 30
        stride = max(1, EVAL_STEPS // n_frames)
        trace = ev.trace
        for step in range(0, EVAL_STEPS, stride):
            pts = segment_endpoints(
                ev.record.genome.species, trace.trajectory[step], trace.joint_angles[step]
            )
            self.listener.on_frame({
                "v": PROTOCOL_VERSION,
                "type": "frame",
                "tick": self.tick,
                "eval_id": ev.eval_id,
                "robot_id": ev.record.genome.id,
                "species": ev.record.genome.species,
                "color": ev.color,
                "step": step,
                "joint_angles": [float(a) for a in trace.joint_angles[step]],
                "segment_endpoints": pts.tolist(),
            })
            if pace > 0:
                time.sleep(pace / n_frames)

    def close(self) -> None:
        if self.current_eval is not None and not self.current_eval.finalized:
            self._finalize_eval(self.current_eval)
        for fh in self._dataset_files.values():
            fh.close()
        self._dataset_files = {}
        self.log.close()


# ---------------------------------------------------------------------------
# population snapshot files


def save_population_snapshot(platform: Platform, path) -> None:
    """Genomes and counters of both populations, one versioned binary file."""
    import json as _json

    arrays = {}
    primary_meta = []
    for i, m in enumerate(platform.primary):
        g = m.genome
        primary_meta.append({
            "id": g.id, "species": g.species, "lineage": g.lineage,
            "likes": m.likes, "dislikes": m.dislikes, "yeses": m.yeses,
            "nos": m.nos, "evaluations": m.evaluations, "born_tick": m.born_tick,
        })
        arrays[f"p{i}_win"] = g.controller.w_in
        arrays[f"p{i}_whh"] = g.controller.w_hh
        arrays[f"p{i}_wout"] = g.controller.w_out
        arrays[f"p{i}_body"] = g.body.default_angles
    secondary_meta = {}
    for name in SPECIES_NAMES:
        sub = platform.secondary.subpops[name]
        secondary_meta[name] = [{"id": g.id, "lineage": g.lineage} for g in sub.genomes]
        arrays[f"s_{name}_fitness"] = sub.fitness
        for k, g in enumerate(sub.genomes):
            arrays[f"s_{name}_{k}_win"] = g.controller.w_in
            arrays[f"s_{name}_{k}_whh"] = g.controller.w_hh
            arrays[f"s_{name}_{k}_wout"] = g.controller.w_out
            arrays[f"s_{name}_{k}_body"] = g.body.default_angles
    header = {
        "tick": platform.tick,
        "state_sha256": platform.state_hash(),
        "species_checksum": species_table_checksum(),
        "primary": primary_meta,
        "secondary": secondary_meta,
    }
    arrays["header_json"] = np.frombuffer(
        _json.dumps(header, sort_keys=True).encode(), dtype=np.uint8
    )
    np.savez_compressed(path, **arrays)


def load_population_snapshot(path) -> dict:
    """Parse a snapshot file back into records and genomes."""
    import json as _json

    from .morphology import BodyGenome, ControllerGenome, RobotGenome

    with np.load(path) as z:
        header = _json.loads(bytes(z["header_json"]).decode())
        if header["species_checksum"] != species_table_checksum():
            raise ReplayError("species table checksum mismatch in snapshot")
        primary = []
        for i, meta in enumerate(header["primary"]):
            g = RobotGenome(
                id=meta["id"], species=meta["species"],
                body=BodyGenome(z[f"p{i}_body"]),
                controller=ControllerGenome(z[f"p{i}_win"], z[f"p{i}_whh"], z[f"p{i}_wout"]),
                lineage=meta["lineage"],
            )
            rec = RobotRecord(genome=g, likes=meta["likes"], dislikes=meta["dislikes"],
                              yeses=meta["yeses"], nos=meta["nos"],
                              evaluations=meta["evaluations"], born_tick=meta["born_tick"])
            primary.append(rec)
        secondary = {}
        for name in SPECIES_NAMES:
            genomes = []
            for k, meta in enumerate(header["secondary"][name]):
                genomes.append(RobotGenome(
                    id=meta["id"], species=name,
                    body=BodyGenome(z[f"s_{name}_{k}_body"]),
                    controller=ControllerGenome(
                        z[f"s_{name}_{k}_win"], z[f"s_{name}_{k}_whh"], z[f"s_{name}_{k}_wout"]
                    ),
                    lineage=meta["lineage"],
                ))
            secondary[name] = (genomes, z[f"s_{name}_fitness"].copy())
    return {"tick": header["tick"], "state_sha256": header["state_sha256"],
            "primary": primary, "secondary": secondary}


# ---------------------------------------------------------------------------
# replay


def replay(log_path, out_dir=None, listener=None) -> Platform:
    """Re-execute a logged session and verify every snapshot hash.

    Chat input is fed from the log; everything else re-derives from the seed.
    Returns the reconstructed platform at the last complete (snapshotted or
    final) tick in the log.
    """
    events = read_events(log_path)
    if not events or events[0].kind != "session_started":
        raise ReplayError("log does not begin with session_started")
    header = events[0].payload
    if header["species_checksum"] != species_table_checksum():
        raise ReplayError("species table checksum mismatch")
    config = SessionConfig.from_payload(header)

    messages: dict = {}
    snapshots: dict = {}
    last_tick = 0
    for ev in events:
        if ev.kind == "chat_message":
            tick = int(ev.vt // TICK_SECONDS) + 1
            messages.setdefault(tick, []).append((ev.vt, ev.payload["user"], ev.payload["text"]))
        elif ev.kind == "snapshot":
            snapshots[ev.payload["tick"]] = ev.payload["state_sha256"]
            last_tick = max(last_tick, ev.payload["tick"])

    platform = Platform(config, out_dir=out_dir, listener=listener,
                        replay_messages=messages)
    for t in range(1, last_tick + 1):
        platform.run_tick()
        if t in snapshots and platform.config.snapshot_every and \
                t % platform.config.snapshot_every == 0:
            got = platform.log.events[-1].payload["state_sha256"] \
                if platform.log.events[-1].kind == "snapshot" else platform.state_hash()
            if got != snapshots[t]:
                raise ReplayError(f"snapshot hash mismatch at tick {t}")
    return platform


def run_session(config: SessionConfig, ticks: int, out_dir=None, listener=None,
                progress=None) -> Platform:
    platform = Platform(config, out_dir=out_dir, listener=listener)
    try:
        platform.run(ticks, progress=progress)
    finally:
        platform.close()
    return platform
