"""Feature matrices and labels for critic training.

Each evaluation becomes a 100 x 4 matrix: mean per-step joint change plus the
head's 3D position, sampled every 18th step. The label is the evaluation's
normalized reinforcement, sign-inverted under "stop" so that rewarded motion
always maps to positive values.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..simulation import EVAL_STEPS, SAMPLE_STRIDE, EvaluationTrace

RETAIN_INDICES = np.arange(0, EVAL_STEPS, SAMPLE_STRIDE)
FEATURE_COLUMNS = ("joint_delta", "head_x", "head_y", "head_z")
INVERTED_COMMANDS = frozenset({"stop"})


def joint_feature(joint_angles: np.ndarray) -> np.ndarray:
    """Mean change across joints per step, downsampled to the retained steps.

    The step before the trace is taken to equal the first frame, so the first
    delta is zero.
    """
    ja = np.asarray(joint_angles, dtype=float)
    if ja.ndim != 2 or ja.shape[1] < 1:
        raise ValueError("expected (steps, joints) with at least one joint")
    deltas = np.empty(ja.shape[0])
    deltas[0] = 0.0
    deltas[1:] = np.diff(ja, axis=0).mean(axis=1)
    return deltas[RETAIN_INDICES[RETAIN_INDICES < ja.shape[0]]]


def build_features(trace: EvaluationTrace) -> np.ndarray:
    """(100, 4) feature matrix: [joint delta, head x, head y, head z]."""
    jd = joint_feature(trace.joint_angles)
    head = trace.head_positions[RETAIN_INDICES]
    return np.column_stack([jd, head])


def normalized_reinforcement(e_y: int, e_n: int) -> float:
    """(yes - no) / (yes + no) in [-1, +1]; undefined without any votes."""
    total = e_y + e_n
    if total <= 0:
        raise ValueError("evaluation collected no reinforcement")
    return (e_y - e_n) / total


def label_for(e_y: int, e_n: int, command: str) -> float:
    o = normalized_reinforcement(e_y, e_n)
    return -o if command in INVERTED_COMMANDS else o


# ---------------------------------------------------------------------------
# Dataset files: one row per evaluation, tab-separated.

N_FEATURES = 400  # 100 rows x 4 columns, row-major

DATASET_HEADER = (
    ["eval_id", "species", "command", "e_y", "e_n"]
    + [f"f{i:03d}" for i in range(N_FEATURES)]
)


def write_dataset_header(fh) -> None:
    fh.write("\t".join(DATASET_HEADER) + "\n")


def write_dataset_row(fh, eval_id: int, species: str, command: str,
                      e_y: int, e_n: int, features: np.ndarray) -> None:
    flat = np.asarray(features, dtype=float).reshape(N_FEATURES)
    cells = [str(eval_id), species, command, str(e_y), str(e_n)]
    cells.extend(repr(float(v)) for v in flat)
    fh.write("\t".join(cells) + "\n")


@dataclass
class DatasetRow:
    eval_id: int
    species: str
    command: str
    e_y: int
    e_n: int
    features: np.ndarray  # (100, 4)


def read_dataset_rows(path) -> list:
    rows = []
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != DATASET_HEADER:
            raise ValueError(f"unrecognized dataset header in {path}")
        for line in fh:
            cells = line.rstrip("\n").split("\t")
            rows.append(
                DatasetRow(
                    eval_id=int(cells[0]),
                    species=cells[1],
                    command=cells[2],
                    e_y=int(cells[3]),
                    e_n=int(cells[4]),
                    features=np.array(cells[5:], dtype=float).reshape(100, 4),
                )
            )
    return rows


class DatasetShortfall(Exception):
    """Raised when a species lacks enough usable examples of either sign."""

    def __init__(self, species: str, positives: int, negatives: int, required: int):
        self.species = species
        self.positives = positives
        self.negatives = negatives
        self.required = required
        super().__init__(
            f"insufficient examples for {species}: "
            f"{positives} positive, {negatives} negative, need {required} of each"
        )


@dataclass
class Dataset:
    species: str
    X: np.ndarray  # (n, 100, 4)
    y: np.ndarray  # (n,)
    eval_ids: np.ndarray
    checksum: str


def build_dataset(rows, species: str, rng_seed: int, n_per_class: int = 100) -> Dataset:
    """Balanced dataset from usable evaluations of one species.

    Usable rows carry at least one yes/no vote under "move" or "stop"; stop
    labels are sign-inverted. Draws n_per_class of each sign seeded-randomly
    without replacement; a shortfall raises DatasetShortfall.
    """
    pos, neg = [], []
    for r in rows:
        if r.species != species or r.command not in ("move", "stop"):
            continue
        if r.e_y + r.e_n == 0:
            continue
        o = label_for(r.e_y, r.e_n, r.command)
        if o > 0:
            pos.append((r, o))
        elif o < 0:
            neg.append((r, o))
    if len(pos) < n_per_class or len(neg) < n_per_class:
        raise DatasetShortfall(species, len(pos), len(neg), n_per_class)
    rng = np.random.default_rng(rng_seed)
    keep_pos = rng.choice(len(pos), size=n_per_class, replace=False)
    keep_neg = rng.choice(len(neg), size=n_per_class, replace=False)
    chosen = [pos[i] for i in keep_pos] + [neg[i] for i in keep_neg]
    X = np.stack([r.features for r, _ in chosen])
    y = np.array([o for _, o in chosen])
    ids = np.array([r.eval_id for r, _ in chosen])
    digest = hashlib.sha256()
    digest.update(X.tobytes())
    digest.update(y.tobytes())
    digest.update(ids.tobytes())
    return Dataset(species=species, X=X, y=y, eval_ids=ids, checksum=digest.hexdigest())
