"""Robot species catalog, genomes, and mutation operators.

Ten fixed species. Each is a tree of rigid segments connected by 1-DOF hinge
joints, sensed by touch/proprioception/head-position/eye-distance channels and
driven by a small recurrent controller (5 hidden units). Geometry lives in a
versioned species table; only controller weights (all species) and joint
default angles (tree species) evolve.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

SPECIES_NAMES = (
    "stickbot",
    "twigbot",
    "branchbot",
    "treebot",
    "spherebot",
    "starfishbot",
    "crabbot",
    "quadruped",
    "tablebot",
    "snakebot",
)

TREE_SPECIES = ("stickbot", "twigbot", "branchbot", "treebot")

HIDDEN_UNITS = 5

SPECIES_TABLE_VERSION = 1

# Mutation operator constants.
WEIGHT_MUTATION_PROB = 0.1
WEIGHT_MUTATION_SIGMA = 0.2
ANGLE_MUTATION_PROB = 0.5
ANGLE_MUTATION_SIGMA = math.radians(15.0)


def _rot(axis, angle: float) -> np.ndarray:
    """Rotation matrix about a unit axis (Rodrigues)."""
    x, y, z = axis
    c, s = math.cos(angle), math.sin(angle)
    C = 1.0 - c
    return np.array(
        [
            [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
            [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
            [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
        ]
    )


def _frame(direction, hinge) -> np.ndarray:
    """Orthonormal mount matrix: child +x along `direction`, +y along `hinge`."""
    x = np.asarray(direction, dtype=float)
    x = x / np.linalg.norm(x)
    y = np.asarray(hinge, dtype=float)
    y = y - np.dot(y, x) * x
    y = y / np.linalg.norm(y)
    z = np.cross(x, y)
    return np.column_stack([x, y, z])


@dataclass(frozen=True)
class Joint:
    """1-DOF hinge. `axis` is expressed in the child's post-mount frame."""

    segment: int
    axis: tuple
    lo: float
    hi: float
    rest: float = 0.0


@dataclass(frozen=True)
class Segment:
    shape: str  # cylinder | sphere | box
    length: float
    radius: float
    parent: int  # -1 attaches to the root frame
    anchor: tuple  # attachment point in parent (or root) frame
    mount: tuple  # row-major 3x3, child frame -> parent frame at angle 0
    joint: int  # joint index, -1 when rigidly attached
    contacts: tuple  # ground-contact sample points, child-local
    touch_channel: int  # sensor channel index, -1 when unsensed


@dataclass(frozen=True)
class SpeciesSpec:
    name: str
    segments: tuple
    joints: tuple
    head_local: tuple
    eye_dirs: tuple  # unit ray directions from the head, root frame
    root_contact: bool  # extra contact point at the root origin
    mutable_body: bool

    @property
    def motor_count(self) -> int:
        return len(self.joints)

    @property
    def touch_count(self) -> int:
        return sum(1 for s in self.segments if s.touch_channel >= 0)

    @property
    def eye_count(self) -> int:
        return len(self.eye_dirs)

    @property
    def sensor_count(self) -> int:
        return self.touch_count + len(self.joints) + 3 + self.eye_count

    def rest_angles(self) -> np.ndarray:
        return np.array([j.rest for j in self.joints], dtype=float)


def _seg(shape, length, radius, parent, anchor, mount, joint, contacts, touch):
    return Segment(
        shape=shape,
        length=float(length),
        radius=float(radius),
        parent=int(parent),
        anchor=tuple(float(v) for v in anchor),
        mount=tuple(float(v) for v in np.asarray(mount).reshape(9)),
        joint=int(joint),
        contacts=tuple(tuple(float(v) for v in c) for c in contacts),
        touch_channel=int(touch),
    )


def _eye_pair(yaw=0.26, pitch=0.5):
    c, s = math.cos(pitch), math.sin(pitch)
    return (
        (c * math.cos(yaw), c * math.sin(yaw), -s),
        (c * math.cos(-yaw), c * math.sin(-yaw), -s),
    )


def _build_tree(name: str, depth: int) -> SpeciesSpec:
    """Full binary tree of segments (edges), hanging downward from the root."""
    beta = math.radians(35.0)
    rng_limit = math.radians(45.0)
    segments = []
    joints = []

    def add(parent_idx: int, level: int, side: int) -> int:
        length = 0.4 * 0.75 ** (level - 1)
        branch_axis = (0.0, 1.0, 0.0) if level % 2 == 1 else (0.0, 0.0, 1.0)
        if parent_idx < 0:
            base_dir = np.array([0.0, 0.0, -1.0])
            anchor = (0.0, 0.0, 0.0)
        else:
            base_dir = np.array([1.0, 0.0, 0.0])
            anchor = (segments[parent_idx].length, 0.0, 0.0)
        direction = _rot(branch_axis, beta * side) @ base_dir
        mount = _frame(direction, branch_axis)
        idx = len(segments)
        joints.append(Joint(segment=idx, axis=(0.0, 1.0, 0.0), lo=-rng_limit, hi=rng_limit))
        segments.append(
            _seg(
                "cylinder",
                length,
                0.035,
                parent_idx,
                anchor,
                mount,
                len(joints) - 1,
                [(length, 0.0, 0.0)],
                idx,
            )
        )
        if level < depth:
            add(idx, level + 1, +1)
            add(idx, level + 1, -1)
        return idx

    add(-1, 1, +1)
    add(-1, 1, -1)
    return SpeciesSpec(
        name=name,
        segments=tuple(segments),
        joints=tuple(joints),
        head_local=(0.0, 0.0, 0.1),
        eye_dirs=_eye_pair(),
        root_contact=True,
        mutable_body=True,
    )


def _build_spherebot() -> SpeciesSpec:
    # Pendulum is longer than the shell radius so its tip can reach the
    # ground and punt the body along. Tip speed sits near the friction
    # breakaway, so only restrained swings get traction.
    r, L = 0.12, 0.22
    segments = [
        _seg("sphere", 0.0, r, -1, (0, 0, 0), np.eye(3), -1, [(0.0, 0.0, -r)], 0),
        _seg(
            "cylinder",
            L,
            0.03,
            0,
            (0, 0, 0),
            _frame((0, 0, -1), (0, 1, 0)),
            0,
            [(L, 0.0, 0.0)],
            1,
        ),
    ]
    joints = [Joint(segment=1, axis=(0.0, 1.0, 0.0), lo=-1.6, hi=1.6)]
    return SpeciesSpec(
        name="spherebot",
        segments=tuple(segments),
        joints=tuple(joints),
        head_local=(0.0, 0.0, r),
        eye_dirs=(),
        root_contact=False,
        mutable_body=False,
    )


def _build_snakebot() -> SpeciesSpec:
    L, hh = 0.35, 0.05
    mount_back = _rot((0.0, 0.0, 1.0), math.pi)
    segments = [
        _seg("box", L, 0.06, -1, (0, 0, 0), np.eye(3), -1,
             [(0.0, 0.0, -hh), (L, 0.0, -hh)], 0),
        _seg("box", L, 0.06, 0, (0, 0, 0), mount_back, 0,
             [(0.0, 0.0, -hh), (L, 0.0, -hh)], 1),
        _seg("box", L, 0.06, 1, (L, 0, 0), np.eye(3), 1,
             [(0.0, 0.0, -hh), (L, 0.0, -hh)], 2),
    ]
    joints = [
        Joint(segment=1, axis=(0.0, 1.0, 0.0), lo=-0.9, hi=0.9),
        Joint(segment=2, axis=(0.0, 1.0, 0.0), lo=-0.9, hi=0.9),
    ]
    pitch = 0.5
    eye = (math.cos(pitch), 0.0, -math.sin(pitch))
    return SpeciesSpec(
        name="snakebot",
        segments=tuple(segments),
        joints=tuple(joints),
        head_local=(L, 0.0, 0.06),
        eye_dirs=(eye,),
        root_contact=False,
        mutable_body=False,
    )


def _build_tablebot() -> SpeciesSpec:
    top_len, leg_len = 0.5, 0.22
    segments = [
        _seg("box", top_len, 0.25, -1, (-0.25, 0, 0), np.eye(3), -1,
             [(0.0, 0.0, 0.0), (top_len, 0.0, 0.0)], -1)
    ]
    joints = []
    down = _frame((0, 0, -1), (0, 1, 0))
    corners = [(0.04, 0.21), (0.04, -0.21), (0.46, 0.21), (0.46, -0.21)]
    for ch, (cx, cy) in enumerate(corners):
        j = len(joints)
        joints.append(Joint(segment=len(segments), axis=(0.0, 1.0, 0.0), lo=-0.8, hi=0.8))
        segments.append(
            _seg("cylinder", leg_len, 0.03, 0, (cx, cy, 0.0), down, j,
                 [(leg_len, 0.0, 0.0)], ch)
        )
    return SpeciesSpec(
        name="tablebot",
        segments=tuple(segments),
        joints=tuple(joints),
        head_local=(0.28, 0.0, 0.05),
        eye_dirs=_eye_pair(),
        root_contact=False,
        mutable_body=False,
    )


def _build_quadruped() -> SpeciesSpec:
    body_len, upper, lower = 0.45, 0.22, 0.22
    segments = [
        _seg("box", body_len, 0.15, -1, (-0.225, 0, 0), np.eye(3), -1,
             [(0.0, 0.0, -0.05), (body_len, 0.0, -0.05)], -1)
    ]
    joints = []
    hips = [(0.06, 0.13, +1), (0.06, -0.13, -1), (0.39, 0.13, +1), (0.39, -0.13, -1)]
    tilt = math.radians(20.0)
    ch = 0
    for cx, cy, side in hips:
        d = (0.0, side * math.sin(tilt), -math.cos(tilt))
        hip_mount = _frame(d, (1, 0, 0))
        hip_j = len(joints)
        joints.append(Joint(segment=len(segments), axis=(0.0, 1.0, 0.0), lo=-0.8, hi=0.8))
        hip_idx = len(segments)
        segments.append(
            _seg("cylinder", upper, 0.035, 0, (cx, cy, -0.05), hip_mount, hip_j,
                 [(upper, 0.0, 0.0)], ch)
        )
        ch += 1
        knee_j = len(joints)
        joints.append(Joint(segment=len(segments), axis=(0.0, 1.0, 0.0), lo=-0.8, hi=0.8))
        segments.append(
            _seg("cylinder", lower, 0.03, hip_idx, (upper, 0.0, 0.0),
                 _rot((0.0, 1.0, 0.0), 0.3), knee_j, [(lower, 0.0, 0.0)], ch)
        )
        ch += 1
    return SpeciesSpec(
        name="quadruped",
        segments=tuple(segments),
        joints=tuple(joints),
        head_local=(0.26, 0.0, 0.1),
        eye_dirs=_eye_pair(),
        root_contact=False,
        mutable_body=False,
    )


def _build_starfishbot() -> SpeciesSpec:
    upper, lower = 0.24, 0.24
    segments = [
        _seg("sphere", 0.0, 0.18, -1, (0, 0, 0), np.eye(3), -1, [(0.0, 0.0, -0.06)], -1)
    ]
    joints = []
    ch = 0
    for k in range(4):
        phi = math.pi / 4 + k * math.pi / 2
        c, s = math.cos(phi), math.sin(phi)
        d = np.array([c, s, -0.35])
        hinge = (-s, c, 0.0)
        base_j = len(joints)
        joints.append(Joint(segment=len(segments), axis=(0.0, 1.0, 0.0), lo=-0.9, hi=0.9))
        base_idx = len(segments)
        segments.append(
            _seg("cylinder", upper, 0.035, 0, (0.1 * c, 0.1 * s, 0.0),
                 _frame(d, hinge), base_j, [(upper, 0.0, 0.0)], ch)
        )
        ch += 1
        tip_j = len(joints)
        joints.append(Joint(segment=len(segments), axis=(0.0, 1.0, 0.0), lo=-0.9, hi=0.9))
        segments.append(
            _seg("cylinder", lower, 0.03, base_idx, (upper, 0.0, 0.0),
                 _rot((0.0, 1.0, 0.0), 0.3), tip_j, [(lower, 0.0, 0.0)], ch)
        )
        ch += 1
    return SpeciesSpec(
        name="starfishbot",
        segments=tuple(segments),
        joints=tuple(joints),
        head_local=(0.0, 0.0, 0.12),
        eye_dirs=_eye_pair(),
        root_contact=False,
        mutable_body=False,
    )


def _build_crabbot() -> SpeciesSpec:
    body_len, upper, lower = 0.4, 0.2, 0.2
    segments = [
        _seg("box", body_len, 0.12, -1, (-0.2, 0, 0), np.eye(3), -1,
             [(0.0, 0.0, -0.05), (body_len, 0.0, -0.05)], -1)
    ]
    joints = []
    tilt = math.radians(35.0)
    ch = 0
    for side in (+1, -1):
        for cx in (0.07, 0.2, 0.33):
            d = (0.0, side * math.sin(tilt), -math.cos(tilt))
            base_j = len(joints)
            joints.append(Joint(segment=len(segments), axis=(0.0, 1.0, 0.0), lo=-0.8, hi=0.8))
            base_idx = len(segments)
            segments.append(
                _seg("cylinder", upper, 0.03, 0, (cx, side * 0.12, -0.03),
                     _frame(d, (1, 0, 0)), base_j, [(upper, 0.0, 0.0)], ch)
            )
            ch += 1
            tip_j = len(joints)
            joints.append(Joint(segment=len(segments), axis=(0.0, 1.0, 0.0), lo=-0.8, hi=0.8))
            segments.append(
                _seg("cylinder", lower, 0.025, base_idx, (upper, 0.0, 0.0),
                     _rot((0.0, 1.0, 0.0), 0.35), tip_j, [(lower, 0.0, 0.0)], ch)
            )
            ch += 1
    return SpeciesSpec(
        name="crabbot",
        segments=tuple(segments),
        joints=tuple(joints),
        head_local=(0.24, 0.0, 0.08),
        eye_dirs=(),
        root_contact=False,
        mutable_body=False,
    )


_BUILDERS = {
    "stickbot": lambda: _build_tree("stickbot", 1),
    "twigbot": lambda: _build_tree("twigbot", 2),
    "branchbot": lambda: _build_tree("branchbot", 3),
    "treebot": lambda: _build_tree("treebot", 4),
    "spherebot": _build_spherebot,
    "starfishbot": _build_starfishbot,
    "crabbot": _build_crabbot,
    "quadruped": _build_quadruped,
    "tablebot": _build_tablebot,
    "snakebot": _build_snakebot,
}


@lru_cache(maxsize=1)
def species_catalog() -> tuple:
    """The ten species specs, in canonical order. Deterministic."""
    return tuple(_BUILDERS[name]() for name in SPECIES_NAMES)


@lru_cache(maxsize=None)
def species_spec(name: str) -> SpeciesSpec:
    if name not in _BUILDERS:
        raise KeyError(f"unknown species: {name!r}")
    return species_catalog()[SPECIES_NAMES.index(name)]


def species_table_json() -> str:
    """Canonical text serialization of the species table (the shared geometry file)."""
    doc = {"version": SPECIES_TABLE_VERSION, "species": []}
    for spec in species_catalog():
        doc["species"].append(
            {
                "name": spec.name,
                "sensor_count": spec.sensor_count,
                "motor_count": spec.motor_count,
                "mutable_body": spec.mutable_body,
                "root_contact": spec.root_contact,
                "head_local": list(spec.head_local),
                "eye_dirs": [list(d) for d in spec.eye_dirs],
                "segments": [
                    {
                        "shape": s.shape,
                        "length": s.length,
                        "radius": s.radius,
                        "parent": s.parent,
                        "anchor": list(s.anchor),
                        "mount": list(s.mount),
                        "joint": s.joint,
                        "contacts": [list(c) for c in s.contacts],
                        "touch_channel": s.touch_channel,
                    }
                    for s in spec.segments
                ],
                "joints": [
                    {
                        "segment": j.segment,
                        "axis": list(j.axis),
                        "lo": j.lo,
                        "hi": j.hi,
                        "rest": j.rest,
                    }
                    for j in spec.joints
                ],
            }
        )
    return json.dumps(doc, indent=1, sort_keys=True)


@lru_cache(maxsize=1)
def species_table_checksum() -> str:
    return hashlib.sha256(species_table_json().encode()).hexdigest()


def write_species_table(path) -> str:
    """Write the canonical table file; returns its checksum."""
    text = species_table_json()
    with open(path, "w") as fh:
        fh.write(text)
    return species_table_checksum()


# ---------------------------------------------------------------------------
# Genomes


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ControllerGenome:
    w_in: np.ndarray  # (sensors + command + bias, 5)
    w_hh: np.ndarray  # (5, 5)
    w_out: np.ndarray  # (5, motors)

    def __post_init__(self):
        object.__setattr__(self, "w_in", _frozen(self.w_in))
        object.__setattr__(self, "w_hh", _frozen(self.w_hh))
        object.__setattr__(self, "w_out", _frozen(self.w_out))


@dataclass(frozen=True)
class BodyGenome:
    default_angles: np.ndarray  # rest angle per joint, radians

    def __post_init__(self):
        object.__setattr__(self, "default_angles", _frozen(self.default_angles))


@dataclass(frozen=True)
class RobotGenome:
    id: int
    species: str
    body: BodyGenome
    controller: ControllerGenome
    lineage: Optional[int] = None

    def validate(self) -> None:
        spec = species_spec(self.species)
        n_in = spec.sensor_count + 2
        if self.controller.w_in.shape != (n_in, HIDDEN_UNITS):
            raise ValueError(f"w_in shape {self.controller.w_in.shape} != ({n_in}, {HIDDEN_UNITS})")
        if self.controller.w_hh.shape != (HIDDEN_UNITS, HIDDEN_UNITS):
            raise ValueError("w_hh must be 5x5")
        if self.controller.w_out.shape != (HIDDEN_UNITS, spec.motor_count):
            raise ValueError("w_out shape mismatch")
        for w in (self.controller.w_in, self.controller.w_hh, self.controller.w_out):
            if np.abs(w).max(initial=0.0) > 1.0:
                raise ValueError("controller weights must lie in [-1, 1]")
        if self.body.default_angles.shape != (spec.motor_count,):
            raise ValueError("default_angles length mismatch")
        for a, j in zip(self.body.default_angles, spec.joints):
            if not (j.lo <= a <= j.hi):
                raise ValueError("default angle outside joint range")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "species": self.species,
            "lineage": self.lineage,
            "default_angles": self.body.default_angles.tolist(),
            "w_in": self.controller.w_in.tolist(),
            "w_hh": self.controller.w_hh.tolist(),
            "w_out": self.controller.w_out.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "RobotGenome":
        return RobotGenome(
            id=d["id"],
            species=d["species"],
            body=BodyGenome(np.array(d["default_angles"], dtype=float)),
            controller=ControllerGenome(
                np.array(d["w_in"], dtype=float),
                np.array(d["w_hh"], dtype=float),
                np.array(d["w_out"], dtype=float),
            ),
            lineage=d.get("lineage"),
        )


def _as_rng(rng_or_seed) -> np.random.Generator:
    if isinstance(rng_or_seed, np.random.Generator):
        return rng_or_seed
    return np.random.default_rng(rng_or_seed)


def random_genome(species: str, rng_seed, robot_id: int = 0,
                  lineage: Optional[int] = None) -> RobotGenome:
    """Fresh genome with uniform weights in [-1, 1].

    Tree species draw default angles uniformly within joint ranges; the rest
    use the table's canonical rest pose. Same seed, same genome.
    """
    spec = species_spec(species)
    rng = _as_rng(rng_seed)
    n_in = spec.sensor_count + 2
    w_in = rng.uniform(-1.0, 1.0, (n_in, HIDDEN_UNITS))
    w_hh = rng.uniform(-1.0, 1.0, (HIDDEN_UNITS, HIDDEN_UNITS))
    w_out = rng.uniform(-1.0, 1.0, (HIDDEN_UNITS, spec.motor_count))
    if spec.mutable_body:
        angles = np.array([rng.uniform(j.lo, j.hi) for j in spec.joints])
    else:
        angles = spec.rest_angles()
    return RobotGenome(
        id=robot_id,
        species=species,
        body=BodyGenome(angles),
        controller=ControllerGenome(w_in, w_hh, w_out),
        lineage=lineage,
    )


def mutate(genome: RobotGenome, rng_seed, child_id: int = 0) -> RobotGenome:
    """Mutated copy: fresh id, lineage set to the parent, at least one change.

    Each controller weight is perturbed with probability 0.1 by Gaussian noise
    (sigma 0.2) and clamped to [-1, 1]. Tree species additionally perturb one
    default angle (sigma 15 degrees, clamped to range) with probability 0.5.
    """
    spec = species_spec(genome.species)
    rng = _as_rng(rng_seed)

    def perturb(w):
        mask = rng.random(w.shape) < WEIGHT_MUTATION_PROB
        noise = rng.normal(0.0, WEIGHT_MUTATION_SIGMA, w.shape)
        return np.clip(w + mask * noise, -1.0, 1.0)

    w_in = perturb(genome.controller.w_in)
    w_hh = perturb(genome.controller.w_hh)
    w_out = perturb(genome.controller.w_out)
    angles = genome.body.default_angles.copy()
    if spec.mutable_body and rng.random() < ANGLE_MUTATION_PROB:
        k = int(rng.integers(len(angles)))
        j = spec.joints[k]
        angles[k] = float(np.clip(angles[k] + rng.normal(0.0, ANGLE_MUTATION_SIGMA), j.lo, j.hi))

    changed = (
        not np.array_equal(w_in, genome.controller.w_in)
        or not np.array_equal(w_hh, genome.controller.w_hh)
        or not np.array_equal(w_out, genome.controller.w_out)
        or not np.array_equal(angles, genome.body.default_angles)
    )
    if not changed:
        # Clamping can swallow every perturbation; force one fresh weight.
        flat = w_in.size + w_hh.size + w_out.size
        while True:
            k = int(rng.integers(flat))
            v = float(rng.uniform(-1.0, 1.0))
            if k < w_in.size:
                tgt, off = w_in, k
            elif k < w_in.size + w_hh.size:
                tgt, off = w_hh, k - w_in.size
            else:
                tgt, off = w_out, k - w_in.size - w_hh.size
            if tgt.flat[off] != v:
                tgt.flat[off] = v
                break

    return RobotGenome(
        id=child_id,
        species=genome.species,
        body=BodyGenome(angles),
        controller=ControllerGenome(w_in, w_hh, w_out),
        lineage=genome.id,
    )
