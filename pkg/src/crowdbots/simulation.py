"""Deterministic fixed-timestep robot evaluation.

One evaluation runs the recurrent controller against a simplified
"kinematic anchor" ground model for 1800 steps of 0.05 s: joints slew toward
motor targets, ground-touching points act as stick-friction anchors (the root
translates by the negated mean horizontal displacement of contacts), and the
root falls ballistically when airborne. The root never rotates; locomotion is
pure translation. This is a deliberate, documented departure from full rigid
body dynamics: cheap, morphology-dependent, and exactly reproducible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
import numpy as np

with warnings.catch_warnings():
    # Some environments ship an old TBB; numba would fall back and warn on
    # every run. Pin the OpenMP layer instead.
    warnings.filterwarnings("ignore", message=".*TBB.*")
    import numba
    from numba import njit, prange

numba.config.THREADING_LAYER = "omp"

from .morphology import (
    HIDDEN_UNITS,
    RobotGenome,
    SpeciesSpec,
    species_spec,
    species_table_checksum,
)

SIM_DT = 0.05
EVAL_STEPS = 1800
WARMUP_STEPS = 50
OMEGA_MAX = 2.0  # rad/s joint slew limit
GRAVITY = 9.8
EYE_RANGE = 20.0
SAMPLE_STRIDE = 18  # every 18th step feeds trajectories and features
CONTACT_TOL = 1e-9
TOUCH_TOL = 1e-6
# Static-friction breakaway: a contact point sliding farther than this in one
# step loses grip and stops anchoring the root. Keeps frantic thrashing from
# translating into travel.
SLIP_STEP_MAX = 0.02


class SpeciesArrays:
    """Flat numeric view of a species spec, shaped for the jit kernel."""

    def __init__(self, spec: SpeciesSpec):
        n_seg = len(spec.segments)
        self.spec = spec
        self.parent = np.array([s.parent for s in spec.segments], dtype=np.int64)
        self.anchor = np.array([s.anchor for s in spec.segments], dtype=np.float64)
        self.mount = np.array(
            [np.array(s.mount).reshape(3, 3) for s in spec.segments], dtype=np.float64
        )
        self.joint_of_seg = np.array([s.joint for s in spec.segments], dtype=np.int64)
        self.length = np.array([s.length for s in spec.segments], dtype=np.float64)
        self.axis = np.zeros((n_seg, 3), dtype=np.float64)
        for j in spec.joints:
            self.axis[j.segment] = j.axis
        self.j_lo = np.array([j.lo for j in spec.joints], dtype=np.float64)
        self.j_hi = np.array([j.hi for j in spec.joints], dtype=np.float64)

        cp_seg, cp_local, cp_touch = [], [], []
        if spec.root_contact:
            cp_seg.append(-1)
            cp_local.append((0.0, 0.0, 0.0))
            cp_touch.append(-1)
        for i, s in enumerate(spec.segments):
            for c in s.contacts:
                cp_seg.append(i)
                cp_local.append(c)
                cp_touch.append(s.touch_channel)
        self.cp_seg = np.array(cp_seg, dtype=np.int64)
        self.cp_local = np.array(cp_local, dtype=np.float64)
        self.cp_touch = np.array(cp_touch, dtype=np.int64)

        self.head_local = np.array(spec.head_local, dtype=np.float64)
        self.eye_dirs = (
            np.array(spec.eye_dirs, dtype=np.float64)
            if spec.eye_dirs
            else np.zeros((0, 3), dtype=np.float64)
        )
        self.n_touch = spec.touch_count
        self.n_joint = spec.motor_count


@lru_cache(maxsize=None)
def species_arrays(name: str) -> SpeciesArrays:
    return SpeciesArrays(species_spec(name))


@dataclass
class WorldState:
    root_position: np.ndarray  # (3,)
    root_vertical_velocity: float
    joint_angles: np.ndarray  # (n_joints,)
    hidden_state: np.ndarray  # (5,)
    step_index: int = 0


@dataclass
class SensorFrame:
    touch: np.ndarray
    proprioception: np.ndarray
    head_position: np.ndarray
    eye_distances: np.ndarray
    motors: np.ndarray


@dataclass
class EvaluationTrace:
    """Columnar record of one evaluation; `frame(i)` yields per-step views."""

    robot_id: int
    species: str
    command_text: str
    command_code: float
    color: str
    trajectory: np.ndarray  # (steps, 3) root positions, post-step
    joint_angles: np.ndarray  # (steps, n_joints) radians
    touch: np.ndarray  # (steps, n_touch) uint8
    eye_distances: np.ndarray  # (steps, n_eyes) meters, capped at range
    motors: np.ndarray  # (steps, n_motors) commanded values
    species_checksum: str = ""

    @property
    def n_frames(self) -> int:
        return self.trajectory.shape[0]

    @property
    def head_positions(self) -> np.ndarray:
        return self.trajectory + species_arrays(self.species).head_local

    def frame(self, i: int) -> SensorFrame:
        return SensorFrame(
            touch=self.touch[i],
            proprioception=self.joint_angles[i],
            head_position=self.head_positions[i],
            eye_distances=self.eye_distances[i],
            motors=self.motors[i],
        )

    def to_npz(self, path) -> None:
        np.savez_compressed(
            path,
            robot_id=self.robot_id,
            species=self.species,
            command_text=self.command_text,
            command_code=self.command_code,
            color=self.color,
            trajectory=self.trajectory,
            joint_angles=self.joint_angles,
            touch=self.touch,
            eye_distances=self.eye_distances,
            motors=self.motors,
            species_checksum=self.species_checksum,
        )

    @staticmethod
    def from_npz(path) -> "EvaluationTrace":
        with np.load(path, allow_pickle=False) as z:
            return EvaluationTrace(
                robot_id=int(z["robot_id"]),
                species=str(z["species"]),
                command_text=str(z["command_text"]),
                command_code=float(z["command_code"]),
                color=str(z["color"]),
                trajectory=z["trajectory"],
                joint_angles=z["joint_angles"],
                touch=z["touch"],
                eye_distances=z["eye_distances"],
                motors=z["motors"],
                species_checksum=str(z["species_checksum"]),
            )

    def debug_text(self, stride: int = SAMPLE_STRIDE) -> str:
        lines = [
            f"# robot={self.robot_id} species={self.species} "
            f"command={self.command_text!r} code={self.command_code!r} "
            f"color={self.color} table={self.species_checksum[:12]}",
            "# step root_x root_y root_z joints...",
        ]
        for i in range(0, self.n_frames, stride):
            r = self.trajectory[i]
            js = " ".join(f"{a:.6f}" for a in self.joint_angles[i])
            lines.append(f"{i} {r[0]:.6f} {r[1]:.6f} {r[2]:.6f} {js}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# jit kernel


@njit(cache=True)
def _fk(parent, anchor, mount, axis, joint_of_seg, theta, root, R, O):
    n_seg = parent.shape[0]
    rod = np.empty((3, 3))
    tmp = np.empty((3, 3))
    for i in range(n_seg):
        j = joint_of_seg[i]
        if j >= 0 and axis[i, 0] == 0.0 and axis[i, 1] == 1.0 and axis[i, 2] == 0.0:
            # every shipped species hinges about local +y; M @ Ry(th) only
            # mixes the mount's first and third columns
            c = np.cos(theta[j])
            s = np.sin(theta[j])
            for r in range(3):
                m0 = mount[i, r, 0]
                m2 = mount[i, r, 2]
                R[i, r, 0] = c * m0 - s * m2
                R[i, r, 1] = mount[i, r, 1]
                R[i, r, 2] = s * m0 + c * m2
            p = parent[i]
        elif j < 0:
            for r in range(3):
                for cidx in range(3):
                    R[i, r, cidx] = mount[i, r, cidx]
            p = parent[i]
        else:
            ax, ay, az = axis[i, 0], axis[i, 1], axis[i, 2]
            th = theta[j]
            c = np.cos(th)
            s = np.sin(th)
            C = 1.0 - c
            rod[0, 0] = c + ax * ax * C
            rod[0, 1] = ax * ay * C - az * s
            rod[0, 2] = ax * az * C + ay * s
            rod[1, 0] = ay * ax * C + az * s
            rod[1, 1] = c + ay * ay * C
            rod[1, 2] = ay * az * C - ax * s
            rod[2, 0] = az * ax * C - ay * s
            rod[2, 1] = az * ay * C + ax * s
            rod[2, 2] = c + az * az * C
            p = parent[i]
            # local rotation = mount @ rod, then compose with the parent frame
            for r in range(3):
                for cidx in range(3):
                    acc = 0.0
                    for k in range(3):
                        acc += mount[i, r, k] * rod[k, cidx]
                    R[i, r, cidx] = acc
        if p >= 0:
            for r in range(3):
                for cidx in range(3):
                    acc = 0.0
                    for k in range(3):
                        acc += R[p, r, k] * R[i, k, cidx]
                    tmp[r, cidx] = acc
            for r in range(3):
                for cidx in range(3):
                    R[i, r, cidx] = tmp[r, cidx]
            for r in range(3):
                acc = 0.0
                for k in range(3):
                    acc += R[p, r, k] * anchor[i, k]
                O[i, r] = O[p, r] + acc
        else:
            for r in range(3):
                O[i, r] = root[r] + anchor[i, r]


@njit(cache=True)
def _contact_world(cp_seg, cp_local, root, R, O, out):
    for c in range(cp_seg.shape[0]):
        s = cp_seg[c]
        if s < 0:
            for r in range(3):
                out[c, r] = root[r] + cp_local[c, r]
        else:
            for r in range(3):
                acc = 0.0
                for k in range(3):
                    acc += R[s, r, k] * cp_local[c, k]
                out[c, r] = O[s, r] + acc


@njit(cache=True)
def _episode(
    parent, anchor, mount, axis, joint_of_seg,
    j_lo, j_hi, cp_seg, cp_local, cp_touch, n_touch,
    head_local, eye_dirs,
    w_in, w_hh, w_out, defaults,
    command, n_steps, warmup, record_full,
    out_traj, out_theta, out_touch, out_eyes, out_motors,
):
    n_seg = parent.shape[0]
    n_joint = defaults.shape[0]
    n_cp = cp_seg.shape[0]
    n_eye = eye_dirs.shape[0]
    n_in = w_in.shape[0]
    n_sensor = n_in - 2
    n_motor = w_out.shape[1]

    theta = defaults.copy()
    root = np.zeros(3)
    vz = 0.0
    hidden = np.zeros(HIDDEN_UNITS)
    R = np.empty((n_seg, 3, 3))
    O = np.empty((n_seg, 3))
    P_prev = np.empty((n_cp, 3))
    P_new = np.empty((n_cp, 3))
    inp = np.empty(n_in)
    motors = np.zeros(n_motor)

    # Rest the lowest contact point on the ground, then warm up.
    _fk(parent, anchor, mount, axis, joint_of_seg, theta, root, R, O)
    _contact_world(cp_seg, cp_local, root, R, O, P_prev)
    mn = P_prev[0, 2]
    for c in range(1, n_cp):
        if P_prev[c, 2] < mn:
            mn = P_prev[c, 2]
    root[2] -= mn
    for c in range(n_cp):
        P_prev[c, 2] -= mn

    span = np.empty(n_joint)
    center = np.empty(n_joint)
    for j in range(n_joint):
        span[j] = 0.5 * (j_hi[j] - j_lo[j])
        center[j] = 0.5 * (j_hi[j] + j_lo[j])
    max_step = OMEGA_MAX * SIM_DT

    total = warmup + n_steps
    for step in range(total):
        recording = step >= warmup
        if recording:
            # Sense the post-previous-step state, then drive the controller.
            for t in range(n_touch):
                inp[t] = 0.0
            for c in range(n_cp):
                tc = cp_touch[c]
                if tc >= 0 and P_prev[c, 2] <= TOUCH_TOL:
                    inp[tc] = 1.0
            k = n_touch
            for j in range(n_joint):
                inp[k] = (theta[j] - center[j]) / span[j]
                k += 1
            hx = root[0] + head_local[0]
            hy = root[1] + head_local[1]
            hz = root[2] + head_local[2]
            inp[k] = np.tanh(hx / 10.0)
            inp[k + 1] = np.tanh(hy / 10.0)
            inp[k + 2] = np.tanh(hz / 10.0)
            k += 3
            for e in range(n_eye):
                dz = eye_dirs[e, 2]
                if dz < -1e-12:
                    t_hit = hz / (-dz)
                    if t_hit > EYE_RANGE:
                        t_hit = EYE_RANGE
                else:
                    t_hit = EYE_RANGE
                inp[k] = t_hit / EYE_RANGE
                k += 1
            inp[n_sensor] = command
            inp[n_sensor + 1] = 1.0

            newh = np.empty(HIDDEN_UNITS)
            for h in range(HIDDEN_UNITS):
                acc = 0.0
                for i in range(n_in):
                    acc += w_in[i, h] * inp[i]
                for i in range(HIDDEN_UNITS):
                    acc += w_hh[i, h] * hidden[i]
                newh[h] = np.tanh(acc)
            for h in range(HIDDEN_UNITS):
                hidden[h] = newh[h]
            for m in range(n_motor):
                acc = 0.0
                for h in range(HIDDEN_UNITS):
                    acc += w_out[h, m] * hidden[h]
                motors[m] = np.tanh(acc)
        else:
            for m in range(n_motor):
                motors[m] = 0.0

        # Joint slew toward targets.
        for j in range(n_joint):
            target = defaults[j] + motors[j] * span[j]
            if target > j_hi[j]:
                target = j_hi[j]
            elif target < j_lo[j]:
                target = j_lo[j]
            d = target - theta[j]
            if d > max_step:
                d = max_step
            elif d < -max_step:
                d = -max_step
            theta[j] += d

        _fk(parent, anchor, mount, axis, joint_of_seg, theta, root, R, O)
        _contact_world(cp_seg, cp_local, root, R, O, P_new)

        n_contact = 0
        n_grip = 0
        dx = 0.0
        dy = 0.0
        for c in range(n_cp):
            if P_prev[c, 2] <= CONTACT_TOL:
                n_contact += 1
                cx = P_new[c, 0] - P_prev[c, 0]
                cy = P_new[c, 1] - P_prev[c, 1]
                if cx * cx + cy * cy <= SLIP_STEP_MAX * SLIP_STEP_MAX:
                    n_grip += 1
                    dx += cx
                    dy += cy
        if n_contact > 0:
            if n_grip > 0:
                dx /= n_grip
                dy /= n_grip
                root[0] -= dx
                root[1] -= dy
                for c in range(n_cp):
                    P_new[c, 0] -= dx
                    P_new[c, 1] -= dy
            vz = 0.0
        else:
            vz -= GRAVITY * SIM_DT
            dzf = vz * SIM_DT
            root[2] += dzf
            for c in range(n_cp):
                P_new[c, 2] += dzf

        mn = P_new[0, 2]
        for c in range(1, n_cp):
            if P_new[c, 2] < mn:
                mn = P_new[c, 2]
        if mn < 0.0:
            root[2] -= mn
            for c in range(n_cp):
                P_new[c, 2] -= mn
            vz = 0.0

        for c in range(n_cp):
            P_prev[c, 0] = P_new[c, 0]
            P_prev[c, 1] = P_new[c, 1]
            P_prev[c, 2] = P_new[c, 2]

        if recording:
            t_rec = step - warmup
            out_traj[t_rec, 0] = root[0]
            out_traj[t_rec, 1] = root[1]
            out_traj[t_rec, 2] = root[2]
            if record_full:
                for j in range(n_joint):
                    out_theta[t_rec, j] = theta[j]
                for t in range(n_touch):
                    out_touch[t_rec, t] = 0
                for c in range(n_cp):
                    tc = cp_touch[c]
                    if tc >= 0 and P_new[c, 2] <= TOUCH_TOL:
                        out_touch[t_rec, tc] = 1
                hz = root[2] + head_local[2]
                for e in range(n_eye):
                    dz = eye_dirs[e, 2]
                    if dz < -1e-12:
                        t_hit = hz / (-dz)
                        if t_hit > EYE_RANGE:
                            t_hit = EYE_RANGE
                    else:
                        t_hit = EYE_RANGE
                    out_eyes[t_rec, e] = t_hit
                for m in range(n_motor):
                    out_motors[t_rec, m] = motors[m]


@njit(cache=True, parallel=True)
def _episode_batch_xy(
    parent, anchor, mount, axis, joint_of_seg,
    j_lo, j_hi, cp_seg, cp_local, cp_touch, n_touch,
    head_local, eye_dirs,
    w_in_b, w_hh_b, w_out_b, defaults_b, command_b,
    n_steps, warmup, out_xy,
):
    B = command_b.shape[0]
    for b in prange(B):
        traj = np.empty((n_steps, 3))
        dummy_theta = np.empty((1, 1))
        dummy_touch = np.empty((1, 1), dtype=np.uint8)
        dummy_eyes = np.empty((1, 1))
        dummy_motors = np.empty((1, 1))
        _episode(
            parent, anchor, mount, axis, joint_of_seg,
            j_lo, j_hi, cp_seg, cp_local, cp_touch, n_touch,
            head_local, eye_dirs,
            w_in_b[b], w_hh_b[b], w_out_b[b], defaults_b[b],
            command_b[b], n_steps, warmup, False,
            traj, dummy_theta, dummy_touch, dummy_eyes, dummy_motors,
        )
        n_samp = (n_steps + SAMPLE_STRIDE - 1) // SAMPLE_STRIDE
        for k in range(n_samp):
            out_xy[b, k, 0] = traj[k * SAMPLE_STRIDE, 0]
            out_xy[b, k, 1] = traj[k * SAMPLE_STRIDE, 1]


# ---------------------------------------------------------------------------
# public operations


def controller_step(genome: RobotGenome, sensor_inputs, command_code: float,
                    hidden_state) -> tuple:
    """One recurrent step: returns (new_hidden, motor_outputs), all in (-1, 1)."""
    sensors = np.asarray(sensor_inputs, dtype=float)
    hidden = np.asarray(hidden_state, dtype=float)
    w_in, w_hh, w_out = genome.controller.w_in, genome.controller.w_hh, genome.controller.w_out
    if sensors.shape != (w_in.shape[0] - 2,):
        raise ValueError(f"expected {w_in.shape[0] - 2} sensor inputs, got {sensors.shape}")
    if hidden.shape != (HIDDEN_UNITS,):
        raise ValueError("hidden state must have length 5")
    x = np.concatenate([sensors, [command_code, 1.0]])
    new_hidden = np.tanh(w_in.T @ x + w_hh.T @ hidden)
    motors = np.tanh(w_out.T @ new_hidden)
    return new_hidden, motors


def sense(state: WorldState, sa: SpeciesArrays) -> np.ndarray:
    """Normalized sensor vector for the controller, from a world state."""
    n_seg = sa.parent.shape[0]
    R = np.empty((n_seg, 3, 3))
    O = np.empty((n_seg, 3))
    _fk(sa.parent, sa.anchor, sa.mount, sa.axis, sa.joint_of_seg,
        state.joint_angles, state.root_position, R, O)
    P = np.empty((sa.cp_seg.shape[0], 3))
    _contact_world(sa.cp_seg, sa.cp_local, state.root_position, R, O, P)
    touch = np.zeros(sa.n_touch)
    for c in range(sa.cp_seg.shape[0]):
        tc = sa.cp_touch[c]
        if tc >= 0 and P[c, 2] <= TOUCH_TOL:
            touch[tc] = 1.0
    center = 0.5 * (sa.j_hi + sa.j_lo)
    span = 0.5 * (sa.j_hi - sa.j_lo)
    proprio = (state.joint_angles - center) / span
    head = state.root_position + sa.head_local
    head_n = np.tanh(head / 10.0)
    eyes = np.empty(sa.eye_dirs.shape[0])
    for e in range(sa.eye_dirs.shape[0]):
        dz = sa.eye_dirs[e, 2]
        t_hit = head[2] / -dz if dz < -1e-12 else EYE_RANGE
        eyes[e] = min(t_hit, EYE_RANGE) / EYE_RANGE
    return np.concatenate([touch, proprio, head_n, eyes])


def physics_step(state: WorldState, motor_outputs, spec_or_name,
                 default_angles=None) -> WorldState:
    """Advance one timestep of the anchor model. Pure, deterministic.

    Motor targets center on `default_angles` (the genome's rest pose); when
    omitted, the species table's canonical rest pose is used.
    """
    sa = species_arrays(spec_or_name.name if isinstance(spec_or_name, SpeciesSpec) else spec_or_name)
    motors = np.clip(np.asarray(motor_outputs, dtype=float), -1.0, 1.0)
    if motors.shape != (sa.n_joint,):
        motors = motors.reshape(sa.n_joint)
    defaults = sa.spec.rest_angles() if default_angles is None else np.asarray(default_angles, dtype=float)
    return _py_physics_step(state, motors, sa, defaults)


def _py_physics_step(state: WorldState, motors, sa: SpeciesArrays,
                     defaults: np.ndarray) -> WorldState:
    n_seg = sa.parent.shape[0]
    span = 0.5 * (sa.j_hi - sa.j_lo)
    target = np.clip(defaults + motors * span, sa.j_lo, sa.j_hi)
    max_step = OMEGA_MAX * SIM_DT
    theta = state.joint_angles + np.clip(target - state.joint_angles, -max_step, max_step)

    R = np.empty((n_seg, 3, 3))
    O = np.empty((n_seg, 3))
    root = state.root_position.astype(float).copy()
    vz = state.root_vertical_velocity

    _fk(sa.parent, sa.anchor, sa.mount, sa.axis, sa.joint_of_seg,
        state.joint_angles, root, R, O)
    P_prev = np.empty((sa.cp_seg.shape[0], 3))
    _contact_world(sa.cp_seg, sa.cp_local, root, R, O, P_prev)

    _fk(sa.parent, sa.anchor, sa.mount, sa.axis, sa.joint_of_seg,
        theta, root, R, O)
    P_new = np.empty((sa.cp_seg.shape[0], 3))
    _contact_world(sa.cp_seg, sa.cp_local, root, R, O, P_new)

    contacts = P_prev[:, 2] <= CONTACT_TOL
    if contacts.any():
        dxy = P_new[contacts, :2] - P_prev[contacts, :2]
        grip = (dxy * dxy).sum(axis=1) <= SLIP_STEP_MAX * SLIP_STEP_MAX
        if grip.any():
            d = dxy[grip].mean(axis=0)
            root[0] -= d[0]
            root[1] -= d[1]
            P_new[:, 0] -= d[0]
            P_new[:, 1] -= d[1]
        vz = 0.0
    else:
        vz -= GRAVITY * SIM_DT
        root[2] += vz * SIM_DT
        P_new[:, 2] += vz * SIM_DT

    mn = P_new[:, 2].min()
    if mn < 0.0:
        root[2] -= mn
        P_new[:, 2] -= mn
        vz = 0.0

    return WorldState(
        root_position=root,
        root_vertical_velocity=vz,
        joint_angles=theta,
        hidden_state=state.hidden_state,
        step_index=state.step_index + 1,
    )


def initial_state(genome: RobotGenome) -> WorldState:
    """Canonical start pose: defaults, root over origin, lowest point resting."""
    sa = species_arrays(genome.species)
    theta = genome.body.default_angles.copy()
    n_seg = sa.parent.shape[0]
    R = np.empty((n_seg, 3, 3))
    O = np.empty((n_seg, 3))
    root = np.zeros(3)
    _fk(sa.parent, sa.anchor, sa.mount, sa.axis, sa.joint_of_seg,
        theta, root, R, O)
    P = np.empty((sa.cp_seg.shape[0], 3))
    _contact_world(sa.cp_seg, sa.cp_local, root, R, O, P)
    root[2] -= P[:, 2].min()
    return WorldState(
        root_position=root,
        root_vertical_velocity=0.0,
        joint_angles=theta,
        hidden_state=np.zeros(HIDDEN_UNITS),
        step_index=0,
    )


def evaluate(genome: RobotGenome, command_code: float, command_text: str = "",
             duration_steps: int = EVAL_STEPS, color: str = "") -> EvaluationTrace:
    """Full evaluation from the canonical start pose. Pure in (genome, code)."""
    sa = species_arrays(genome.species)
    nj, nt, ne, nm = sa.n_joint, sa.n_touch, sa.eye_dirs.shape[0], sa.n_joint
    traj = np.empty((duration_steps, 3))
    theta = np.empty((duration_steps, nj))
    touch = np.zeros((duration_steps, max(nt, 1)), dtype=np.uint8)
    eyes = np.empty((duration_steps, max(ne, 1)))
    motors = np.empty((duration_steps, nm))
    _episode(
        sa.parent, sa.anchor, sa.mount, sa.axis, sa.joint_of_seg,
        sa.j_lo, sa.j_hi, sa.cp_seg, sa.cp_local, sa.cp_touch, nt,
        sa.head_local, sa.eye_dirs,
        genome.controller.w_in, genome.controller.w_hh, genome.controller.w_out,
        genome.body.default_angles,
        float(command_code), duration_steps, WARMUP_STEPS, True,
        traj, theta, touch, eyes, motors,
    )
    return EvaluationTrace(
        robot_id=genome.id,
        species=genome.species,
        command_text=command_text,
        command_code=float(command_code),
        color=color,
        trajectory=traj,
        joint_angles=theta,
        touch=touch[:, :nt],
        eye_distances=eyes[:, :ne],
        motors=motors,
        species_checksum=species_table_checksum(),
    )


def sampled_xy(trace: EvaluationTrace) -> np.ndarray:
    return trace.trajectory[::SAMPLE_STRIDE, :2]


def trajectory_distance(trace_a: EvaluationTrace, trace_b: EvaluationTrace) -> float:
    """Euclidean distance between sampled horizontal trajectories."""
    if trace_a.n_frames != trace_b.n_frames:
        raise ValueError("traces must have equal length")
    da = sampled_xy(trace_a) - sampled_xy(trace_b)
    return float(np.sqrt((da * da).sum()))


def batch_command_response_xy(genomes, commands, duration_steps: int = EVAL_STEPS) -> np.ndarray:
    """Sampled horizontal trajectories for same-species genomes, in parallel.

    Returns (len(genomes), n_samples, 2); genomes[i] runs under commands[i].
    """
    if not genomes:
        return np.zeros((0, 0, 2))
    species = genomes[0].species
    sa = species_arrays(species)
    B = len(genomes)
    n_in = sa.spec.sensor_count + 2
    w_in_b = np.empty((B, n_in, HIDDEN_UNITS))
    w_hh_b = np.empty((B, HIDDEN_UNITS, HIDDEN_UNITS))
    w_out_b = np.empty((B, HIDDEN_UNITS, sa.n_joint))
    defaults_b = np.empty((B, sa.n_joint))
    for i, g in enumerate(genomes):
        if g.species != species:
            raise ValueError("batch must share one species")
        w_in_b[i] = g.controller.w_in
        w_hh_b[i] = g.controller.w_hh
        w_out_b[i] = g.controller.w_out
        defaults_b[i] = g.body.default_angles
    command_b = np.asarray(commands, dtype=float)
    n_samp = (duration_steps + SAMPLE_STRIDE - 1) // SAMPLE_STRIDE
    out = np.empty((B, n_samp, 2))
    _episode_batch_xy(
        sa.parent, sa.anchor, sa.mount, sa.axis, sa.joint_of_seg,
        sa.j_lo, sa.j_hi, sa.cp_seg, sa.cp_local, sa.cp_touch, sa.n_touch,
        sa.head_local, sa.eye_dirs,
        w_in_b, w_hh_b, w_out_b, defaults_b, command_b,
        duration_steps, WARMUP_STEPS, out,
    )
    return out


def segment_endpoints(species: str, root_position, joint_angles) -> np.ndarray:
    """World endpoints (n_seg, 2, 3) for rendering a posed robot."""
    sa = species_arrays(species)
    n_seg = sa.parent.shape[0]
    R = np.empty((n_seg, 3, 3))
    O = np.empty((n_seg, 3))
    _fk(sa.parent, sa.anchor, sa.mount, sa.axis, sa.joint_of_seg,
        np.asarray(joint_angles, dtype=float), np.asarray(root_position, dtype=float), R, O)
    out = np.empty((n_seg, 2, 3))
    for i in range(n_seg):
        out[i, 0] = O[i]
        out[i, 1] = O[i] + R[i, :, 0] * sa.length[i]
    return out
