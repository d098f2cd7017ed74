"""Independent oracles used by the tests.

The scripted episode below re-implements the documented anchor model in plain
scalar Python, reading geometry straight from the canonical species table
file. It shares no code with the production simulator, so agreement between
the two is a real check rather than a tautology.
"""

import json
import math
from pathlib import Path

SPECIES_TABLE = Path(__file__).resolve().parents[1] / "src" / "crowdbots" / "data" / "species.json"

DT = 0.05
OMEGA = 2.0
G = 9.8
SLIP = 0.02
CONTACT_TOL = 1e-9
TOUCH_TOL = 1e-6
EYE_RANGE = 20.0


def load_species_doc(name):
    doc = json.loads(SPECIES_TABLE.read_text())
    for sp in doc["species"]:
        if sp["name"] == name:
            return sp
    raise KeyError(name)


def _mat_vec(m, v):
    return [
        m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
        m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
        m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
    ]


def _mat_mat(a, b):
    out = [0.0] * 9
    for r in range(3):
        for c in range(3):
            out[3 * r + c] = sum(a[3 * r + k] * b[3 * k + c] for k in range(3))
    return out


def _rodrigues(axis, th):
    x, y, z = axis
    c, s = math.cos(th), math.sin(th)
    C = 1.0 - c
    return [
        c + x * x * C, x * y * C - z * s, x * z * C + y * s,
        y * x * C + z * s, c + y * y * C, y * z * C - x * s,
        z * x * C - y * s, z * y * C + x * s, c + z * z * C,
    ]


def _contact_points_world(sp, root, theta):
    """All contact points, in table order (root contact first when present)."""
    n_seg = len(sp["segments"])
    R = [None] * n_seg
    O = [None] * n_seg
    axis_by_seg = {}
    for j in sp["joints"]:
        axis_by_seg[j["segment"]] = j["axis"]
    for i, seg in enumerate(sp["segments"]):
        j = seg["joint"]
        rot = _rodrigues(axis_by_seg[i], theta[j]) if j >= 0 else [1, 0, 0, 0, 1, 0, 0, 0, 1]
        local = _mat_mat(seg["mount"], rot)
        p = seg["parent"]
        if p < 0:
            R[i] = local
            O[i] = [root[k] + seg["anchor"][k] for k in range(3)]
        else:
            R[i] = _mat_mat(R[p], local)
            off = _mat_vec(R[p], seg["anchor"])
            O[i] = [O[p][k] + off[k] for k in range(3)]
    pts = []
    owners = []
    if sp["root_contact"]:
        pts.append(list(root))
        owners.append(-1)
    for i, seg in enumerate(sp["segments"]):
        for c in seg["contacts"]:
            w = _mat_vec(R[i], c)
            pts.append([O[i][k] + w[k] for k in range(3)])
            owners.append(i)
    return pts, owners


def scripted_episode(name, w_in, w_hh, w_out, defaults, command, n_steps, warmup=50):
    """Returns per-recorded-step root positions (list of [x, y, z])."""
    sp = load_species_doc(name)
    n_joint = len(sp["joints"])
    lo = [j["lo"] for j in sp["joints"]]
    hi = [j["hi"] for j in sp["joints"]]
    span = [(h - l) / 2.0 for l, h in zip(lo, hi)]
    center = [(h + l) / 2.0 for l, h in zip(lo, hi)]
    touch_of_seg = [seg["touch_channel"] for seg in sp["segments"]]
    n_touch = sum(1 for t in touch_of_seg if t >= 0)
    head_local = sp["head_local"]
    eye_dirs = sp["eye_dirs"]
    n_in = len(w_in)
    n_sensor = n_in - 2
    hiddens = [0.0] * 5

    theta = list(defaults)
    root = [0.0, 0.0, 0.0]
    pts, owners = _contact_points_world(sp, root, theta)
    mn = min(p[2] for p in pts)
    root[2] -= mn
    prev = [[p[0], p[1], p[2] - mn] for p in pts]
    vz = 0.0

    out = []
    for step in range(warmup + n_steps):
        recording = step >= warmup
        if recording:
            sensors = [0.0] * n_sensor
            for cidx, owner in enumerate(owners):
                tc = touch_of_seg[owner] if owner >= 0 else -1
                if tc >= 0 and prev[cidx][2] <= TOUCH_TOL:
                    sensors[tc] = 1.0
            for j in range(n_joint):
                sensors[n_touch + j] = (theta[j] - center[j]) / span[j]
            hx = root[0] + head_local[0]
            hy = root[1] + head_local[1]
            hz = root[2] + head_local[2]
            base = n_touch + n_joint
            sensors[base] = math.tanh(hx / 10.0)
            sensors[base + 1] = math.tanh(hy / 10.0)
            sensors[base + 2] = math.tanh(hz / 10.0)
            for e, d in enumerate(eye_dirs):
                t_hit = hz / -d[2] if d[2] < -1e-12 else EYE_RANGE
                sensors[base + 3 + e] = min(t_hit, EYE_RANGE) / EYE_RANGE
            inputs = sensors + [command, 1.0]
            new_h = []
            for h in range(5):
                acc = sum(w_in[i][h] * inputs[i] for i in range(n_in))
                acc += sum(w_hh[k][h] * hiddens[k] for k in range(5))
                new_h.append(math.tanh(acc))
            hiddens = new_h
            motors = [
                math.tanh(sum(w_out[h][m] * hiddens[h] for h in range(5)))
                for m in range(len(w_out[0]))
            ]
        else:
            motors = [0.0] * n_joint

        for j in range(n_joint):
            target = defaults[j] + motors[j] * span[j]
            target = min(max(target, lo[j]), hi[j])
            d = target - theta[j]
            d = min(max(d, -OMEGA * DT), OMEGA * DT)
            theta[j] += d

        pts, owners = _contact_points_world(sp, root, theta)
        grip_dx, grip_dy, n_grip, n_contact = 0.0, 0.0, 0, 0
        for cidx in range(len(pts)):
            if prev[cidx][2] <= CONTACT_TOL:
                n_contact += 1
                cx = pts[cidx][0] - prev[cidx][0]
                cy = pts[cidx][1] - prev[cidx][1]
                if cx * cx + cy * cy <= SLIP * SLIP:
                    n_grip += 1
                    grip_dx += cx
                    grip_dy += cy
        if n_contact > 0:
            if n_grip > 0:
                grip_dx /= n_grip
                grip_dy /= n_grip
                root[0] -= grip_dx
                root[1] -= grip_dy
                for p in pts:
                    p[0] -= grip_dx
                    p[1] -= grip_dy
            vz = 0.0
        else:
            vz -= G * DT
            root[2] += vz * DT
            for p in pts:
                p[2] += vz * DT
        mn = min(p[2] for p in pts)
        if mn < 0.0:
            root[2] -= mn
            for p in pts:
                p[2] -= mn
            vz = 0.0
        prev = pts
        if recording:
            out.append(list(root))
    return out


def naive_joint_feature(joint_angles):
    """Double-loop mean joint delta, then every-18th sampling. No shortcuts."""
    steps = len(joint_angles)
    n = len(joint_angles[0])
    per_step = []
    for t in range(steps):
        acc = 0.0
        for i in range(n):
            prev = joint_angles[t - 1][i] if t > 0 else joint_angles[0][i]
            acc += joint_angles[t][i] - prev
        per_step.append(acc / n)
    return [per_step[t] for t in range(0, steps, 18)]
