import math

import numpy as np
import pytest

from crowdbots.morphology import random_genome
from crowdbots.simulation import evaluate
from crowdbots.synthcrowd import (
    BUILTIN_CONFIGS,
    OracleConfig,
    head_displacement,
    load_config,
    obeyed,
    oracle_votes,
)


def trace_with_displacement(d, seed=3):
    g = random_genome("snakebot", seed)
    t = evaluate(g, 0.2, "move", color="red")
    t.trajectory = np.zeros_like(t.trajectory)
    t.trajectory[:, 0] = np.linspace(0.0, d, t.n_frames)
    return t


def test_config_validation():
    with pytest.raises(ValueError):
        OracleConfig(noise_rate=0.5)
    with pytest.raises(ValueError):
        OracleConfig(displacement_threshold=0.0)
    with pytest.raises(ValueError):
        OracleConfig(votes_min=3, votes_max=2)


def test_config_roundtrip(tmp_path):
    cfg = OracleConfig(noise_rate=0.1, command_schedule=("move",))
    p = tmp_path / "oracle.json"
    p.write_text(cfg.to_json())
    back = load_config(str(p))
    assert back == cfg
    assert load_config("default") == BUILTIN_CONFIGS["default"]


def test_stationary_robot_obeys_stop():
    t = trace_with_displacement(0.0)
    cfg = OracleConfig(noise_rate=0.0)
    assert obeyed(t, "stop", cfg) is True
    assert obeyed(t, "move", cfg) is False
    votes = oracle_votes(t, "stop", cfg)
    assert votes and all(v.endswith("y") or v.endswith("l") for v in votes)


def test_mover_obeys_move():
    t = trace_with_displacement(2.0)
    cfg = OracleConfig(noise_rate=0.0)
    assert obeyed(t, "move", cfg) is True
    votes = [v for v in oracle_votes(t, "move", cfg) if v[-1] in "yn"]
    assert votes and all(v.endswith("y") for v in votes)
    assert all(v.startswith("!r") for v in votes)  # red evaluation


def test_unscheduled_command_no_votes():
    t = trace_with_displacement(2.0)
    assert oracle_votes(t, "dance", OracleConfig()) == []


def test_votes_deterministic_per_trace_and_config():
    t = trace_with_displacement(1.0)
    cfg = OracleConfig(seed=5)
    assert oracle_votes(t, "move", cfg) == oracle_votes(t, "move", cfg)
    t2 = trace_with_displacement(1.0001)
    assert oracle_votes(t2, "move", cfg) != [] and (
        oracle_votes(t2, "move", cfg) == oracle_votes(t2, "move", cfg)
    )


def test_head_displacement_uses_retained_frames():
    t = trace_with_displacement(1.0)
    # the head column the critic sees ends at step 1782
    want = t.trajectory[1782, 0] - t.trajectory[0, 0]
    assert head_displacement(t) == pytest.approx(want)


def test_noise_flip_fraction_within_binomial_bounds():
    eps = 0.1
    cfg = OracleConfig(noise_rate=0.5 - eps, votes_min=1, votes_max=1, like_rate=0.0)
    flips = 0
    total = 0
    for seed in range(400):
        t = trace_with_displacement(2.0, seed=seed % 7)
        t.robot_id = seed  # vary the vote stream
        for v in oracle_votes(t, "move", cfg):
            total += 1
            if v.endswith("n"):
                flips += 1
    p = 0.5 - eps
    sigma = math.sqrt(total * p * (1 - p))
    assert abs(flips - total * p) <= 3 * sigma


def test_noise_monotonicity_closed_form():
    # per-evaluation label-flip probability never decreases with the noise rate
    def label_flip_prob(rho, k):
        # o flips sign when more than half the k votes flip; exactly half
        # yields o=0 (excluded), count as half weight for monotonicity
        total = 0.0
        for f in range(k + 1):
            pf = math.comb(k, f) * rho**f * (1 - rho) ** (k - f)
            if 2 * f > k:
                total += pf
        return total

    for k in (1, 2, 3, 4, 5):
        prev = -1.0
        for rho in np.linspace(0.0, 0.49, 25):
            q = label_flip_prob(rho, k)
            assert q >= prev - 1e-12
            prev = q


def test_noise_free_labels_recoverable_from_features(tmp_path):
    # with zero noise the label is a function of the feature matrix: the head
    # columns recover net displacement, and a 1-NN on that scalar is perfect
    from crowdbots.critic.features import build_dataset, read_dataset_rows
    from crowdbots.orchestrator import SessionConfig, run_session

    cfg = SessionConfig(
        seed=14, inject_every=0, generations_per_cycle=0,
        oracle=OracleConfig(seed=14, noise_rate=0.0),
    )
    out = tmp_path / "clean"
    run_session(cfg, ticks=500, out_dir=out)
    checked = 0
    for tsv in sorted((out / "datasets").glob("*.tsv")):
        rows = read_dataset_rows(tsv)
        try:
            ds = build_dataset(rows, rows[0].species, rng_seed=1, n_per_class=12)
        except Exception:
            continue
        disp = np.hypot(
            ds.X[:, -1, 1] - ds.X[:, 0, 1], ds.X[:, -1, 2] - ds.X[:, 0, 2]
        )
        rng = np.random.default_rng(0)
        order = rng.permutation(len(disp))
        train, test = order[: len(order) // 2], order[len(order) // 2:]
        hits = 0
        for i in test:
            nn = train[np.abs(disp[train] - disp[i]).argmin()]
            hits += np.sign(ds.y[nn]) == np.sign(ds.y[i])
        assert hits == len(test), f"{tsv.stem}: 1-NN not perfect at zero noise"
        checked += 1
    assert checked >= 1


def test_starved_config_yields_no_positives():
    cfg = BUILTIN_CONFIGS["starved"]
    t = trace_with_displacement(3.0)
    # even a big mover cannot clear a 1e9 threshold, and under "stop" every
    # obedient verdict becomes a negative label after inversion
    assert obeyed(t, "stop", cfg) is True
    votes = [v for v in oracle_votes(t, "stop", cfg) if v[-1] in "yn"]
    assert votes and all(v.endswith("y") for v in votes)
