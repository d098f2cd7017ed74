import json
from pathlib import Path

import numpy as np
import pytest

from crowdbots.morphology import (
    SPECIES_NAMES,
    TREE_SPECIES,
    mutate,
    random_genome,
    species_catalog,
    species_spec,
    species_table_checksum,
    species_table_json,
)

PUBLISHED_SM = {
    "stickbot": (9, 2),
    "twigbot": (17, 6),
    "branchbot": (33, 14),
    "treebot": (65, 30),
    "spherebot": (6, 1),
    "snakebot": (9, 2),
    "tablebot": (13, 4),
    "crabbot": (27, 12),
    "quadruped": (21, 8),
    "starfishbot": (21, 8),
}

TREE_SEGMENTS = {"stickbot": 2, "twigbot": 6, "branchbot": 14, "treebot": 30}


def test_catalog_has_ten_deterministic_species():
    cat = species_catalog()
    assert len(cat) == 10
    assert tuple(s.name for s in cat) == SPECIES_NAMES
    assert species_catalog() is cat  # cached, same list every call


@pytest.mark.parametrize("name", SPECIES_NAMES)
def test_sensor_motor_counts_match_published_pairs(name):
    spec = species_spec(name)
    assert (spec.sensor_count, spec.motor_count) == PUBLISHED_SM[name]


@pytest.mark.parametrize("name,count", sorted(TREE_SEGMENTS.items()))
def test_tree_segment_counts(name, count):
    assert len(species_spec(name).segments) == count


def test_motor_count_equals_hinge_joints():
    for spec in species_catalog():
        hinged = sum(1 for s in spec.segments if s.joint >= 0)
        assert spec.motor_count == hinged == len(spec.joints)


def test_segment_parents_precede_children():
    for spec in species_catalog():
        for i, seg in enumerate(spec.segments):
            assert seg.parent < i


def test_mount_matrices_are_rotations():
    for spec in species_catalog():
        for seg in spec.segments:
            m = np.array(seg.mount).reshape(3, 3)
            assert np.allclose(m @ m.T, np.eye(3), atol=1e-12)
            assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-12)


def test_species_table_file_matches_builders():
    path = Path(__file__).resolve().parents[1] / "src" / "crowdbots" / "data" / "species.json"
    assert path.read_text() == species_table_json()
    doc = json.loads(species_table_json())
    assert len(doc["species"]) == 10


def test_checksum_stable():
    assert species_table_checksum() == species_table_checksum()
    assert len(species_table_checksum()) == 64


def test_random_genome_shapes():
    g = random_genome("snakebot", 11)
    assert g.controller.w_in.shape == (11, 5)
    assert g.controller.w_hh.shape == (5, 5)
    assert g.controller.w_out.shape == (5, 2)
    q = random_genome("quadruped", 3)
    assert q.controller.w_out.shape == (5, 8)


def test_random_genome_deterministic():
    a = random_genome("treebot", 42)
    b = random_genome("treebot", 42)
    assert np.array_equal(a.controller.w_in, b.controller.w_in)
    assert np.array_equal(a.controller.w_hh, b.controller.w_hh)
    assert np.array_equal(a.controller.w_out, b.controller.w_out)
    assert np.array_equal(a.body.default_angles, b.body.default_angles)


def test_random_genome_weights_in_range_and_valid():
    for name in SPECIES_NAMES:
        g = random_genome(name, 5, robot_id=9)
        g.validate()
        for w in (g.controller.w_in, g.controller.w_hh, g.controller.w_out):
            assert np.abs(w).max() <= 1.0


def test_unknown_species_rejected():
    with pytest.raises(KeyError):
        random_genome("gerbilbot", 1)


def test_mutate_changes_at_least_one_parameter():
    g = random_genome("stickbot", 1, robot_id=4)
    child = mutate(g, 2, child_id=5)
    assert child.id == 5 and child.lineage == 4
    diff = (
        not np.array_equal(child.controller.w_in, g.controller.w_in)
        or not np.array_equal(child.controller.w_hh, g.controller.w_hh)
        or not np.array_equal(child.controller.w_out, g.controller.w_out)
        or not np.array_equal(child.body.default_angles, g.body.default_angles)
    )
    assert diff


def test_mutate_deterministic():
    g = random_genome("twigbot", 3)
    a = mutate(g, 77, child_id=1)
    b = mutate(g, 77, child_id=1)
    assert np.array_equal(a.controller.w_in, b.controller.w_in)
    assert np.array_equal(a.body.default_angles, b.body.default_angles)


def test_mutate_never_touches_non_tree_bodies():
    for name in SPECIES_NAMES:
        if name in TREE_SPECIES:
            continue
        g = random_genome(name, 8)
        for seed in range(20):
            child = mutate(g, seed)
            assert np.array_equal(child.body.default_angles, g.body.default_angles)


def test_mutation_chain_stays_valid():
    # closure over validity: long chains only produce valid genomes
    for name in ("treebot", "spherebot"):
        g = random_genome(name, 0, robot_id=0)
        for i in range(1000):
            g = mutate(g, i, child_id=i + 1)
        g.validate()


def test_forced_mutation_when_clamping_swallows_noise():
    # all weights pinned at +1: most perturbations clamp back, yet mutate
    # must still change something
    g = random_genome("spherebot", 1)
    pinned = type(g)(
        id=g.id, species=g.species, body=g.body,
        controller=type(g.controller)(
            np.ones_like(g.controller.w_in),
            np.ones_like(g.controller.w_hh),
            np.ones_like(g.controller.w_out),
        ),
        lineage=None,
    )
    for seed in range(10):
        child = mutate(pinned, seed)
        same = (
            np.array_equal(child.controller.w_in, pinned.controller.w_in)
            and np.array_equal(child.controller.w_hh, pinned.controller.w_hh)
            and np.array_equal(child.controller.w_out, pinned.controller.w_out)
        )
        assert not same
