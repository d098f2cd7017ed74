import numpy as np
import pytest

from crowdbots.evolution import (
    PRIMARY_SIZE,
    RobotRecord,
    SecondarySubpop,
    dominates,
    hill_climb_generation,
    init_primary,
    init_secondary,
    inject,
    secondary_fitness,
    tournament,
)
from crowdbots.morphology import ControllerGenome, BodyGenome, RobotGenome, random_genome, species_spec


def rec(pop=0, ob=0, ev=0, rid=0, species="snakebot"):
    g = random_genome(species, rid, robot_id=rid)
    r = RobotRecord(genome=g)
    r.likes, r.yeses, r.evaluations = pop, ob, ev
    return r


class Counter:
    def __init__(self, start=1000):
        self.v = start

    def __call__(self):
        self.v += 1
        return self.v


# -- dominance -------------------------------------------------------------------


def test_dominates_direct_rule():
    assert dominates(rec(3, 5, 10, 1), rec(2, 4, 10, 2))


def test_equal_records_do_not_dominate():
    a, b = rec(2, 2, 5, 1), rec(2, 2, 5, 2)
    assert not dominates(a, b) and not dominates(b, a)


def test_more_evaluations_blocks_dominance():
    assert not dominates(rec(3, 5, 11, 1), rec(2, 4, 10, 2))


def test_dominance_irreflexive_asymmetric_random():
    rng = np.random.default_rng(0)
    base = random_genome("snakebot", 0)
    for _ in range(3000):
        a = RobotRecord(genome=base)
        b = RobotRecord(genome=base)
        a.likes, a.dislikes, a.yeses, a.nos, a.evaluations = rng.integers(-5, 6, 5) + 5
        b.likes, b.dislikes, b.yeses, b.nos, b.evaluations = rng.integers(-5, 6, 5) + 5
        assert not dominates(a, a)
        assert not (dominates(a, b) and dominates(b, a))


# -- tournament -------------------------------------------------------------------


def make_primary(rng):
    nid = Counter(0)
    return init_primary(rng, nid), nid


def test_tournament_tie_changes_nothing():
    rng = np.random.default_rng(1)
    members, nid = make_primary(rng)
    before = [m.genome.id for m in members]
    out = tournament(members, np.random.default_rng(2), exclude_id=None, next_id=nid, tick=3)
    assert not out.changed
    assert [m.genome.id for m in members] == before


def test_tournament_dominance_replaces_loser():
    rng = np.random.default_rng(1)
    members, nid = make_primary(rng)
    # make member 0 dominate everyone
    members[0].likes = members[0].yeses = 100
    out = None
    trng = np.random.default_rng(5)
    while out is None or not out.changed:
        out = tournament(members, trng, exclude_id=None, next_id=nid, tick=9)
    assert len(members) == PRIMARY_SIZE
    child = next(m for m in members if m.genome.id == out.child_id)
    assert child.genome.lineage == out.winner_id
    assert child.yeses == child.nos == child.likes == child.dislikes == 0
    assert child.evaluations == 0 and child.born_tick == 9


def test_tournament_excludes_on_screen_robot():
    rng = np.random.default_rng(1)
    members, nid = make_primary(rng)
    members[0].likes = members[0].yeses = 100
    onscreen = members[0].genome.id
    # member 0 dominates everything, but as on-screen it must never compete
    trng = np.random.default_rng(0)
    for _ in range(300):
        out = tournament(members, trng, exclude_id=onscreen, next_id=nid, tick=1)
        assert out.winner_id != onscreen
        assert not out.changed or out.loser_id != onscreen


def test_tournament_preserves_size():
    rng = np.random.default_rng(3)
    members, nid = make_primary(rng)
    trng = np.random.default_rng(4)
    for m in members[:10]:
        m.likes = m.yeses = int(trng.integers(0, 10))
    for _ in range(200):
        tournament(members, trng, exclude_id=None, next_id=nid, tick=0)
        assert len(members) == PRIMARY_SIZE


# -- secondary fitness ---------------------------------------------------------------


def test_command_blind_genome_has_zero_fitness():
    g = random_genome("tablebot", 55)
    w_in = g.controller.w_in.copy()
    w_in[-2, :] = 0.0
    blind = RobotGenome(1, "tablebot", g.body,
                        ControllerGenome(w_in, g.controller.w_hh, g.controller.w_out))
    assert secondary_fitness(blind) == 0.0


def test_fitness_nonnegative():
    for s in range(5):
        assert secondary_fitness(random_genome("spherebot", s)) >= 0.0


def test_phase_flip_genome_matches_scripted_oracle():
    # command feeds a motor directly; +1 and -1 drive mirrored gaits
    from oracles import scripted_episode

    spec = species_spec("snakebot")
    n_in = spec.sensor_count + 2
    w_in = np.zeros((n_in, 5))
    w_in[-2, 0] = 1.0  # command -> hidden 0
    w_in[-1, 1] = 0.8  # bias -> hidden 1
    w_hh = np.zeros((5, 5))
    w_hh[1, 1] = -0.95
    w_out = np.zeros((5, 2))
    w_out[0, 0] = 1.0
    w_out[1, 1] = 1.0
    g = RobotGenome(0, "snakebot", BodyGenome(spec.rest_angles()),
                    ControllerGenome(w_in, w_hh, w_out))
    fit = secondary_fitness(g)

    roots = {}
    for cmd in (1.0, -1.0):
        roots[cmd] = scripted_episode(
            "snakebot", w_in.tolist(), w_hh.tolist(), w_out.tolist(),
            [0.0, 0.0], cmd, 1800)
    acc = 0.0
    for k in range(0, 1800, 18):
        dx = roots[1.0][k][0] - roots[-1.0][k][0]
        dy = roots[1.0][k][1] - roots[-1.0][k][1]
        acc += dx * dx + dy * dy
    assert fit == pytest.approx(np.sqrt(acc), abs=1e-9)


# -- hill climber -----------------------------------------------------------------


def fake_fitness(values):
    table = {}

    def fn(genomes):
        return np.array([table.setdefault(g.id, values.pop(0) if values else 0.0)
                         for g in genomes])

    return fn


def test_equal_fitness_keeps_parent():
    rng = np.random.default_rng(0)
    genomes = [random_genome("snakebot", i, robot_id=i) for i in range(4)]
    sub = SecondarySubpop("snakebot", list(genomes), np.array([1.0, 1.0, 1.0, 1.0]))
    const = lambda gs: np.ones(len(gs))  # children tie exactly
    replaced = hill_climb_generation(sub, rng, Counter(), fitness_batch=const)
    assert replaced == 0
    assert [g.id for g in sub.genomes] == [g.id for g in genomes]


def test_strict_improvement_replaces():
    rng = np.random.default_rng(0)
    genomes = [random_genome("snakebot", i, robot_id=i) for i in range(3)]
    sub = SecondarySubpop("snakebot", list(genomes), np.zeros(3))
    better = lambda gs: np.full(len(gs), 2.0)
    replaced = hill_climb_generation(sub, rng, Counter(), fitness_batch=better)
    assert replaced == 3
    assert (sub.fitness == 2.0).all()
    assert all(g.id > 1000 for g in sub.genomes)


def test_lineage_fitness_monotone():
    rng = np.random.default_rng(5)
    genomes = [random_genome("spherebot", i, robot_id=i) for i in range(6)]

    def noisy(gs):
        return np.array([abs(hash((g.id, 13))) % 1000 / 1000.0 for g in gs])

    sub = SecondarySubpop("spherebot", list(genomes), noisy(genomes))
    history = [sub.fitness.copy()]
    for _ in range(50):
        hill_climb_generation(sub, rng, Counter(), fitness_batch=noisy)
        history.append(sub.fitness.copy())
        assert len(sub.genomes) == 6
    h = np.array(history)
    assert (np.diff(h, axis=0) >= 0).all()


# -- injection ---------------------------------------------------------------------


def fast_const(gs):
    return np.zeros(len(gs))


def test_inject_replaces_min_evaluations():
    rng = np.random.default_rng(2)
    nid = Counter(0)
    secondary = init_secondary(rng, nid, fitness_batch=fast_const)
    primary = init_primary(rng, nid)
    for i, m in enumerate(primary):
        m.evaluations = 5 + i
    primary[17].evaluations = 1  # unique minimum
    out = inject(secondary, primary, np.random.default_rng(3), nid, tick=120,
                 fitness_batch=fast_const)
    assert primary[17].genome.id == out.injected_id
    assert primary[17].evaluations == 0 and primary[17].born_tick == 120
    assert secondary.size() == 200
    assert len(primary) == PRIMARY_SIZE


def test_inject_tie_break_uniform_among_minima():
    rng = np.random.default_rng(2)
    nid = Counter(0)
    secondary = init_secondary(rng, nid, fitness_batch=fast_const)
    hits = set()
    for seed in range(40):
        primary = init_primary(np.random.default_rng(1), Counter(10_000))
        for m in primary:
            m.evaluations = 9
        for idx in (3, 20, 41):
            primary[idx].evaluations = 0
        before = {i: primary[i].genome.id for i in (3, 20, 41)}
        inject(secondary, primary, np.random.default_rng(seed), nid, tick=1,
               fitness_batch=fast_const)
        for i in (3, 20, 41):
            if primary[i].genome.id != before[i]:
                hits.add(i)
    assert hits == {3, 20, 41}


def test_inject_refills_same_species():
    rng = np.random.default_rng(7)
    nid = Counter(0)
    secondary = init_secondary(rng, nid, fitness_batch=fast_const)
    primary = init_primary(rng, nid)
    before = {name: [g.id for g in secondary.subpops[name].genomes]
              for name in secondary.subpops}
    out = inject(secondary, primary, np.random.default_rng(8), nid, tick=1,
                 fitness_batch=fast_const)
    sub = secondary.subpops[out.species]
    slot = before[out.species].index(out.injected_id)
    assert sub.genomes[slot].id == out.refill_id
    assert sub.genomes[slot].species == out.species


def test_population_sizes_invariant():
    rng = np.random.default_rng(4)
    nid = Counter(0)
    secondary = init_secondary(rng, nid, fitness_batch=fast_const)
    primary = init_primary(rng, nid)
    assert len(primary) == 50
    assert secondary.size() == 200
    species_counts = {}
    for m in primary:
        species_counts[m.genome.species] = species_counts.get(m.genome.species, 0) + 1
    assert all(v == 5 for v in species_counts.values())
