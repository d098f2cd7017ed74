"""Primary and secondary robot populations.

The primary population (50 robots) faces the crowd and evolves by dominance
tournaments over popularity/obedience/evaluation-count. The secondary
population (10 species x 20) hill-climbs on command sensitivity, the distance
between a robot's trajectories under command codes +1 and -1, and periodically
injects a robot into the primary population.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .morphology import RobotGenome, SPECIES_NAMES, mutate, random_genome
from .simulation import batch_command_response_xy

PRIMARY_SIZE = 50
PRIMARY_PER_SPECIES = 5
SECONDARY_PER_SPECIES = 20


@dataclass
class RobotRecord:
    genome: RobotGenome
    likes: int = 0
    dislikes: int = 0
    yeses: int = 0
    nos: int = 0
    evaluations: int = 0
    born_tick: int = 0

    @property
    def popularity(self) -> int:
        return self.likes - self.dislikes

    @property
    def obedience(self) -> int:
        return self.yeses - self.nos


def dominates(a: RobotRecord, b: RobotRecord) -> bool:
    """Strictly better popularity and obedience with no more evaluations."""
    return (
        a.popularity > b.popularity
        and a.obedience > b.obedience
        and a.evaluations <= b.evaluations
    )


@dataclass
class TournamentOutcome:
    changed: bool
    winner_id: Optional[int] = None
    loser_id: Optional[int] = None
    child_id: Optional[int] = None


def tournament(members: list, rng: np.random.Generator, exclude_id: Optional[int],
               next_id: Callable[[], int], tick: int) -> TournamentOutcome:
    """One dominance tournament between two random members.

    The on-screen robot is excluded from selection. When one member dominates,
    a mutated copy of it (fresh counters) replaces the other in place.
    """
    idxs = [i for i, m in enumerate(members) if m.genome.id != exclude_id]
    pick = rng.choice(len(idxs), size=2, replace=False)
    ia, ib = idxs[int(pick[0])], idxs[int(pick[1])]
    a, b = members[ia], members[ib]
    if dominates(a, b):
        win, lose, lose_idx = a, b, ib
    elif dominates(b, a):
        win, lose, lose_idx = b, a, ia
    else:
        return TournamentOutcome(changed=False)
    child_id = next_id()
    child = mutate(win.genome, int(rng.integers(2**63)), child_id=child_id)
    members[lose_idx] = RobotRecord(genome=child, born_tick=tick)
    return TournamentOutcome(
        changed=True, winner_id=win.genome.id, loser_id=lose.genome.id, child_id=child_id
    )


# ---------------------------------------------------------------------------
# Secondary population


def command_sensitivity_batch(genomes: list) -> np.ndarray:
    """Fitness for same-species genomes: trajectory spread across commands +1/-1."""
    if not genomes:
        return np.zeros(0)
    doubled = list(genomes) + list(genomes)
    commands = [1.0] * len(genomes) + [-1.0] * len(genomes)
    xy = batch_command_response_xy(doubled, commands)
    n = len(genomes)
    d = xy[:n] - xy[n:]
    return np.sqrt((d * d).sum(axis=(1, 2)))


def secondary_fitness(genome: RobotGenome) -> float:
    return float(command_sensitivity_batch([genome])[0])


@dataclass
class SecondarySubpop:
    species: str
    genomes: list
    fitness: np.ndarray  # (20,)


@dataclass
class SecondaryPopulation:
    subpops: dict = field(default_factory=dict)  # species -> SecondarySubpop

    def flat_members(self) -> list:
        out = []
        for name in SPECIES_NAMES:
            sp = self.subpops[name]
            out.extend((name, i) for i in range(len(sp.genomes)))
        return out

    def size(self) -> int:
        return sum(len(sp.genomes) for sp in self.subpops.values())


def init_secondary(rng: np.random.Generator, next_id: Callable[[], int],
                   fitness_batch=command_sensitivity_batch) -> SecondaryPopulation:
    pop = SecondaryPopulation()
    for name in SPECIES_NAMES:
        genomes = [
            random_genome(name, int(rng.integers(2**63)), robot_id=next_id())
            for _ in range(SECONDARY_PER_SPECIES)
        ]
        pop.subpops[name] = SecondarySubpop(name, genomes, fitness_batch(genomes))
    return pop


def init_primary(rng: np.random.Generator, next_id: Callable[[], int],
                 tick: int = 0) -> list:
    members = []
    for name in SPECIES_NAMES:
        for _ in range(PRIMARY_PER_SPECIES):
            g = random_genome(name, int(rng.integers(2**63)), robot_id=next_id())
            members.append(RobotRecord(genome=g, born_tick=tick))
    return members


def hill_climb_generation(subpop: SecondarySubpop, rng: np.random.Generator,
                          next_id: Callable[[], int],
                          fitness_batch=command_sensitivity_batch) -> int:
    """Each member breeds one child; strictly fitter children replace parents.

    Returns the number of replacements. Per-lineage fitness never decreases.
    """
    children = [
        mutate(g, int(rng.integers(2**63)), child_id=next_id()) for g in subpop.genomes
    ]
    child_fit = fitness_batch(children)
    replaced = 0
    for i, (child, cf) in enumerate(zip(children, child_fit)):
        if cf > subpop.fitness[i]:
            subpop.genomes[i] = child
            subpop.fitness[i] = cf
            replaced += 1
    return replaced


@dataclass
class InjectionOutcome:
    injected_id: int
    species: str
    replaced_id: int
    refill_id: int


def inject(secondary: SecondaryPopulation, primary: list, rng: np.random.Generator,
           next_id: Callable[[], int], tick: int,
           fitness_batch=command_sensitivity_batch) -> InjectionOutcome:
    """Move one uniformly chosen secondary robot into the primary population.

    It replaces the primary member with the fewest evaluations (uniform
    tie-break); its secondary slot is refilled with a fresh random genome of
    the same species.
    """
    flat = secondary.flat_members()
    species, slot = flat[int(rng.integers(len(flat)))]
    sub = secondary.subpops[species]
    genome = sub.genomes[slot]

    min_ev = min(m.evaluations for m in primary)
    candidates = [i for i, m in enumerate(primary) if m.evaluations == min_ev]
    target = candidates[int(rng.integers(len(candidates)))]
    replaced_id = primary[target].genome.id
    primary[target] = RobotRecord(genome=genome, born_tick=tick)

    refill = random_genome(species, int(rng.integers(2**63)), robot_id=next_id())
    sub.genomes[slot] = refill
    sub.fitness[slot] = fitness_batch([refill])[0]
    return InjectionOutcome(
        injected_id=genome.id, species=species, replaced_id=replaced_id, refill_id=refill.id
    )
