"""Population experiments with heritable attenuation parameters.

Each generation, agents are paired and play the base two-player game once.
Every agent picks the action with the highest expected utility under its own
gamma, identifying with its partner at a fixed distance. Selection acts on the
raw payoffs agents actually receive, not on their derived utilities.

A run owns its random generator; everything downstream of the seed is
deterministic, so identical configs give bit-identical trajectories.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import TIE_RTOL, expected_utilities, fmt
from .game import Game, paper_pd
from .identity import SenseOfSelf

INITS = ("point", "mix", "uniform")
PAIRINGS = ("random", "assortative")
UPDATES = ("roulette", "moran")


class EvolutionError(ValueError):
    pass


class FitnessAuditError(RuntimeError):
    """Per-agent fitness does not add up to the payoffs of the matches played."""


@dataclass(frozen=True)
class EvolveConfig:
    game: Game = field(default_factory=paper_pd)
    pop_size: int = 100
    generations: int = 200
    init: str = "point"
    gamma: float = 0.0
    # (gamma, fraction) pairs for init="mix"
    mix: tuple[tuple[float, float], ...] = ()
    uniform_low: float = 0.0
    uniform_high: float = 1.0
    pairing: str = "random"
    # probability that a pairing picks the closest-gamma partner instead of a random one
    assortment: float = 0.0
    update: str = "roulette"
    mutation_rate: float = 0.0
    mutation_step: float = 0.05
    distance: float = 1.0
    seed: int = 0
    fitness_epsilon: float = 1e-9
    cooperate: str | None = None
    strata: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.game.n_players != 2:
            raise EvolutionError("the base game must have two players")
        if self.pop_size < 2:
            raise EvolutionError("population size must be at least 2")
        if self.generations < 1:
            raise EvolutionError("generations must be at least 1")
        if not 0 <= self.mutation_rate <= 1:
            raise EvolutionError("mutation rate must lie in [0, 1]")
        if self.mutation_step < 0:
            raise EvolutionError("mutation step must be non-negative")
        if not 0 <= self.assortment <= 1:
            raise EvolutionError("assortment must lie in [0, 1]")
        if not self.distance >= 0:
            raise EvolutionError("identification distance must be non-negative")
        if self.fitness_epsilon <= 0:
            raise EvolutionError("fitness epsilon must be positive")
        if self.init not in INITS:
            raise EvolutionError(f"init must be one of {INITS}")
        if self.pairing not in PAIRINGS:
            raise EvolutionError(f"pairing must be one of {PAIRINGS}")
        if self.update not in UPDATES:
            raise EvolutionError(f"update must be one of {UPDATES}")
        if self.init == "point" and not 0 <= self.gamma <= 1:
            raise EvolutionError("gamma must lie in [0, 1]")
        if self.init == "mix":
            if not self.mix:
                raise EvolutionError("mix initialization needs (gamma, fraction) pairs")
            for g, f in self.mix:
                if not 0 <= g <= 1:
                    raise EvolutionError(f"mix gamma {g} outside [0, 1]")
                if f < 0:
                    raise EvolutionError(f"mix fraction {f} is negative")
            if len({g for g, _ in self.mix}) != len(self.mix):
                raise EvolutionError("mix gammas must be distinct")
            if not math.isclose(math.fsum(f for _, f in self.mix), 1.0, abs_tol=1e-9):
                raise EvolutionError("mix fractions must sum to 1")
        if self.init == "uniform" and not 0 <= self.uniform_low <= self.uniform_high <= 1:
            raise EvolutionError("uniform bounds must satisfy 0 <= low <= high <= 1")
        if self.cooperate is not None and self.cooperate not in self.game.actions[0]:
            raise EvolutionError(f"unknown cooperative action {self.cooperate!r}")

    @property
    def cooperate_index(self) -> int:
        return 0 if self.cooperate is None else self.game.actions[0].index(self.cooperate)

    def anchors(self) -> tuple[float, ...]:
        """Gamma values that label population strata."""
        if self.strata is not None:
            return tuple(sorted(self.strata))
        if self.init == "point":
            return (float(self.gamma),)
        if self.init == "mix":
            return tuple(sorted(float(g) for g, _ in self.mix))
        return tuple(round(0.1 * k, 1) for k in range(11))


@dataclass
class Population:
    gammas: np.ndarray
    rng: np.random.Generator
    generation: int = 0

    def __post_init__(self):
        if len(self.gammas) == 0:
            raise EvolutionError("population is empty")
        if np.any((self.gammas < 0) | (self.gammas > 1)):
            raise EvolutionError("population gammas must lie in [0, 1]")

    def __len__(self):
        return len(self.gammas)


@dataclass(frozen=True)
class Match:
    first: int
    second: int
    outcome: tuple[int, int]
    # whether each side's payoff counts toward its fitness
    credited: tuple[bool, bool] = (True, True)


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    coop_freq: float
    mean_gamma: float
    min_gamma: float
    max_gamma: float
    mean_fitness: float
    total_fitness: float
    stratum_share: tuple[float, ...]
    stratum_fitness: tuple[float, ...]
    matches: tuple[Match, ...] = field(repr=False, default=())


def largest_remainder(total: int, fractions) -> list[int]:
    quotas = [total * f for f in fractions]
    counts = [math.floor(q) for q in quotas]
    order = sorted(range(len(quotas)), key=lambda k: (-(quotas[k] - counts[k]), k))
    for k in order[: total - sum(counts)]:
        counts[k] += 1
    return counts


def init_population(config: EvolveConfig) -> Population:
    rng = np.random.default_rng(config.seed)
    n = config.pop_size
    if config.init == "point":
        gammas = np.full(n, float(config.gamma))
    elif config.init == "mix":
        counts = largest_remainder(n, [f for _, f in config.mix])
        gammas = np.concatenate([np.full(c, float(g)) for (g, _), c in zip(config.mix, counts)])
    else:
        gammas = rng.uniform(config.uniform_low, config.uniform_high, n)
    return Population(gammas, rng)


@functools.lru_cache(maxsize=4096)
def _expected(game: Game, role: int, gamma: float, distance: float) -> tuple[float, ...]:
    me, other = game.players[role], game.players[1 - role]
    sense = SenseOfSelf.including(me, {other: distance}, gamma)
    return tuple(float(e) for e in expected_utilities(game, sense, me))


def choose_action(game: Game, role: int, gamma: float, distance: float, rng: np.random.Generator) -> int:
    """Argmax of expected utility; ties within tolerance go to a uniform draw."""
    e = _expected(game, role, float(gamma), float(distance))
    best = max(e)
    tied = [a for a, v in enumerate(e) if v >= best - TIE_RTOL * game.scale]
    if len(tied) == 1:
        return tied[0]
    return tied[int(rng.integers(len(tied)))]


def _pairs(gammas: np.ndarray, config: EvolveConfig, rng: np.random.Generator) -> list[tuple[int, int]]:
    order = [int(i) for i in rng.permutation(len(gammas))]
    if config.pairing == "random" or config.assortment == 0:
        return [(order[k], order[k + 1]) for k in range(0, len(order) - 1, 2)]
    pool = order
    pairs = []
    while len(pool) >= 2:
        i, rest = pool[0], pool[1:]
        if rng.random() < config.assortment:
            k = min(range(len(rest)), key=lambda m: abs(gammas[rest[m]] - gammas[i]))
        else:
            k = int(rng.integers(len(rest)))
        pairs.append((i, rest[k]))
        pool = rest[:k] + rest[k + 1:]
    return pairs


def _play(population: Population, config: EvolveConfig) -> tuple[np.ndarray, np.ndarray, list[Match]]:
    game, rng, g = config.game, population.rng, population.gammas
    n = len(g)
    fitness = np.zeros(n)
    chose = np.zeros(n, dtype=int)
    matches = []
    pairs = _pairs(g, config, rng)
    paired = {i for pair in pairs for i in pair}
    for i, j in pairs:
        ai = choose_action(game, 0, g[i], config.distance, rng)
        aj = choose_action(game, 1, g[j], config.distance, rng)
        fitness[i] = game.payoffs[ai, aj, 0]
        fitness[j] = game.payoffs[ai, aj, 1]
        chose[i], chose[j] = ai, aj
        matches.append(Match(i, j, (ai, aj)))
    # odd agent out plays one extra match; only its own payoff is credited
    for i in (k for k in range(n) if k not in paired):
        partner = int(rng.choice([k for k in range(n) if k != i]))
        if rng.random() < 0.5:
            ai = choose_action(game, 0, g[i], config.distance, rng)
            ap = choose_action(game, 1, g[partner], config.distance, rng)
            fitness[i] = game.payoffs[ai, ap, 0]
            matches.append(Match(i, partner, (ai, ap), (True, False)))
        else:
            ap = choose_action(game, 0, g[partner], config.distance, rng)
            ai = choose_action(game, 1, g[i], config.distance, rng)
            fitness[i] = game.payoffs[ap, ai, 1]
            matches.append(Match(partner, i, (ap, ai), (False, True)))
        chose[i] = ai
    return fitness, chose, matches


def audit_fitness(game: Game, fitness: np.ndarray, matches) -> float:
    """Sum of credited match payoffs; raises if it disagrees with ``fitness``."""
    credited = math.fsum(
        float(game.payoffs[m.outcome + (side,)])
        for m in matches
        for side in (0, 1)
        if m.credited[side]
    )
    if abs(credited - math.fsum(fitness)) > 1e-9 * max(1.0, abs(credited)):
        raise FitnessAuditError(f"fitness total {math.fsum(fitness)} != credited payoffs {credited}")
    return credited


def strata_of(gammas: np.ndarray, anchors) -> np.ndarray:
    """Index of the nearest anchor for each gamma (lowest anchor on ties)."""
    a = np.asarray(anchors, dtype=float)
    return np.argmin(np.abs(np.asarray(gammas)[:, None] - a[None, :]), axis=1)


def _mutate(gammas: np.ndarray, config: EvolveConfig, rng: np.random.Generator) -> np.ndarray:
    if config.mutation_rate == 0:
        return gammas
    hit = rng.random(len(gammas)) < config.mutation_rate
    steps = rng.uniform(-config.mutation_step, config.mutation_step, len(gammas))
    return np.clip(np.where(hit, gammas + steps, gammas), 0.0, 1.0)


def _select(gammas: np.ndarray, fitness: np.ndarray, config: EvolveConfig,
            rng: np.random.Generator) -> np.ndarray:
    n = len(gammas)
    weights = fitness - fitness.min() + config.fitness_epsilon
    if config.update == "roulette":
        parents = rng.choice(n, size=n, p=weights / weights.sum())
        return _mutate(gammas[parents], config, rng)
    gammas = gammas.copy()
    weights = weights.copy()
    for _ in range(n):
        birth = int(rng.choice(n, p=weights / weights.sum()))
        death = int(rng.integers(n))
        gammas[death] = _mutate(gammas[birth:birth + 1], config, rng)[0]
        weights[death] = weights[birth]
    return gammas


def step(population: Population, config: EvolveConfig) -> tuple[Population, GenerationStats]:
    """Play one generation, record its statistics, then reproduce."""
    g = population.gammas
    fitness, chose, matches = _play(population, config)
    total = audit_fitness(config.game, fitness, matches)
    anchors = config.anchors()
    strata = strata_of(g, anchors)
    share, strat_fit = [], []
    for k in range(len(anchors)):
        members = strata == k
        share.append(float(members.mean()))
        strat_fit.append(float(fitness[members].mean()) if members.any() else math.nan)
    stats = GenerationStats(
        generation=population.generation,
        coop_freq=float(np.mean(chose == config.cooperate_index)),
        mean_gamma=float(g.mean()),
        min_gamma=float(g.min()),
        max_gamma=float(g.max()),
        mean_fitness=float(fitness.mean()),
        total_fitness=total,
        stratum_share=tuple(share),
        stratum_fitness=tuple(strat_fit),
        matches=tuple(matches),
    )
    offspring = _select(g, fitness, config, population.rng)
    return Population(offspring, population.rng, population.generation + 1), stats


@dataclass(frozen=True)
class Trajectory:
    anchors: tuple[float, ...]
    records: tuple[GenerationStats, ...]
    final: Population = field(repr=False, compare=False)

    def final_shares(self) -> tuple[float, ...]:
        strata = strata_of(self.final.gammas, self.anchors)
        return tuple(float(np.mean(strata == k)) for k in range(len(self.anchors)))

    def to_csv(self) -> str:
        head = ["generation", "coop_freq", "mean_gamma", "min_gamma", "max_gamma", "mean_fitness"]
        for a in self.anchors:
            head += [f"share[{fmt(a)}]", f"fitness[{fmt(a)}]"]
        lines = [",".join(head)]
        for r in self.records:
            row = [str(r.generation)] + [fmt(v) for v in (
                r.coop_freq, r.mean_gamma, r.min_gamma, r.max_gamma, r.mean_fitness)]
            for s, f in zip(r.stratum_share, r.stratum_fitness):
                row += [fmt(s), "" if math.isnan(f) else fmt(f)]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def run(config: EvolveConfig) -> Trajectory:
    population = init_population(config)
    records = []
    for _ in range(config.generations):
        population, stats = step(population, config)
        records.append(stats)
    return Trajectory(config.anchors(), tuple(records), population)


@dataclass(frozen=True)
class InvasionResult:
    resident_gamma: float
    invader_gamma: float
    initial_invader_share: float
    final_resident_share: float
    final_invader_share: float
    invaders_grew: bool
    trajectory: Trajectory = field(repr=False)

    def _index(self, gamma: float) -> int:
        return self.trajectory.anchors.index(gamma)

    def fitness_trajectory(self) -> tuple[list[float], list[float]]:
        """Per-generation mean fitness of residents and invaders."""
        r, i = self._index(self.resident_gamma), self._index(self.invader_gamma)
        recs = self.trajectory.records
        return [s.stratum_fitness[r] for s in recs], [s.stratum_fitness[i] for s in recs]

    def summary(self) -> str:
        return "\n".join([
            f"resident gamma: {fmt(self.resident_gamma)}",
            f"invader gamma: {fmt(self.invader_gamma)}",
            f"generations: {len(self.trajectory.records)}",
            f"initial invader share: {fmt(self.initial_invader_share)}",
            f"final resident share: {fmt(self.final_resident_share)}",
            f"final invader share: {fmt(self.final_invader_share)}",
            f"share total: {fmt(self.final_resident_share + self.final_invader_share)}",
            f"invaders grew: {'yes' if self.invaders_grew else 'no'}",
        ]) + "\n"


def invasion_experiment(resident_gamma: float, invader_gamma: float, invader_fraction: float,
                        config: EvolveConfig) -> InvasionResult:
    """Seed a resident population with a minority of invaders and track both strata."""
    if not 0 < invader_fraction < 1:
        raise EvolutionError("invader fraction must lie strictly between 0 and 1")
    if resident_gamma == invader_gamma:
        raise EvolutionError("resident and invader gammas must differ")
    for g in (resident_gamma, invader_gamma):
        if not 0 <= g <= 1:
            raise EvolutionError(f"gamma {g} outside [0, 1]")
    config = replace(
        config,
        init="mix",
        mix=((float(resident_gamma), 1 - invader_fraction), (float(invader_gamma), invader_fraction)),
        strata=None,
    )
    traj = run(config)
    anchors = traj.anchors
    r, i = anchors.index(float(resident_gamma)), anchors.index(float(invader_gamma))
    initial = traj.records[0].stratum_share[i]
    shares = traj.final_shares()
    return InvasionResult(
        resident_gamma=float(resident_gamma),
        invader_gamma=float(invader_gamma),
        initial_invader_share=initial,
        final_resident_share=shares[r],
        final_invader_share=shares[i],
        invaders_grew=shares[i] > initial,
        trajectory=traj,
    )
