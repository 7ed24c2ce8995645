"""A small generic genetic algorithm.

Chromosomes are tuples of integers in ``[gene_low, gene_high]`` (bits when the
range is ``[0, 1]``). One generation is: evaluate, record, stop check, then
elitism + roulette selection + single-point crossover + gene replacement
mutation for the offspring.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
import random
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Callable, Iterable, Sequence

from .errors import GeneCountMismatch, NegativeObjective, WrongGeneCount, ZeroTotalFitness
from .rng import RngSpec, as_rng

Genes = tuple[int, ...]


@dataclass(frozen=True)
class Chromosome:
    genes: Genes
    fitness: float | None = None

    def __len__(self) -> int:
        return len(self.genes)


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 6
    gene_count: int = 4
    crossover_rate: float = 0.25
    mutation_rate: float = 0.1
    max_generations: int = 1000
    target_fitness: float | None = None
    elitism: int = 1
    gene_low: int = 0
    gene_high: int = 30

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.gene_count < 1:
            raise ValueError("gene_count must be >= 1")
        if not 0.0 <= self.crossover_rate <= 1.0 or not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("rates must lie in [0, 1]")
        if self.max_generations < 0 or self.elitism < 0:
            raise ValueError("max_generations and elitism must be non-negative")
        if self.elitism >= self.population_size:
            raise ValueError("elitism must leave room for offspring")
        if self.gene_low > self.gene_high:
            raise ValueError("empty gene range")

    @property
    def total_genes(self) -> int:
        return self.population_size * self.gene_count

    def mutation_count(self, members: int | None = None) -> int:
        members = self.population_size if members is None else members
        return _round_half_up(self.mutation_rate * members * self.gene_count)


@dataclass
class EvolutionTrace:
    best: list[float] = field(default_factory=list)
    mean: list[float] = field(default_factory=list)
    best_genes: list[Genes] = field(default_factory=list)
    evaluated: list[tuple[Genes, float]] = field(default_factory=list)
    final_population: list[Genes] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.best)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["generation", "best", "mean"])
        for g, (b, m) in enumerate(zip(self.best, self.mean)):
            w.writerow([g, repr(float(b)), repr(float(m))])
        return buf.getvalue()


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


# ---------------------------------------------------------------------------
# worked example: a + 2b + 3c + 4d = 30


def demo_objective(c: Chromosome | Sequence[int]) -> float:
    genes = c.genes if isinstance(c, Chromosome) else tuple(c)
    if len(genes) != 4:
        raise WrongGeneCount(f"expected 4 genes, got {len(genes)}")
    a, b, cc, d = genes
    return float(abs(a + 2 * b + 3 * cc + 4 * d - 30))


def fitness_from_objective(obj: float) -> float:
    if obj < 0 or math.isnan(obj):
        raise NegativeObjective(obj)
    return 1.0 / (1.0 + obj)


def demo_fitness(genes: Sequence[int]) -> float:
    return fitness_from_objective(demo_objective(genes))


# ---------------------------------------------------------------------------
# operators


def roulette_select(fitnesses: Sequence[float], rng: random.Random) -> int:
    """Index drawn with probability proportional to fitness."""
    if len(fitnesses) == 1:
        return 0
    if any(f < 0 for f in fitnesses):
        raise ZeroTotalFitness("fitnesses must be non-negative")
    cum = list(accumulate(fitnesses))
    total = cum[-1]
    if not total > 0:
        raise ZeroTotalFitness("total fitness is zero")
    i = bisect.bisect_right(cum, rng.random() * total)
    # guard the u*total == total float edge and zero-width slots
    i = min(i, len(cum) - 1)
    while fitnesses[i] <= 0:
        i -= 1
    return i


def crossover(
    a: Sequence[int],
    b: Sequence[int],
    rng: random.Random,
    rate: float = 1.0,
    cut: int | None = None,
) -> tuple[Genes, Genes]:
    """Single-point crossover swapping suffixes after ``cut``.

    With probability ``1 - rate`` (or for one-gene chromosomes) the parents are
    returned unchanged.
    """
    a, b = tuple(a), tuple(b)
    if len(a) != len(b):
        raise GeneCountMismatch(f"{len(a)} != {len(b)}")
    if cut is None:
        if len(a) < 2 or rng.random() >= rate:
            return a, b
        cut = rng.randint(1, len(a) - 1)
    elif not 1 <= cut <= len(a) - 1:
        raise ValueError("cut point must lie in [1, gene_count - 1]")
    return a[:cut] + b[cut:], b[:cut] + a[cut:]


def mutate(population: Sequence[Sequence[int]], config: GaConfig, rng: random.Random) -> list[Genes]:
    """Replace ``round(mutation_rate * len(population) * gene_count)`` distinct,
    uniformly chosen gene positions with uniform draws from the gene range."""
    pop = [list(g) for g in population]
    total = len(pop) * config.gene_count
    m = config.mutation_count(len(pop))
    if m:
        for pos in rng.sample(range(total), min(m, total)):
            i, k = divmod(pos, config.gene_count)
            pop[i][k] = rng.randint(config.gene_low, config.gene_high)
    return [tuple(g) for g in pop]


def random_genes(config: GaConfig, rng: random.Random) -> Genes:
    return tuple(rng.randint(config.gene_low, config.gene_high) for _ in range(config.gene_count))


# ---------------------------------------------------------------------------
# main loop


def evolve(
    fitness: Callable[[Genes], float],
    config: GaConfig,
    rng: RngSpec | int | None = None,
    initial: Iterable[Sequence[int]] = (),
    repair: Callable[[Genes, random.Random], Genes] | None = None,
    map_fn: Callable[[Callable, list], Iterable] = map,
) -> tuple[Chromosome, EvolutionTrace]:
    """Maximise ``fitness`` over chromosomes.

    ``initial`` members are injected into generation 0 (truncated to the
    population size) and the rest drawn at random. ``fitness`` must be a pure
    function of the genes; results are memoised per run and ``map_fn`` may
    evaluate a generation concurrently. Stops after ``max_generations``
    breeding rounds or as soon as the best fitness reaches ``target_fitness``.
    """
    rng = as_rng(rng)
    cfg = config
    pop: list[Genes] = []
    for g in initial:
        g = tuple(int(x) for x in g)
        if len(g) != cfg.gene_count:
            raise GeneCountMismatch(f"seed member has {len(g)} genes, expected {cfg.gene_count}")
        if len(pop) < cfg.population_size:
            pop.append(g)
    for i in range(len(pop), cfg.population_size):
        g = random_genes(cfg, rng.stream(0, i))
        if repair is not None:
            g = repair(g, rng.stream(0, i))
        pop.append(g)

    memo: dict[Genes, float] = {}
    trace = EvolutionTrace()
    best: Chromosome | None = None
    generation = 0
    while True:
        todo = list(dict.fromkeys(g for g in pop if g not in memo))
        for g, f in zip(todo, map_fn(fitness, todo)):
            f = float(f)
            memo[g] = f
            trace.evaluated.append((g, f))
        fits = [memo[g] for g in pop]
        top = max(range(len(pop)), key=lambda i: (fits[i], -i))
        trace.best.append(fits[top])
        trace.mean.append(sum(fits) / len(fits))
        trace.best_genes.append(pop[top])
        if best is None or fits[top] > best.fitness:
            best = Chromosome(pop[top], fits[top])

        if generation >= cfg.max_generations:
            break
        if cfg.target_fitness is not None and best.fitness >= cfg.target_fitness:
            break

        generation += 1
        order = sorted(range(len(pop)), key=lambda i: (-fits[i], i))
        elites = [pop[i] for i in order[: cfg.elitism]]
        weights = [max(f, 1e-12) for f in fits]
        need = cfg.population_size - len(elites)
        offspring: list[Genes] = []
        pair = 0
        while len(offspring) < need:
            r = rng.stream(generation, pair)
            a = pop[roulette_select(weights, r)]
            b = pop[roulette_select(weights, r)]
            offspring.extend(crossover(a, b, r, cfg.crossover_rate))
            pair += 1
        offspring = mutate(offspring[:need], cfg, rng.stream(generation, cfg.population_size))
        if repair is not None:
            r = rng.stream(generation, cfg.population_size + 1)
            offspring = [repair(g, r) for g in offspring]
        pop = elites + offspring

    trace.final_population = list(pop)
    return best, trace
