import math
import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from usability_ga.errors import GeneCountMismatch, NegativeObjective, WrongGeneCount, ZeroTotalFitness
from usability_ga.ga import (
    GaConfig,
    crossover,
    demo_fitness,
    demo_objective,
    evolve,
    fitness_from_objective,
    mutate,
    roulette_select,
)


@pytest.mark.parametrize("genes,obj", [([12, 5, 23, 8], 93), ([7, 5, 3, 1], 0), ([30, 0, 0, 0], 0)])
def test_demo_objective(genes, obj):
    assert demo_objective(genes) == obj


def test_demo_objective_wrong_gene_count():
    with pytest.raises(WrongGeneCount):
        demo_objective([1, 2, 3])


def test_fitness_from_objective():
    assert fitness_from_objective(93) == 1 / 94
    assert round(fitness_from_objective(93), 4) == 0.0106
    assert fitness_from_objective(0) == 1.0
    assert fitness_from_objective(1) == 0.5
    with pytest.raises(NegativeObjective):
        fitness_from_objective(-1)


@given(st.floats(0, 1e12), st.floats(0, 1e12))
def test_fitness_strictly_decreasing(a, b):
    fa, fb = fitness_from_objective(a), fitness_from_objective(b)
    assert 0 < fa <= 1
    if a < b and fa != fb:
        assert fa > fb


def test_roulette_limits():
    r = random.Random(0)
    assert roulette_select([3.0], r) == 0
    eps = 1e-6
    draws = [roulette_select([1.0, eps], r) for _ in range(1000)]
    assert draws.count(0) == 1000
    with pytest.raises(ZeroTotalFitness):
        roulette_select([0.0, 0.0], r)


def test_roulette_uniform_frequencies():
    r = random.Random(1)
    n = 100_000
    c = Counter(roulette_select([1.0] * 4, r) for _ in range(n))
    assert all(abs(c[i] / n - 0.25) <= 0.01 for i in range(4))


def test_roulette_proportional():
    r = random.Random(2)
    n = 100_000
    c = Counter(roulette_select([1.0, 3.0], r) for _ in range(n))
    assert abs(c[1] / n - 0.75) <= 0.01


def test_crossover_cases():
    r = random.Random(0)
    assert crossover([1, 1, 1, 1], [1, 1, 1, 1], r) == ((1, 1, 1, 1), (1, 1, 1, 1))
    assert crossover([0, 0, 0, 0], [1, 1, 1, 1], r, cut=2) == ((0, 0, 1, 1), (1, 1, 0, 0))
    with pytest.raises(GeneCountMismatch):
        crossover([0, 0], [1, 1, 1], r)


@pytest.mark.parametrize("seed", range(20))
def test_crossover_rate_zero_copies(seed):
    a, b = (1, 2, 3, 4), (5, 6, 7, 8)
    assert crossover(a, b, random.Random(seed), rate=0.0) == (a, b)


def test_mutation_geometry():
    cfg = GaConfig(population_size=6, gene_count=4, mutation_rate=0.1)
    assert cfg.total_genes == 24
    assert cfg.mutation_count() == 2  # round(0.1 * 24)


def test_mutation_exact_count():
    cfg = GaConfig(population_size=6, gene_count=4, mutation_rate=0.5, gene_low=100, gene_high=200)
    pop = [(0, 0, 0, 0)] * 6
    out = mutate(pop, cfg, random.Random(0))
    assert sum(g >= 100 for m in out for g in m) == 12


def test_mutation_rate_zero_is_identity():
    cfg = GaConfig(population_size=3, gene_count=4, mutation_rate=0.0)
    pop = [(1, 2, 3, 4), (5, 6, 7, 8), (9, 9, 9, 9)]
    assert mutate(pop, cfg, random.Random(0)) == pop


def test_mutation_rate_one_bits_half_hamming():
    cfg = GaConfig(population_size=100, gene_count=50, mutation_rate=1.0, gene_low=0, gene_high=1)
    pop = [tuple([0] * 50)] * 100
    out = mutate(pop, cfg, random.Random(3))
    frac = sum(map(sum, out)) / 5000
    assert abs(frac - 0.5) < 0.03


def test_max_generations_zero_is_best_of_initial():
    cfg = GaConfig(population_size=6, gene_count=4, max_generations=0)
    best, trace = evolve(demo_fitness, cfg, 4)
    assert len(trace) == 1
    assert best.fitness == trace.best[0] == max(f for _, f in trace.evaluated)


def test_constant_fitness():
    cfg = GaConfig(population_size=5, gene_count=3, max_generations=5)
    best, trace = evolve(lambda g: 0.5, cfg, 0)
    assert best.fitness == 0.5
    assert trace.mean == trace.best


def test_evolve_deterministic_and_monotone():
    cfg = GaConfig(population_size=6, gene_count=4, max_generations=200)
    b1, t1 = evolve(demo_fitness, cfg, 99)
    b2, t2 = evolve(demo_fitness, cfg, 99)
    assert b1 == b2 and t1.best == t2.best and t1.mean == t2.mean
    assert all(b >= a for a, b in zip(t1.best, t1.best[1:]))
    # fitness F = 1/(1+objective) for every evaluated chromosome
    for genes, f in t1.evaluated:
        assert f == 1.0 / (1.0 + demo_objective(genes))
        assert len(genes) == 4 and all(0 <= g <= 30 for g in genes)


def test_initial_members_injected():
    cfg = GaConfig(population_size=4, gene_count=4, max_generations=0)
    best, trace = evolve(demo_fitness, cfg, 0, initial=[(7, 5, 3, 1)])
    assert best.genes == (7, 5, 3, 1) and best.fitness == 1.0


def test_target_stops_early():
    cfg = GaConfig(population_size=6, gene_count=4, max_generations=1000, target_fitness=1.0)
    best, trace = evolve(demo_fitness, cfg, 1)
    assert best.fitness == 1.0
    a, b, c, d = best.genes
    assert a + 2 * b + 3 * c + 4 * d == 30
    assert len(trace) < 1001


def test_trace_csv():
    cfg = GaConfig(population_size=4, gene_count=4, max_generations=2)
    _, trace = evolve(demo_fitness, cfg, 0)
    lines = trace.to_csv().splitlines()
    assert lines[0] == "generation,best,mean" and len(lines) == 4
    assert math.isclose(float(lines[1].split(",")[1]), trace.best[0])
