from concurrent.futures import ThreadPoolExecutor
from typing import List

import numpy as np
from loguru import logger

from kvark._common._exceptions.kvark_exception import InfeasiblePopulationError
from kvark._common.constants import MAX_REJECTION_SAMPLES
from kvark._core._type_spec import Array, FloatArray, KvarkModel
from kvark._core.models.excitation import GaConfig
from kvark._core.protocol.ga_problem import GaProblem


class GaResult(KvarkModel):
    """
    Outcome of a GA run.

    Attributes:
        best (Array): Best individual found.
        value (float): Its penalised objective value.
        history (Array): Best-so-far penalised objective per generation, non-increasing.
        evaluations (int): Number of fitness evaluations performed.
    """

    best: Array
    value: float
    history: Array
    evaluations: int


def _penalised(problem: GaProblem, penalty_weight: float, x: FloatArray) -> float:
    violation = problem.violation(x)
    if violation > 0.0:
        return problem.objective(x) + penalty_weight * violation
    return problem.objective(x)


def _evaluate(
    problem: GaProblem, config: GaConfig, individuals: List[FloatArray]
) -> FloatArray:
    if config.workers is None or len(individuals) < 2:
        values = [_penalised(problem, config.penalty_weight, x) for x in individuals]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            values = list(
                pool.map(
                    lambda x: _penalised(problem, config.penalty_weight, x),
                    individuals,
                )
            )
    return np.array(values, dtype=float)


def _initial_individual(
    problem: GaProblem, rng: np.random.Generator, index: int
) -> FloatArray:
    for _ in range(MAX_REJECTION_SAMPLES):
        candidate = np.asarray(problem.sample(rng), dtype=float)
        if problem.violation(candidate) == 0.0:
            return candidate
    raise InfeasiblePopulationError(index=index, attempts=MAX_REJECTION_SAMPLES)


def _tournament(
    rng: np.random.Generator, fitness: FloatArray, size: int
) -> int:
    contestants = rng.integers(0, fitness.shape[0], size=size)
    return int(contestants[np.argmin(fitness[contestants])])


def ga_optimize(problem: GaProblem, config: GaConfig) -> GaResult:
    """
    Minimise `problem.objective` plus `penalty_weight` × `problem.violation` with a
    generational GA: tournament selection, blend crossover, per-gene Gaussian mutation and
    elitism.

    Every individual draws from its own generator spawned from the master seed, so the
    trace does not depend on `workers`.

    Raises:
        InfeasiblePopulationError: If an initial individual cannot be drawn feasibly.
    """
    generation_seeds = np.random.SeedSequence(config.seed).spawn(config.generations)
    size = config.population_size

    initial_rngs = [
        np.random.default_rng(s) for s in generation_seeds[0].spawn(size)
    ]
    population = [
        _initial_individual(problem, rng, i) for i, rng in enumerate(initial_rngs)
    ]
    fitness = _evaluate(problem, config, population)
    evaluations = size

    best_index = int(np.argmin(fitness))
    best, best_value = population[best_index].copy(), float(fitness[best_index])
    history = [best_value]
    logger.debug(f"GA generation 1/{config.generations}: best {best_value:.6g}")

    for generation in range(1, config.generations):
        order = np.argsort(fitness, kind="stable")
        elites = [population[i] for i in order[: config.elite_count]]
        elite_fitness = fitness[order[: config.elite_count]]

        child_rngs = [
            np.random.default_rng(s)
            for s in generation_seeds[generation].spawn(size - config.elite_count)
        ]
        children = []
        for rng in child_rngs:
            first = population[_tournament(rng, fitness, config.tournament_size)]
            if rng.random() < config.crossover_rate:
                second = population[_tournament(rng, fitness, config.tournament_size)]
                blend = rng.random(first.shape[0])
                child = blend * first + (1.0 - blend) * second
            else:
                child = first.copy()
            mutate = rng.random(child.shape[0]) < config.mutation_rate
            child = child + mutate * rng.normal(0.0, config.mutation_std, child.shape[0])
            children.append(child)

        child_fitness = _evaluate(problem, config, children)
        evaluations += len(children)
        population = elites + children
        fitness = np.concatenate([elite_fitness, child_fitness])

        best_index = int(np.argmin(fitness))
        if fitness[best_index] < best_value:
            best, best_value = population[best_index].copy(), float(fitness[best_index])
        history.append(best_value)
        logger.debug(
            f"GA generation {generation + 1}/{config.generations}: best {best_value:.6g}"
        )

    return GaResult(
        best=best,
        value=best_value,
        history=np.array(history),
        evaluations=evaluations,
    )
