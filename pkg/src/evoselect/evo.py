"""Energy valley optimizer: a population metaheuristic over box-bounded reals.

Particles carry a position and a fitness value ("enrichment level", lower is
better).  Each generation the population mean fitness acts as an energy
barrier: particles above it are unstable and emit candidates through
decay-style moves (coordinate copies from the best particle or from a
neighbourhood centroid, or arithmetic jumps built from the best particle,
the population centroid and the neighbourhood centroid), while particles at
or below the barrier take a bounded random walk.  An elitist merge keeps the
population size constant, so the best fitness never regresses.

All randomness flows from a single integer seed through per-particle,
per-generation substreams, so results do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import ConfigurationError, UsageError

__all__ = [
    "Bounds",
    "EvoConfig",
    "Population",
    "PopulationStats",
    "OptResult",
    "initialize_population",
    "population_statistics",
    "stability_level",
    "neighborhood",
    "generate_candidates",
    "merge_truncate",
    "optimize",
]

# Guard for the division by the stability level in the first beta move; the
# best particle has stability level exactly 0.
DIVISION_GUARD = 1e-9

Objective = Callable[[np.ndarray], float]


class Bounds:
    """Box constraints for the search space.

    Parameters
    ----------
    lo, hi : float or array-like
        Lower/upper bound per dimension.  Scalars are broadcast to `dims`.
    dims : int, optional
        Number of dimensions; required when both bounds are scalars.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi, dims: int | None = None):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.ndim == 0 and hi.ndim == 0:
            if dims is None:
                raise ConfigurationError("scalar bounds require an explicit dims")
            lo = np.full(dims, float(lo))
            hi = np.full(dims, float(hi))
        else:
            if lo.ndim == 0:
                lo = np.full(hi.shape, float(lo))
            if hi.ndim == 0:
                hi = np.full(lo.shape, float(hi))
            if lo.shape != hi.shape or lo.ndim != 1:
                raise ConfigurationError(
                    f"bounds must be 1-d and equally shaped, got {lo.shape} and {hi.shape}"
                )
            if dims is not None and dims != lo.size:
                raise ConfigurationError(
                    f"dims={dims} disagrees with bound vectors of length {lo.size}"
                )
        if lo.size < 1:
            raise ConfigurationError("bounds need at least one dimension")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ConfigurationError("bounds must be finite")
        if not np.all(lo < hi):
            bad = int(np.argmin(hi - lo))
            raise ConfigurationError(
                f"lower bound must be strictly below upper bound (dimension {bad}: "
                f"{lo[bad]} >= {hi[bad]})"
            )
        self.lo = lo
        self.hi = hi
        self.lo.setflags(write=False)
        self.hi.setflags(write=False)

    @property
    def dims(self) -> int:
        return self.lo.size

    def clip(self, positions: np.ndarray) -> np.ndarray:
        return np.clip(positions, self.lo, self.hi)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Bounds(lo={self.lo!r}, hi={self.hi!r})"


@dataclass(frozen=True)
class EvoConfig:
    """Optimizer run parameters.

    `max_fes` is the budget of objective evaluations; a run may finish the
    generation in flight, overshooting by at most two candidates per
    particle.  `k_neighbors=None` resolves to max(2, ceil(sqrt(n_particles)))
    capped at n_particles - 1.
    """

    n_particles: int = 30
    max_fes: int = 5000
    k_neighbors: int | None = None
    seed: int = 0
    stable_step_scale: float = 0.1

    def __post_init__(self):
        if self.n_particles < 2:
            raise ConfigurationError("n_particles must be at least 2")
        if self.max_fes < self.n_particles:
            raise ConfigurationError(
                f"max_fes ({self.max_fes}) must cover the initial population "
                f"({self.n_particles} evaluations)"
            )
        if self.k_neighbors is not None and not (
            1 <= self.k_neighbors < self.n_particles
        ):
            raise ConfigurationError(
                f"k_neighbors must lie in [1, n_particles), got {self.k_neighbors}"
            )
        if not (0.0 < self.stable_step_scale <= 1.0):
            raise ConfigurationError("stable_step_scale must lie in (0, 1]")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")

    def resolved_k(self) -> int:
        if self.k_neighbors is not None:
            return self.k_neighbors
        return min(max(2, math.isqrt(self.n_particles - 1) + 1), self.n_particles - 1)


@dataclass
class Population:
    """Evaluated particles: positions (n, d) and their fitness values (n,)."""

    positions: np.ndarray
    fitness: np.ndarray

    def __len__(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class PopulationStats:
    """Per-generation aggregates.

    `mean_fitness` is the energy barrier separating stable from unstable
    particles; `centroid` is the coordinate-wise mean position.
    """

    centroid: np.ndarray
    mean_fitness: float
    best_index: int
    best_fitness: float
    worst_fitness: float


@dataclass
class OptResult:
    """Outcome of an optimizer run.

    `history` holds the best fitness after initialization and after every
    generation; it is monotonically non-increasing.
    """

    best_position: np.ndarray
    best_fitness: float
    history: np.ndarray
    evaluations_used: int
    non_finite_evaluations: int = 0
    config: EvoConfig | None = field(default=None, repr=False)


def _init_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def _particle_rng(seed: int, generation: int, index: int) -> np.random.Generator:
    # Dedicated substream per (generation, particle): parallel evaluation
    # schedules cannot change the draws.  Generation 0 is reserved for
    # initialization, which uses the root stream.
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(generation, index))
    )


def _evaluate(objective: Objective, position: np.ndarray) -> tuple[float, bool]:
    """Evaluate one position; non-finite results become +inf (flagged)."""
    value = float(objective(position))
    if not math.isfinite(value):
        return math.inf, True
    return value, False


def initialize_population(
    config: EvoConfig, bounds: Bounds, objective: Objective
) -> tuple[Population, int]:
    """Draw the initial particles uniformly in the box and evaluate them.

    Returns the evaluated population and the count of non-finite objective
    values that were mapped to +inf.
    """
    rng = _init_rng(config.seed)
    span = bounds.hi - bounds.lo
    positions = bounds.lo + span * rng.random((config.n_particles, bounds.dims))
    fitness = np.empty(config.n_particles)
    non_finite = 0
    for i in range(config.n_particles):
        fitness[i], bad = _evaluate(objective, positions[i])
        non_finite += bad
    return Population(positions, fitness), non_finite


def population_statistics(population: Population) -> PopulationStats:
    """Centroid, mean fitness (energy barrier) and best/worst markers."""
    if len(population) == 0:
        raise UsageError("population_statistics requires a non-empty population")
    fitness = population.fitness
    best_index = int(np.argmin(fitness))  # ties resolve to the lowest index
    return PopulationStats(
        centroid=population.positions.mean(axis=0),
        mean_fitness=float(fitness.mean()),
        best_index=best_index,
        best_fitness=float(fitness[best_index]),
        worst_fitness=float(fitness.max()),
    )


def stability_level(fitness_i: float, stats: PopulationStats) -> float:
    """Normalized fitness rank in [0, 1]; 0 marks the best (most stable)."""
    span = stats.worst_fitness - stats.best_fitness
    if span <= 0.0 or not math.isfinite(span):
        return 0.0
    level = (fitness_i - stats.best_fitness) / span
    if not math.isfinite(level):
        return 0.0
    return min(max(level, 0.0), 1.0)


def neighborhood(
    population: Population, index: int, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """The k nearest particles to `index` (itself excluded) and their centroid.

    Distance ties resolve to the lower particle index.
    """
    n = len(population)
    if k >= n:
        raise UsageError(f"k ({k}) must be smaller than the population size ({n})")
    if k < 1:
        raise UsageError("k must be at least 1")
    deltas = population.positions - population.positions[index]
    sq_dist = np.einsum("ij,ij->i", deltas, deltas)
    sq_dist[index] = np.inf
    neighbors = np.argsort(sq_dist, kind="stable")[:k]
    return neighbors, population.positions[neighbors].mean(axis=0)


def _random_dimension_subset(rng: np.random.Generator, dims: int) -> np.ndarray:
    size = int(rng.integers(1, dims + 1))
    return rng.choice(dims, size=size, replace=False)


def generate_candidates(
    population: Population,
    index: int,
    stats: PopulationStats,
    neighborhood_centroid: np.ndarray,
    bounds: Bounds,
    rng: np.random.Generator,
    stable_step_scale: float = 0.1,
) -> np.ndarray:
    """Produce the decay candidates for one particle, clamped into the box.

    Unstable particles (fitness above the energy barrier) emit two
    candidates: either coordinate copies from the best particle and from the
    neighbourhood centroid (when the stability level beats a random bound),
    or two arithmetic moves using the best particle, the population centroid
    and the neighbourhood centroid.  Stable particles take one bounded
    random-walk step.
    """
    x = population.positions[index]
    dims = x.size
    x_best = population.positions[stats.best_index]

    if population.fitness[index] > stats.mean_fitness:
        level = stability_level(float(population.fitness[index]), stats)
        stability_bound = rng.random()
        if level > stability_bound:
            first = x.copy()
            idx = _random_dimension_subset(rng, dims)
            first[idx] = x_best[idx]
            second = x.copy()
            idx = _random_dimension_subset(rng, dims)
            second[idx] = neighborhood_centroid[idx]
            candidates = np.stack([first, second])
        else:
            tau = rng.random((4, dims))
            first = x + (tau[0] * x_best - tau[1] * stats.centroid) / max(
                level, DIVISION_GUARD
            )
            second = x + (tau[2] * x_best - tau[3] * neighborhood_centroid)
            candidates = np.stack([first, second])
    else:
        tau = rng.random(dims)
        signs = rng.integers(0, 2, size=dims) * 2 - 1
        step = tau * (bounds.hi - bounds.lo) * stable_step_scale * signs
        candidates = (x + step)[np.newaxis, :]

    return bounds.clip(candidates)


def merge_truncate(
    population: Population,
    candidate_positions: np.ndarray,
    candidate_fitness: np.ndarray,
    n_particles: int,
) -> Population:
    """Keep the best `n_particles` of old plus new, preferring older on ties.

    The returned population is sorted ascending by fitness, so index 0 is
    the incumbent best.
    """
    positions = np.concatenate([population.positions, candidate_positions])
    fitness = np.concatenate([population.fitness, candidate_fitness])
    order = np.argsort(fitness, kind="stable")[:n_particles]
    return Population(positions[order].copy(), fitness[order].copy())


def optimize(objective: Objective, bounds: Bounds, config: EvoConfig) -> OptResult:
    """Minimize `objective` over the box until the evaluation budget is spent.

    Runs whole generations: the loop stops once `max_fes` evaluations have
    been used, so the final generation may overshoot the budget by at most
    two candidates per particle.  Identical inputs (including the seed)
    produce bit-identical results.
    """
    k = config.resolved_k()
    population, non_finite = initialize_population(config, bounds, objective)
    evaluations = config.n_particles

    best_index = int(np.argmin(population.fitness))
    best_fitness = float(population.fitness[best_index])
    best_position = population.positions[best_index].copy()
    history = [best_fitness]

    generation = 0
    while evaluations < config.max_fes:
        generation += 1
        stats = population_statistics(population)
        per_particle = []
        for i in range(len(population)):
            rng = _particle_rng(config.seed, generation, i)
            _, x_ng = neighborhood(population, i, k)
            per_particle.append(
                generate_candidates(
                    population, i, stats, x_ng, bounds, rng, config.stable_step_scale
                )
            )
        candidates = np.concatenate(per_particle)
        candidate_fitness = np.empty(len(candidates))
        for j in range(len(candidates)):
            candidate_fitness[j], bad = _evaluate(objective, candidates[j])
            non_finite += bad
        evaluations += len(candidates)

        population = merge_truncate(
            population, candidates, candidate_fitness, config.n_particles
        )
        if population.fitness[0] < best_fitness:
            best_fitness = float(population.fitness[0])
            best_position = population.positions[0].copy()
        history.append(best_fitness)

    return OptResult(
        best_position=best_position,
        best_fitness=best_fitness,
        history=np.asarray(history),
        evaluations_used=evaluations,
        non_finite_evaluations=non_finite,
        config=config,
    )
