import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evoselect.benchmarks import rastrigin, rosenbrock, sphere
from evoselect.evo import (
    Bounds,
    EvoConfig,
    Population,
    generate_candidates,
    initialize_population,
    merge_truncate,
    neighborhood,
    optimize,
    population_statistics,
    stability_level,
)
from evoselect.exceptions import ConfigurationError, UsageError


class ScriptedRng:
    """Replays queued draws so candidate-generation branches are testable."""

    def __init__(self, randoms=(), ints=(), choices=()):
        self._randoms = list(randoms)
        self._ints = list(ints)
        self._choices = list(choices)

    def random(self, size=None):
        value = self._randoms.pop(0)
        if size is None:
            return float(value)
        return np.asarray(value, dtype=float).reshape(size)

    def integers(self, low, high=None, size=None):
        value = self._ints.pop(0)
        if size is None:
            return int(value)
        return np.asarray(value, dtype=np.int64)

    def choice(self, n, size=None, replace=True):
        return np.asarray(self._choices.pop(0), dtype=np.int64)


def population(positions, fitness):
    return Population(
        np.asarray(positions, dtype=float), np.asarray(fitness, dtype=float)
    )


class TestBounds:
    def test_equal_bounds_rejected(self):
        with pytest.raises(ConfigurationError):
            Bounds(0.0, 0.0, dims=1)

    def test_scalar_broadcast(self):
        b = Bounds(-1.0, 2.0, dims=3)
        assert b.dims == 3
        assert b.lo.tolist() == [-1.0, -1.0, -1.0]

    def test_vector_bounds(self):
        b = Bounds([0.0, 1.0], [1.0, 4.0])
        assert b.dims == 2
        assert b.clip(np.array([[5.0, -1.0]])).tolist() == [[1.0, 1.0]]

    def test_mismatched_lengths(self):
        with pytest.raises(ConfigurationError):
            Bounds([0.0], [1.0, 2.0])


class TestConfig:
    def test_budget_must_cover_initialization(self):
        with pytest.raises(ConfigurationError):
            EvoConfig(n_particles=10, max_fes=9)

    def test_k_neighbors_range(self):
        with pytest.raises(ConfigurationError):
            EvoConfig(n_particles=5, max_fes=100, k_neighbors=5)

    @pytest.mark.parametrize(
        "n,expected", [(4, 2), (9, 3), (10, 4), (30, 6), (2, 1), (3, 2)]
    )
    def test_default_k(self, n, expected):
        assert EvoConfig(n_particles=n, max_fes=1000).resolved_k() == expected


class TestInitialize:
    def test_population_within_bounds_and_counted(self):
        config = EvoConfig(n_particles=3, max_fes=100, seed=1)
        pop, bad = initialize_population(
            config, Bounds(0.0, 1.0, dims=2), lambda x: float(x.sum())
        )
        assert len(pop) == 3
        assert bad == 0
        assert (pop.fitness >= 0).all() and (pop.fitness <= 2).all()

    def test_seeded_runs_identical(self):
        config = EvoConfig(n_particles=5, max_fes=100, seed=42)
        bounds = Bounds(-2.0, 2.0, dims=3)
        a, _ = initialize_population(config, bounds, sphere)
        b, _ = initialize_population(config, bounds, sphere)
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.fitness, b.fitness)


class TestStatistics:
    def test_means_and_best(self):
        stats = population_statistics(population([[0, 0], [2, 2]], [1, 3]))
        assert stats.centroid.tolist() == [1.0, 1.0]
        assert stats.mean_fitness == 2.0
        assert stats.best_index == 0
        assert stats.worst_fitness == 3.0

    def test_singleton(self):
        stats = population_statistics(population([[5]], [7]))
        assert stats.centroid.tolist() == [5.0]
        assert stats.mean_fitness == 7.0
        assert stats.best_fitness == stats.worst_fitness == 7.0

    def test_tie_breaks_to_lowest_index(self):
        stats = population_statistics(population([[0], [1]], [4, 4]))
        assert stats.best_index == 0

    def test_empty_population_rejected(self):
        with pytest.raises(UsageError):
            population_statistics(population(np.empty((0, 2)), []))


class TestStabilityLevel:
    def test_endpoints(self):
        stats = population_statistics(population([[0], [1]], [1, 3]))
        assert stability_level(3.0, stats) == 1.0
        assert stability_level(1.0, stats) == 0.0

    def test_degenerate_population(self):
        stats = population_statistics(population([[0], [1]], [2, 2]))
        assert stability_level(2.0, stats) == 0.0

    @given(
        st.lists(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
            min_size=1,
            max_size=20,
        ),
        st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
    )
    def test_always_in_unit_interval(self, fitness, probe):
        pop = population(np.zeros((len(fitness), 1)), fitness)
        level = stability_level(probe, population_statistics(pop))
        assert 0.0 <= level <= 1.0

    @given(
        st.lists(
            st.floats(min_value=-1e9, max_value=1e9, allow_nan=False),
            min_size=1,
            max_size=30,
        )
    )
    def test_mean_fitness_matches_mean(self, fitness):
        stats = population_statistics(population(np.zeros((len(fitness), 1)), fitness))
        expected = np.mean(fitness)
        assert abs(stats.mean_fitness - expected) <= 1e-12 * max(1.0, abs(expected))


class TestNeighborhood:
    def test_nearest_point(self):
        pop = population([[0], [1], [10]], [0, 0, 0])
        neighbors, centroid = neighborhood(pop, 0, 1)
        assert neighbors.tolist() == [1]
        assert centroid.tolist() == [1.0]

    def test_centroid_of_two(self):
        pop = population([[0], [1], [10]], [0, 0, 0])
        _, centroid = neighborhood(pop, 0, 2)
        assert centroid.tolist() == [5.5]

    def test_self_excluded_at_distance_zero(self):
        pop = population([[3, 3], [3, 3]], [0, 0])
        neighbors, centroid = neighborhood(pop, 0, 1)
        assert neighbors.tolist() == [1]
        assert centroid.tolist() == [3.0, 3.0]

    def test_distance_ties_prefer_lower_index(self):
        pop = population([[0], [1], [-1], [5]], [0, 0, 0, 0])
        neighbors, _ = neighborhood(pop, 0, 1)
        assert neighbors.tolist() == [1]

    def test_k_too_large(self):
        pop = population([[0], [1]], [0, 0])
        with pytest.raises(UsageError):
            neighborhood(pop, 0, 2)


class TestGenerateCandidates:
    def test_first_beta_move_direct_substitution(self):
        # particle 1 (fitness 0.5) is above the mean 0.375; stability level
        # (0.5 - 0) / (1 - 0) = 0.5; scripted bound 0.9 forces the beta branch
        pop = population([[0], [1], [3], [4]], [0, 0.5, 1, 0])
        stats = population_statistics(pop)
        assert stats.mean_fitness == 0.375 and stats.centroid.tolist() == [2.0]
        rng = ScriptedRng(randoms=[0.9, [[0.5], [0.5], [0.0], [0.0]]])
        candidates = generate_candidates(
            pop, 1, stats, np.array([0.0]), Bounds(0.0, 10.0, dims=1), rng
        )
        # 1 + (0.5*0 - 0.5*2) / 0.5 = -1, clamped to 0
        assert candidates[0].tolist() == [0.0]
        assert candidates[1].tolist() == [1.0]

    def test_second_beta_move_direct_substitution(self):
        pop = population([[3], [1], [5]], [0, 3, 4])
        stats = population_statistics(pop)
        rng = ScriptedRng(randoms=[0.9, [[0.0], [0.0], [1.0], [1.0]]])
        candidates = generate_candidates(
            pop, 1, stats, np.array([1.0]), Bounds(0.0, 10.0, dims=1), rng
        )
        # second move: 1 + (1*3 - 1*1) = 3
        assert candidates[1].tolist() == [3.0]
        assert candidates[0].tolist() == [1.0]

    def test_dimension_copy_semantics(self):
        # worst particle has stability level 1 > scripted bound: copy moves
        pop = population([[9, 9], [5, 5]], [0, 1])
        stats = population_statistics(pop)
        rng = ScriptedRng(randoms=[0.5], ints=[1, 1], choices=[[0], [1]])
        candidates = generate_candidates(
            pop, 1, stats, np.array([7.0, 7.0]), Bounds(0.0, 10.0, dims=2), rng
        )
        assert candidates[0].tolist() == [9.0, 5.0]  # best copied into dim 0
        assert candidates[1].tolist() == [5.0, 7.0]  # neighborhood into dim 1

    def test_stable_particle_random_walk(self):
        pop = population([[5], [6]], [0, 1])
        stats = population_statistics(pop)
        rng = ScriptedRng(randoms=[[0.25]], ints=[[1]])
        candidates = generate_candidates(
            pop, 0, stats, np.array([6.0]), Bounds(0.0, 10.0, dims=1), rng
        )
        # 5 + 0.25 * (10 - 0) * 0.1 * (+1) = 5.25
        assert candidates.shape == (1, 1)
        assert candidates[0].tolist() == [5.25]

    def test_candidates_clamped(self):
        rng = np.random.default_rng(0)
        bounds = Bounds(-1.0, 1.0, dims=4)
        pop = population(rng.uniform(-1, 1, (6, 4)), rng.random(6))
        stats = population_statistics(pop)
        for i in range(6):
            _, centroid = neighborhood(pop, i, 2)
            candidates = generate_candidates(pop, i, stats, centroid, bounds, rng)
            assert (candidates >= -1.0).all() and (candidates <= 1.0).all()


class TestMergeTruncate:
    def test_sort_and_truncate(self):
        pop = population([[1], [3]], [1, 3])
        merged = merge_truncate(pop, np.array([[2.0], [0.5]]), np.array([2.0, 0.5]), 2)
        assert merged.fitness.tolist() == [0.5, 1.0]

    def test_elitism_when_candidates_worse(self):
        pop = population([[1], [3]], [1, 3])
        merged = merge_truncate(pop, np.array([[9.0], [8.0]]), np.array([9.0, 8.0]), 2)
        assert merged.fitness.tolist() == [1.0, 3.0]
        assert merged.positions.tolist() == [[1.0], [3.0]]

    def test_ties_keep_older_particle(self):
        pop = population([[1]], [2.0])
        merged = merge_truncate(pop, np.array([[7.0]]), np.array([2.0]), 1)
        assert merged.positions.tolist() == [[1.0]]


class TestOptimize:
    def test_sphere_converges(self):
        result = optimize(
            sphere,
            Bounds(-5.0, 5.0, dims=2),
            EvoConfig(n_particles=20, max_fes=2000, seed=7),
        )
        assert result.best_fitness < 1e-2

    def test_history_monotone_and_budget(self):
        config = EvoConfig(n_particles=7, max_fes=100, seed=1)
        result = optimize(rosenbrock, Bounds(-5.0, 10.0, dims=3), config)
        assert (np.diff(result.history) <= 0).all()
        assert result.best_fitness == result.history[-1]
        assert config.n_particles <= result.evaluations_used <= 100 + 2 * 7

    def test_budget_exhausted_at_initialization(self):
        config = EvoConfig(n_particles=12, max_fes=12, seed=5)
        bounds = Bounds(-5.0, 5.0, dims=2)
        result = optimize(sphere, bounds, config)
        pop, _ = initialize_population(config, bounds, sphere)
        assert result.evaluations_used == 12
        assert result.best_fitness == pop.fitness.min()
        assert len(result.history) == 1

    def test_non_finite_objective_discarded(self):
        def spiky(x):
            return float("nan") if x[0] > 0.0 else sphere(x)

        result = optimize(
            spiky, Bounds(-1.0, 1.0, dims=2), EvoConfig(n_particles=10, max_fes=300, seed=2)
        )
        assert result.non_finite_evaluations > 0
        assert np.isfinite(result.best_fitness)
        assert result.best_position[0] <= 0.0

    def test_bit_identical_runs(self):
        config = EvoConfig(n_particles=12, max_fes=400, seed=99)
        bounds = Bounds(-5.12, 5.12, dims=4)
        a = optimize(rastrigin, bounds, config)
        b = optimize(rastrigin, bounds, config)
        assert np.array_equal(a.best_position, b.best_position)
        assert a.best_fitness == b.best_fitness
        assert np.array_equal(a.history, b.history)
        assert a.evaluations_used == b.evaluations_used

    @settings(max_examples=20, deadline=None)
    @given(
        dims=st.integers(min_value=1, max_value=8),
        n_particles=st.integers(min_value=3, max_value=12),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_run_invariants(self, dims, n_particles, seed):
        config = EvoConfig(n_particles=n_particles, max_fes=8 * n_particles, seed=seed)
        bounds = Bounds(-3.0, 3.0, dims=dims)
        result = optimize(sphere, bounds, config)
        assert (np.diff(result.history) <= 0).all()
        assert (result.best_position >= bounds.lo).all()
        assert (result.best_position <= bounds.hi).all()
        assert result.evaluations_used <= config.max_fes + 2 * n_particles


class TestBenchmarks:
    def test_known_minima(self):
        assert sphere(np.zeros(5)) == 0.0
        assert rastrigin(np.zeros(7)) == 0.0
        assert rosenbrock(np.ones(4)) == 0.0
