"""
Tests for the benchmark registry and the seeded start-point generator.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from rmps.services.domain import Box, DomainError
from rmps.services.objectives import (
    SUITES,
    BenchmarkError,
    SplitMix64,
    UnknownBenchmarkError,
    Xoshiro256StarStar,
    evaluate_benchmark,
    iter_specs,
    lookup,
    names,
    random_start,
)


# ---------------------------------------------------------------------------
# Known minima
# ---------------------------------------------------------------------------

class TestKnownMinima:
    """Every registered benchmark attains its known minimum at its argmin."""

    @pytest.mark.parametrize("name", names())
    def test_value_at_argmin(self, name: str) -> None:
        spec = lookup(name)
        assert spec.known_min is not None and spec.known_argmin is not None

        value = spec.func(np.asarray(spec.known_argmin, dtype=float))

        assert value == pytest.approx(spec.known_min, abs=spec.tolerance)
        assert spec.box.contains(spec.known_argmin)

    @pytest.mark.parametrize("d", [1, 2, 7, 30])
    def test_sphere_and_rastrigin_vanish_at_origin(self, d: int) -> None:
        assert evaluate_benchmark("sphere", np.zeros(d)) == 0.0
        assert evaluate_benchmark("rastrigin", np.zeros(d)) == pytest.approx(0.0, abs=1e-12)

    def test_schwefel_minimum_in_ten_dimensions(self) -> None:
        value = evaluate_benchmark("schwefel", np.full(10, 420.9687))
        assert abs(value) <= 1e-3

    @pytest.mark.parametrize("d", [2, 5, 10])
    def test_scalable_minima_track_dimension(self, d: int) -> None:
        for name in ("trid", "styblinski_tang", "dixon_price", "levy"):
            spec = lookup(name, d)
            assert spec.func(spec.known_argmin) == pytest.approx(spec.known_min, abs=spec.tolerance)

    def test_values_away_from_minimum_are_larger(self) -> None:
        assert evaluate_benchmark("ackley", [1.0, 1.0]) > 0.0
        assert evaluate_benchmark("griewank", [10.0, -10.0]) > 0.0


class TestValuesOnDomain:
    """Every benchmark is finite over its whole box."""

    @pytest.mark.parametrize(
        "suite, name", [(suite, spec.name) for suite in SUITES for spec in iter_specs(suite)],
    )
    def test_finite_on_random_points(self, suite: str, name: str) -> None:
        spec = lookup(name, suite=suite)
        lower, upper = np.asarray(spec.box.lower), np.asarray(spec.box.upper)
        points = lower + (upper - lower) * np.random.default_rng(7).random((10_000, spec.dimension))

        values = np.array([spec.func(point) for point in points])

        assert np.all(np.isfinite(values))

    @pytest.mark.parametrize("name", ["sphere", "sum_squares"])
    @pytest.mark.parametrize("d", [1, 3, 10])
    def test_nonnegative_and_zero_only_at_origin(self, name: str, d: int) -> None:
        spec = lookup(name, d)
        lower, upper = np.asarray(spec.box.lower), np.asarray(spec.box.upper)
        points = lower + (upper - lower) * np.random.default_rng(d).random((1_000, d))

        assert all(spec.func(point) > 0.0 for point in points)
        assert spec.func(np.zeros(d)) == 0.0
        for i in range(d):
            nudged = np.zeros(d)
            nudged[i] = 1e-100
            assert spec.func(nudged) > 0.0


# ---------------------------------------------------------------------------
# lookup
# ---------------------------------------------------------------------------

class TestLookup:
    """Resolving a benchmark for a dimension and suite."""

    def test_ackley_standard_domain(self) -> None:
        spec = lookup("ackley", 2)
        assert spec.box == Box.cube(-32.768, 32.768, 2)
        assert spec.known_min == 0.0

    def test_griewank_has_distinct_highdim_domain(self) -> None:
        assert lookup("griewank", 100).box == Box.cube(-600.0, 600.0, 100)
        assert lookup("griewank", 100, "highdim").box == Box.cube(-10.0, 10.0, 100)

    def test_boundary_suite(self) -> None:
        spec = lookup("sphere", 1000, "boundary")
        assert spec.box == Box.cube(0.0, 5.12, 1000)
        assert spec.suite == "boundary"

    def test_fixed_dimension_default(self) -> None:
        assert lookup("branin").dimension == 2
        assert lookup("forrester").dimension == 1

    def test_fixed_dimension_mismatch_raises(self) -> None:
        with pytest.raises(BenchmarkError, match="2-dimensional"):
            lookup("eggholder", 3)

    def test_unknown_name_raises(self) -> None:
        with pytest.raises(UnknownBenchmarkError, match="Unknown benchmark"):
            lookup("no_such_function", 2)

    def test_function_outside_suite_raises(self) -> None:
        with pytest.raises(UnknownBenchmarkError, match="not part of"):
            lookup("branin", 2, "highdim")

    def test_unknown_suite_raises(self) -> None:
        with pytest.raises(UnknownBenchmarkError):
            lookup("sphere", 2, "tiny")

    def test_objective_wraps_box(self) -> None:
        spec = lookup("sphere", 3)
        objective = spec.objective()

        assert objective.box == spec.box
        assert objective(np.full(3, 0.5)) == pytest.approx(0.0)

    def test_every_suite_is_populated(self) -> None:
        for suite in SUITES:
            assert len(list(iter_specs(suite))) >= 6


class TestEvaluateBenchmark:
    """Direct evaluation with domain checks."""

    def test_point_outside_domain_raises(self) -> None:
        with pytest.raises(BenchmarkError, match="outside"):
            evaluate_benchmark("sphere", [6.0, 0.0])

    def test_branin_at_known_minimizer(self) -> None:
        value = evaluate_benchmark("branin", [math.pi, 2.275])
        assert value == pytest.approx(5.0 / (4.0 * math.pi))


# ---------------------------------------------------------------------------
# Seeded starts
# ---------------------------------------------------------------------------

class TestRandomStart:
    """xoshiro256** start points."""

    def test_splitmix_reference_output(self) -> None:
        assert SplitMix64(0).next() == 0xE220A8397B1DCDAF

    def test_same_seed_gives_identical_points(self) -> None:
        box = Box.cube(-5.12, 5.12, 6)
        np.testing.assert_array_equal(random_start(box, 42), random_start(box, 42))

    def test_different_seeds_differ(self) -> None:
        box = Box.cube(-5.12, 5.12, 6)
        assert not np.array_equal(random_start(box, 1), random_start(box, 2))

    def test_points_lie_in_box(self) -> None:
        box = Box(lower=(-5.0, 0.0), upper=(10.0, 15.0))
        for seed in range(200):
            assert box.contains(random_start(box, seed))

    def test_uniform_draws_are_in_unit_interval(self) -> None:
        generator = Xoshiro256StarStar(2024)
        draws = [generator.uniform() for _ in range(2000)]

        assert all(0.0 <= u < 1.0 for u in draws)
        assert 0.45 < float(np.mean(draws)) < 0.55

    def test_seed_out_of_range_raises(self) -> None:
        with pytest.raises(DomainError):
            random_start(Box.unit(2), -1)
