"""
Tests for whole runs (STAGE 1), the restart driver (STAGE 2) and the
convex fast path.

Besides the worked examples, the properties every run must satisfy are
checked directly: the incumbent value never increases, iterates stay in
the unit cube, an iteration costs at most ``2n`` evaluations and the
trajectory is identical for any number of probe workers.
"""

from __future__ import annotations

import logging

import numpy as np
import pytest

from rmps.services.domain import Box, DomainError, to_unit
from rmps.services.objectives import lookup, random_start, rastrigin, sphere
from rmps.services.optimizer import (
    Objective,
    ObjectiveEvaluationError,
    ProbeEvaluator,
    Termination,
    TuningParams,
    optimize,
    optimize_convex,
    run_stage1,
)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

class CountingObjective:
    """Wraps a function and counts how often it is called."""

    def __init__(self, func) -> None:
        self.func = func
        self.calls = 0

    def __call__(self, z: np.ndarray) -> float:
        self.calls += 1
        return self.func(z)


def _quadratic_1d() -> Objective:
    return Objective.on_unit_cube(lambda z: float((z[0] - 0.5) ** 2), 1, name="quadratic")


def _constant(dimension: int = 2) -> Objective:
    return Objective.on_unit_cube(lambda z: 0.0, dimension, name="constant")


def _sphere(d: int = 2) -> Objective:
    return Objective(func=sphere, box=Box.cube(-5.12, 5.12, d), name="sphere")


def _convex_quadratic(n: int, seed: int) -> tuple[Objective, np.ndarray]:
    """(z - c)^T A (z - c) with A = Q^T D Q, eigenvalues in [1, 3], c inside the cube."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = q.T @ np.diag(rng.uniform(1.0, 3.0, n)) @ q
    c = rng.uniform(0.2, 0.8, n)

    def func(z: np.ndarray) -> float:
        r = z - c
        return float(r @ a @ r)

    return Objective.on_unit_cube(func, n, name="convex-quadratic"), c


# ---------------------------------------------------------------------------
# STAGE 1
# ---------------------------------------------------------------------------

class TestRunStage1:
    """A single run with a fixed decay rate."""

    def test_quadratic_converges_to_interior_minimum(self) -> None:
        outcome = run_stage1(_quadratic_1d(), [0.1], TuningParams(), rho=2.0)

        assert abs(outcome.solution[0] - 0.5) <= 1e-5
        assert outcome.terminated_by is Termination.STEP_THRESHOLD
        assert outcome.final_step <= 1e-6

    def test_constant_objective_never_moves(self) -> None:
        params = TuningParams()
        outcome = run_stage1(_constant(), [0.3, 0.7], params, rho=2.0)

        np.testing.assert_array_equal(outcome.solution, [0.3, 0.7])
        # the step shrinks on every iteration: 1 / 2**k <= 1e-6 first at k = 20
        assert outcome.iterations == 20

    def test_linear_objective_approaches_boundary(self) -> None:
        objective = Objective.on_unit_cube(lambda z: float(z[0]), 1)
        outcome = run_stage1(objective, [0.9], TuningParams(), rho=2.0)

        assert 0.0 < outcome.solution[0] < 1e-5

    def test_eval_cache_skips_start_evaluation(self) -> None:
        counter = CountingObjective(lambda z: float(np.sum(z**2)))
        objective = Objective.on_unit_cube(counter, 2)

        fresh = run_stage1(objective, [0.4, 0.6], TuningParams(), rho=2.0)
        start_value = float(np.sum(np.array([0.4, 0.6]) ** 2))
        cached = run_stage1(
            objective, [0.4, 0.6], TuningParams(), rho=2.0, eval_cache=start_value
        )

        assert fresh.evals == cached.evals + 1

    def test_max_iter_returns_previous_incumbent(self) -> None:
        params = TuningParams(max_iter=1)
        outcome = run_stage1(_quadratic_1d(), [0.1], params, rho=2.0)

        assert outcome.terminated_by is Termination.MAX_ITER
        assert outcome.iterations == 1
        np.testing.assert_array_equal(outcome.solution, [0.1])

    def test_start_outside_unit_cube_is_rejected(self) -> None:
        with pytest.raises(DomainError):
            run_stage1(_quadratic_1d(), [1.5], TuningParams(), rho=2.0)

    def test_nan_objective_aborts_the_run(self) -> None:
        objective = Objective.on_unit_cube(lambda z: float("nan") if z[0] > 0.6 else 1.0, 1)
        with pytest.raises(ObjectiveEvaluationError):
            run_stage1(objective, [0.5], TuningParams(), rho=2.0)

    def test_incumbent_is_monotone_and_feasible(self) -> None:
        d = 4
        spec = lookup("rastrigin", d)
        box = spec.box
        values: list[float] = []
        evals: list[int] = []
        visited: list[np.ndarray] = []

        def func(z: np.ndarray) -> float:
            visited.append(to_unit(box, np.clip(z, box.lower_array, box.upper_array)))
            assert box.contains(z)
            return rastrigin(z)

        objective = Objective(func=func, box=box)
        start = to_unit(box, random_start(box, 11))
        run_stage1(
            objective, start, TuningParams(), rho=2.0,
            trace=lambda j, n, y: (values.append(y), evals.append(n)),
        )

        assert all(later <= earlier for earlier, later in zip(values, values[1:]))
        assert all(np.all((u >= 0) & (u <= 1)) for u in visited)
        assert evals == sorted(evals)


# ---------------------------------------------------------------------------
# STAGE 2
# ---------------------------------------------------------------------------

class TestOptimize:
    """The restart driver."""

    def test_sphere_from_fixed_start(self) -> None:
        objective = _sphere()
        result = optimize(objective, to_unit(objective.box, [3.0, -2.0]))

        assert result.value <= 1e-9
        np.testing.assert_allclose(result.solution, [0.0, 0.0], atol=1e-4)

    def test_constant_objective_takes_two_runs(self) -> None:
        result = optimize(_constant(), [0.3, 0.7])

        assert result.runs == 2
        np.testing.assert_array_equal(result.unit_solution, [0.3, 0.7])

    def test_only_the_first_run_evaluates_the_start(self) -> None:
        counter = CountingObjective(lambda z: 0.0)
        result = optimize(Objective.on_unit_cube(counter, 2), [0.3, 0.7])

        assert counter.calls == result.total_evals
        assert result.total_evals == sum(o.evals for o in result.run_outcomes)
        # no probe is skipped from this start, so each iteration costs exactly 2n
        first, second = result.run_outcomes
        assert first.evals == 1 + 4 * first.iterations
        assert second.evals == 4 * second.iterations

    def test_max_runs_caps_restarts(self) -> None:
        objective = _sphere()
        result = optimize(objective, to_unit(objective.box, [3.0, -2.0]), TuningParams(max_runs=1))
        assert result.runs == 1

    def test_large_round_factor_is_accepted(self) -> None:
        objective = _sphere()
        params = TuningParams(round_factor=30, max_runs=3)
        result = optimize(objective, to_unit(objective.box, [3.0, -2.0]), params)

        assert 1 <= result.runs <= 3
        assert result.value <= 1e-9

    def test_solution_is_reported_in_box_coordinates(self) -> None:
        box = Box(lower=(10.0,), upper=(20.0,))
        objective = Objective(func=lambda z: float((z[0] - 12.5) ** 2), box=box)
        result = optimize(objective, [0.9])

        assert result.solution[0] == pytest.approx(12.5, abs=1e-4)
        assert result.unit_solution[0] == pytest.approx(0.25, abs=1e-5)

    def test_trajectory_is_monotone_with_run_boundaries(self, fake_clock) -> None:
        objective = Objective(func=rastrigin, box=Box.cube(-5.12, 5.12, 2))
        result = optimize(objective, to_unit(objective.box, [2.2, -3.1]), clock=fake_clock)
        trajectory = result.trajectory

        values = [p.value for p in trajectory]
        assert all(later <= earlier for earlier, later in zip(values, values[1:]))
        assert [p.evals for p in trajectory] == sorted(p.evals for p in trajectory)
        assert {p.run for p in trajectory} == set(range(1, result.runs + 1))
        assert trajectory[-1].evals == result.total_evals
        assert trajectory[-1].value == result.value

    def test_at_most_2n_evaluations_per_iteration(self) -> None:
        d = 3
        objective = Objective(func=rastrigin, box=Box.cube(-5.12, 5.12, d))
        result = optimize(objective, to_unit(objective.box, [1.1, -2.3, 4.0]))

        for index, outcome in enumerate(result.run_outcomes):
            start_eval = 1 if index == 0 else 0
            assert outcome.evals <= start_eval + 2 * d * outcome.iterations

    def test_non_finite_objective_propagates(self) -> None:
        objective = Objective.on_unit_cube(lambda z: float("inf"), 2)
        with pytest.raises(ObjectiveEvaluationError):
            optimize(objective, [0.5, 0.5])

    def test_recommendation_warnings_are_logged(self, caplog, monkeypatch) -> None:
        # the rmps logger does not propagate to the root handler caplog uses
        monkeypatch.setattr(logging.getLogger("rmps"), "propagate", True)
        params = TuningParams(phi=1e-3, rho1=6.0, round_factor=3, max_runs=2)
        with caplog.at_level("WARNING", logger="rmps"):
            optimize(_constant(1), [0.5], params)

        assert any("rho1=6" in record.getMessage() for record in caplog.records)


class TestDeterminism:
    """Identical trajectories regardless of probe parallelism."""

    @pytest.mark.parametrize("workers", [2, 8])
    def test_results_match_sequential(self, workers: int) -> None:
        spec = lookup("rastrigin", 5)
        start = to_unit(spec.box, random_start(spec.box, 3))
        params = TuningParams(max_runs=5)

        sequential = optimize(spec.objective(), start, params, workers=1)
        threaded = optimize(spec.objective(), start, params, workers=workers)

        np.testing.assert_array_equal(sequential.unit_solution, threaded.unit_solution)
        assert sequential.value == threaded.value
        assert sequential.total_evals == threaded.total_evals
        assert [(p.run, p.iteration, p.evals, p.value) for p in sequential.trajectory] == [
            (p.run, p.iteration, p.evals, p.value) for p in threaded.trajectory
        ]

    def test_shared_evaluator_is_reusable(self, fast_params: TuningParams) -> None:
        objective = _sphere(3)
        start = to_unit(objective.box, [1.0, 2.0, -3.0])
        with ProbeEvaluator(4) as evaluator:
            first = optimize(objective, start, fast_params, evaluator=evaluator)
            second = optimize(objective, start, fast_params, evaluator=evaluator)

        assert first.value == second.value
        assert first.total_evals == second.total_evals


# ---------------------------------------------------------------------------
# Convex fast path
# ---------------------------------------------------------------------------

class TestOptimizeConvex:
    """A single fast-decaying run for convex objectives."""

    def test_single_run(self) -> None:
        objective = _sphere(4)
        result = optimize_convex(objective, to_unit(objective.box, [1.0, -2.0, 3.0, -4.0]))

        assert result.runs == 1
        assert result.value <= 1e-9

    def test_cheaper_than_default_on_sphere(self) -> None:
        objective = _sphere(4)
        start = to_unit(objective.box, [1.0, -2.0, 3.0, -4.0])

        default = optimize(objective, start)
        convex = optimize_convex(objective, start)

        assert convex.total_evals < default.total_evals

    @pytest.mark.parametrize("seed", range(5))
    def test_reaches_minimum_of_strictly_convex_quadratic(self, seed: int) -> None:
        n = 3
        objective, minimizer = _convex_quadratic(n, seed)
        start = np.random.default_rng(100 + seed).random(n)

        result = optimize_convex(objective, start)

        np.testing.assert_allclose(result.unit_solution, minimizer, atol=1e-4)
        assert result.value <= 1e-7
