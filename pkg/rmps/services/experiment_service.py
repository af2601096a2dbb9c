"""
Experiment service layer.

Runs the batch experiments behind the ``rmps`` command: seeded multi-start
benchmark runs, the convex fast-path comparison and matrix completion over
a list of SCAD lambdas.  The command stays thin and delegates here; this
service resolves benchmarks, drives the optimizer and writes CSV/PGM
artifacts.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from rmps.services.completion import CompletionResult, ScadParams, solve_completion
from rmps.services.domain import to_unit
from rmps.services.objectives import BenchmarkSpec, lookup, random_start
from rmps.services.optimizer import (
    CONVEX_RHO,
    OptimizeResult,
    ProbeEvaluator,
    TrajectoryPoint,
    TuningParams,
    optimize,
    optimize_convex,
)
from rmps.services.pgm import read_pgm, write_pgm

logger = logging.getLogger(__name__)

TRAJECTORY_HEADER = ["run", "iteration", "cumulative_evals", "elapsed_seconds", "best_value"]
SUMMARY_HEADER = ["seed", "start", "final_value", "evals", "runs", "seconds"]
CONVEX_HEADER = [
    "seed", "default_final_value", "default_evals", "convex_final_value", "convex_evals",
]
COMPLETION_HEADER = ["lambda", "final_objective", "evals", "seconds"]


class ExperimentConfigError(ValueError):
    """Raised when an experiment configuration violates its constraints."""


def fmt(value: float) -> str:
    """Scientific notation with ten significant digits."""
    return f"{value:.9e}"


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment request (see ``rmps.serializers``)."""

    subcommand: str
    function: str | None = None
    dimension: int | None = None
    suite: str = "standard"
    seeds: tuple[int, ...] = ()
    tuning: TuningParams = field(default_factory=TuningParams)
    workers: int = 1
    out: Path = Path("results")
    image: Path | None = None
    mask: Path | None = None
    lambdas: tuple[float, ...] = ()
    scad_a: float = 3.7
    repeat: int = 1
    convex_rho: float = CONVEX_RHO


@dataclass(frozen=True)
class SeedOutcome:
    seed: int
    start: np.ndarray
    final_value: float
    evals: int
    runs: int
    seconds: float


@dataclass(frozen=True)
class BenchSummary:
    """Per-seed outcomes of a multi-start experiment."""

    spec: BenchmarkSpec
    outcomes: list[SeedOutcome]

    @property
    def min_value(self) -> float:
        return min(outcome.final_value for outcome in self.outcomes)

    @property
    def max_value(self) -> float:
        return max(outcome.final_value for outcome in self.outcomes)


@dataclass(frozen=True)
class ConvexComparison:
    seed: int
    default: SeedOutcome
    convex: SeedOutcome


@dataclass(frozen=True)
class ConvexSummary:
    spec: BenchmarkSpec
    comparisons: list[ConvexComparison]


@dataclass(frozen=True)
class CompletionRun:
    lam: float
    result: CompletionResult
    image_path: Path


class ExperimentService:
    """
    Orchestrates experiments and their output files.

    Args:
        clock: Time source for elapsed-time columns; injectable so that
            tests can make every output byte-for-byte reproducible.
    """

    def __init__(self, clock: Callable[[], float] = time.perf_counter) -> None:
        self._clock = clock

    # ------------------------------------------------------------------
    # Public methods
    # ------------------------------------------------------------------

    def run_bench(self, config: ExperimentConfig) -> BenchSummary:
        """
        Run the default optimizer from every seed's random start.

        Writes one trajectory CSV per seed, ``summary.csv`` and
        ``extrema.csv`` (min and max final values across seeds).

        Raises:
            ExperimentConfigError: Missing function or empty seed list.
            UnknownBenchmarkError: The function is not registered.
            OSError: Output files cannot be written.
        """
        spec = self._resolve(config)
        out = self._prepare_out(config.out)
        outcomes = []
        with ProbeEvaluator(config.workers) as evaluator:
            for seed in config.seeds:
                start = random_start(spec.box, seed)
                outcome, result = self._timed(
                    seed, start,
                    lambda x0: optimize(
                        spec.objective(), x0, config.tuning,
                        evaluator=evaluator, clock=self._clock,
                    ),
                    spec,
                )
                self._write_trajectory(out / f"{self._stem(spec)}_seed{seed}.csv", result.trajectory)
                outcomes.append(outcome)

        summary = BenchSummary(spec=spec, outcomes=outcomes)
        self._write_rows(
            out / "summary.csv",
            SUMMARY_HEADER,
            (
                [o.seed, " ".join(fmt(v) for v in o.start), fmt(o.final_value), o.evals, o.runs,
                 fmt(o.seconds)]
                for o in outcomes
            ),
        )
        self._write_rows(
            out / "extrema.csv",
            ["statistic", "final_value"],
            [["min", fmt(summary.min_value)], ["max", fmt(summary.max_value)]],
        )
        logger.info(
            "%s: %d seeds, min=%.6e max=%.6e",
            self._stem(spec), len(outcomes), summary.min_value, summary.max_value,
        )
        return summary

    def run_convex(self, config: ExperimentConfig) -> ConvexSummary:
        """
        Run the default optimizer and the convex fast path from identical
        starts, writing both trajectories per seed and ``convex_summary.csv``.
        """
        spec = self._resolve(config)
        out = self._prepare_out(config.out)
        comparisons = []
        with ProbeEvaluator(config.workers) as evaluator:
            for seed in config.seeds:
                start = random_start(spec.box, seed)
                default, default_result = self._timed(
                    seed, start,
                    lambda x0: optimize(
                        spec.objective(), x0, config.tuning,
                        evaluator=evaluator, clock=self._clock,
                    ),
                    spec,
                )
                convex, convex_result = self._timed(
                    seed, start,
                    lambda x0: optimize_convex(
                        spec.objective(), x0, config.tuning, rho=config.convex_rho,
                        evaluator=evaluator, clock=self._clock,
                    ),
                    spec,
                )
                stem = f"{self._stem(spec)}_seed{seed}"
                self._write_trajectory(out / f"{stem}_default.csv", default_result.trajectory)
                self._write_trajectory(out / f"{stem}_convex.csv", convex_result.trajectory)
                comparisons.append(ConvexComparison(seed=seed, default=default, convex=convex))

        self._write_rows(
            out / "convex_summary.csv",
            CONVEX_HEADER,
            (
                [c.seed, fmt(c.default.final_value), c.default.evals,
                 fmt(c.convex.final_value), c.convex.evals]
                for c in comparisons
            ),
        )
        return ConvexSummary(spec=spec, comparisons=comparisons)

    def run_complete(self, config: ExperimentConfig) -> list[CompletionRun]:
        """
        Complete the configured image once per lambda.

        Writes ``completed_lambda<lambda>.pgm`` per lambda and
        ``completion.csv``.

        Raises:
            ExperimentConfigError: Missing image/mask or empty lambda list.
            PGMFormatError: The image or mask is malformed.
        """
        if config.image is None or config.mask is None:
            raise ExperimentConfigError("complete needs both an image and a mask")
        if not config.lambdas:
            raise ExperimentConfigError("complete needs at least one lambda")
        self._check_workers(config)

        masked = read_pgm(config.image, config.mask)
        out = self._prepare_out(config.out)
        runs = []
        for lam in config.lambdas:
            result = solve_completion(
                masked, ScadParams(lam=lam, a=config.scad_a), config.tuning, config.workers,
                repeat=config.repeat, clock=self._clock,
            )
            image_path = write_pgm(result.matrix, out / f"completed_lambda{lam:g}.pgm")
            logger.info(
                "lambda=%g: objective %.6e -> %.6e in %d evaluations, wrote %s",
                lam, result.start_objective, result.objective, result.evals, image_path,
            )
            runs.append(CompletionRun(lam=lam, result=result, image_path=image_path))

        self._write_rows(
            out / "completion.csv",
            COMPLETION_HEADER,
            ([f"{r.lam:g}", fmt(r.result.objective), r.result.evals, fmt(r.result.seconds)] for r in runs),
        )
        return runs

    # ------------------------------------------------------------------
    # Private helpers
    # ------------------------------------------------------------------

    def _resolve(self, config: ExperimentConfig) -> BenchmarkSpec:
        if not config.function:
            raise ExperimentConfigError(f"{config.subcommand} needs a benchmark function")
        if not config.seeds:
            raise ExperimentConfigError(f"{config.subcommand} needs at least one seed")
        self._check_workers(config)
        return lookup(config.function, config.dimension, config.suite)

    @staticmethod
    def _check_workers(config: ExperimentConfig) -> None:
        if config.workers < 1:
            raise ExperimentConfigError(f"workers must be >= 1, got {config.workers}")

    @staticmethod
    def _prepare_out(out: Path) -> Path:
        out.mkdir(parents=True, exist_ok=True)
        return out

    @staticmethod
    def _stem(spec: BenchmarkSpec) -> str:
        return f"{spec.name}_d{spec.dimension}_{spec.suite}"

    def _timed(
        self,
        seed: int,
        start: np.ndarray,
        solve: Callable[[np.ndarray], OptimizeResult],
        spec: BenchmarkSpec,
    ) -> tuple[SeedOutcome, OptimizeResult]:
        started = self._clock()
        result = solve(to_unit(spec.box, start))
        seconds = self._clock() - started
        logger.info(
            "%s seed %d: value=%.6e evals=%d runs=%d (%.2fs)",
            self._stem(spec), seed, result.value, result.total_evals, result.runs, seconds,
        )
        outcome = SeedOutcome(
            seed=seed, start=start, final_value=result.value,
            evals=result.total_evals, runs=result.runs, seconds=seconds,
        )
        return outcome, result

    def _write_trajectory(self, path: Path, trajectory: Sequence[TrajectoryPoint]) -> None:
        self._write_rows(
            path,
            TRAJECTORY_HEADER,
            ([p.run, p.iteration, p.evals, fmt(p.elapsed), fmt(p.value)] for p in trajectory),
        )

    @staticmethod
    def _write_rows(path: Path, header: list[str], rows: Iterable[Sequence[object]]) -> None:
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        logger.debug("Wrote %s", path)
