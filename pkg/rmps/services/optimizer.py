"""
Recursive Modified Pattern Search.

A *run* (STAGE 1) starts from a point of the unit cube with a global step
size ``s`` and, at every iteration, probes the ``2n`` points obtained by
moving one coordinate up or down by a local step.  Local steps equal ``s``
unless the move would leave the cube, in which case they are shrunk by a
power of the decay rate ``rho`` (or the probe is skipped).  The best probe
is taken when it strictly improves the incumbent; when the iterate barely
moves the global step is divided by ``rho``.  A run ends once ``s`` drops to
the step size threshold ``phi``.

The driver (STAGE 2) repeats runs from the previous solution with a slower
decay rate until two consecutive runs agree after rounding, which is what
lets the method climb out of local minima.  For objectives known to be
convex a single fast-decaying run is enough (:func:`optimize_convex`).

Probe evaluations within an iteration are independent and can be fanned
out to a thread pool (:class:`ProbeEvaluator`).  Results are always
gathered in (direction, coordinate) order, so the trajectory never depends
on the number of workers.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from types import TracebackType
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from rmps.services.domain import Box, DomainError, UnitPoint, from_unit, round_point

logger = logging.getLogger(__name__)

CONVEX_RHO = 4.0
"""Decay rate of the single run used when the objective is known to be convex."""


class InvalidTuningError(ValueError):
    """Raised when tuning parameters violate their constraints."""


class ObjectiveEvaluationError(RuntimeError):
    """Raised when the objective fails or returns a non-finite value; aborts the run."""

    def __init__(self, message: str, point: UnitPoint, value: float | None = None) -> None:
        super().__init__(message)
        self.point = point
        self.value = value


# ---------------------------------------------------------------------------
# Tuning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TuningParams:
    """The RMPS tuning parameters with their usual defaults."""

    s_initial: float = 1.0
    rho1: float = 2.0
    rho2: float = 1.05
    phi: float = 1e-6
    max_iter: int = 50000
    max_runs: int = 1000
    tol_fun: float = 1e-15
    round_factor: int = 6

    def __post_init__(self) -> None:
        if not self.rho1 > 1 or not self.rho2 > 1:
            raise InvalidTuningError(
                f"Decay rates must exceed 1 (rho1={self.rho1}, rho2={self.rho2})"
            )
        if not 0 < self.phi < self.s_initial:
            raise InvalidTuningError(
                f"Need 0 < phi < s_initial (phi={self.phi}, s_initial={self.s_initial})"
            )
        if not self.tol_fun > 0:
            raise InvalidTuningError(f"tol_fun must be positive, got {self.tol_fun}")
        if self.max_iter < 1 or self.max_runs < 1:
            raise InvalidTuningError(
                f"max_iter and max_runs must be >= 1 "
                f"(max_iter={self.max_iter}, max_runs={self.max_runs})"
            )
        if self.round_factor < 0:
            raise InvalidTuningError(f"round_factor must be >= 0, got {self.round_factor}")

    @classmethod
    def from_settings(cls, **overrides: Any) -> TuningParams:
        """Build parameters from ``settings.RMPS_TUNING``, then apply ``overrides``."""
        from django.conf import settings

        values = dict(settings.RMPS_TUNING)
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def recommendation_warnings(self) -> list[str]:
        """Describe values outside the ranges known to work well; empty when all fit."""
        warnings = []
        if not 1.05 <= self.rho1 <= 4:
            warnings.append(f"rho1={self.rho1:g} is outside the recommended range [1.05, 4]")
        if not 1.01 <= self.rho2 <= self.rho1:
            warnings.append(
                f"rho2={self.rho2:g} is outside the recommended range [1.01, rho1={self.rho1:g}]"
            )
        if self.round_factor < -math.log10(self.phi):
            warnings.append(
                f"round_factor={self.round_factor} is below -log10(phi)={-math.log10(self.phi):.3g}"
            )
        return warnings


# ---------------------------------------------------------------------------
# Objective contract
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Objective:
    """
    A black-box function posed on a box and evaluated on the unit cube.

    ``func`` receives points of ``box`` (original coordinates); calling the
    objective with a unit-cube point maps it through the inverse bijection
    first.  ``func`` must be deterministic and safe to call from several
    threads at once.
    """

    func: Callable[[NDArray[np.float64]], float]
    box: Box
    name: str = "objective"

    @classmethod
    def on_unit_cube(
        cls, func: Callable[[NDArray[np.float64]], float], dimension: int, name: str = "objective"
    ) -> Objective:
        return cls(func=func, box=Box.unit(dimension), name=name)

    @property
    def dimension(self) -> int:
        return self.box.dimension

    def __call__(self, u: UnitPoint) -> float:
        return float(self.func(self.box.lower_array + u * self.box.widths))


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------


class Direction(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


class Termination(enum.Enum):
    STEP_THRESHOLD = "step_threshold"
    MAX_ITER = "max_iter"


@dataclass(frozen=True, eq=False)
class Probe:
    """
    One coordinate move of the incumbent.

    ``index`` is the 0-based coordinate.  A probe with ``local_step == 0`` is
    skipped: it is never evaluated and keeps the incumbent value, so it can
    never win strictly.
    """

    index: int
    direction: Direction
    local_step: float
    point: UnitPoint
    value: float

    @property
    def skipped(self) -> bool:
        return self.local_step == 0.0


def shrink_exponent(gap: float, s: float, rho: float, phi: float) -> int | None:
    """
    Smallest integer ``f`` with ``s / rho**f < gap``.

    ``gap`` is the distance from the coordinate to the boundary the raw step
    overshoots.  Returns ``None`` when the probe must be skipped instead:
    the gap itself is within ``phi`` of the boundary, or the shrunk step
    would be no larger than ``phi``.
    """
    if gap <= phi:
        return None
    f = math.floor(math.log(s / gap, rho)) + 1
    # log() may land one off near exact powers of rho
    while s / rho**f >= gap:
        f += 1
    while s / rho ** (f - 1) < gap:
        f -= 1
    if s / rho**f <= phi:
        return None
    return f


def build_probes(
    x: UnitPoint, Y: float, s_global: float, rho: float, phi: float
) -> list[Probe]:
    """
    Build the ``2n`` unevaluated probes around ``x``: all plus moves in
    coordinate order, then all minus moves.

    A raw step that stays strictly inside ``(0, 1)`` is kept; one that
    overshoots a boundary more than ``phi`` away is shrunk with
    :func:`shrink_exponent`; anything else (including landing exactly on 0
    or 1) is skipped with ``local_step = 0`` and ``value = Y``.
    """
    n = x.shape[0]
    probes: list[Probe] = []
    for direction in (Direction.PLUS, Direction.MINUS):
        sign = 1.0 if direction is Direction.PLUS else -1.0
        for i in range(n):
            xi = float(x[i])
            q = xi + sign * s_global
            if direction is Direction.PLUS:
                inside, overshoot, gap = q < 1.0, q > 1.0, 1.0 - xi
            else:
                inside, overshoot, gap = q > 0.0, q < 0.0, xi

            step = 0.0
            if inside:
                step = s_global
            elif overshoot and gap > phi:
                f = shrink_exponent(gap, s_global, rho, phi)
                if f is not None:
                    step = s_global / rho**f

            if step == 0.0:
                probes.append(Probe(i, direction, 0.0, x, Y))
                continue
            point = x.copy()
            point[i] = min(max(xi + sign * step, 0.0), 1.0)
            probes.append(Probe(i, direction, step, point, Y))
    return probes


def select_move(probes: Sequence[Probe], Y: float) -> tuple[UnitPoint, float] | None:
    """
    Pick the next iterate from evaluated probes, or ``None`` to stay.

    The best plus and best minus probes are found (first lowest coordinate
    on ties).  A move happens only on strict improvement over ``Y``; the
    minus probe wins when the two are equal.
    """
    plus = [p for p in probes if p.direction is Direction.PLUS]
    minus = [p for p in probes if p.direction is Direction.MINUS]
    best_plus = min(plus, key=lambda p: p.value)
    best_minus = min(minus, key=lambda p: p.value)
    if min(best_plus.value, best_minus.value) >= Y:
        return None
    winner = best_plus if best_plus.value < best_minus.value else best_minus
    return winner.point, winner.value


# ---------------------------------------------------------------------------
# Probe evaluation
# ---------------------------------------------------------------------------


def evaluate_point(objective: Callable[[UnitPoint], float], u: UnitPoint) -> float:
    """Evaluate the objective at ``u``, rejecting failures and non-finite values."""
    try:
        value = float(objective(u))
    except (ArithmeticError, ValueError) as exc:
        raise ObjectiveEvaluationError(
            f"Objective failed at {np.array2string(u, precision=6)}: {exc}", point=u
        ) from exc
    if not math.isfinite(value):
        raise ObjectiveEvaluationError(
            f"Objective returned {value!r} at {np.array2string(u, precision=6)}",
            point=u,
            value=value,
        )
    return value


class ProbeEvaluator:
    """
    Evaluates the non-skipped probes of an iteration.

    With ``workers == 1`` evaluation is sequential.  With more workers the
    probes are mapped over a :class:`~concurrent.futures.ThreadPoolExecutor`;
    ``Executor.map`` yields results in submission order, so the outcome is
    identical to the sequential one.  Use as a context manager to release
    the pool.
    """

    def __init__(self, workers: int = 1) -> None:
        if workers < 1:
            raise InvalidTuningError(f"workers must be >= 1, got {workers}")
        self.workers = workers
        self._executor: ThreadPoolExecutor | None = None
        if workers > 1:
            self._executor = ThreadPoolExecutor(
                max_workers=workers, thread_name_prefix="rmps-probe"
            )

    def __enter__(self) -> ProbeEvaluator:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.close()

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def evaluate(
        self, objective: Callable[[UnitPoint], float], probes: Sequence[Probe]
    ) -> tuple[list[Probe], int]:
        """Return the probes with values filled in and the number of evaluations made."""
        pending = [k for k, probe in enumerate(probes) if not probe.skipped]
        points = [probes[k].point for k in pending]
        if self._executor is None or len(points) < 2:
            values: Iterable[float] = [evaluate_point(objective, u) for u in points]
        else:
            values = self._executor.map(lambda u: evaluate_point(objective, u), points)

        evaluated = list(probes)
        for k, value in zip(pending, values):
            evaluated[k] = replace(probes[k], value=value)
        return evaluated, len(points)


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunOutcome:
    """Result of a single run."""

    solution: UnitPoint
    value: float
    iterations: int
    evals: int
    terminated_by: Termination
    final_step: float


@dataclass(frozen=True)
class TrajectoryPoint:
    """Incumbent after an improving iteration, or at a run boundary."""

    run: int
    iteration: int
    evals: int
    value: float
    elapsed: float


@dataclass(frozen=True)
class OptimizeResult:
    """Final solution of an optimization job, in both coordinate systems."""

    solution: NDArray[np.float64]
    unit_solution: UnitPoint
    value: float
    runs: int
    total_evals: int
    trajectory: list[TrajectoryPoint] = field(default_factory=list)
    run_outcomes: list[RunOutcome] = field(default_factory=list)


TraceCallback = Callable[[int, int, float], None]
"""Called with (iteration, evals so far in the run, incumbent value)."""


# ---------------------------------------------------------------------------
# STAGE 1
# ---------------------------------------------------------------------------


def _check_start(objective: Objective, x0: ArrayLike) -> UnitPoint:
    start = np.array(x0, dtype=float)
    if start.shape != (objective.dimension,):
        raise DomainError(
            f"Start point has shape {start.shape}, expected ({objective.dimension},)"
        )
    if np.any(~np.isfinite(start)) or np.any(start < 0.0) or np.any(start > 1.0):
        raise DomainError("Start point must lie in the unit cube")
    return start


def run_stage1(
    objective: Objective,
    x0: ArrayLike,
    params: TuningParams,
    rho: float,
    eval_cache: float | None = None,
    *,
    evaluator: ProbeEvaluator | None = None,
    trace: TraceCallback | None = None,
) -> RunOutcome:
    """
    Execute one run from ``x0`` with decay rate ``rho``.

    Args:
        objective:  Function to minimize.
        x0:         Starting point in the unit cube.
        params:     Tuning parameters (``rho1``/``rho2`` are ignored here).
        rho:        Decay rate of the global step size for this run.
        eval_cache: Known objective value at ``x0``; evaluated when omitted.
        evaluator:  Probe evaluator to use; a sequential one by default.
        trace:      Optional callback invoked at the start and after every
                    improving iteration.

    Returns:
        The run's :class:`RunOutcome`.

    Raises:
        ObjectiveEvaluationError: The objective failed or returned NaN/inf.
    """
    if not rho > 1:
        raise InvalidTuningError(f"Decay rate must exceed 1, got {rho}")
    x = _check_start(objective, x0)
    evaluator = evaluator or ProbeEvaluator(1)

    evals = 0
    if eval_cache is None:
        Y = evaluate_point(objective, x)
        evals += 1
    else:
        Y = float(eval_cache)
    if trace is not None:
        trace(0, evals, Y)

    s = params.s_initial
    x_prev, Y_prev = x, Y
    j = 1
    while True:
        if j > params.max_iter:
            logger.debug("Run hit max_iter=%d with step %.3e", params.max_iter, s)
            return RunOutcome(x_prev, Y_prev, j - 1, evals, Termination.MAX_ITER, s)

        probes = build_probes(x, Y, s, rho, params.phi)
        probes, used = evaluator.evaluate(objective, probes)
        evals += used

        x_prev, Y_prev = x, Y
        move = select_move(probes, Y)
        if move is not None:
            x, Y = move
            if trace is not None:
                trace(j, evals, Y)
        j += 1

        if float(np.sum((x - x_prev) ** 2)) < params.tol_fun:
            s = s / rho
            if s <= params.phi:
                return RunOutcome(x, Y, j - 1, evals, Termination.STEP_THRESHOLD, s)


# ---------------------------------------------------------------------------
# STAGE 2
# ---------------------------------------------------------------------------


class _TrajectoryRecorder:
    def __init__(self, clock: Callable[[], float]) -> None:
        self._clock = clock
        self._started = clock()
        self.points: list[TrajectoryPoint] = []
        self.run = 0
        self.offset = 0

    def start_run(self, run: int, offset: int) -> TraceCallback:
        self.run, self.offset = run, offset
        return self.record

    def record(self, iteration: int, evals: int, value: float) -> None:
        self.points.append(
            TrajectoryPoint(
                run=self.run,
                iteration=iteration,
                evals=self.offset + evals,
                value=value,
                elapsed=self._clock() - self._started,
            )
        )

    def close_run(self, outcome: RunOutcome) -> None:
        last = self.points[-1]
        if last.run == self.run and last.iteration == outcome.iterations:
            if last.value == outcome.value:
                return
            # a run stopped by max_iter drops the move of its last iteration
            self.points.pop()
        self.record(outcome.iterations, outcome.evals, outcome.value)


def _finish(
    objective: Objective,
    outcomes: list[RunOutcome],
    recorder: _TrajectoryRecorder,
) -> OptimizeResult:
    final = outcomes[-1]
    return OptimizeResult(
        solution=from_unit(objective.box, final.solution),
        unit_solution=final.solution,
        value=final.value,
        runs=len(outcomes),
        total_evals=sum(outcome.evals for outcome in outcomes),
        trajectory=recorder.points,
        run_outcomes=outcomes,
    )


def optimize(
    objective: Objective,
    x0: ArrayLike,
    params: TuningParams | None = None,
    *,
    workers: int = 1,
    evaluator: ProbeEvaluator | None = None,
    clock: Callable[[], float] = time.perf_counter,
) -> OptimizeResult:
    """
    Minimize ``objective`` with restarts.

    The first run decays with ``rho1``; each following run restarts from the
    previous solution with ``rho2``.  Stops once two consecutive solutions
    agree after rounding to ``round_factor`` digits, or after ``max_runs``
    runs.

    Args:
        objective: Function to minimize.
        x0:        Starting point in the unit cube.
        params:    Tuning parameters; defaults when omitted.
        workers:   Probe-evaluation threads (ignored when ``evaluator`` given).
        evaluator: Shared probe evaluator.
        clock:     Time source for the trajectory's elapsed column.

    Returns:
        The final :class:`OptimizeResult`.

    Raises:
        ObjectiveEvaluationError: A run aborted on a bad objective value.
    """
    params = params or TuningParams()
    if evaluator is None:
        with ProbeEvaluator(workers) as own_evaluator:
            return optimize(objective, x0, params, evaluator=own_evaluator, clock=clock)

    for warning in params.recommendation_warnings():
        logger.warning("%s: %s", objective.name, warning)

    recorder = _TrajectoryRecorder(clock)
    outcome = run_stage1(
        objective, x0, params, params.rho1,
        evaluator=evaluator, trace=recorder.start_run(1, 0),
    )
    recorder.close_run(outcome)
    outcomes = [outcome]
    total = outcome.evals
    logger.debug("Run 1 of %s: value=%.6e evals=%d", objective.name, outcome.value, outcome.evals)

    while len(outcomes) < params.max_runs:
        previous = outcomes[-1]
        outcome = run_stage1(
            objective, previous.solution, params, params.rho2, previous.value,
            evaluator=evaluator, trace=recorder.start_run(len(outcomes) + 1, total),
        )
        recorder.close_run(outcome)
        outcomes.append(outcome)
        total += outcome.evals
        logger.debug(
            "Run %d of %s: value=%.6e evals=%d",
            len(outcomes), objective.name, outcome.value, outcome.evals,
        )
        if np.array_equal(
            round_point(outcome.solution, params.round_factor),
            round_point(previous.solution, params.round_factor),
        ):
            break

    result = _finish(objective, outcomes, recorder)
    logger.info(
        "%s: value=%.6e after %d runs, %d evaluations",
        objective.name, result.value, result.runs, result.total_evals,
    )
    return result


def optimize_convex(
    objective: Objective,
    x0: ArrayLike,
    params: TuningParams | None = None,
    *,
    rho: float = CONVEX_RHO,
    workers: int = 1,
    evaluator: ProbeEvaluator | None = None,
    clock: Callable[[], float] = time.perf_counter,
) -> OptimizeResult:
    """
    Minimize an objective the caller knows to be convex: one run with a
    fast decay rate (4 by default), no restarts.
    """
    params = params or TuningParams()
    if evaluator is None:
        with ProbeEvaluator(workers) as own_evaluator:
            return optimize_convex(
                objective, x0, params, rho=rho, evaluator=own_evaluator, clock=clock
            )

    recorder = _TrajectoryRecorder(clock)
    outcome = run_stage1(
        objective, x0, params, rho, evaluator=evaluator, trace=recorder.start_run(1, 0)
    )
    recorder.close_run(outcome)
    result = _finish(objective, [outcome], recorder)
    logger.info(
        "%s (convex): value=%.6e after %d evaluations",
        objective.name, result.value, result.total_evals,
    )
    return result
