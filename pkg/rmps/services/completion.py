"""
Matrix completion with a SCAD penalty on singular values.

Given a partially observed matrix ``Y``, the missing entries are chosen to
minimize ``sum_i scad(sigma_i(X))`` where ``X`` agrees with ``Y`` on every
observed entry.  The missing entries are the free variables of a black-box
problem on ``[0, 255]^m`` (grey levels), solved with :func:`optimize`.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from rmps.services.domain import Box, to_unit
from rmps.services.optimizer import Objective, OptimizeResult, TuningParams, optimize

logger = logging.getLogger(__name__)

GREY_RANGE = (0.0, 255.0)


class CompletionError(ValueError):
    """Raised for invalid completion inputs."""


@dataclass(frozen=True, eq=False)
class MaskedMatrix:
    """
    A matrix with missing entries.

    ``mask`` is True where the entry is observed.  Values under missing
    entries are ignored.
    """

    values: NDArray[np.float64]
    mask: NDArray[np.bool_]

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        mask = np.array(self.mask, dtype=bool)
        if values.ndim != 2:
            raise CompletionError(f"Expected a 2-D matrix, got shape {values.shape}")
        if values.shape != mask.shape:
            raise CompletionError(
                f"Values {values.shape} and mask {mask.shape} differ in shape"
            )
        if not mask.any():
            raise CompletionError("At least one entry must be observed")
        if not np.all(np.isfinite(values[mask])):
            raise CompletionError("Observed entries must be finite")
        values[~mask] = 0.0
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def missing_count(self) -> int:
        return int((~self.mask).sum())

    def observed_mean(self) -> float:
        return float(self.values[self.mask].mean())

    def fill(self, missing_vals: ArrayLike) -> NDArray[np.float64]:
        """Return a new matrix with ``missing_vals`` written into the missing slots (row-major)."""
        fill = np.asarray(missing_vals, dtype=float).ravel()
        if fill.size != self.missing_count:
            raise CompletionError(
                f"Got {fill.size} values for {self.missing_count} missing entries"
            )
        matrix = self.values.copy()
        matrix[~self.mask] = fill
        return matrix


@dataclass(frozen=True)
class ScadParams:
    lam: float
    a: float = 3.7

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise CompletionError(f"SCAD lambda must be positive, got {self.lam}")
        if not self.a > 2:
            raise CompletionError(f"SCAD a must exceed 2, got {self.a}")


def scad_penalty(theta: ArrayLike, p: ScadParams) -> float | NDArray[np.float64]:
    """
    SCAD penalty, elementwise.

    Linear (``lam * theta``) up to ``lam``, quadratic up to ``a * lam`` and
    constant ``lam**2 (a + 1) / 2`` beyond.  Returns a float for scalar input.

    Raises:
        CompletionError: Any ``theta`` is negative.
    """
    t = np.asarray(theta, dtype=float)
    if np.any(t < 0):
        raise CompletionError("SCAD penalty is defined for theta >= 0")
    lam, a = p.lam, p.a
    middle = (2.0 * a * lam * t - t**2 - lam**2) / (2.0 * (a - 1.0))
    plateau = lam**2 * (a + 1.0) / 2.0
    penalty = np.where(t <= lam, lam * t, np.where(t <= a * lam, middle, plateau))
    if penalty.ndim == 0:
        return float(penalty)
    return penalty


def singular_values(M: ArrayLike) -> NDArray[np.float64]:
    """
    Singular values in nonincreasing order.

    Raises:
        CompletionError: ``M`` is not a finite 2-D matrix.
    """
    matrix = np.asarray(M, dtype=float)
    if matrix.ndim != 2:
        raise CompletionError(f"Expected a 2-D matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise CompletionError("Matrix has non-finite entries")
    return np.linalg.svd(matrix, compute_uv=False)


def completion_objective(
    missing_vals: ArrayLike,
    masked: MaskedMatrix,
    p: ScadParams,
    value_range: tuple[float, float] | None = GREY_RANGE,
) -> float:
    """
    ``sum_i scad(sigma_i(X))`` for ``X`` filled with ``missing_vals``.

    Raises:
        CompletionError: Wrong number of values, or values outside
            ``value_range`` (pass ``None`` to allow any finite value).
    """
    fill = np.asarray(missing_vals, dtype=float).ravel()
    if value_range is not None and fill.size:
        low, high = value_range
        if np.any(fill < low) or np.any(fill > high):
            raise CompletionError(f"Missing values must lie in [{low}, {high}]")
    matrix = masked.fill(fill)
    return float(np.sum(scad_penalty(singular_values(matrix), p)))


def make_completion_objective(
    masked: MaskedMatrix, p: ScadParams, *, repeat: int = 1
) -> Objective:
    """
    The completion problem as an optimizer objective on ``[0, 255]^m``.

    ``repeat > 1`` recomputes the value that many times per call, which makes
    evaluations artificially expensive for timing parallel probe evaluation.
    """
    if repeat < 1:
        raise CompletionError(f"repeat must be >= 1, got {repeat}")

    def func(z: NDArray[np.float64]) -> float:
        value = 0.0
        for _ in range(repeat):
            value = completion_objective(z, masked, p)
        return value

    box = Box.cube(*GREY_RANGE, masked.missing_count)
    return Objective(func=func, box=box, name=f"scad-completion[lambda={p.lam:g}]")


@dataclass(frozen=True)
class CompletionResult:
    matrix: NDArray[np.float64]
    objective: float
    start_objective: float
    evals: int = 0
    runs: int = 0
    seconds: float = 0.0
    optimize_result: OptimizeResult | None = field(default=None, repr=False)


def solve_completion(
    masked: MaskedMatrix,
    p: ScadParams,
    params: TuningParams | None = None,
    workers: int = 1,
    *,
    repeat: int = 1,
    clock: Callable[[], float] = time.perf_counter,
) -> CompletionResult:
    """
    Complete ``masked`` and report the objective before and after.

    Every missing entry starts at the mean of the observed entries.  A fully
    observed matrix is returned unchanged without any evaluation.
    """
    started = clock()
    m = masked.missing_count
    if m == 0:
        value = completion_objective([], masked, p)
        return CompletionResult(
            matrix=masked.values.copy(), objective=value, start_objective=value,
            seconds=clock() - started,
        )

    mean = masked.observed_mean()
    low, high = GREY_RANGE
    if not low <= mean <= high:
        raise CompletionError(
            f"Observed entries average {mean:g}, outside the grey range [{low:g}, {high:g}]; "
            "the mean-fill start point would be infeasible"
        )
    objective = make_completion_objective(masked, p, repeat=repeat)
    start = np.full(m, mean)
    start_value = completion_objective(start, masked, p)
    logger.info(
        "Completing %dx%d matrix: %d missing entries, lambda=%g, %d worker(s)",
        masked.rows, masked.cols, m, p.lam, workers,
    )
    result = optimize(objective, to_unit(objective.box, start), params, workers=workers, clock=clock)
    return CompletionResult(
        matrix=masked.fill(result.solution),
        objective=result.value,
        start_objective=start_value,
        evals=result.total_evals,
        runs=result.runs,
        seconds=clock() - started,
        optimize_result=result,
    )


def complete(
    masked: MaskedMatrix,
    p: ScadParams,
    params: TuningParams | None = None,
    workers: int = 1,
) -> NDArray[np.float64]:
    """Return ``masked`` with its missing entries filled in; see :func:`solve_completion`."""
    return solve_completion(masked, p, params, workers).matrix
