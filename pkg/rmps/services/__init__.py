"""Services package: the optimizer, its objectives and the experiment layer."""

from rmps.services.completion import (
    CompletionError,
    CompletionResult,
    MaskedMatrix,
    ScadParams,
    complete,
    completion_objective,
    make_completion_objective,
    scad_penalty,
    singular_values,
    solve_completion,
)
from rmps.services.domain import Box, DomainError, from_unit, round_point, to_unit
from rmps.services.experiment_service import (
    ExperimentConfig,
    ExperimentConfigError,
    ExperimentService,
)
from rmps.services.objectives import (
    BenchmarkError,
    BenchmarkSpec,
    UnknownBenchmarkError,
    evaluate_benchmark,
    lookup,
    random_start,
)
from rmps.services.optimizer import (
    InvalidTuningError,
    Objective,
    ObjectiveEvaluationError,
    OptimizeResult,
    ProbeEvaluator,
    RunOutcome,
    TuningParams,
    optimize,
    optimize_convex,
    run_stage1,
)
from rmps.services.pgm import PGMFormatError, read_pgm, write_pgm

__all__ = [
    "BenchmarkError",
    "BenchmarkSpec",
    "Box",
    "CompletionError",
    "CompletionResult",
    "DomainError",
    "ExperimentConfig",
    "ExperimentConfigError",
    "ExperimentService",
    "InvalidTuningError",
    "MaskedMatrix",
    "Objective",
    "ObjectiveEvaluationError",
    "OptimizeResult",
    "PGMFormatError",
    "ProbeEvaluator",
    "RunOutcome",
    "ScadParams",
    "TuningParams",
    "UnknownBenchmarkError",
    "complete",
    "completion_objective",
    "evaluate_benchmark",
    "from_unit",
    "lookup",
    "make_completion_objective",
    "optimize",
    "optimize_convex",
    "random_start",
    "read_pgm",
    "round_point",
    "run_stage1",
    "scad_penalty",
    "singular_values",
    "solve_completion",
    "to_unit",
    "write_pgm",
]
