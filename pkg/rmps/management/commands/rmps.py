"""
``rmps`` management command.

The command is intentionally thin: it merges an optional JSON manifest with
command-line flags (flags win), validates the result with the serializers,
delegates to :class:`ExperimentService` and turns every typed error into a
``CommandError`` (exit status 1 with a diagnostic).

Usage::

    python -m rmps bench --fn sphere --dim 2 --suite standard --seeds 1:10 --out results/
    python -m rmps convex --fn sum_squares --dim 20 --seeds 1:10 --out results/
    python -m rmps complete --image face.pgm --mask face_mask.pgm --lambda 100,900 --workers 4
    python -m rmps list
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from django.core.management.base import BaseCommand, CommandError, CommandParser

from rmps.serializers import BenchConfigSerializer, CompleteConfigSerializer
from rmps.services import (
    BenchmarkError,
    CompletionError,
    DomainError,
    ExperimentConfigError,
    ExperimentService,
    InvalidTuningError,
    ObjectiveEvaluationError,
    PGMFormatError,
)
from rmps.services.experiment_service import BenchSummary, CompletionRun, ConvexSummary
from rmps.services.objectives import SUITES, iter_specs

TUNING_FLAGS = (
    "s_initial", "rho1", "rho2", "phi", "max_iter", "max_runs", "tol_fun", "round_factor",
)

SERVICE_ERRORS = (
    BenchmarkError,
    CompletionError,
    DomainError,
    ExperimentConfigError,
    InvalidTuningError,
    ObjectiveEvaluationError,
    PGMFormatError,
)


def _add_common(parser: CommandParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON experiment manifest")
    parser.add_argument("--workers", type=int, help="Probe-evaluation threads (1 = sequential)")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--s-initial", dest="s_initial", type=float)
    parser.add_argument("--rho1", type=float)
    parser.add_argument("--rho2", type=float)
    parser.add_argument("--phi", type=float)
    parser.add_argument("--round-factor", dest="round_factor", type=int)
    parser.add_argument("--tol-fun", dest="tol_fun", type=float)
    parser.add_argument("--max-iter", dest="max_iter", type=int)
    parser.add_argument("--max-runs", dest="max_runs", type=int)


def _parse_lambdas(raw: str | None) -> list[str] | None:
    if raw is None:
        return None
    return [item.strip() for item in raw.split(",") if item.strip()]


class Command(BaseCommand):
    help = "Recursive Modified Pattern Search experiments: bench, convex, complete, list."

    def add_arguments(self, parser: CommandParser) -> None:
        subcommands = parser.add_subparsers(dest="subcommand", required=True)

        for name, summary in (
            ("bench", "Seeded multi-start runs on a benchmark function"),
            ("convex", "Compare the default optimizer with the convex fast path"),
        ):
            sub = subcommands.add_parser(name, help=summary)
            sub.add_argument("--fn", help="Benchmark name (see 'list')")
            sub.add_argument("--dim", type=int, help="Dimension")
            sub.add_argument("--suite", choices=SUITES)
            sub.add_argument("--seeds", help='Consecutive seeds as "base:count"')
            _add_common(sub)

        complete = subcommands.add_parser("complete", help="SCAD matrix completion of a PGM image")
        complete.add_argument("--image", help="PGM image (P2 or P5, maxval 255)")
        complete.add_argument("--mask", help="PGM mask: 255 observed, 0 missing")
        complete.add_argument("--lambda", dest="lambdas", help="Comma-separated SCAD lambdas")
        complete.add_argument("--scad-a", dest="scad_a", type=float)
        complete.add_argument("--repeat", type=int, help="Recompute each evaluation N times")
        _add_common(complete)

        subcommands.add_parser("list", help="List benchmark functions")

    def handle(self, *args: Any, **options: Any) -> None:
        subcommand = options["subcommand"]
        if subcommand == "list":
            self._list()
            return

        payload = self._payload(options)
        if subcommand == "complete":
            serializer = CompleteConfigSerializer(data=payload)
        else:
            serializer = BenchConfigSerializer(data=payload, subcommand=subcommand)
        if not serializer.is_valid():
            raise CommandError(f"Invalid {subcommand} configuration: {serializer.errors}")

        config = serializer.to_config()
        service = ExperimentService()
        try:
            if subcommand == "bench":
                summary = service.run_bench(config)
                self._report_bench(summary)
            elif subcommand == "convex":
                self._report_convex(service.run_convex(config))
            else:
                self._report_complete(service.run_complete(config))
        except SERVICE_ERRORS as exc:
            raise CommandError(str(exc)) from exc
        except OSError as exc:
            raise CommandError(f"I/O error: {exc}") from exc

    # ------------------------------------------------------------------
    # Input
    # ------------------------------------------------------------------

    def _payload(self, options: dict[str, Any]) -> dict[str, Any]:
        payload: dict[str, Any] = {}
        if options.get("config"):
            try:
                payload = json.loads(Path(options["config"]).read_text(encoding="utf-8"))
            except (OSError, ValueError) as exc:
                raise CommandError(f"Cannot read config {options['config']}: {exc}") from exc
            if not isinstance(payload, dict):
                raise CommandError("Config file must hold a JSON object")

        tuning = dict(payload.get("tuning") or {})
        tuning.update({k: options[k] for k in TUNING_FLAGS if options.get(k) is not None})
        if tuning:
            payload["tuning"] = tuning

        flags = {
            key: options.get(key)
            for key in ("fn", "dim", "suite", "seeds", "workers", "out",
                        "image", "mask", "scad_a", "repeat")
        }
        flags["lambdas"] = _parse_lambdas(options.get("lambdas"))
        payload.update({key: value for key, value in flags.items() if value is not None})
        return payload

    # ------------------------------------------------------------------
    # Output
    # ------------------------------------------------------------------

    def _list(self) -> None:
        self.stdout.write(f"{'name':<26}{'suite':<10}{'dim':<8}{'domain':<36}known_min")
        for suite in SUITES:
            for spec in iter_specs(suite):
                if spec.scalable:
                    dim = "any"
                    domain = f"[{spec.box.lower[0]:g}, {spec.box.upper[0]:g}]^d"
                    known = "unknown" if spec.known_min is None else f"{spec.known_min:g} (d=2)"
                else:
                    dim = str(spec.dimension)
                    domain = str(spec.box)
                    known = "unknown" if spec.known_min is None else f"{spec.known_min:g}"
                self.stdout.write(f"{spec.name:<26}{suite:<10}{dim:<8}{domain:<36}{known}")

    def _report_bench(self, summary: BenchSummary) -> None:
        self.stdout.write(f"{'seed':>8}  {'final_value':>16}  {'evals':>10}  {'runs':>5}")
        for outcome in summary.outcomes:
            self.stdout.write(
                f"{outcome.seed:>8}  {outcome.final_value:>16.6e}  {outcome.evals:>10}  {outcome.runs:>5}"
            )
        self.stdout.write(
            self.style.SUCCESS(
                f"RMPS (min) {summary.min_value:.6e}   RMPS (max) {summary.max_value:.6e}"
            )
        )

    def _report_convex(self, summary: ConvexSummary) -> None:
        self.stdout.write(
            f"{'seed':>8}  {'default':>14}  {'evals':>10}  {'convex':>14}  {'evals':>10}"
        )
        for c in summary.comparisons:
            self.stdout.write(
                f"{c.seed:>8}  {c.default.final_value:>14.6e}  {c.default.evals:>10}  "
                f"{c.convex.final_value:>14.6e}  {c.convex.evals:>10}"
            )
        self.stdout.write(self.style.SUCCESS(f"{len(summary.comparisons)} seeds compared"))

    def _report_complete(self, runs: list[CompletionRun]) -> None:
        for run in runs:
            self.stdout.write(
                f"lambda={run.lam:g}  objective={run.result.objective:.6e}  "
                f"evals={run.result.evals}  -> {run.image_path}"
            )
        self.stdout.write(self.style.SUCCESS(f"{len(runs)} completion(s) written"))
