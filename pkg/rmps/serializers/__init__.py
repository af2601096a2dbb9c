"""DRF serializers that validate experiment configurations."""

from __future__ import annotations

from pathlib import Path
from typing import Any

from django.conf import settings
from rest_framework import serializers

from rmps.services.experiment_service import ExperimentConfig
from rmps.services.objectives import SUITES
from rmps.services.optimizer import InvalidTuningError, TuningParams


class SeedsField(serializers.Field):
    """
    Seeds as ``"base:count"`` (consecutive seeds ``base .. base+count-1``) or
    an explicit list of integers.
    """

    default_error_messages = {
        "invalid": 'Expected "base:count" or a list of integers.',
        "empty": "At least one seed is required.",
        "range": "Seeds must be 64-bit unsigned integers.",
    }

    def to_internal_value(self, data: Any) -> tuple[int, ...]:
        if isinstance(data, str):
            base, sep, count = data.partition(":")
            try:
                start, length = int(base), int(count) if sep else 1
            except ValueError:
                self.fail("invalid")
            seeds = tuple(range(start, start + length))
        elif isinstance(data, (list, tuple)):
            try:
                seeds = tuple(int(seed) for seed in data)
            except (TypeError, ValueError):
                self.fail("invalid")
        else:
            self.fail("invalid")
        if not seeds:
            self.fail("empty")
        if any(not 0 <= seed < 2**64 for seed in seeds):
            self.fail("range")
        return seeds

    def to_representation(self, value: tuple[int, ...]) -> list[int]:
        return list(value)


class TuningParamsSerializer(serializers.Serializer):
    """Optional overrides of the RMPS tuning parameters."""

    s_initial = serializers.FloatField(required=False, min_value=0.0)
    rho1 = serializers.FloatField(required=False)
    rho2 = serializers.FloatField(required=False)
    phi = serializers.FloatField(required=False, min_value=0.0)
    max_iter = serializers.IntegerField(required=False, min_value=1)
    max_runs = serializers.IntegerField(required=False, min_value=1)
    tol_fun = serializers.FloatField(required=False, min_value=0.0)
    round_factor = serializers.IntegerField(required=False, min_value=0)

    def validate(self, attrs: dict[str, Any]) -> dict[str, Any]:
        try:
            attrs["params"] = TuningParams.from_settings(**attrs)
        except InvalidTuningError as exc:
            raise serializers.ValidationError(str(exc)) from exc
        return attrs


class _ExperimentSerializer(serializers.Serializer):
    tuning = TuningParamsSerializer(required=False)
    workers = serializers.IntegerField(min_value=1, required=False)
    out = serializers.CharField(required=False)

    subcommand: str = ""

    def to_config(self) -> ExperimentConfig:
        """Build the :class:`ExperimentConfig` from validated data."""
        data = self.validated_data
        tuning = data.get("tuning", {}).get("params") or TuningParams.from_settings()
        return ExperimentConfig(
            subcommand=self.subcommand,
            tuning=tuning,
            workers=data.get("workers", settings.RMPS_WORKERS),
            out=Path(data.get("out", settings.RMPS_OUTPUT_DIR)),
            convex_rho=settings.RMPS_CONVEX_RHO,
            **self.extra_config(data),
        )

    def extra_config(self, data: dict[str, Any]) -> dict[str, Any]:
        return {}


class BenchConfigSerializer(_ExperimentSerializer):
    """Validates ``bench`` and ``convex`` requests."""

    fn = serializers.CharField(min_length=1)
    dim = serializers.IntegerField(min_value=1, required=False)
    suite = serializers.ChoiceField(choices=SUITES, default="standard")
    seeds = SeedsField()

    def __init__(self, *args: Any, subcommand: str = "bench", **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        self.subcommand = subcommand

    def extra_config(self, data: dict[str, Any]) -> dict[str, Any]:
        return {
            "function": data["fn"],
            "dimension": data.get("dim"),
            "suite": data["suite"],
            "seeds": data["seeds"],
        }


class CompleteConfigSerializer(_ExperimentSerializer):
    """Validates ``complete`` requests."""

    subcommand = "complete"

    image = serializers.CharField()
    mask = serializers.CharField()
    lambdas = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), min_length=1
    )
    scad_a = serializers.FloatField(required=False)
    repeat = serializers.IntegerField(min_value=1, default=1)

    def validate_lambdas(self, value: list[float]) -> list[float]:
        if any(lam <= 0 for lam in value):
            raise serializers.ValidationError("Every lambda must be positive.")
        return value

    def validate_scad_a(self, value: float) -> float:
        if value <= 2:
            raise serializers.ValidationError("SCAD a must exceed 2.")
        return value

    def extra_config(self, data: dict[str, Any]) -> dict[str, Any]:
        return {
            "image": Path(data["image"]),
            "mask": Path(data["mask"]),
            "lambdas": tuple(data["lambdas"]),
            "scad_a": data.get("scad_a", settings.RMPS_SCAD_A),
            "repeat": data["repeat"],
        }
