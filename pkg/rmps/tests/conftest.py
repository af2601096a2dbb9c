"""Shared fixtures for the rmps test-suite."""

from __future__ import annotations

import itertools
from typing import Callable

import pytest

from rmps.services.optimizer import TuningParams


@pytest.fixture()
def fast_params() -> TuningParams:
    """Coarse tuning that keeps small problems well under a second."""
    return TuningParams(phi=1e-4, max_runs=4, round_factor=4)


@pytest.fixture()
def fake_clock() -> Callable[[], float]:
    """A clock that advances by exactly one millisecond per reading."""
    ticks = itertools.count()
    return lambda: next(ticks) / 1000.0
