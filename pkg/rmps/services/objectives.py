"""
Benchmark objectives.

Standard global-optimization test functions with their search domains and
known minima.  Domains are grouped into suites:

* ``standard`` - the usual reference domains of each function; scalable
  functions accept any dimension on the same per-coordinate interval.
* ``highdim``  - the domains used for the 100/1000-dimensional study.
* ``boundary`` - the same functions restricted so the minimizer sits on the
  boundary of the box.

Start points for multi-start experiments come from :func:`random_start`,
which uses its own xoshiro256** generator so that a seed gives the same
point on every platform and every numpy version.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from numpy.typing import ArrayLike, NDArray

from rmps.services.domain import Box, DomainError
from rmps.services.optimizer import Objective

logger = logging.getLogger(__name__)

SUITES = ("standard", "highdim", "boundary")

Vector = NDArray[np.float64]


class BenchmarkError(ValueError):
    """Raised for invalid benchmark requests."""


class UnknownBenchmarkError(BenchmarkError):
    """Raised when a benchmark name (or name/suite pair) is not registered."""


# ---------------------------------------------------------------------------
# Function definitions
# ---------------------------------------------------------------------------


def sphere(z: Vector) -> float:
    return float(np.sum(z**2))


def sum_squares(z: Vector) -> float:
    i = np.arange(1, z.size + 1)
    return float(np.sum(i * z**2))


def ackley(z: Vector) -> float:
    d = z.size
    term1 = -20.0 * math.exp(-0.2 * math.sqrt(float(np.sum(z**2)) / d))
    term2 = -math.exp(float(np.sum(np.cos(2.0 * math.pi * z))) / d)
    return term1 + term2 + 20.0 + math.e


def griewank(z: Vector) -> float:
    i = np.arange(1, z.size + 1)
    return float(1.0 + np.sum(z**2) / 4000.0 - np.prod(np.cos(z / np.sqrt(i))))


def rastrigin(z: Vector) -> float:
    return float(10.0 * z.size + np.sum(z**2 - 10.0 * np.cos(2.0 * math.pi * z)))


def schwefel(z: Vector) -> float:
    return float(418.9829 * z.size - np.sum(z * np.sin(np.sqrt(np.abs(z)))))


def levy(z: Vector) -> float:
    w = 1.0 + (z - 1.0) / 4.0
    head = math.sin(math.pi * w[0]) ** 2
    body = np.sum((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(math.pi * w[:-1] + 1.0) ** 2))
    tail = (w[-1] - 1.0) ** 2 * (1.0 + math.sin(2.0 * math.pi * w[-1]) ** 2)
    return float(head + body + tail)


def styblinski_tang(z: Vector) -> float:
    return float(0.5 * np.sum(z**4 - 16.0 * z**2 + 5.0 * z))


def rotated_hyper_ellipsoid(z: Vector) -> float:
    return float(np.sum(np.cumsum(z**2)))


def sum_of_different_powers(z: Vector) -> float:
    return float(np.sum(np.abs(z) ** np.arange(2, z.size + 2)))


def trid(z: Vector) -> float:
    return float(np.sum((z - 1.0) ** 2) - np.sum(z[1:] * z[:-1]))


def zakharov(z: Vector) -> float:
    weighted = float(np.sum(0.5 * np.arange(1, z.size + 1) * z))
    return float(np.sum(z**2)) + weighted**2 + weighted**4


def dixon_price(z: Vector) -> float:
    i = np.arange(2, z.size + 1)
    return float((z[0] - 1.0) ** 2 + np.sum(i * (2.0 * z[1:] ** 2 - z[:-1]) ** 2))


def rosenbrock(z: Vector) -> float:
    return float(np.sum(100.0 * (z[1:] - z[:-1] ** 2) ** 2 + (z[:-1] - 1.0) ** 2))


def michalewicz(z: Vector) -> float:
    i = np.arange(1, z.size + 1)
    return float(-np.sum(np.sin(z) * np.sin(i * z**2 / math.pi) ** 20))


def drop_wave(z: Vector) -> float:
    r2 = float(z[0] ** 2 + z[1] ** 2)
    return -(1.0 + math.cos(12.0 * math.sqrt(r2))) / (0.5 * r2 + 2.0)


def eggholder(z: Vector) -> float:
    x, y = float(z[0]), float(z[1])
    return (
        -(y + 47.0) * math.sin(math.sqrt(abs(y + x / 2.0 + 47.0)))
        - x * math.sin(math.sqrt(abs(x - (y + 47.0))))
    )


def holder_table(z: Vector) -> float:
    x, y = float(z[0]), float(z[1])
    return -abs(math.sin(x) * math.cos(y) * math.exp(abs(1.0 - math.hypot(x, y) / math.pi)))


def cross_in_tray(z: Vector) -> float:
    x, y = float(z[0]), float(z[1])
    inner = abs(math.sin(x) * math.sin(y) * math.exp(abs(100.0 - math.hypot(x, y) / math.pi)))
    return -0.0001 * (inner + 1.0) ** 0.1


def shubert(z: Vector) -> float:
    i = np.arange(1, 6)
    x, y = float(z[0]), float(z[1])
    return float(np.sum(i * np.cos((i + 1) * x + i)) * np.sum(i * np.cos((i + 1) * y + i)))


def six_hump_camel(z: Vector) -> float:
    x, y = float(z[0]), float(z[1])
    return (4.0 - 2.1 * x**2 + x**4 / 3.0) * x**2 + x * y + (-4.0 + 4.0 * y**2) * y**2


def three_hump_camel(z: Vector) -> float:
    x, y = float(z[0]), float(z[1])
    return 2.0 * x**2 - 1.05 * x**4 + x**6 / 6.0 + x * y + y**2


def easom(z: Vector) -> float:
    x, y = float(z[0]), float(z[1])
    return -math.cos(x) * math.cos(y) * math.exp(-((x - math.pi) ** 2 + (y - math.pi) ** 2))


def beale(z: Vector) -> float:
    x, y = float(z[0]), float(z[1])
    return (
        (1.5 - x + x * y) ** 2
        + (2.25 - x + x * y**2) ** 2
        + (2.625 - x + x * y**3) ** 2
    )


def booth(z: Vector) -> float:
    x, y = float(z[0]), float(z[1])
    return (x + 2.0 * y - 7.0) ** 2 + (2.0 * x + y - 5.0) ** 2


def matyas(z: Vector) -> float:
    x, y = float(z[0]), float(z[1])
    return 0.26 * (x**2 + y**2) - 0.48 * x * y


def mccormick(z: Vector) -> float:
    x, y = float(z[0]), float(z[1])
    return math.sin(x + y) + (x - y) ** 2 - 1.5 * x + 2.5 * y + 1.0


def branin(z: Vector) -> float:
    x, y = float(z[0]), float(z[1])
    b = 5.1 / (4.0 * math.pi**2)
    c = 5.0 / math.pi
    t = 1.0 / (8.0 * math.pi)
    return (y - b * x**2 + c * x - 6.0) ** 2 + 10.0 * (1.0 - t) * math.cos(x) + 10.0


def goldstein_price(z: Vector) -> float:
    x, y = float(z[0]), float(z[1])
    first = 1.0 + (x + y + 1.0) ** 2 * (
        19.0 - 14.0 * x + 3.0 * x**2 - 14.0 * y + 6.0 * x * y + 3.0 * y**2
    )
    second = 30.0 + (2.0 * x - 3.0 * y) ** 2 * (
        18.0 - 32.0 * x + 12.0 * x**2 + 48.0 * y - 36.0 * x * y + 27.0 * y**2
    )
    return first * second


def forrester(z: Vector) -> float:
    x = float(z[0])
    return (6.0 * x - 2.0) ** 2 * math.sin(12.0 * x - 4.0)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

DomainFactory = Callable[[int], Box]


def _cube(low: float, high: float) -> DomainFactory:
    return lambda d: Box.cube(low, high, d)


def _fixed(lower: tuple[float, ...], upper: tuple[float, ...]) -> DomainFactory:
    return lambda d: Box(lower=lower, upper=upper)


def _constant(value: float) -> Callable[[int], float]:
    return lambda d: value


def _repeat(value: float) -> Callable[[int], Vector]:
    return lambda d: np.full(d, value)


@dataclass(frozen=True)
class BenchmarkSpec:
    """A benchmark resolved for a dimension and suite."""

    name: str
    dimension: int
    box: Box
    func: Callable[[Vector], float]
    suite: str = "standard"
    scalable: bool = False
    known_min: float | None = None
    known_argmin: Vector | None = None
    tolerance: float = 1e-9
    note: str = ""

    def evaluate(self, z: ArrayLike) -> float:
        point = np.asarray(z, dtype=float)
        if point.shape != (self.dimension,):
            raise BenchmarkError(
                f"{self.name} expects dimension {self.dimension}, got shape {point.shape}"
            )
        if not self.box.contains(point):
            raise BenchmarkError(f"Point lies outside the {self.name} domain {self.box}")
        return float(self.func(point))

    def objective(self) -> Objective:
        """The optimizer objective for this benchmark on its box."""
        return Objective(func=self.func, box=self.box, name=f"{self.name}[d={self.dimension}]")


@dataclass(frozen=True)
class _Definition:
    name: str
    func: Callable[[Vector], float]
    domains: dict[str, DomainFactory]
    dimension: int | None = None
    minimum: Callable[[int], float] | None = None
    argmin: Callable[[int], Vector] | None = None
    tolerance: Callable[[int], float] = _constant(1e-9)
    note: str = ""

    @property
    def scalable(self) -> bool:
        return self.dimension is None


_ZERO = _constant(0.0)
_ORIGIN = _repeat(0.0)
_LOOSE = _constant(1e-3)
_SCHWEFEL_ARGMIN = 420.9687


def _highdim_suite(low: float, high: float, boundary_high: float) -> dict[str, DomainFactory]:
    return {
        "highdim": _cube(low, high),
        "boundary": _cube(0.0, boundary_high),
    }


_DEFINITIONS: tuple[_Definition, ...] = (
    # scalable functions shared with the high-dimensional study
    _Definition(
        "ackley", ackley,
        {"standard": _cube(-32.768, 32.768), **_highdim_suite(-5.0, 5.0, 5.0)},
        minimum=_ZERO, argmin=_ORIGIN,
    ),
    _Definition(
        "griewank", griewank,
        {"standard": _cube(-600.0, 600.0), **_highdim_suite(-10.0, 10.0, 10.0)},
        minimum=_ZERO, argmin=_ORIGIN,
    ),
    _Definition(
        "rastrigin", rastrigin,
        {"standard": _cube(-5.12, 5.12), **_highdim_suite(-5.12, 5.12, 5.12)},
        minimum=_ZERO, argmin=_ORIGIN,
    ),
    _Definition(
        "schwefel", schwefel,
        {"standard": _cube(-500.0, 500.0), **_highdim_suite(-500.0, 500.0, 420.97)},
        minimum=_ZERO, argmin=_repeat(_SCHWEFEL_ARGMIN),
        tolerance=lambda d: 1e-4 * d,
    ),
    _Definition(
        "sphere", sphere,
        {"standard": _cube(-5.12, 5.12), **_highdim_suite(-5.12, 5.12, 5.12)},
        minimum=_ZERO, argmin=_ORIGIN,
    ),
    _Definition(
        "sum_squares", sum_squares,
        {"standard": _cube(-5.12, 5.12), **_highdim_suite(-5.12, 5.12, 5.12)},
        minimum=_ZERO, argmin=_ORIGIN,
    ),
    # other scalable functions
    _Definition("levy", levy, {"standard": _cube(-10.0, 10.0)}, minimum=_ZERO, argmin=_repeat(1.0)),
    _Definition(
        "styblinski_tang", styblinski_tang, {"standard": _cube(-5.0, 5.0)},
        minimum=lambda d: -39.166165703771 * d, argmin=_repeat(-2.903534), tolerance=_LOOSE,
    ),
    _Definition(
        "rotated_hyper_ellipsoid", rotated_hyper_ellipsoid, {"standard": _cube(-65.536, 65.536)},
        minimum=_ZERO, argmin=_ORIGIN,
    ),
    _Definition(
        "sum_of_different_powers", sum_of_different_powers, {"standard": _cube(-1.0, 1.0)},
        minimum=_ZERO, argmin=_ORIGIN,
    ),
    _Definition(
        "trid", trid, {"standard": lambda d: Box.cube(-float(d * d), float(d * d), d)},
        minimum=lambda d: -d * (d + 4) * (d - 1) / 6.0,
        argmin=lambda d: np.array([i * (d + 1 - i) for i in range(1, d + 1)], dtype=float),
    ),
    _Definition(
        "zakharov", zakharov, {"standard": _cube(-5.0, 10.0)}, minimum=_ZERO, argmin=_ORIGIN,
    ),
    _Definition(
        "dixon_price", dixon_price, {"standard": _cube(-10.0, 10.0)},
        minimum=_ZERO,
        argmin=lambda d: np.array(
            [2.0 ** (-(2.0**i - 2.0) / 2.0**i) for i in range(1, d + 1)]
        ),
    ),
    _Definition(
        "rosenbrock", rosenbrock, {"standard": _cube(-5.0, 10.0)}, minimum=_ZERO, argmin=_repeat(1.0),
    ),
    # fixed two-dimensional functions
    _Definition(
        "michalewicz", michalewicz, {"standard": _cube(0.0, math.pi)}, dimension=2,
        minimum=_constant(-1.8013), argmin=lambda d: np.array([2.20, 1.57]), tolerance=_LOOSE,
    ),
    _Definition(
        "drop_wave", drop_wave, {"standard": _cube(-5.12, 5.12)}, dimension=2,
        minimum=_constant(-1.0), argmin=_ORIGIN,
    ),
    _Definition(
        "eggholder", eggholder, {"standard": _cube(-512.0, 512.0)}, dimension=2,
        minimum=_constant(-959.6407), argmin=lambda d: np.array([512.0, 404.2319]),
        tolerance=_LOOSE,
    ),
    _Definition(
        "holder_table", holder_table, {"standard": _cube(-10.0, 10.0)}, dimension=2,
        minimum=_constant(-19.2085), argmin=lambda d: np.array([8.05502, 9.66459]),
        tolerance=_LOOSE,
    ),
    _Definition(
        "cross_in_tray", cross_in_tray, {"standard": _cube(-10.0, 10.0)}, dimension=2,
        minimum=_constant(-2.06261), argmin=lambda d: np.array([1.3491, 1.3491]),
        tolerance=_LOOSE,
    ),
    _Definition(
        "shubert", shubert, {"standard": _cube(-5.12, 5.12)}, dimension=2,
        minimum=_constant(-186.7309), argmin=lambda d: np.array([-1.42513, -0.80032]),
        tolerance=_LOOSE,
    ),
    _Definition(
        "six_hump_camel", six_hump_camel, {"standard": _fixed((-3.0, -2.0), (3.0, 2.0))},
        dimension=2, minimum=_constant(-1.0316), argmin=lambda d: np.array([0.0898, -0.7126]),
        tolerance=_LOOSE,
    ),
    _Definition(
        "three_hump_camel", three_hump_camel, {"standard": _cube(-5.0, 5.0)}, dimension=2,
        minimum=_ZERO, argmin=_ORIGIN,
    ),
    _Definition(
        "easom", easom, {"standard": _cube(-100.0, 100.0)}, dimension=2,
        minimum=_constant(-1.0), argmin=_repeat(math.pi),
    ),
    _Definition(
        "beale", beale, {"standard": _cube(-4.5, 4.5)}, dimension=2,
        minimum=_ZERO, argmin=lambda d: np.array([3.0, 0.5]),
        note="standard definition; some benchmark tables list -0.15509 instead of 0",
    ),
    _Definition(
        "booth", booth, {"standard": _cube(-10.0, 10.0)}, dimension=2,
        minimum=_ZERO, argmin=lambda d: np.array([1.0, 3.0]),
        note="standard definition; some benchmark tables list -5.3E+07 instead of 0",
    ),
    _Definition(
        "matyas", matyas, {"standard": _cube(-10.0, 10.0)}, dimension=2,
        minimum=_ZERO, argmin=_ORIGIN,
    ),
    _Definition(
        "mccormick", mccormick, {"standard": _fixed((-1.5, -3.0), (4.0, 4.0))}, dimension=2,
        minimum=_constant(-1.9133), argmin=lambda d: np.array([-0.54719, -1.54719]),
        tolerance=_LOOSE,
    ),
    _Definition(
        "branin", branin, {"standard": _fixed((-5.0, 0.0), (10.0, 15.0))}, dimension=2,
        minimum=_constant(5.0 / (4.0 * math.pi)), argmin=lambda d: np.array([math.pi, 2.275]),
    ),
    _Definition(
        "goldstein_price", goldstein_price, {"standard": _cube(-2.0, 2.0)}, dimension=2,
        minimum=_constant(3.0), argmin=lambda d: np.array([0.0, -1.0]),
    ),
    _Definition(
        "forrester", forrester, {"standard": _cube(0.0, 1.0)}, dimension=1,
        minimum=_constant(-6.02074), argmin=lambda d: np.array([0.75725]), tolerance=_LOOSE,
    ),
)

_REGISTRY: dict[str, _Definition] = {definition.name: definition for definition in _DEFINITIONS}


def names() -> list[str]:
    """Registered benchmark names in registry order."""
    return list(_REGISTRY)


def lookup(name: str, d: int | None = None, suite: str = "standard") -> BenchmarkSpec:
    """
    Resolve a benchmark for a dimension and suite.

    Args:
        name:  Registered benchmark name.
        d:     Dimension; defaults to the function's fixed dimension, or 2
               for scalable functions.
        suite: ``standard``, ``highdim`` or ``boundary``.

    Raises:
        UnknownBenchmarkError: Unknown name, or the function is not part of
            ``suite``.
        BenchmarkError: A fixed-dimension function requested at another
            dimension, or ``d < 1``.
    """
    try:
        definition = _REGISTRY[name]
    except KeyError:
        raise UnknownBenchmarkError(
            f"Unknown benchmark '{name}'; available: {', '.join(_REGISTRY)}"
        ) from None
    if suite not in SUITES:
        raise UnknownBenchmarkError(f"Unknown suite '{suite}'; available: {', '.join(SUITES)}")
    if suite not in definition.domains:
        raise UnknownBenchmarkError(f"Benchmark '{name}' is not part of the '{suite}' suite")

    if d is None:
        d = definition.dimension or 2
    if d < 1:
        raise BenchmarkError(f"Dimension must be >= 1, got {d}")
    if definition.dimension is not None and d != definition.dimension:
        raise BenchmarkError(
            f"Benchmark '{name}' is {definition.dimension}-dimensional, requested d={d}"
        )
    if definition.note:
        logger.debug("%s: %s", name, definition.note)

    return BenchmarkSpec(
        name=name,
        dimension=d,
        box=definition.domains[suite](d),
        func=definition.func,
        suite=suite,
        scalable=definition.scalable,
        known_min=definition.minimum(d) if definition.minimum else None,
        known_argmin=definition.argmin(d) if definition.argmin else None,
        tolerance=definition.tolerance(d),
        note=definition.note,
    )


def evaluate_benchmark(name: str, z: ArrayLike, suite: str = "standard") -> float:
    """
    Evaluate a registered benchmark at ``z`` (dimension taken from ``z``).

    Raises:
        UnknownBenchmarkError: ``name`` is not registered.
        BenchmarkError: Wrong dimension, or ``z`` outside the suite's domain.
    """
    point = np.asarray(z, dtype=float)
    if point.ndim != 1:
        raise BenchmarkError(f"Expected a vector, got shape {point.shape}")
    return lookup(name, point.size, suite).evaluate(point)


def iter_specs(suite: str = "standard", dimension: int = 2) -> Iterator[BenchmarkSpec]:
    """Yield every benchmark of ``suite``; scalable ones at ``dimension``."""
    for definition in _DEFINITIONS:
        if suite not in definition.domains:
            continue
        yield lookup(definition.name, definition.dimension or dimension, suite)


# ---------------------------------------------------------------------------
# Seeded start points
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def _rotl(value: int, shift: int) -> int:
    return ((value << shift) | (value >> (64 - shift))) & _MASK64


class SplitMix64:
    """SplitMix64, used to expand a 64-bit seed into generator state."""

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)


class Xoshiro256StarStar:
    """
    xoshiro256** 1.0 seeded through SplitMix64.

    Pure-integer arithmetic, so streams are bit-identical across platforms.
    """

    def __init__(self, seed: int) -> None:
        seeder = SplitMix64(seed)
        self._s = [seeder.next() for _ in range(4)]

    def next(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        """A double in ``[0, 1)`` from the top 53 bits."""
        return (self.next() >> 11) * 2.0**-53


def random_start(box: Box, seed: int) -> Vector:
    """
    Uniform point in ``box`` drawn from xoshiro256** seeded with ``seed``.

    The same seed always gives the same point.
    """
    if not 0 <= seed < 2**64:
        raise DomainError(f"Seed must be a 64-bit unsigned integer, got {seed}")
    generator = Xoshiro256StarStar(seed)
    u = np.array([generator.uniform() for _ in range(box.dimension)])
    point = box.lower_array + u * box.widths
    return np.clip(point, box.lower_array, box.upper_array)
