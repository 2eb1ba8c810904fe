"""Logical scenarios: parameter spaces mapped to concrete scenarios.

A logical scenario binds each point x of a finite-dimensional parameter
space to a starting scene and a model family; realizing x evaluates the
bound scenario on the attached grid. Sampling pushes a distribution on
the space forward through that map, drawing each sample from a seed
derived as (seed, draw index) so results do not depend on how draws are
batched across workers.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import random
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Sequence

from .core import Scene, TimeGrid, Trajectory, trajectory_distance
from .dynamics import AttributeLevelScenario, ModelFamily, evaluate
from .errors import ComplexityError, OutOfSpaceError, RangeError, SchemaError

#: Tolerance for membership of a value in a discrete axis.
DISCRETE_TOL = 1e-12

#: invert() refuses spaces with more axes than this unless forced.
MAX_INVERT_AXES = 6

#: invert() refuses coarse scans with more points than this unless forced.
MAX_SCAN_POINTS = 200_000


@dataclass(frozen=True)
class ContinuousAxis:
    name: str
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise RangeError(f"axis {self.name!r}: lo {self.lo} > hi {self.hi}")

    def contains(self, v: float) -> bool:
        return self.lo <= v <= self.hi


@dataclass(frozen=True)
class DiscreteAxis:
    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise RangeError(f"axis {self.name!r}: empty value list")
        if len(set(vals)) != len(vals):
            raise RangeError(f"axis {self.name!r}: duplicate values")

    def contains(self, v: float) -> bool:
        return any(abs(v - w) <= DISCRETE_TOL for w in self.values)


Axis = ContinuousAxis | DiscreteAxis


@dataclass(frozen=True)
class ParameterSpace:
    axes: tuple[Axis, ...]

    def __post_init__(self):
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise RangeError("axis names must be unique")

    @property
    def n(self) -> int:
        return len(self.axes)

    def violating_axis(self, x: Sequence[float]) -> str | None:
        if len(x) != self.n:
            return "<dimension-count>"
        for axis, v in zip(self.axes, x):
            if not axis.contains(v):
                return axis.name
        return None

    def corners(self) -> list[tuple[float, ...]]:
        """All 2^n corners (continuous axes) x first values (discrete)."""
        per_axis = [
            (a.lo, a.hi) if isinstance(a, ContinuousAxis) else (a.values[0],)
            for a in self.axes
        ]
        return [tuple(c) for c in itertools.product(*per_axis)]


# --- distributions ---------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    """Uniform on the axis: box-uniform on continuous, equal-weight on discrete."""


@dataclass(frozen=True)
class TruncatedNormal:
    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0):
            raise RangeError("truncated normal needs sigma > 0")


@dataclass(frozen=True)
class DiscreteWeighted:
    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if any(v < 0 for v in w):
            raise RangeError("weights must be nonnegative")
        if abs(sum(w) - 1.0) > 1e-12:
            raise RangeError(f"weights sum to {sum(w)}, expected 1")


Marginal = Uniform | TruncatedNormal | DiscreteWeighted


@dataclass(frozen=True)
class ParameterDistribution:
    """Independent per-axis marginals; uniform where unspecified."""

    marginals: tuple[Marginal, ...] = ()

    @staticmethod
    def uniform_for(space: ParameterSpace) -> "ParameterDistribution":
        return ParameterDistribution(tuple(Uniform() for _ in space.axes))

    def validate_against(self, space: ParameterSpace) -> None:
        if len(self.marginals) != space.n:
            raise RangeError("one marginal per axis required")
        for axis, m in zip(space.axes, self.marginals):
            if isinstance(m, DiscreteWeighted):
                if not isinstance(axis, DiscreteAxis):
                    raise RangeError(f"weights on non-discrete axis {axis.name!r}")
                if len(m.weights) != len(axis.values):
                    raise RangeError(f"axis {axis.name!r}: weight count mismatch")
            if isinstance(m, TruncatedNormal) and not isinstance(axis, ContinuousAxis):
                raise RangeError(f"truncated normal on discrete axis {axis.name!r}")


def _draw_axis(axis: Axis, marginal: Marginal, rng: random.Random) -> float:
    if isinstance(axis, DiscreteAxis):
        if isinstance(marginal, DiscreteWeighted):
            u = rng.random()
            acc = 0.0
            for v, w in zip(axis.values, marginal.weights):
                acc += w
                if u <= acc:
                    return v
            return axis.values[-1]
        return axis.values[rng.randrange(len(axis.values))]
    if isinstance(marginal, TruncatedNormal):
        nd = NormalDist(marginal.mu, marginal.sigma)
        a, b = nd.cdf(axis.lo), nd.cdf(axis.hi)
        u = min(max(a + (b - a) * rng.random(), 1e-15), 1 - 1e-15)
        return min(max(nd.inv_cdf(u), axis.lo), axis.hi)
    return axis.lo + (axis.hi - axis.lo) * rng.random()


def derive_seed(seed: int, index: int) -> int:
    """Stable per-draw seed, independent of worker partitioning."""
    digest = hashlib.sha256(f"scenkit:{seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


# --- the scenario itself ---------------------------------------------------

Binder = Callable[[tuple[float, ...]], tuple[Scene, ModelFamily]]


@dataclass(frozen=True)
class LogicalScenario:
    """Map from a parameter space to concrete scenarios.

    ``binder(x)`` returns the starting scene and the model family for x;
    realization evaluates them on ``grid``.
    """

    space: ParameterSpace
    binder: Binder
    grid: TimeGrid
    name: str = field(default="logical")


def realize(scenario: LogicalScenario, x: Sequence[float]) -> Trajectory:
    """Evaluate the scenario at one in-space parameter vector."""
    x = tuple(float(v) for v in x)
    bad = scenario.space.violating_axis(x)
    if bad is not None:
        raise OutOfSpaceError(f"parameter {x} violates axis {bad!r}", axis=bad)
    start, family = scenario.binder(x)
    result = evaluate(AttributeLevelScenario(start, family, scenario.grid))
    assert isinstance(result, Trajectory)
    return result


def sample(
    scenario: LogicalScenario,
    dist: ParameterDistribution | None,
    count: int,
    rng_seed: int,
) -> list[tuple[tuple[float, ...], Trajectory]]:
    """Draw count i.i.d. parameter vectors and realize each one."""
    if count < 1:
        raise RangeError("count must be >= 1")
    if dist is None:
        dist = ParameterDistribution.uniform_for(scenario.space)
    dist.validate_against(scenario.space)
    out = []
    for i in range(count):
        rng = random.Random(derive_seed(rng_seed, i))
        x = tuple(
            _draw_axis(axis, marginal, rng)
            for axis, marginal in zip(scenario.space.axes, dist.marginals)
        )
        out.append((x, realize(scenario, x)))
    return out


def draw_parameters(
    space: ParameterSpace,
    dist: ParameterDistribution | None,
    count: int,
    rng_seed: int,
) -> list[tuple[float, ...]]:
    """Parameter draws without realization (for statistics on the space)."""
    if dist is None:
        dist = ParameterDistribution.uniform_for(space)
    dist.validate_against(space)
    return [
        tuple(
            _draw_axis(axis, marginal, random.Random(derive_seed(rng_seed, i)))
            for axis, marginal in zip(space.axes, dist.marginals)
        )
        for i in range(count)
    ]


# --- inverse image analysis ------------------------------------------------


@dataclass(frozen=True)
class Found:
    x: tuple[float, ...]
    residual: float


@dataclass(frozen=True)
class NotInImage:
    best_x: tuple[float, ...]
    best_residual: float


def invert(
    scenario: LogicalScenario,
    target: Trajectory,
    tol: float,
    coarse: int = 16,
    force: bool = False,
) -> Found | NotInImage:
    """Search for x with realize(scenario, x) within tol of the target.

    Coarse grid scan over the space followed by a derivative-free
    coordinate pattern search (shrink factor 0.5, stop when the step
    falls below tol/10). Best-effort numerics, not exact solving.
    """
    if not (tol > 0):
        raise RangeError("tol must be positive")
    if target.schema != _probe_schema(scenario):
        raise SchemaError("target trajectory schema does not match the scenario")
    axes = scenario.space.axes
    n_cont = sum(isinstance(a, ContinuousAxis) for a in axes)
    if n_cont > MAX_INVERT_AXES and not force:
        raise ComplexityError(
            f"{n_cont} continuous axes exceed the inversion guard "
            f"({MAX_INVERT_AXES}); pass force=True to override"
        )

    def residual(x: tuple[float, ...]) -> float:
        return trajectory_distance(realize(scenario, x), target)

    grids = []
    for a in axes:
        if isinstance(a, DiscreteAxis):
            grids.append(a.values)
        elif a.hi == a.lo:
            grids.append((a.lo,))
        else:
            grids.append(
                tuple(a.lo + (a.hi - a.lo) * i / (coarse - 1) for i in range(coarse))
            )
    total = math.prod(len(g) for g in grids)
    if total > MAX_SCAN_POINTS and not force:
        raise ComplexityError(
            f"coarse scan of {total} points exceeds the guard; pass force=True"
        )
    best_x = None
    best_r = math.inf
    for x in itertools.product(*grids):
        r = residual(x)
        if r < best_r:
            best_x, best_r = x, r

    # Pattern search on the continuous axes only, clamped to the box.
    steps = [
        (a.hi - a.lo) / max(coarse - 1, 1) if isinstance(a, ContinuousAxis) else 0.0
        for a in axes
    ]
    x_cur, r_cur = list(best_x), best_r
    while any(s >= tol / 10 for s in steps):
        improved = False
        for i, a in enumerate(axes):
            if not isinstance(a, ContinuousAxis) or steps[i] == 0.0:
                continue
            for cand in (x_cur[i] - steps[i], x_cur[i] + steps[i]):
                cand = min(max(cand, a.lo), a.hi)
                if cand == x_cur[i]:
                    continue
                trial = list(x_cur)
                trial[i] = cand
                r = residual(tuple(trial))
                if r < r_cur:
                    x_cur, r_cur = trial, r
                    improved = True
        if not improved:
            steps = [s * 0.5 for s in steps]
    x_best = tuple(x_cur)
    if r_cur <= tol:
        return Found(x_best, r_cur)
    return NotInImage(x_best, r_cur)


def invert_over_binders(
    scenarios: Sequence[LogicalScenario], target: Trajectory, tol: float
) -> tuple[int, Found] | NotInImage:
    """Try a registry of candidate scenarios in order; first hit wins.

    Realizes the "unknown model family" variant of inverse-image
    analysis over an explicit, finite registry.
    """
    best: NotInImage | None = None
    for i, scenario in enumerate(scenarios):
        result = invert(scenario, target, tol)
        if isinstance(result, Found):
            return i, result
        if best is None or result.best_residual < best.best_residual:
            best = result
    if best is None:
        raise RangeError("empty scenario registry")
    return best


def _probe_schema(scenario: LogicalScenario):
    probe = []
    for a in scenario.space.axes:
        probe.append(a.lo if isinstance(a, ContinuousAxis) else a.values[0])
    start, _ = scenario.binder(tuple(probe))
    return start.schema
