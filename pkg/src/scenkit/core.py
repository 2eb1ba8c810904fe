"""Scenes, time grids, trajectories and the structural operations on them.

A scene is a fixed-dimension snapshot of the world; a trajectory is a
time-gridded sequence of scenes with a declared interpolation policy.
Everything here is immutable and safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import GridAlignmentError, RangeError, SchemaError

#: Canonical unit tags accepted by schemas.
UNITS = ("m", "m/s", "m/s^2", "s", "dimensionless", "enum-code")

_UNIT_ALIASES = {"m/s²": "m/s^2", "enum": "enum-code"}

#: Grid-alignment tolerance, as a fraction of the grid step.
ALIGN_TOL = 1e-9

#: Default continuity bound for the jump detector, in units per second.
DEFAULT_JUMP_KAPPA = 100.0


@dataclass(frozen=True, slots=True)
class Dimension:
    name: str
    unit: str

    def __post_init__(self):
        if not self.name:
            raise SchemaError("dimension name must be nonempty")
        unit = _UNIT_ALIASES.get(self.unit, self.unit)
        if unit not in UNITS:
            raise SchemaError(f"unknown unit {self.unit!r} for dimension {self.name!r}")
        object.__setattr__(self, "unit", unit)


@dataclass(frozen=True, slots=True)
class SceneSchema:
    """Ordered, named dimensions of a scene vector."""

    dimensions: tuple[Dimension, ...]

    def __post_init__(self):
        dims = tuple(
            d if isinstance(d, Dimension) else Dimension(*d) for d in self.dimensions
        )
        object.__setattr__(self, "dimensions", dims)
        if len(dims) < 1:
            raise SchemaError("a schema needs at least one dimension")
        names = [d.name for d in dims]
        if len(set(names)) != len(names):
            raise SchemaError("dimension names must be unique")

    @property
    def k(self) -> int:
        return len(self.dimensions)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    def index(self, name: str) -> int:
        for i, d in enumerate(self.dimensions):
            if d.name == name:
                return i
        raise SchemaError(f"no dimension named {name!r}")

    def has(self, name: str) -> bool:
        return any(d.name == name for d in self.dimensions)


def schema_of(*dims: tuple[str, str]) -> SceneSchema:
    """Shorthand: ``schema_of(("x", "m"), ("vx", "m/s"))``."""
    return SceneSchema(tuple(Dimension(n, u) for n, u in dims))


@dataclass(frozen=True, slots=True)
class Scene:
    """One snapshot: a real vector conforming to a schema."""

    schema: SceneSchema
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.schema.k:
            raise SchemaError(
                f"scene has {len(vals)} values, schema expects {self.schema.k}"
            )
        for d, v in zip(self.schema.dimensions, vals):
            if not math.isfinite(v):
                raise SchemaError(f"non-finite value {v!r} in dimension {d.name!r}")
            if d.unit == "enum-code" and v != int(v):
                raise SchemaError(f"enum dimension {d.name!r} holds non-integer {v!r}")

    def __getitem__(self, name: str) -> float:
        return self.values[self.schema.index(name)]

    def replace(self, **updates: float) -> "Scene":
        vals = list(self.values)
        for name, v in updates.items():
            vals[self.schema.index(name)] = float(v)
        return Scene(self.schema, tuple(vals))


@dataclass(frozen=True, slots=True)
class TimeGrid:
    """Uniform grid t_i = i * step for i in 0..count-1, starting at 0.

    closed_end records whether the modeled time domain is [0, t_max] or
    [0, t_sup); it does not change the grid points themselves.
    """

    step: float
    count: int
    closed_end: bool = True

    def __post_init__(self):
        if not (self.step > 0):
            raise RangeError(f"grid step must be positive, got {self.step}")
        if self.count < 1:
            raise RangeError(f"grid count must be >= 1, got {self.count}")

    @property
    def duration(self) -> float:
        return (self.count - 1) * self.step

    def t(self, i: int) -> float:
        return i * self.step

    def times(self) -> tuple[float, ...]:
        return tuple(i * self.step for i in range(self.count))

    def index_of(self, t: float) -> int:
        """Map a grid-aligned time to its index; raise if misaligned."""
        i = round(t / self.step)
        if abs(i * self.step - t) > ALIGN_TOL * self.step:
            raise GridAlignmentError(f"time {t} is not aligned to step {self.step}")
        if i < 0 or i >= self.count:
            raise RangeError(f"time {t} is outside the grid [0, {self.duration}]")
        return i


@dataclass(frozen=True, slots=True)
class Trajectory:
    """A concrete scenario sampled on a uniform time grid.

    samples[0] is the starting scene. Between samples the declared
    interpolation is piecewise-linear; jumps are detected, not rejected.
    """

    schema: SceneSchema
    grid: TimeGrid
    samples: tuple[Scene, ...]
    interpolation: str = field(default="piecewise-linear")

    def __post_init__(self):
        samples = tuple(self.samples)
        object.__setattr__(self, "samples", samples)
        if self.interpolation != "piecewise-linear":
            raise SchemaError(f"unknown interpolation {self.interpolation!r}")
        if len(samples) != self.grid.count:
            raise SchemaError(
                f"{len(samples)} samples for a grid of {self.grid.count} points"
            )
        schema = self.schema
        for s in samples:
            if s.schema is not schema and s.schema != schema:
                raise SchemaError("sample schema differs from trajectory schema")

    @property
    def start(self) -> Scene:
        return self.samples[0]

    @property
    def duration(self) -> float:
        return self.grid.duration

    def at(self, t: float) -> Scene:
        """Piecewise-linear interpolation at an arbitrary time in range."""
        if t < 0 or t > self.duration + ALIGN_TOL * self.grid.step:
            raise RangeError(f"time {t} outside [0, {self.duration}]")
        pos = min(t / self.grid.step, self.grid.count - 1)
        i = min(int(pos), self.grid.count - 2) if self.grid.count > 1 else 0
        w = pos - i
        if w <= 0 or self.grid.count == 1:
            return self.samples[i]
        a, b = self.samples[i].values, self.samples[i + 1].values
        vals = tuple(av + w * (bv - av) for av, bv in zip(a, b))
        return Scene(self.schema, vals)

    def jumps(self, kappa: float = DEFAULT_JUMP_KAPPA) -> tuple[int, ...]:
        """Indices i where the step to sample i+1 exceeds kappa * step.

        Candidate discontinuities are metadata: piecewise continuity
        permits finitely many of them.
        """
        bound = kappa * self.grid.step
        out = []
        for i in range(len(self.samples) - 1):
            if scene_distance(self.samples[i], self.samples[i + 1]) > bound:
                out.append(i)
        return tuple(out)

    def sort_key(self) -> tuple:
        """Canonical ordering key: lexicographic over sample values."""
        return tuple(s.values for s in self.samples)


def _check_same_schema(a_schema: SceneSchema, b_schema: SceneSchema) -> None:
    if a_schema is not b_schema and a_schema != b_schema:
        raise SchemaError("schemas do not match")


def scene_distance(a: Scene, b: Scene) -> float:
    """Euclidean distance between two scenes of the same schema."""
    _check_same_schema(a.schema, b.schema)
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a.values, b.values)))


def trajectory_distance(a: Trajectory, b: Trajectory) -> float:
    """Sup over grid points of the scene distance."""
    _check_same_schema(a.schema, b.schema)
    if a.grid != b.grid:
        raise GridAlignmentError("trajectories live on different grids")
    return max(scene_distance(x, y) for x, y in zip(a.samples, b.samples))


def prefix(c: Trajectory, upto: float) -> Trajectory:
    """Restrict a trajectory to [0, upto]; upto must be grid-aligned."""
    i = c.grid.index_of(upto)
    if i == c.grid.count - 1:
        return c
    grid = TimeGrid(c.grid.step, i + 1, c.grid.closed_end)
    return Trajectory(c.schema, grid, c.samples[: i + 1])


def extend(c: Trajectory, tail: Iterable[Scene]) -> Trajectory:
    """Concatenate further scenes onto a trajectory."""
    tail = tuple(tail)
    if not tail:
        return c
    for s in tail:
        _check_same_schema(s.schema, c.schema)
    grid = TimeGrid(c.grid.step, c.grid.count + len(tail), c.grid.closed_end)
    return Trajectory(c.schema, grid, c.samples + tail)


def is_prefix(a: Trajectory, b: Trajectory) -> bool:
    """True iff a is an exact initial segment of b on the shared grid."""
    _check_same_schema(a.schema, b.schema)
    if a.grid.step != b.grid.step:
        raise GridAlignmentError("grid steps differ")
    if a.grid.count > b.grid.count:
        return False
    return all(x.values == y.values for x, y in zip(a.samples, b.samples))


def trajectory_from_values(
    schema: SceneSchema,
    step: float,
    rows: Sequence[Sequence[float]],
    closed_end: bool = True,
) -> Trajectory:
    """Build a trajectory from raw value rows."""
    samples = tuple(Scene(schema, tuple(row)) for row in rows)
    return Trajectory(schema, TimeGrid(step, len(samples), closed_end), samples)
