"""Deterministic models, family combination and trajectory evaluation.

A deterministic model is an evolution function ``evolve(theta, scene)``
obeying the identity law ``evolve(0, s) == s`` and the semigroup law
``evolve(t2, evolve(t1, s)) == evolve(t1 + t2, s)``. A model family
applies several models side by side, each writing the dimensions it
owns; families are truncated just before the first time two members
contradict each other on a shared dimension.

Absolute-time behaviors (stop_at, waypoint_follower) stay semigroup-valid
by reading and advancing a clock dimension of the scene, which makes the
flow autonomous on the extended state.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .core import Scene, SceneSchema, TimeGrid, Trajectory, scene_distance
from .errors import (
    DomainExceededError,
    OwnershipError,
    RangeError,
    SchemaError,
    TruncationError,
)

#: Two members contradict when their outputs on a shared dimension differ
#: by more than this.
CONTRADICTION_TOL = 1e-6

#: Residual bound for the semigroup law on grid-aligned times.
SEMIGROUP_TOL = 1e-9


@dataclass(frozen=True)
class DeterministicModel:
    """An evolution function over scenes, owning a declared set of dims.

    ``owns`` lists the dimensions this model writes; dimensions owned by
    nobody keep their starting value under family evaluation. ``owns=None``
    means the model writes every dimension. State-driven models whose laws
    hold only on their reachable scenes provide ``state_sampler`` so
    randomized law checks draw consistent states.
    """

    id: str
    schema: SceneSchema
    theta_max: float
    evolve_fn: Callable[[float, Scene], Scene]
    owns: tuple[str, ...] | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    state_sampler: Callable[[random.Random], Scene] | None = None

    def __post_init__(self):
        if self.owns is not None:
            for name in self.owns:
                if not self.schema.has(name):
                    raise SchemaError(f"model {self.id!r} owns unknown dim {name!r}")

    def owned_names(self) -> tuple[str, ...]:
        return self.schema.names if self.owns is None else self.owns

    def evolve(self, theta: float, scene: Scene) -> Scene:
        if scene.schema != self.schema:
            raise SchemaError(f"scene schema does not match model {self.id!r}")
        if theta < 0 or theta > self.theta_max:
            raise RangeError(f"theta {theta} outside [0, {self.theta_max}]")
        return self.evolve_fn(theta, scene)


@dataclass(frozen=True)
class ModelFamily:
    """A finite ordered family of models acting on one schema."""

    members: tuple[DeterministicModel, ...]
    epsilon: float
    shared: tuple[str, ...] = ()

    @property
    def schema(self) -> SceneSchema:
        return self.members[0].schema

    @property
    def theta_max(self) -> float:
        return min(m.theta_max for m in self.members)

    def evolve(self, theta: float, scene: Scene) -> Scene:
        """Combined evolution: each member writes its owned dims."""
        out = list(scene.values)
        schema = self.schema
        for m in self.members:
            result = m.evolve(theta, scene)
            for name in m.owned_names():
                out[schema.index(name)] = result[name]
        return Scene(schema, tuple(out))


def combine(
    members: Sequence[DeterministicModel],
    epsilon: float,
    shared: Sequence[str] = (),
) -> ModelFamily:
    """Validate ownership and build a model family.

    Dimensions written by more than one member must be declared in
    ``shared``; the contradiction scan in ``evaluate`` then checks that
    all writers agree on them at every grid point.
    """
    members = tuple(members)
    if not members:
        raise SchemaError("a family needs at least one member")
    schema = members[0].schema
    for m in members[1:]:
        if m.schema != schema:
            raise SchemaError("family members disagree on the schema")
    if not (epsilon > 0):
        raise RangeError("epsilon must be positive")
    shared = tuple(shared)
    writers: dict[str, list[str]] = {}
    for m in members:
        for name in m.owned_names():
            writers.setdefault(name, []).append(m.id)
    for name, who in writers.items():
        if len(who) > 1 and name not in shared:
            raise OwnershipError(
                f"dimension {name!r} is written by {who} without a shared declaration"
            )
    return ModelFamily(members, epsilon, shared)


def family_of(model: DeterministicModel, epsilon: float = 0.1) -> ModelFamily:
    return combine([model], epsilon)


@dataclass(frozen=True)
class AttributeLevelScenario:
    """Pre-execution scenario: starting scene, model family, grid request."""

    start: Scene
    family: ModelFamily
    grid: TimeGrid

    def __post_init__(self):
        if self.start.schema != self.family.schema:
            raise SchemaError("starting scene does not conform to the family schema")


@dataclass(frozen=True)
class TruncatedResult:
    """Evaluation stopped early: the family contradicted itself."""

    trajectory: Trajectory
    contradiction_time: float
    t_sup: float


def evaluate(
    scenario: AttributeLevelScenario, allow_truncation: bool = False
) -> Trajectory | TruncatedResult:
    """Run the family from the starting scene over the requested grid.

    Deterministic: identical inputs produce bit-identical trajectories.
    A grid that outruns the family's declared time domain raises
    DomainExceededError. A member contradiction before the grid end
    raises TruncationError, unless allow_truncation is set, in which
    case the truncated trajectory is returned in a TruncatedResult.
    """
    family, start, grid = scenario.family, scenario.start, scenario.grid
    if grid.duration > family.theta_max:
        raise DomainExceededError(
            f"grid duration {grid.duration} exceeds the family domain",
            t_sup=family.theta_max,
        )
    schema = family.schema
    multi_writers = {
        name: [m for m in family.members if name in m.owned_names()]
        for name in family.shared
    }
    multi_writers = {n: ms for n, ms in multi_writers.items() if len(ms) > 1}
    samples: list[Scene] = []
    for i in range(grid.count):
        theta = grid.t(i)
        outputs = [m.evolve(theta, start) for m in family.members]
        contradiction = None
        for name, ms in multi_writers.items():
            vals = [
                out[name] for out, m in zip(outputs, family.members) if m in ms
            ]
            if max(vals) - min(vals) > CONTRADICTION_TOL:
                contradiction = name
                break
        if contradiction is not None:
            t_c = theta
            keep_until = t_c - family.epsilon
            keep = max(1, 1 + math.floor(keep_until / grid.step + 1e-9))
            keep = min(keep, len(samples))
            truncated = Trajectory(
                schema, TimeGrid(grid.step, keep, grid.closed_end), tuple(samples[:keep])
            )
            result = TruncatedResult(truncated, t_c, t_sup=keep_until)
            if allow_truncation:
                return result
            raise TruncationError(
                f"members contradict on {contradiction!r} at t={t_c}", result
            )
        merged = list(start.values)
        for m, out in zip(family.members, outputs):
            for name in m.owned_names():
                merged[schema.index(name)] = out[name]
        samples.append(Scene(schema, tuple(merged)))
    return Trajectory(schema, grid, tuple(samples))


# --- built-in model library ---------------------------------------------


def drift(
    schema: SceneSchema,
    rates: Mapping[str, float],
    id: str = "drift",
    theta_max: float = math.inf,
) -> DeterministicModel:
    """Constant-rate motion on named dimensions; exact semigroup."""
    idx = {name: schema.index(name) for name in rates}

    def evolve(theta: float, s: Scene) -> Scene:
        vals = list(s.values)
        for name, rate in rates.items():
            vals[idx[name]] = s.values[idx[name]] + rate * theta
        return Scene(schema, tuple(vals))

    return DeterministicModel(
        id, schema, theta_max, evolve, owns=tuple(rates), params=dict(rates)
    )


def constant_velocity(
    schema: SceneSchema,
    vx: float,
    vy: float,
    x: str = "x",
    y: str = "y",
    id: str = "constant_velocity",
) -> DeterministicModel:
    """Position advances at a fixed velocity; other dims untouched."""
    return drift(schema, {x: vx, y: vy}, id=id)


def constant_acceleration(
    schema: SceneSchema,
    ax: float,
    ay: float,
    x: str = "x",
    y: str = "y",
    vx: str = "vx",
    vy: str = "vy",
    id: str = "constant_acceleration",
) -> DeterministicModel:
    """Closed-form kinematics: positions from the scene's own velocity."""
    ix, iy = schema.index(x), schema.index(y)
    ivx, ivy = schema.index(vx), schema.index(vy)

    def evolve(theta: float, s: Scene) -> Scene:
        vals = list(s.values)
        vals[ix] = s.values[ix] + s.values[ivx] * theta + 0.5 * ax * theta * theta
        vals[iy] = s.values[iy] + s.values[ivy] * theta + 0.5 * ay * theta * theta
        vals[ivx] = s.values[ivx] + ax * theta
        vals[ivy] = s.values[ivy] + ay * theta
        return Scene(schema, tuple(vals))

    return DeterministicModel(
        id, schema, math.inf, evolve, owns=(x, y, vx, vy), params={"ax": ax, "ay": ay}
    )


def _require_clock(schema: SceneSchema, clock: str, model_id: str) -> int:
    if not schema.has(clock):
        raise SchemaError(
            f"model {model_id!r} needs a clock dimension {clock!r} (unit 's') "
            "to stay semigroup-valid"
        )
    i = schema.index(clock)
    if schema.dimensions[i].unit != "s":
        raise SchemaError(f"clock dimension {clock!r} must have unit 's'")
    return i


def stop_at(
    schema: SceneSchema,
    t_stop: float,
    x: str = "x",
    y: str = "y",
    vx: str = "vx",
    vy: str = "vy",
    clock: str = "clock",
    id: str = "stop_at",
) -> DeterministicModel:
    """Drive at the scene's velocity until t_stop, then freeze.

    From t_stop on, the velocity dims are zeroed and the position is
    frozen. Reading absolute time off the clock dimension keeps the
    flow autonomous, so the semigroup law holds exactly across the stop.
    """
    ic = _require_clock(schema, clock, id)
    ix, iy = schema.index(x), schema.index(y)
    ivx, ivy = schema.index(vx), schema.index(vy)

    def evolve(theta: float, s: Scene) -> Scene:
        tau = s.values[ic]
        moving = min(theta, max(0.0, t_stop - tau))
        vals = list(s.values)
        vals[ix] = s.values[ix] + s.values[ivx] * moving
        vals[iy] = s.values[iy] + s.values[ivy] * moving
        if tau + theta >= t_stop:
            vals[ivx] = 0.0
            vals[ivy] = 0.0
        vals[ic] = tau + theta
        return Scene(schema, tuple(vals))

    def consistent(rng: random.Random) -> Scene:
        tau = rng.uniform(0.0, 2.0 * t_stop)
        vals = [rng.uniform(-100.0, 100.0) for _ in range(schema.k)]
        if tau >= t_stop:
            vals[ivx] = 0.0
            vals[ivy] = 0.0
        vals[ic] = tau
        return Scene(schema, tuple(vals))

    return DeterministicModel(
        id,
        schema,
        math.inf,
        evolve,
        owns=(x, y, vx, vy, clock),
        params={"t_stop": t_stop},
        state_sampler=consistent,
    )


def waypoint_follower(
    schema: SceneSchema,
    knots: Sequence[tuple[float, float, float]],
    x: str = "x",
    y: str = "y",
    vx: str | None = "vx",
    vy: str | None = "vy",
    clock: str = "clock",
    id: str = "waypoint_follower",
) -> DeterministicModel:
    """Piecewise-linear position through (t_i, x_i, y_i) waypoints.

    Velocity dims get the slope of the segment starting at the current
    time (right-continuous); after the last waypoint the position holds
    and the velocity is zero. Requires a clock dimension.
    """
    knots = sorted((float(t), float(px), float(py)) for t, px, py in knots)
    if len(knots) < 1:
        raise RangeError("waypoint_follower needs at least one waypoint")
    for (t0, *_), (t1, *_) in zip(knots, knots[1:]):
        if not (t1 > t0):
            raise RangeError("waypoint times must be strictly increasing")
    ic = _require_clock(schema, clock, id)
    ix, iy = schema.index(x), schema.index(y)
    ivx = schema.index(vx) if vx is not None else None
    ivy = schema.index(vy) if vy is not None else None
    ts = [k[0] for k in knots]
    slopes = [
        ((x1 - x0) / (t1 - t0), (y1 - y0) / (t1 - t0))
        for (t0, x0, y0), (t1, x1, y1) in zip(knots, knots[1:])
    ]

    def plan(tau: float) -> tuple[float, float, float, float]:
        if tau < ts[0]:
            return knots[0][1], knots[0][2], 0.0, 0.0
        if tau >= ts[-1]:
            return knots[-1][1], knots[-1][2], 0.0, 0.0
        seg = bisect.bisect_right(ts, tau) - 1
        t0, x0, y0 = knots[seg]
        sx, sy = slopes[seg]
        return x0 + (tau - t0) * sx, y0 + (tau - t0) * sy, sx, sy

    def evolve(theta: float, s: Scene) -> Scene:
        tau = s.values[ic] + theta
        px, py, sx, sy = plan(tau)
        vals = list(s.values)
        vals[ix], vals[iy] = px, py
        if ivx is not None:
            vals[ivx] = sx
        if ivy is not None:
            vals[ivy] = sy
        vals[ic] = tau
        return Scene(schema, tuple(vals))

    def consistent(rng: random.Random) -> Scene:
        tau = rng.uniform(0.0, ts[-1] + 5.0)
        px, py, sx, sy = plan(tau)
        vals = [rng.uniform(-100.0, 100.0) for _ in range(schema.k)]
        vals[ix], vals[iy] = px, py
        if ivx is not None:
            vals[ivx] = sx
        if ivy is not None:
            vals[ivy] = sy
        vals[ic] = tau
        return Scene(schema, tuple(vals))

    owned = [x, y, clock]
    if vx is not None:
        owned.insert(2, vx)
    if vy is not None:
        owned.insert(3, vy)
    return DeterministicModel(
        id, schema, math.inf, evolve, owns=tuple(owned), state_sampler=consistent
    )


def clock_model(schema: SceneSchema, clock: str = "clock", id: str = "clock") -> DeterministicModel:
    """Advances the clock dimension; for families with no other clock owner."""
    ic = _require_clock(schema, clock, id)

    def evolve(theta: float, s: Scene) -> Scene:
        vals = list(s.values)
        vals[ic] = s.values[ic] + theta
        return Scene(schema, tuple(vals))

    return DeterministicModel(id, schema, math.inf, evolve, owns=(clock,))


# --- semigroup checking ---------------------------------------------------


@dataclass(frozen=True)
class SemigroupReport:
    model_id: str
    trials: int
    max_identity_residual: float
    max_semigroup_residual: float
    worst_case: tuple[float, float, Scene] | None

    @property
    def passed(self) -> bool:
        return (
            self.max_identity_residual <= SEMIGROUP_TOL
            and self.max_semigroup_residual <= SEMIGROUP_TOL
        )


def _random_scene(schema: SceneSchema, rng: random.Random, lo: float, hi: float) -> Scene:
    vals = []
    for d in schema.dimensions:
        if d.unit == "enum-code":
            vals.append(float(rng.randint(0, 5)))
        elif d.unit == "s":
            vals.append(rng.uniform(0.0, 30.0))
        else:
            vals.append(rng.uniform(lo, hi))
    return Scene(schema, tuple(vals))


def check_semigroup(
    model: DeterministicModel | ModelFamily,
    trials: int = 1000,
    rng_seed: int = 0,
    theta_step: float = 0.1,
    max_steps: int = 50,
    value_range: tuple[float, float] = (-100.0, 100.0),
) -> SemigroupReport:
    """Probe the identity and semigroup laws on random grid-aligned times.

    Report-only: passes iff the worst residual stays within 1e-9.
    """
    if trials < 1:
        raise RangeError("trials must be >= 1")
    rng = random.Random(rng_seed)
    schema = model.schema
    theta_cap = model.theta_max if isinstance(model, ModelFamily) else model.theta_max
    max_total = min(max_steps, int(theta_cap / theta_step)) if math.isfinite(theta_cap) else max_steps
    sampler = getattr(model, "state_sampler", None)
    worst_id = 0.0
    worst_semi = 0.0
    worst_case = None
    for _ in range(trials):
        s = sampler(rng) if sampler is not None else _random_scene(schema, rng, *value_range)
        n1 = rng.randint(0, max_total)
        n2 = rng.randint(0, max_total - n1)
        t1, t2 = n1 * theta_step, n2 * theta_step
        worst_id = max(worst_id, scene_distance(model.evolve(0.0, s), s))
        lhs = model.evolve(t2, model.evolve(t1, s))
        rhs = model.evolve(t1 + t2, s)
        resid = scene_distance(lhs, rhs)
        if resid > worst_semi:
            worst_semi = resid
            worst_case = (t1, t2, s)
    model_id = model.id if isinstance(model, DeterministicModel) else "family"
    return SemigroupReport(model_id, trials, worst_id, worst_semi, worst_case)
