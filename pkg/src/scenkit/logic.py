"""Branching scenario-logic engine.

A logic instance fixes a schema, a grid step, a finite horizon, a set of
admissible starting scenes and a finitely-branching successor relation.
An abstract scenario pairs constraint and world-model formulas with an
instance; its semantics is the tree grown by expanding prefixes through
the successor relation while pruning branches whose formula verdict is
already FALSE. Expansion satisfies the identity, composition, prefix and
conjunction-as-intersection axioms by construction; check_axioms probes
them anyway so externally supplied semantics can be validated too.
"""

from __future__ import annotations

import dataclasses
import itertools
import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .core import (
    ALIGN_TOL,
    Scene,
    SceneSchema,
    TimeGrid,
    Trajectory,
    is_prefix,
    scene_distance,
)
from .errors import (
    ComplexityError,
    GridAlignmentError,
    HorizonError,
    RangeError,
    RejectionBudgetError,
    SchemaError,
    UnsatisfiableError,
)
from .formulas import (
    And,
    Formula,
    Next,
    SceneConst,
    TrueFormula,
    Verdict3,
    conjoin,
    evaluate3,
)

Path = tuple[Scene, ...]

#: enumerate gives up when the live frontier outgrows this.
ENUMERATION_GUARD = 10_000_000


@dataclass(frozen=True)
class ScenarioLogicInstance:
    """One finitely-branching executable member of the scenario-logic class.

    ``successors`` maps a prefix (tuple of scenes) to the finite set of
    candidate next scenes; ``allows`` is the membership test used when
    following a given trajectory (defaults to exact membership in the
    successor set); ``accepts`` is an extra instance-level acceptance
    condition on full-length paths (defaults to true). Full-length paths
    have horizon+1 samples.
    """

    id: str
    schema: SceneSchema
    step: float
    horizon: int
    initial_scenes: tuple[Scene, ...] | None
    successors: Callable[[Path], Sequence[Scene]]
    allows: Callable[[Path, Scene], bool] | None = None
    initial_allows: Callable[[Scene], bool] | None = None
    accepts: Callable[[Path], bool] | None = None
    scene_tol: float = 0.0
    closed_end: bool = True
    probe_scenes: tuple[Scene, ...] | None = None
    one_step_override: Callable[["AbstractScenario", Path], Sequence[Path]] | None = None

    def __post_init__(self):
        if self.horizon < 0:
            raise RangeError("horizon must be >= 0 steps")

    def grid(self, count: int) -> TimeGrid:
        return TimeGrid(self.step, count, self.closed_end)

    def full_length(self) -> int:
        return self.horizon + 1

    def allows_initial(self, scene: Scene) -> bool:
        if self.initial_allows is not None:
            return self.initial_allows(scene)
        if self.initial_scenes is None:
            return True
        return any(scene.values == s.values for s in self.initial_scenes)

    def allows_step(self, prefix: Path, nxt: Scene) -> bool:
        if self.allows is not None:
            return self.allows(prefix, nxt)
        return any(nxt.values == s.values for s in self.successors(prefix))

    def accepts_path(self, path: Path) -> bool:
        return True if self.accepts is None else self.accepts(path)


@dataclass(frozen=True)
class AbstractScenario:
    """Constraint formula plus world-model formulas over a logic instance."""

    constraints: Formula
    world: tuple[Formula, ...]
    instance: ScenarioLogicInstance

    def conjoined(self) -> Formula:
        return conjoin((self.constraints, *self.world))


def _check_conforms(scenario: AbstractScenario, c: Trajectory) -> None:
    inst = scenario.instance
    if c.schema != inst.schema:
        raise SchemaError("trajectory schema does not match the logic instance")
    if abs(c.grid.step - inst.step) > ALIGN_TOL * inst.step:
        raise GridAlignmentError(
            f"trajectory step {c.grid.step} differs from instance step {inst.step}"
        )


def _prefix_ok(scenario: AbstractScenario, samples: Path, conj: Formula) -> bool:
    return (
        evaluate3(
            conj,
            samples,
            scenario.instance.horizon,
            scene_tol=scenario.instance.scene_tol,
        )
        is not Verdict3.FALSE
    )


def _sorted_unique(paths: list[Path]) -> list[Path]:
    seen = {}
    for p in paths:
        seen[tuple(s.values for s in p)] = p
    return [seen[k] for k in sorted(seen)]


def _children(scenario: AbstractScenario, samples: Path, conj: Formula) -> list[Path]:
    """Filtered one-step extensions of a prefix, canonically ordered."""
    inst = scenario.instance
    out = []
    for cand in inst.successors(samples):
        nxt = samples + (cand,)
        if _prefix_ok(scenario, nxt, conj):
            out.append(nxt)
    return _sorted_unique(out)


def _to_trajectory(inst: ScenarioLogicInstance, samples: Path) -> Trajectory:
    return Trajectory(inst.schema, inst.grid(len(samples)), samples)


def expand(
    scenario: AbstractScenario, c: Trajectory, steps: int
) -> tuple[Trajectory, ...]:
    """All admissible steps-long extensions of c, canonically ordered.

    steps=0 returns (c,); multi-step expansion composes one-step
    expansions, so the composition axiom holds by construction.
    """
    if steps < 0:
        raise RangeError("steps must be >= 0")
    _check_conforms(scenario, c)
    inst = scenario.instance
    if len(c.samples) - 1 + steps > inst.horizon:
        raise HorizonError(
            f"{steps} steps from length {len(c.samples)} exceed horizon {inst.horizon}"
        )
    if steps == 0:
        return (c,)
    frontier = [c.samples]
    if inst.one_step_override is not None:
        for _ in range(steps):
            nxt: list[Path] = []
            for p in frontier:
                nxt.extend(tuple(q) for q in inst.one_step_override(scenario, p))
            frontier = _sorted_unique(nxt)
    else:
        conj = scenario.conjoined()
        for _ in range(steps):
            nxt = []
            for p in frontier:
                nxt.extend(_children(scenario, p, conj))
            frontier = _sorted_unique(nxt)
    return tuple(_to_trajectory(inst, p) for p in frontier)


def _full_eval_ok(scenario: AbstractScenario, samples: Path, conj: Formula) -> bool:
    inst = scenario.instance
    verdict = evaluate3(conj, samples, inst.horizon, scene_tol=inst.scene_tol)
    return verdict is Verdict3.TRUE and inst.accepts_path(samples)


def enumerate_scenarios(
    scenario: AbstractScenario, guard: int = ENUMERATION_GUARD, force: bool = False
) -> tuple[Trajectory, ...]:
    """All accepted horizon-length trajectories, canonically ordered."""
    inst = scenario.instance
    if inst.initial_scenes is None:
        raise ComplexityError(
            f"instance {inst.id!r} declares no finite initial scene set"
        )
    conj = scenario.conjoined()
    frontier = _sorted_unique(
        [(s,) for s in inst.initial_scenes if _prefix_ok(scenario, (s,), conj)]
    )
    for _ in range(inst.horizon):
        nxt: list[Path] = []
        for p in frontier:
            nxt.extend(_children(scenario, p, conj))
            if not force and len(nxt) > guard:
                raise ComplexityError(
                    f"enumeration frontier exceeded the guard of {guard}"
                )
        frontier = _sorted_unique(nxt)
    leaves = [p for p in frontier if _full_eval_ok(scenario, p, conj)]
    return tuple(_to_trajectory(inst, p) for p in leaves)


def trace_formula(c: Trajectory) -> Formula:
    """A formula whose concrete-scenario set is exactly {c}.

    Built as a Next-chained conjunction of scene constants, one per grid
    position.
    """
    out: Formula = SceneConst(c.samples[-1])
    for s in reversed(c.samples[:-1]):
        out = And(SceneConst(s), Next(out))
    return out


# --- sampling ---------------------------------------------------------------


def sample_abstract(
    scenario: AbstractScenario,
    count: int,
    strategy: str,
    rng_seed: int,
    max_attempts: int = 10_000,
) -> list[Trajectory]:
    """Draw accepted concrete scenarios from an abstract scenario.

    uniform-leaf is exactly uniform over the enumeration; uniform-branch
    picks a uniformly random child at each expansion and is therefore
    biased toward shallow-branching paths; rejection draws paths through
    the world model alone and accepts those satisfying the constraints,
    which cannot be guaranteed to succeed (surfaced as a budget error
    carrying the acceptance rate so far).
    """
    from .logical import derive_seed

    if count < 1:
        raise RangeError("count must be >= 1")
    if strategy not in ("uniform-leaf", "uniform-branch", "rejection"):
        raise RangeError(f"unknown strategy {strategy!r}")
    inst = scenario.instance
    conj = scenario.conjoined()
    if evaluate3(conj, (), inst.horizon, scene_tol=inst.scene_tol) is Verdict3.FALSE:
        raise UnsatisfiableError("the constraint formula is unsatisfiable")
    if inst.initial_scenes is None:
        raise ComplexityError("sampling needs a finite initial scene set")

    if strategy == "uniform-leaf":
        leaves = enumerate_scenarios(scenario)
        if not leaves:
            raise UnsatisfiableError("the abstract scenario has no concrete scenarios")
        return [
            leaves[random.Random(derive_seed(rng_seed, i)).randrange(len(leaves))]
            for i in range(count)
        ]

    guide = conj if strategy == "uniform-branch" else conjoin(scenario.world)
    roots = _sorted_unique(
        [(s,) for s in inst.initial_scenes if _prefix_ok(scenario, (s,), guide)]
    )
    if not roots:
        raise UnsatisfiableError("no admissible starting scene")

    out: list[Trajectory] = []
    attempts = 0
    accepted = 0
    while len(out) < count:
        if attempts >= max_attempts:
            rate = accepted / attempts
            raise RejectionBudgetError(
                f"gave up after {attempts} attempts (acceptance rate {rate:.3g})",
                acceptance_rate=rate,
            )
        rng = random.Random(derive_seed(rng_seed, attempts))
        attempts += 1
        path = roots[rng.randrange(len(roots))]
        dead = False
        for _ in range(inst.horizon):
            kids = []
            for cand in inst.successors(path):
                nxt = path + (cand,)
                ok = (
                    evaluate3(guide, nxt, inst.horizon, scene_tol=inst.scene_tol)
                    is not Verdict3.FALSE
                )
                if ok:
                    kids.append(nxt)
            kids = _sorted_unique(kids)
            if not kids:
                dead = True
                break
            path = kids[rng.randrange(len(kids))]
        if dead or not _full_eval_ok(scenario, path, conj):
            continue
        accepted += 1
        out.append(_to_trajectory(inst, path))
    return out


# --- axiom checking ---------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    instance_id: str
    probes: int
    counterexamples: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.counterexamples


def _random_prefix(
    inst: ScenarioLogicInstance, rng: random.Random, max_depth: int
) -> Path:
    starts = inst.probe_scenes or inst.initial_scenes
    if not starts:
        raise RangeError(f"instance {inst.id!r} offers no scenes to probe from")
    path: Path = (starts[rng.randrange(len(starts))],)
    depth = rng.randint(0, min(max_depth, max(inst.horizon - 1, 0)))
    for _ in range(depth):
        cands = list(inst.successors(path))
        if not cands:
            break
        path = path + (cands[rng.randrange(len(cands))],)
    return path


def _keys(trajs: Sequence[Trajectory]) -> set:
    return {t.sort_key() for t in trajs}


def check_axioms(
    instance: ScenarioLogicInstance,
    formulas: Sequence[Formula],
    probes: int,
    rng_seed: int = 0,
) -> AxiomReport:
    """Randomized check of the semantics axioms on a logic instance.

    Per probe: identity at zero steps, composition over a random split,
    the prefix property of every expansion result, and conjunction as
    intersection. Report-only; counterexamples carry the probe context.
    """
    if probes < 1:
        raise RangeError("probes must be >= 1")
    rng = random.Random(rng_seed)
    formulas = tuple(formulas) or (TrueFormula(),)
    bad: list[str] = []
    for k in range(probes):
        f = formulas[rng.randrange(len(formulas))]
        g = formulas[rng.randrange(len(formulas))]
        prefix_path = _random_prefix(instance, rng, max_depth=3)
        c = _to_trajectory(instance, prefix_path)
        scen = AbstractScenario(f, (), instance)
        ctx = f"probe {k}: prefix length {len(prefix_path)}"

        ident = expand(scen, c, 0)
        if len(ident) != 1 or ident[0].sort_key() != c.sort_key():
            bad.append(f"{ctx}: identity axiom violated")
            continue

        budget = instance.horizon - (len(prefix_path) - 1)
        t = min(2, budget)
        if t < 1:
            continue
        full = expand(scen, c, t)
        if any(not is_prefix(c, e) for e in full):
            bad.append(f"{ctx}: prefix property violated at t={t}")
            continue
        if t == 2:
            composed: list[Trajectory] = []
            for mid in expand(scen, c, 1):
                composed.extend(expand(scen, mid, 1))
            if _keys(composed) != _keys(full):
                bad.append(f"{ctx}: composition axiom violated")
                continue
        g_keys = _keys(expand(AbstractScenario(g, (), instance), c, t))
        both = _keys(expand(AbstractScenario(And(f, g), (), instance), c, t))
        if both != _keys(full) & g_keys:
            bad.append(f"{ctx}: conjunction-as-intersection violated")
            continue
        if len(both) > min(len(full), len(g_keys)):
            bad.append(f"{ctx}: conjunction cardinality violated")
    return AxiomReport(instance.id, probes, tuple(bad))


def prefix_breaking_mutant(instance: ScenarioLogicInstance) -> ScenarioLogicInstance:
    """A deliberately broken copy whose expansions forget the prefix axiom.

    Validation fixture for check_axioms: every one-step extension has its
    first sample shifted, so grown paths no longer extend their prefix.
    """

    def broken(scenario: AbstractScenario, samples: Path) -> list[Path]:
        kids = _children(scenario, samples, scenario.conjoined())
        out = []
        for kid in kids:
            first = kid[0]
            shifted = Scene(first.schema, (first.values[0] + 1.0,) + first.values[1:])
            out.append((shifted,) + kid[1:])
        return out

    return dataclasses.replace(
        instance, id=instance.id + "-prefix-mutant", one_step_override=broken
    )


def is_deterministic(
    scenario: AbstractScenario, probes: int = 100, rng_seed: int = 0
) -> bool:
    """Query whether every probed prefix has at most one admissible child."""
    rng = random.Random(rng_seed)
    conj = scenario.conjoined()
    for _ in range(probes):
        p = _random_prefix(scenario.instance, rng, max_depth=3)
        if len(p) - 1 >= scenario.instance.horizon:
            continue
        if len(_children(scenario, p, conj)) > 1:
            return False
    return True


# --- shipped instances -------------------------------------------------------


def binary_branching(n: int) -> ScenarioLogicInstance:
    """Length-n binary scenarios: every proper prefix branches into 0 and 1.

    The single formula ``true`` already admits 2^n concrete scenarios,
    the standard witness that a constant-size declarative specification
    can encode exponentially many behaviors.
    """
    if n < 1:
        raise RangeError("n must be >= 1")
    schema = SceneSchema((("bit", "dimensionless"),))
    zero = Scene(schema, (0.0,))
    one = Scene(schema, (1.0,))
    return ScenarioLogicInstance(
        id=f"binary-branching-{n}",
        schema=schema,
        step=1.0,
        horizon=n - 1,
        initial_scenes=(zero, one),
        successors=lambda samples: (zero, one),
    )


def binary_scenarios(n: int) -> AbstractScenario:
    """The unconstrained abstract scenario over binary_branching(n)."""
    return AbstractScenario(TrueFormula(), (), binary_branching(n))


def encode_logical(scenario) -> ScenarioLogicInstance:
    """Branching encoding of a finite logical scenario.

    The first expansion branches into the starting scenes of the finitely
    many parameter points; afterwards each prefix continues along the
    realized trajectories it still matches exactly. Enumerating the
    encoding recovers exactly the image of the logical scenario.
    """
    from .logical import DiscreteAxis, realize

    axes = scenario.space.axes
    if not all(isinstance(a, DiscreteAxis) for a in axes):
        raise ComplexityError(
            "encoding requires a finite parameter space (all axes discrete)"
        )
    xs = sorted(itertools.product(*(a.values for a in axes)))
    trajectories = [realize(scenario, x) for x in xs]
    full_keys = {t.sort_key() for t in trajectories}
    horizon = trajectories[0].grid.count - 1
    initials = _sorted_unique([(t.samples[0],) for t in trajectories])

    def successors(samples: Path) -> tuple[Scene, ...]:
        ln = len(samples)
        key = tuple(s.values for s in samples)
        nxt = {}
        for t in trajectories:
            if ln < len(t.samples) and tuple(s.values for s in t.samples[:ln]) == key:
                cand = t.samples[ln]
                nxt[cand.values] = cand
        return tuple(nxt[k] for k in sorted(nxt))

    return ScenarioLogicInstance(
        id=f"encoding-of-{scenario.name}",
        schema=trajectories[0].schema,
        step=trajectories[0].grid.step,
        horizon=horizon,
        initial_scenes=tuple(p[0] for p in initials),
        successors=successors,
        accepts=lambda samples: tuple(s.values for s in samples) in full_keys,
    )


def delta_step_instance(
    schema: SceneSchema,
    deltas: Sequence[Sequence[float]],
    step: float,
    horizon: int,
    initial_scenes: Sequence[Scene],
    id: str = "step",
) -> ScenarioLogicInstance:
    """Quantized per-step motion: each action adds a fixed delta vector."""
    deltas = tuple(tuple(float(v) for v in d) for d in deltas)
    if not deltas:
        raise RangeError("need at least one action delta")
    for d in deltas:
        if len(d) != schema.k:
            raise SchemaError("delta length does not match the schema")

    def successors(samples: Path) -> tuple[Scene, ...]:
        end = samples[-1]
        return tuple(
            Scene(schema, tuple(v + dv for v, dv in zip(end.values, d)))
            for d in deltas
        )

    return ScenarioLogicInstance(
        id=id,
        schema=schema,
        step=step,
        horizon=horizon,
        initial_scenes=tuple(initial_scenes),
        successors=successors,
    )


def quantized_motion_instance(
    schema: SceneSchema,
    accels: Sequence[float],
    step: float,
    horizon: int,
    probe_scenes: Sequence[Scene],
    snap_tol: float = 1e-6,
    x: str = "x",
    y: str = "y",
    vx: str = "vx",
    vy: str = "vy",
    id: str = "quantized-motion",
) -> ScenarioLogicInstance:
    """Planar kinematics with a finite acceleration grid per step.

    Successors advance position by the current velocity and velocity by
    one of the quantized accelerations. Path-following snaps to the
    nearest candidate within snap_tol, so trajectories produced by exact
    closed forms still monitor cleanly despite float drift. Any finite
    scene is an admissible start; the world is constrained by formulas.
    """
    ix, iy = schema.index(x), schema.index(y)
    ivx, ivy = schema.index(vx), schema.index(vy)
    pairs = tuple(itertools.product(accels, accels))

    def advance(s: Scene, ax: float, ay: float) -> Scene:
        vals = list(s.values)
        vals[ix] = s.values[ix] + s.values[ivx] * step
        vals[iy] = s.values[iy] + s.values[ivy] * step
        vals[ivx] = s.values[ivx] + ax * step
        vals[ivy] = s.values[ivy] + ay * step
        return Scene(schema, tuple(vals))

    def successors(samples: Path) -> tuple[Scene, ...]:
        end = samples[-1]
        return tuple(advance(end, ax, ay) for ax, ay in pairs)

    def allows(samples: Path, nxt: Scene) -> bool:
        return any(
            scene_distance(nxt, cand) <= snap_tol for cand in successors(samples)
        )

    return ScenarioLogicInstance(
        id=id,
        schema=schema,
        step=step,
        horizon=horizon,
        initial_scenes=tuple(probe_scenes),
        successors=successors,
        allows=allows,
        initial_allows=lambda scene: True,
        scene_tol=snap_tol,
        probe_scenes=tuple(probe_scenes),
    )
