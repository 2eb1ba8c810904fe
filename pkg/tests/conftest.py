import random

import pytest

from scenkit.core import Scene, SceneSchema, TimeGrid, Trajectory, schema_of
from scenkit.formulas import (
    Always,
    And,
    Atom,
    Eventually,
    Next,
    Or,
    ScenePredicate,
    TrueFormula,
)
from scenkit.logic import AbstractScenario, delta_step_instance


@pytest.fixture
def plane():
    return schema_of(("x", "m"), ("y", "m"), ("vx", "m/s"), ("vy", "m/s"))


@pytest.fixture
def line():
    return schema_of(("pos", "m"))


def make_trajectory(schema: SceneSchema, rows, step=0.1) -> Trajectory:
    samples = tuple(Scene(schema, tuple(r)) for r in rows)
    return Trajectory(schema, TimeGrid(step, len(samples)), samples)


def random_formula(rng: random.Random, schema: SceneSchema, depth: int = 2):
    """Small random formula over integer box atoms."""
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.15:
            return TrueFormula()
        name = schema.names[rng.randrange(schema.k)]
        lo = rng.randint(-4, 2)
        return Atom(ScenePredicate(((name, float(lo), float(lo + rng.randint(1, 5))),)))
    pick = rng.random()
    if pick < 0.3:
        return And(random_formula(rng, schema, depth - 1), random_formula(rng, schema, depth - 1))
    if pick < 0.55:
        return Or(random_formula(rng, schema, depth - 1), random_formula(rng, schema, depth - 1))
    if pick < 0.7:
        return Next(random_formula(rng, schema, depth - 1))
    if pick < 0.85:
        return Eventually(random_formula(rng, schema, depth - 1), rng.choice([None, 2]))
    return Always(random_formula(rng, schema, depth - 1), rng.choice([None, 2]))


def random_step_scenario(seed: int) -> AbstractScenario:
    """Random quantized-delta instance plus a random constraint formula."""
    rng = random.Random(seed)
    k = rng.choice([1, 2])
    schema = schema_of(*[(f"d{i}", "dimensionless") for i in range(k)])
    deltas = list(
        dict.fromkeys(
            tuple(float(rng.randint(-2, 2)) for _ in range(k))
            for _ in range(rng.randint(2, 3))
        )
    )
    horizon = rng.randint(2, 5)
    initials = [
        Scene(schema, tuple(float(rng.randint(-2, 2)) for _ in range(k)))
        for _ in range(rng.randint(1, 2))
    ]
    inst = delta_step_instance(schema, deltas, 1.0, horizon, initials, id=f"step-{seed}")
    return AbstractScenario(random_formula(rng, schema), (), inst)
