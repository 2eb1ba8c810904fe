import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from scenkit.core import (
    Scene,
    SceneSchema,
    TimeGrid,
    extend,
    is_prefix,
    prefix,
    scene_distance,
    schema_of,
    trajectory_distance,
    trajectory_from_values,
)
from scenkit.errors import GridAlignmentError, RangeError, SchemaError

from conftest import make_trajectory

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def scenes(schema, k=4):
    return st.tuples(*([finite] * k)).map(lambda v: Scene(schema, v))


# --- schemas and scenes -------------------------------------------------------


def test_schema_rejects_duplicate_names():
    with pytest.raises(SchemaError):
        schema_of(("x", "m"), ("x", "m"))


def test_schema_rejects_empty():
    with pytest.raises(SchemaError):
        SceneSchema(())


def test_schema_rejects_unknown_unit():
    with pytest.raises(SchemaError):
        schema_of(("x", "furlong"))


def test_scene_rejects_nan(plane):
    with pytest.raises(SchemaError):
        Scene(plane, (0.0, 0.0, math.nan, 0.0))


def test_scene_rejects_wrong_arity(plane):
    with pytest.raises(SchemaError):
        Scene(plane, (1.0, 2.0))


def test_enum_dims_hold_integers():
    schema = schema_of(("kind", "enum-code"))
    Scene(schema, (3.0,))
    with pytest.raises(SchemaError):
        Scene(schema, (3.5,))


def test_scene_lookup_by_name(plane):
    s = Scene(plane, (1.0, 2.0, 3.0, 4.0))
    assert s["vx"] == 3.0
    assert s.replace(vx=9.0)["vx"] == 9.0


# --- the scene metric ----------------------------------------------------------


def test_distance_identity(plane):
    s = Scene(plane, (1.0, -2.0, 3.0, 4.5))
    assert scene_distance(s, s) == 0.0


def test_distance_three_four_five(plane):
    a = Scene(plane, (0.0, 0.0, 0.0, 0.0))
    b = Scene(plane, (3.0, 4.0, 0.0, 0.0))
    assert scene_distance(a, b) == 5.0


def test_distance_schema_mismatch(plane, line):
    with pytest.raises(SchemaError):
        scene_distance(Scene(plane, (0, 0, 0, 0)), Scene(line, (0,)))


def test_distance_symmetry_on_random_pairs(plane):
    rng = random.Random(42)
    for _ in range(100):
        a = Scene(plane, tuple(rng.uniform(-100, 100) for _ in range(4)))
        b = Scene(plane, tuple(rng.uniform(-100, 100) for _ in range(4)))
        assert scene_distance(a, b) == scene_distance(b, a)


def test_metric_axioms_on_random_triples(plane):
    rng = random.Random(7)
    for _ in range(1000):
        a, b, c = (
            Scene(plane, tuple(rng.uniform(-50, 50) for _ in range(4)))
            for _ in range(3)
        )
        dab, dbc, dac = scene_distance(a, b), scene_distance(b, c), scene_distance(a, c)
        assert dac <= dab + dbc + 1e-12
        assert dab >= 0
        if a.values != b.values:
            assert dab > 0


@given(scenes(schema_of(("x", "m"), ("y", "m"), ("vx", "m/s"), ("vy", "m/s"))),
       scenes(schema_of(("x", "m"), ("y", "m"), ("vx", "m/s"), ("vy", "m/s"))))
def test_distance_symmetric_hypothesis(a, b):
    assert scene_distance(a, b) == scene_distance(b, a)


@given(
    st.lists(finite, min_size=1, max_size=20),
    st.integers(min_value=0, max_value=19),
)
def test_prefix_extend_roundtrip_hypothesis(values, cut):
    schema = schema_of(("pos", "m"))
    c = make_trajectory(schema, [[v] for v in values], step=0.5)
    cut = min(cut, len(values) - 1)
    upto = c.grid.t(cut)
    assert extend(prefix(c, upto), c.samples[cut + 1 :]) == c


@given(st.lists(finite, min_size=1, max_size=12), st.lists(finite, max_size=6))
def test_extension_always_has_base_as_prefix(values, tail_values):
    schema = schema_of(("pos", "m"))
    c = make_trajectory(schema, [[v] for v in values], step=0.5)
    tail = tuple(Scene(schema, (v,)) for v in tail_values)
    assert is_prefix(c, extend(c, tail))


# --- grids ---------------------------------------------------------------------


def test_grid_basics():
    g = TimeGrid(0.1, 201)
    assert g.duration == pytest.approx(20.0)
    assert g.t(0) == 0.0
    assert g.index_of(10.0) == 100


def test_grid_rejects_bad_step():
    with pytest.raises(RangeError):
        TimeGrid(0.0, 5)
    with pytest.raises(RangeError):
        TimeGrid(0.1, 0)


def test_grid_alignment_error():
    g = TimeGrid(0.1, 201)
    with pytest.raises(GridAlignmentError):
        g.index_of(0.05)
    with pytest.raises(RangeError):
        g.index_of(25.0)


# --- structural operations ------------------------------------------------------


def straight(schema, n=11, step=0.1):
    rows = [(i * step * 10, 100 - 5 * i * step, 10.0, -5.0) for i in range(n)]
    return make_trajectory(schema, rows, step)


def test_prefix_full_length_is_identity(plane):
    c = straight(plane)
    assert prefix(c, c.duration) == c


def test_prefix_zero_is_start_only(plane):
    c = straight(plane)
    p = prefix(c, 0.0)
    assert p.grid.count == 1
    assert p.samples[0] == c.samples[0]


def test_prefix_misaligned_raises(plane):
    c = straight(plane)
    with pytest.raises(GridAlignmentError):
        prefix(c, 0.05)
    with pytest.raises(RangeError):
        prefix(c, 100.0)


def test_extend_empty_is_identity(plane):
    c = straight(plane)
    assert extend(c, ()) == c


def test_extend_prefix_roundtrip(plane):
    c = straight(plane)
    for i in range(1, c.grid.count):
        upto = c.grid.t(i - 1)
        rebuilt = extend(prefix(c, upto), c.samples[i:])
        assert rebuilt == c


def test_extend_associates(plane):
    rng = random.Random(3)
    c = straight(plane, n=4)
    a = tuple(Scene(plane, tuple(rng.uniform(-9, 9) for _ in range(4))) for _ in range(3))
    b = tuple(Scene(plane, tuple(rng.uniform(-9, 9) for _ in range(4))) for _ in range(2))
    assert extend(extend(c, a), b) == extend(c, a + b)


def test_prefix_of_drive_at_halfway_point(plane):
    from scenkit.fixtures import straight_drive_trajectory

    half = prefix(straight_drive_trajectory(), 10.0)
    assert half.samples[-1].values == (50.0, 50.0, 10.0, -5.0)
    assert half.duration == pytest.approx(10.0)


def test_is_prefix_reflexive_and_of_prefix(plane):
    c = straight(plane)
    assert is_prefix(c, c)
    for i in range(c.grid.count):
        assert is_prefix(prefix(c, c.grid.t(i)), c)
    assert is_prefix(c, extend(c, (c.samples[-1],)))


def test_is_prefix_detects_start_disagreement(plane):
    a = straight(plane)
    rows = [list(s.values) for s in a.samples]
    rows[0][0] += 1.0
    b = make_trajectory(plane, rows)
    assert not is_prefix(a, b)
    assert not is_prefix(b, a)


def test_is_prefix_step_mismatch(plane):
    a = straight(plane, step=0.1)
    b = straight(plane, step=0.2)
    with pytest.raises(GridAlignmentError):
        is_prefix(a, b)


def test_is_prefix_partial_order(plane):
    rng = random.Random(11)
    base = straight(plane, n=6)
    family = [prefix(base, base.grid.t(i)) for i in range(6)]
    for _ in range(200):
        a, b, c = (family[rng.randrange(len(family))] for _ in range(3))
        assert is_prefix(a, a)
        if is_prefix(a, b) and is_prefix(b, a):
            assert a == b
        if is_prefix(a, b) and is_prefix(b, c):
            assert is_prefix(a, c)


def test_trajectory_distance_sup(plane):
    c = straight(plane)
    assert trajectory_distance(c, c) == 0.0
    rows = [list(s.values) for s in c.samples]
    rows[5][0] += 0.25
    d = make_trajectory(plane, rows)
    assert trajectory_distance(c, d) == pytest.approx(0.25)
    assert trajectory_distance(d, c) == trajectory_distance(c, d)


def test_trajectory_distance_grid_mismatch(plane):
    with pytest.raises(GridAlignmentError):
        trajectory_distance(straight(plane, n=5), straight(plane, n=6))


def test_start_is_first_sample(plane):
    c = straight(plane)
    assert c.start == c.samples[0]


def test_interpolation_midpoint(plane):
    c = straight(plane)
    mid = c.at(0.05)
    assert mid["x"] == pytest.approx(0.5)
    assert mid["vx"] == 10.0


def test_jump_detection(line):
    rows = [[0.0], [0.5], [60.0], [60.5]]
    t = make_trajectory(line, rows, step=0.1)
    assert t.jumps(kappa=100.0) == (1,)
    assert t.jumps(kappa=10000.0) == ()


def test_trajectory_from_values_validates(line):
    with pytest.raises(SchemaError):
        trajectory_from_values(line, 0.1, [[0.0, 1.0]])
