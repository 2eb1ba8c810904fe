import random

import pytest

from scenkit.core import Scene, TimeGrid, schema_of, is_prefix
from scenkit.dynamics import drift, family_of
from scenkit.errors import (
    ComplexityError,
    HorizonError,
    RangeError,
    RejectionBudgetError,
    UnsatisfiableError,
)
from scenkit.formulas import (
    Always,
    And,
    Atom,
    Eventually,
    FalseFormula,
    SceneConst,
    ScenePredicate,
    TrueFormula,
    Verdict3,
    evaluate3,
)
from scenkit.fixtures import planar_instance, reach_or_stop_formula
from scenkit.logic import (
    AbstractScenario,
    binary_branching,
    binary_scenarios,
    check_axioms,
    delta_step_instance,
    encode_logical,
    enumerate_scenarios,
    expand,
    is_deterministic,
    prefix_breaking_mutant,
    sample_abstract,
    trace_formula,
)
from scenkit.logical import DiscreteAxis, LogicalScenario, ParameterSpace, realize
from scenkit.monitoring import Verdict, monitor_word

from conftest import random_step_scenario


def bit_trajectory(bits, instance):
    schema = instance.schema
    samples = tuple(Scene(schema, (float(b),)) for b in bits)
    return instance.grid(len(samples)), samples


def as_traj(instance, bits):
    from scenkit.core import Trajectory

    grid, samples = bit_trajectory(bits, instance)
    return Trajectory(instance.schema, grid, samples)


# --- three-valued formula evaluation --------------------------------------------


def test_formula_verdicts_on_prefixes(line):
    low = Atom(ScenePredicate((("pos", 0.0, 1.0),)))
    samples = (Scene(line, (0.5,)),)
    assert evaluate3(low, samples, horizon=3) is Verdict3.TRUE
    assert evaluate3(Eventually(low), (), 3) is Verdict3.UNKNOWN
    assert evaluate3(Always(low), samples, 3) is Verdict3.UNKNOWN
    bad = (Scene(line, (5.0,)),)
    assert evaluate3(Always(low), bad, 3) is Verdict3.FALSE
    assert evaluate3(And(low, TrueFormula()), bad, 3) is Verdict3.FALSE


def test_formula_monotonicity_random_walks(line):
    from conftest import random_formula

    rng = random.Random(5)
    for _ in range(300):
        f = random_formula(rng, line)
        horizon = 4
        samples = ()
        prev = evaluate3(f, samples, horizon)
        for _ in range(horizon + 1):
            samples = samples + (Scene(line, (float(rng.randint(-3, 3)),)),)
            cur = evaluate3(f, samples, horizon)
            if prev is Verdict3.TRUE:
                assert cur is Verdict3.TRUE
            if prev is Verdict3.FALSE:
                assert cur is Verdict3.FALSE
            prev = cur


# --- expansion -------------------------------------------------------------------


def test_expand_zero_steps_is_identity():
    A = binary_scenarios(4)
    c = as_traj(A.instance, [0, 1])
    assert expand(A, c, 0) == (c,)


def test_binary_one_step_branches_into_two():
    A = binary_scenarios(4)
    c = as_traj(A.instance, [0, 1])
    kids = expand(A, c, 1)
    assert {k.samples[-1].values for k in kids} == {(0.0,), (1.0,)}
    assert all(is_prefix(c, k) for k in kids)


def test_expand_composes():
    A = binary_scenarios(5)
    c = as_traj(A.instance, [1])
    two = {t.sort_key() for t in expand(A, c, 2)}
    composed = set()
    for mid in expand(A, c, 1):
        composed |= {t.sort_key() for t in expand(A, mid, 1)}
    assert two == composed


def test_expand_beyond_horizon_raises():
    A = binary_scenarios(3)
    c = as_traj(A.instance, [0, 1, 1])
    with pytest.raises(HorizonError):
        expand(A, c, 1)
    with pytest.raises(RangeError):
        expand(A, c, -1)


# --- enumeration ------------------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 13))
def test_binary_enumeration_counts(n):
    leaves = enumerate_scenarios(binary_scenarios(n))
    assert len(leaves) == 2**n
    assert len({t.sort_key() for t in leaves}) == 2**n


def test_false_formula_enumerates_empty():
    A = AbstractScenario(FalseFormula(), (), binary_branching(4))
    assert enumerate_scenarios(A) == ()


def test_enumeration_guard():
    with pytest.raises(ComplexityError):
        enumerate_scenarios(binary_scenarios(12), guard=100)


def test_constraint_conjunction_shrinks_enumeration():
    inst = binary_branching(5)
    f1 = Atom(ScenePredicate((("bit", 0.0, 0.0),)))  # first sample is 0
    f2 = Eventually(Atom(ScenePredicate((("bit", 1.0, 1.0),))))
    sets = {}
    for name, formula in (("f1", f1), ("f2", f2), ("both", And(f1, f2))):
        sets[name] = {t.sort_key() for t in enumerate_scenarios(AbstractScenario(formula, (), inst))}
    assert sets["both"] == sets["f1"] & sets["f2"]
    assert sets["both"] <= sets["f1"]
    assert len(sets["f1"]) == 16


def test_world_formulas_conjoin_with_constraints():
    inst = binary_branching(3)
    world = (Always(Atom(ScenePredicate((("bit", 0.0, 0.0),)))),)
    A = AbstractScenario(TrueFormula(), world, inst)
    leaves = enumerate_scenarios(A)
    assert len(leaves) == 1
    assert all(s.values == (0.0,) for s in leaves[0].samples)


# --- the logical-scenario encoding ---------------------------------------------------


def speeds_scenario(values):
    schema = schema_of(("pos", "m"))
    space = ParameterSpace((DiscreteAxis("v", tuple(values)),))

    def binder(x):
        return Scene(schema, (0.0,)), family_of(drift(schema, {"pos": x[0]}))

    return LogicalScenario(space, binder, TimeGrid(0.5, 5), name="speeds")


@pytest.mark.parametrize("values", [(2.0,), (1.0, 2.0, 3.0, 4.0, 5.0)])
def test_encoding_matches_image(values):
    L = speeds_scenario(values)
    inst = encode_logical(L)
    leaves = enumerate_scenarios(AbstractScenario(TrueFormula(), (), inst))
    realized = sorted(realize(L, (v,)).sort_key() for v in values)
    assert sorted(t.sort_key() for t in leaves) == realized


def test_encoding_shares_prefixes_until_divergence():
    # Two parameter points with equal starting scenes force a shared root.
    L = speeds_scenario((1.0, 2.0))
    inst = encode_logical(L)
    assert len(inst.initial_scenes) == 1
    from scenkit.core import Trajectory

    root = Trajectory(inst.schema, inst.grid(1), (inst.initial_scenes[0],))
    A = AbstractScenario(TrueFormula(), (), inst)
    kids = expand(A, root, 1)
    assert len(kids) == 2


def test_encoding_requires_discrete_axes():
    from scenkit.fixtures import slope_drive_scenario

    with pytest.raises(ComplexityError):
        encode_logical(slope_drive_scenario())


# --- trace formulas --------------------------------------------------------------------


def test_trace_formula_pins_single_trajectory():
    A = binary_scenarios(4)
    target = enumerate_scenarios(A)[5]
    pinned = AbstractScenario(trace_formula(target), (), A.instance)
    leaves = enumerate_scenarios(pinned)
    assert len(leaves) == 1
    assert leaves[0].sort_key() == target.sort_key()


def test_trace_formula_of_length_one_is_scene_const(line):
    from conftest import make_trajectory

    t = make_trajectory(line, [[1.5]])
    f = trace_formula(t)
    assert isinstance(f, SceneConst)


def test_satisfiability_reduction_on_random_pairs():
    # Membership of c in the scenario set is equivalent to satisfiability
    # of the pinned-trace conjunction.
    checked = 0
    for seed in range(60):
        A = random_step_scenario(seed)
        universe = enumerate_scenarios(
            AbstractScenario(TrueFormula(), (), A.instance)
        )
        rng = random.Random(seed)
        members = {t.sort_key() for t in enumerate_scenarios(A)}
        for _ in range(4):
            if not universe:
                break
            c = universe[rng.randrange(len(universe))]
            pinned = AbstractScenario(
                And(trace_formula(c), A.conjoined()), (), A.instance
            )
            nonempty = len(enumerate_scenarios(pinned)) > 0
            assert nonempty == (c.sort_key() in members)
            assert nonempty == (monitor_word(c, A) is Verdict.ACCEPTED)
            checked += 1
    assert checked >= 200


# --- axiom checking ----------------------------------------------------------------------


def shipped_instances():
    return [
        binary_branching(5),
        encode_logical(speeds_scenario((1.0, 2.0, 3.0))),
        planar_instance(),
        delta_step_instance(
            schema_of(("d0", "dimensionless")),
            [(-1.0,), (0.0,), (1.0,)],
            1.0,
            4,
            [Scene(schema_of(("d0", "dimensionless")), (0.0,))],
            id="unit-step",
        ),
    ]


def probe_formulas(schema):
    name = schema.names[0]
    return [
        TrueFormula(),
        Atom(ScenePredicate(((name, 0.0, 2.0),))),
        Eventually(Atom(ScenePredicate(((name, 1.0, 1.0),))), within=2),
        Always(Atom(ScenePredicate(((name, -5.0, 5.0),)))),
    ]


@pytest.mark.parametrize("instance", shipped_instances(), ids=lambda i: i.id)
def test_axioms_hold_on_shipped_instances(instance):
    report = check_axioms(instance, probe_formulas(instance.schema), probes=500, rng_seed=2)
    assert report.passed, report.counterexamples[:3]


def test_axioms_catch_prefix_breaking_mutant():
    broken = prefix_breaking_mutant(binary_branching(5))
    report = check_axioms(broken, [TrueFormula()], probes=100, rng_seed=2)
    assert not report.passed
    assert any("prefix" in c for c in report.counterexamples)


def test_conjunction_cardinality_never_exceeds_either_side():
    inst = binary_branching(5)
    rng = random.Random(9)
    from conftest import random_formula

    for _ in range(50):
        f, g = random_formula(rng, inst.schema), random_formula(rng, inst.schema)
        a = len(enumerate_scenarios(AbstractScenario(f, (), inst)))
        b = len(enumerate_scenarios(AbstractScenario(g, (), inst)))
        both = len(enumerate_scenarios(AbstractScenario(And(f, g), (), inst)))
        assert both <= min(a, b)


# --- sampling ---------------------------------------------------------------------------------


def test_sample_abstract_unsatisfiable():
    A = AbstractScenario(FalseFormula(), (), binary_branching(3))
    with pytest.raises(UnsatisfiableError):
        sample_abstract(A, 5, "uniform-leaf", rng_seed=0)
    with pytest.raises(UnsatisfiableError):
        sample_abstract(A, 5, "rejection", rng_seed=0)


def test_sample_abstract_strategies_produce_members():
    A = binary_scenarios(3)
    members = {t.sort_key() for t in enumerate_scenarios(A)}
    for strategy in ("uniform-leaf", "uniform-branch", "rejection"):
        out = sample_abstract(A, 40, strategy, rng_seed=11)
        assert len(out) == 40
        assert all(t.sort_key() in members for t in out)
        assert all(monitor_word(t, A) is Verdict.ACCEPTED for t in out)


def test_sample_abstract_is_seed_reproducible():
    A = binary_scenarios(4)
    a = sample_abstract(A, 25, "uniform-leaf", rng_seed=7)
    b = sample_abstract(A, 25, "uniform-leaf", rng_seed=7)
    assert [t.sort_key() for t in a] == [t.sort_key() for t in b]


def test_rejection_budget_error_reports_rate():
    inst = binary_branching(8)
    # Constraint pins one exact leaf out of 256: rejection from the world
    # alone accepts it rarely, so a tiny budget runs out.
    target = enumerate_scenarios(binary_scenarios(8))[137]
    A = AbstractScenario(trace_formula(target), (), inst)
    with pytest.raises(RejectionBudgetError) as err:
        sample_abstract(A, 30, "rejection", rng_seed=1, max_attempts=40)
    assert 0.0 <= err.value.acceptance_rate < 0.5


def test_uniform_leaf_requires_valid_strategy():
    with pytest.raises(RangeError):
        sample_abstract(binary_scenarios(3), 1, "bogus", rng_seed=0)


# --- misc -------------------------------------------------------------------------------------


def test_prefix_closure_exact_on_random_instances():
    for seed in range(30):
        A = random_step_scenario(seed)
        inst = A.instance
        from scenkit.core import Trajectory

        root = Trajectory(inst.schema, inst.grid(1), (inst.initial_scenes[0],))
        for steps in (1, 2):
            if steps > inst.horizon:
                continue
            for t in expand(AbstractScenario(TrueFormula(), (), inst), root, steps):
                assert is_prefix(root, t)


def test_deterministic_query():
    single = delta_step_instance(
        schema_of(("d0", "dimensionless")),
        [(1.0,)],
        1.0,
        4,
        [Scene(schema_of(("d0", "dimensionless")), (0.0,))],
    )
    assert is_deterministic(AbstractScenario(TrueFormula(), (), single))
    assert not is_deterministic(binary_scenarios(4))


def test_planar_instance_follows_reach_formula():
    A = AbstractScenario(reach_or_stop_formula(), (), planar_instance())
    from scenkit.fixtures import straight_drive_trajectory

    assert monitor_word(straight_drive_trajectory(), A) is Verdict.ACCEPTED
