import json
import random
from fractions import Fraction
from pathlib import Path

import jsonschema
import pytest

from flexcert.fflab import PrimeField, sample_C_points
from flexcert.flex import build_f, build_h, witness_point
from flexcert.multicone import (
    BlockPoint,
    MultiConeSystem,
    NotOnCone,
    TorusElement,
    check_multihomogeneous,
    component_vanishing_check,
    default_translates,
    orbit_curve,
    orbit_limit,
    restrict_block_to_zero,
    torus_act,
)
from flexcert.poly import (
    FLEX_GROUPING,
    FLEX_UNIVERSE,
    Universe,
    VariableGrouping,
    parse,
)

SCHEMAS = Path(__file__).resolve().parents[1] / "src" / "flexcert" / "schemas"


@pytest.fixture(scope="module")
def flex_system():
    return MultiConeSystem(FLEX_GROUPING, [build_f(), build_h()])


@pytest.fixture(scope="module")
def witness():
    return BlockPoint(FLEX_GROUPING, witness_point())


def random_point(rng, grouping):
    return BlockPoint(grouping, {n: Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for n in grouping.universe})


def random_torus(rng, s):
    return TorusElement(tuple(
        Fraction(rng.choice([-1, 1]) * rng.randint(1, 7), rng.randint(1, 3)) for _ in range(s)
    ))


# s = 3 synthetic system: blocks {u0,u1}, {v0}, {w0,w1}
SYN_U = Universe(("u0", "u1", "v0", "w0", "w1"))
SYN_GROUPING = VariableGrouping(SYN_U, (("u0", "u1"), ("v0",), ("w0", "w1")))
SYN_GENS = [parse("u0*v0*w0 - u1*v0*w1", SYN_U), parse("u0^2*v0^3*w1 + u1^2*v0^3*w0", SYN_U)]


# -- torus elements and the action ----------------------------------------


def test_torus_rejects_zero():
    with pytest.raises(ValueError):
        TorusElement((1, 0))


def test_torus_identity_acts_trivially(witness):
    assert torus_act(TorusElement.identity(2), witness).values == witness.values


def test_torus_act_scales_blocks(witness):
    moved = torus_act(TorusElement((2, 1)), witness)
    assert moved.block(0) == (0, -2, 2)
    assert moved.block(1) == witness.block(1)


def test_torus_act_keeps_witness_on_f(witness):
    rng = random.Random(1)
    for _ in range(20):
        t = random_torus(rng, 2)
        moved = torus_act(t, witness)
        assert moved.evaluate(build_f()) == t.character((3, 1)) * witness.evaluate(build_f()) == 0


def test_action_axioms():
    rng = random.Random(2)
    for grouping in (FLEX_GROUPING, SYN_GROUPING):
        s = len(grouping)
        for _ in range(100):
            t, t2 = random_torus(rng, s), random_torus(rng, s)
            v = random_point(rng, grouping)
            assert torus_act(t, torus_act(t2, v)).values == torus_act(t * t2, v).values


def test_scaling_law_random():
    rng = random.Random(3)
    for grouping, gens in ((FLEX_GROUPING, [build_f(), build_h()]), (SYN_GROUPING, SYN_GENS)):
        system = MultiConeSystem(grouping, gens)
        for _ in range(100):
            t = random_torus(rng, system.s)
            v = random_point(rng, grouping)
            for q, d in zip(system.generators, system.degrees):
                assert torus_act(t, v).evaluate(q) == t.character(d) * v.evaluate(q)


# -- systems and homogeneity ------------------------------------------------


def test_system_degrees_and_positivity(flex_system):
    assert flex_system.degrees == [(3, 1), (3, 3)]
    assert flex_system.positive


def test_system_declared_degrees_checked():
    MultiConeSystem(FLEX_GROUPING, [build_f()], declared=[(3, 1)])
    with pytest.raises(ValueError):
        MultiConeSystem(FLEX_GROUPING, [build_f()], declared=[(1, 3)])


def test_positivity_flag_false_when_a_block_degree_is_zero():
    system = MultiConeSystem(FLEX_GROUPING, [parse("x0^2")])
    assert not system.positive


def test_check_multihomogeneous_flex(flex_system):
    reports = check_multihomogeneous(flex_system)
    assert [(r.ok, r.multidegree, r.positive) for r in reports] == [
        (True, (3, 1), True), (True, (3, 3), True),
    ]


def test_check_multihomogeneous_s3():
    reports = check_multihomogeneous(MultiConeSystem(SYN_GROUPING, SYN_GENS))
    assert [r.multidegree for r in reports] == [(1, 1, 1), (2, 3, 1)]
    assert all(r.ok and r.positive for r in reports)


def test_check_multihomogeneous_reports_witness_terms():
    (rep,) = check_multihomogeneous(FLEX_GROUPING, [parse("x0 + x0*a300")])
    assert not rep.ok
    assert set(rep.witness) == {"x0", "x0*a300"}


def test_system_json_roundtrip(flex_system):
    payload = json.loads(flex_system.dumps())
    jsonschema.validate(payload, json.loads((SCHEMAS / "multicone.schema.json").read_text()))
    back = MultiConeSystem.from_json(payload)
    assert back.generators == flex_system.generators
    assert back.grouping == flex_system.grouping


# -- restriction to coordinate blocks ---------------------------------------


def test_restrict_examples():
    assert restrict_block_to_zero(build_f(), FLEX_GROUPING, 0).is_zero()
    assert restrict_block_to_zero(build_h(), FLEX_GROUPING, 1).is_zero()
    assert restrict_block_to_zero(parse("x0 + a300"), FLEX_GROUPING, 0) == parse("a300")
    with pytest.raises(IndexError):
        restrict_block_to_zero(build_f(), FLEX_GROUPING, 2)


def test_D_inside_C_symbolically():
    for grouping, gens in ((FLEX_GROUPING, [build_f(), build_h()]), (SYN_GROUPING, SYN_GENS)):
        system = MultiConeSystem(grouping, gens)
        assert system.positive
        for q in gens:
            for i in range(system.s):
                assert restrict_block_to_zero(q, grouping, i).is_zero()


# -- orbit curves -------------------------------------------------------------


def test_orbit_identity_parameter(flex_system, witness):
    assert orbit_curve(flex_system, witness, 0, 1).values == witness.values


def test_orbit_points_stay_on_C(flex_system, witness):
    rng = random.Random(4)
    for _ in range(50):
        t = Fraction(rng.choice([-1, 1]) * rng.randint(1, 50), rng.randint(1, 50))
        for i in (0, 1):
            pt = orbit_curve(flex_system, witness, i, t)
            assert flex_system.contains(pt)
            assert pt.in_U()


def test_orbit_limits_lie_in_C(flex_system, witness):
    for i in (0, 1):
        limit = orbit_limit(witness, i)
        assert limit.block_is_zero(i) and not limit.in_U()
        assert flex_system.contains(limit)


def test_orbit_errors(flex_system, witness):
    with pytest.raises(ValueError):
        orbit_curve(flex_system, witness, 0, 0)
    off = BlockPoint(FLEX_GROUPING, dict(witness.values, x1=1))
    with pytest.raises(NotOnCone):
        orbit_curve(flex_system, off, 0, 2)
    with pytest.raises(NotOnCone):
        orbit_curve(flex_system, orbit_limit(witness, 0), 1, 2)


# -- empirical check of component vanishing -----------------------------------


def test_translates_are_distinct_and_start_at_identity():
    ts = default_translates(2)
    assert len(ts) == 16
    assert ts[0] == TorusElement.identity(2)
    assert len({t.coords for t in ts}) == 16


def test_component_vanishing_on_f_plus_h(flex_system, witness):
    rep = component_vanishing_check(flex_system, build_f() + build_h(), [witness])
    assert rep.ok and rep.points_checked == 1
    assert [d for d, _ in rep.components] == [(3, 1), (3, 3)]


def test_component_vanishing_zero_is_vacuous(flex_system, witness):
    rep = component_vanishing_check(flex_system, FLEX_UNIVERSE.zero(), [witness])
    assert rep.ok and rep.components == []


def test_component_vanishing_on_finite_field_points(flex_system):
    points = sample_C_points(PrimeField(10007), 20, seed=5)
    x0, a300 = FLEX_UNIVERSE.var("x0"), FLEX_UNIVERSE.var("a300")
    g = build_f() * (x0 * a300) + build_h()
    rep = component_vanishing_check(flex_system, g, points)
    assert rep.ok and rep.points_checked == 20
    assert rep.components == [((3, 3), build_h()), ((4, 2), build_f() * x0 * a300)]


def test_component_vanishing_rejects_points_off_C(flex_system, witness):
    off = BlockPoint(FLEX_GROUPING, dict(witness.values, x1=1))
    with pytest.raises(NotOnCone):
        component_vanishing_check(flex_system, build_f(), [off])


def test_component_vanishing_skips_points_where_g_does_not_vanish(flex_system, witness):
    g = FLEX_UNIVERSE.var("x0") + FLEX_UNIVERSE.var("x1")
    rep = component_vanishing_check(flex_system, g, [witness])
    assert rep.points_skipped == 1 and rep.points_checked == 0


def test_component_vanishing_counterexample_is_reported():
    # C is the whole space for the zero system; a pathological g is built whose
    # components cancel at the witness for the identity translate only
    system = MultiConeSystem(SYN_GROUPING, [])
    pt = BlockPoint(SYN_GROUPING, {"u0": 1, "u1": 0, "v0": 1, "w0": 1, "w1": 0})
    g = parse("u0 - v0", SYN_U)
    rep = component_vanishing_check(system, g, [pt], translates=[TorusElement.identity(3)])
    assert not rep.ok
    assert rep.counterexample == ((0, 1, 0), 0)
