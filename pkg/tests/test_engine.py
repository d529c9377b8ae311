import pytest

from mbsa.diagnostics import ResourceCapError
from mbsa.sts.check import type_check
from mbsa.sts.engine import Engine, Trace, initial_states, reach, replay_ok, successors
from mbsa.sts.parse import parse_expr_text, parse_model


def _tm(text):
    return type_check(parse_model(text))


COUNTER = "MODULE m VAR x : 0..3; INIT x = 0; TRANS next(x) = x + 1;"


def test_initial_states_simple():
    tm = _tm("MODULE m VAR x : boolean; INIT !x;")
    assert initial_states(tm) == [{"x": False}]


def test_initial_states_unconstrained():
    tm = _tm("MODULE m VAR x : boolean; y : boolean;")
    assert len(initial_states(tm)) == 4


def test_successors_deterministic_counter():
    tm = _tm(COUNTER)
    assert successors(tm, {"x": 1}) == [{"x": 2}]


def test_successors_unconstrained_boolean():
    tm = _tm("MODULE m VAR v : boolean; w : boolean; TRANS next(w) = w;")
    succ = successors(tm, {"v": False, "w": True})
    assert len(succ) == 2 and {s["v"] for s in succ} == {False, True}


def test_out_of_range_next_is_deadlock():
    tm = _tm(COUNTER)
    assert successors(tm, {"x": 3}) == []


def test_invar_removes_states():
    tm = _tm("MODULE m VAR x : 0..3; INIT x = 0; TRANS next(x) = x + 1; INVAR x != 2;")
    assert successors(tm, {"x": 1}) == []


def test_reach_shortest_witness():
    tm = _tm(COUNTER)
    t = reach(tm, tm.check_expr(parse_expr_text("x = 3")))
    assert [s["x"] for s in t.states] == [0, 1, 2, 3]
    assert replay_ok(tm, t)


def test_reach_false_unreachable():
    tm = _tm(COUNTER)
    assert reach(tm, tm.check_expr(parse_expr_text("FALSE"))) is None


def test_reach_initial_state_hit():
    tm = _tm(COUNTER)
    t = reach(tm, tm.check_expr(parse_expr_text("x = 0")))
    assert len(t) == 1


def test_reach_respects_bound():
    tm = _tm(COUNTER)
    target = tm.check_expr(parse_expr_text("x = 3"))
    assert reach(tm, target, bound=2) is None
    assert reach(tm, target, bound=3) is not None


def test_reach_shortest_matches_bfs_oracle():
    # nondeterministic model: the engine's witness must be as short as a
    # plain breadth-first search says is possible
    tm = _tm("""MODULE m
VAR x : 0..7; fast : boolean;
INIT x = 0;
TRANS next(x) = (fast ? (x + 2 > 7 ? 7 : x + 2) : (x + 1 > 7 ? 7 : x + 1));
""")
    target = tm.check_expr(parse_expr_text("x = 7"))
    witness = reach(tm, target)
    eng = Engine(tm)
    layer = set(eng.init_tuples())
    depth = 0
    tgt = eng.compile(target)
    while not any(tgt(s, None) for s in layer):
        layer = {t for s in layer for t in eng.succ_tuples(s)}
        depth += 1
    assert len(witness) == depth + 1
    assert replay_ok(tm, witness)


def test_state_graph_enumeration_terminates():
    tm = _tm("MODULE m VAR x : 0..3; y : boolean;")
    eng = Engine(tm)
    assert len(eng.reachable_tuples()) == 8


def test_resource_cap():
    tm = _tm("MODULE m VAR x : 0..200; INIT x = 0; TRANS next(x) = (x < 200 ? x + 1 : x);")
    eng = Engine(tm, cap=10)
    with pytest.raises(ResourceCapError):
        eng.reachable_tuples()


def test_determinism_of_orders():
    tm = _tm("MODULE m VAR a : {X, Y, Z}; b : boolean;")
    first = initial_states(tm)
    second = initial_states(tm)
    assert first == second
    expected = [{"a": lit, "b": v} for lit in ("X", "Y", "Z") for v in (False, True)]
    assert first == expected


def test_replay_rejects_bad_traces():
    tm = _tm(COUNTER)
    assert not replay_ok(tm, Trace([{"x": 1}]))  # violates INIT
    assert not replay_ok(tm, Trace([{"x": 0}, {"x": 2}]))  # violates TRANS


def test_defines_evaluate_through_engine():
    tm = _tm("""MODULE m
VAR b : 0..4;
DEFINE low := b <= 1; critical := low & b = 0;
INIT b = 4;
TRANS next(b) = (b > 0 ? b - 1 : b);
""")
    t = reach(tm, tm.check_expr(parse_expr_text("critical")))
    assert [s["b"] for s in t.states] == [4, 3, 2, 1, 0]


def test_battery_sensor_nominal_is_safe(battery_sensor):
    # with no faults injected the system never dies
    xm = battery_sensor
    from mbsa.analysis import witness
    assert witness(xm, frozenset(), parse_expr_text("sys_dead")) is None


def test_battery_sensor_shape(battery_sensor):
    from conftest import FIXTURES
    nominal = type_check(parse_model((FIXTURES / "battery_sensor.smx").read_text()))
    assert len(nominal.model.variables) == 7  # two generators, two batteries, two sensors, mode
    (init,) = initial_states(battery_sensor.typed)
    assert init["mode"] == "P"  # primary configuration, everything healthy
    assert all(v == "nominal" for k, v in init.items() if k.startswith("mode#"))
