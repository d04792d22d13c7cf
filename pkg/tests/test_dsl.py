import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import ACTUATORS, INTERNALS, SENSORS, ProgramGen
from mutinv.dsl import (
    Assign,
    BinOp,
    Compare,
    Declarations,
    DslDivisionByZero,
    DslSyntaxError,
    DslTypeError,
    If,
    Num,
    Program,
    Var,
    evaluate,
    parse,
    pretty_print,
    validate,
    walk,
)
from mutinv.dsl.printer import format_number

DECL = Declarations(frozenset(SENSORS), frozenset(ACTUATORS))
LEVELS = dict(zip(SENSORS, (500.0, 500.0, 500.0, 500.0, 500.0)))
OFF = dict.fromkeys(ACTUATORS, 0.0)


def test_smallest_program():
    p = parse("P1 := 1;")
    assert p.body == (Assign("P1", Num(1.0)),)
    assert [n.nid for n in p.nodes()] == [0, 1]


def test_canonical_conditional():
    p = parse("if L1 > 800 then P1 := 0; end")
    (stmt,) = p.body
    assert isinstance(stmt, If)
    assert stmt.cond == Compare(">", Var("L1"), Num(800.0))
    assert stmt.then == (Assign("P1", Num(0.0)),)
    assert stmt.orelse is None


def test_preorder_ids():
    p = parse("if L1 > 800 then P1 := 0; else P1 := 1; end")
    kinds = [type(n).__name__ for n in sorted(p.nodes(), key=lambda n: n.nid)]
    assert kinds == ["If", "Compare", "Var", "Num", "Assign", "Num", "Assign", "Num"]


def nested(depth: int) -> str:
    return "if L1 > 0 then " * depth + "P1 := 1;" + " end" * depth


def test_depth_three_allowed_four_rejected():
    parse(nested(3))
    with pytest.raises(DslSyntaxError, match="nesting depth exceeds 3"):
        parse(nested(4))


def test_precedence_and_associativity():
    p = parse("x := 1 - 2 - 3 * 4 / 5;")
    e = p.body[0].expr
    assert e == BinOp("-", BinOp("-", Num(1.0), Num(2.0)), BinOp("/", BinOp("*", Num(3.0), Num(4.0)), Num(5.0)))
    b = parse("P1 := not L1 > 1 or L2 < 2 and L3 = 3;").body[0].expr
    assert b.op == "or" and b.right.op == "and"


def test_keywords_case_insensitive_and_comments():
    src = """
    // a line comment
    IF L1 > 1 THEN (* block
    comment *) P1 := 1; ELSE P1 := 0; END
    """
    p = parse(src)
    assert isinstance(p.body[0], If) and p.body[0].orelse is not None


def test_bang_equals_is_not_equal():
    assert parse("P1 := L1 != 2;").body[0].expr.op == "<>"


@pytest.mark.parametrize(
    "src, line, col",
    [
        ("P1 := ;", 1, 7),
        ("P1 := 1", 1, 8),
        ("P1 := 1;\nif L1 > then P1 := 0; end", 2, 9),
        ("P1 := 1 $ 2;", 1, 9),
        ("(* never closed", 1, 1),
        ("if L1 > 0 then P1 := 1;", 1, 24),
    ],
)
def test_syntax_errors_carry_position(src, line, col):
    with pytest.raises(DslSyntaxError) as info:
        parse(src)
    assert (info.value.line, info.value.col) == (line, col)
    assert info.value.format("c.ctl").startswith(f"c.ctl:{line}:{col}: ")


def test_loops_are_not_in_the_grammar():
    with pytest.raises(DslSyntaxError):
        parse("while L1 > 0 do P1 := 1; end")


def test_pretty_print_forms():
    assert pretty_print(Program((Assign("P1", Num(1.0)),))) == "P1 := 1;"
    text = pretty_print(parse("if L1 > 800 then P1 := 0; else P1 := 1; end"))
    assert text.split().count("else") == 1
    assert text == "if L1 > 800 then\n    P1 := 0;\nelse\n    P1 := 1;\nend"


def test_pretty_print_parenthesises_only_when_needed():
    src = "x := (a - (b - c)) * -(d + e) / abs(f);"
    assert pretty_print(parse(src)) == "x := (a - (b - c)) * -(d + e) / abs(f);"
    assert pretty_print(parse("x := ((a + b)) + c;")) == "x := a + b + c;"


def test_number_formatting():
    assert format_number(3.0) == "3"
    assert format_number(0.1) == "0.1"
    assert format_number(1e-7) == "1e-07"
    assert parse(f"x := {format_number(1e-7)};").body[0].expr.value == 1e-7
    with pytest.raises(ValueError):
        format_number(-1.0)


def test_default_controller_round_trips_and_validates(controller, declarations):
    assert parse(pretty_print(controller)) == controller
    assert validate(controller, declarations) == []


def test_roundtrip_fuzz_sample():
    for seed in range(300):
        p = ProgramGen(seed).program()
        assert parse(pretty_print(p)) == p, pretty_print(p)


def test_validate_unknown_identifier():
    diags = validate(parse("P1 := L9 > 1;"), DECL)
    assert [d.message for d in diags] == ["unknown identifier L9"]


def test_validate_depth():
    diags = validate(parse(nested(4), max_depth=10), DECL)
    assert len(diags) == 1 and "depth" in diags[0].message


def test_validate_assignment_to_sensor_and_use_before_assignment():
    assert "sensor" in validate(parse("L1 := 3;"), DECL)[0].message
    diags = validate(parse("if L1 > 0 then x := 1; end P1 := x;"), DECL)
    assert len(diags) == 1 and "before assignment" in diags[0].message
    assert validate(parse("if L1 > 0 then x := 1; else x := 2; end P1 := x;"), DECL) == []


def test_validate_types():
    assert "boolean" in validate(parse("P1 := (L1 > 2) + 1;"), DECL)[0].message
    assert validate(parse("if L1 + 1 then P1 := 1; end"), DECL)


def test_parse_with_declarations_raises_first_diagnostic():
    with pytest.raises(DslSyntaxError, match="unknown identifier L9"):
        parse("P1 := 1;\nV12 := L9;", DECL)


def test_diagnostic_format():
    d = validate(parse("P1 := 1;\nV12 := L9;"), DECL)[0]
    assert d.format("plc.ctl") == "plc.ctl:2:8: unknown identifier L9"


def test_evaluate_guard_taken():
    p = parse("if L1 > 800 then P1 := 0; end")
    out, cov = evaluate(p, {**LEVELS, "L1": 900.0}, {**OFF, "P1": 1.0})
    assert out["P1"] == 0.0
    guard, assign = p.body[0].cond, p.body[0].then[0]
    assert guard.nid in cov and assign.nid in cov


def test_evaluate_guard_not_taken():
    p = parse("if L1 > 800 then P1 := 0; end")
    out, cov = evaluate(p, {**LEVELS, "L1": 700.0}, {**OFF, "P1": 1.0})
    assert out["P1"] == 1.0
    assert p.body[0].then[0].nid not in cov


def test_division_by_zero_names_node():
    p = parse("P1 := 1/0;")
    with pytest.raises(DslDivisionByZero) as info:
        evaluate(p, LEVELS, OFF)
    assert info.value.node_id == p.body[0].expr.nid


def test_runtime_type_errors():
    with pytest.raises(DslTypeError):
        evaluate(parse("if L1 then P1 := 1; end"), LEVELS, OFF)
    with pytest.raises(DslTypeError):
        evaluate(parse("P1 := (L1 > 1) * 2;"), LEVELS, OFF)


def test_short_circuit_coverage():
    p = parse("P1 := L1 > 900 and L2 > 0;")
    _, cov = evaluate(p, LEVELS, OFF)
    right = p.body[0].expr.right
    assert all(n.nid not in cov for n in walk(right))


def test_actuators_are_two_valued_and_internals_scan_local():
    p = parse("x := L1 / 100; P1 := x; V12 := 0 - 3;")
    out, _ = evaluate(p, LEVELS, OFF)
    assert out["P1"] == 1.0 and out["V12"] == 1.0
    assert "x" not in out


def test_actuator_reads_see_previous_and_updated_values():
    p = parse("P1 := P1 = 0;")
    out, _ = evaluate(p, LEVELS, OFF)
    assert out["P1"] == 1.0
    out, _ = evaluate(p, LEVELS, out)
    assert out["P1"] == 0.0


def test_evaluate_is_pure():
    p = parse("P1 := L1 > 1; V12 := 1;")
    sensors, acts = dict(LEVELS), dict(OFF)
    a = evaluate(p, sensors, acts)
    b = evaluate(p, sensors, acts)
    assert a == b
    assert sensors == LEVELS and acts == OFF


def _straight_line(p: Program) -> bool:
    return not any(isinstance(s, If) for s in p.body)


def test_coverage_is_subset_and_straight_line_complete():
    for seed in range(300):
        p = ProgramGen(seed, max_if_depth=3).program()
        try:
            _, cov = evaluate(p, LEVELS, OFF)
        except (DslDivisionByZero, DslTypeError):
            continue
        ids = p.node_ids()
        assert cov <= ids
        assert {s.nid for s in p.body} <= cov
        flat = ProgramGen(seed, max_if_depth=0).program()
        try:
            _, cov = evaluate(flat, LEVELS, OFF)
        except (DslDivisionByZero, DslTypeError):
            continue
        if not any(n.op in ("and", "or") for n in flat.nodes() if hasattr(n, "op")):
            assert cov == flat.node_ids()


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), st.lists(st.floats(0, 1000), min_size=5, max_size=5))
def test_evaluation_terminates_within_node_bound(seed, levels):
    # No loops: a scan visits each node at most once, so coverage never exceeds the node count.
    p = ProgramGen(seed).program()
    try:
        out, cov = evaluate(p, dict(zip(SENSORS, levels)), OFF)
    except (DslDivisionByZero, DslTypeError):
        return
    assert len(cov) <= len(list(p.nodes()))
    assert set(out) == set(ACTUATORS)
    assert not set(out) & set(INTERNALS)
