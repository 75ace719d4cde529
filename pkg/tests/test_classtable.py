import pytest

from conftest import load_table
from typetower.classtable import (
    ClassTableError,
    Rule,
    count_walks,
    inheritance_graph,
    parse_class_table,
    parse_query,
    parse_tower,
    serialize_class_table,
    validate,
    validate_deterministic,
    validate_well_formed,
)


def test_parse_round_trip(example1):
    ct, _ = example1
    again = parse_class_table(serialize_class_table(ct))
    assert again.rules == ct.rules
    assert len(ct.rules) == 6


def test_rule_head_and_str():
    r = Rule("Ql", ("L", "N", "Ql", "L", "N"))
    assert r.head == "L"
    assert str(r) == "Ql x <: L N Ql L N x"
    assert Rule("E", ("E", "E"), ground=True).head == "E"


def test_query_forms():
    q = parse_query("Qr E E Z <: L N Z")
    assert q.subtype == ("Qr", "E", "E") and q.supertype == ("L", "N")
    assert parse_query("Qr E E Z\nL N Z") == q


@pytest.mark.parametrize(
    "text",
    [
        "A x <: B",          # missing tail
        "A x <: x",          # trivial cycle
        "Z x <: A x",        # reserved name
        "A x B x <: C x",    # garbage
    ],
)
def test_parse_errors(text):
    with pytest.raises(ClassTableError):
        parse_class_table(text)


def test_tower_needs_terminator():
    assert parse_tower("A B Z") == ("A", "B")
    with pytest.raises(ClassTableError):
        parse_tower("A B")


def test_example_table_is_valid(example1):
    ct, _ = example1
    assert validate(ct).ok


def test_even_body_is_ill_formed():
    rep = validate_well_formed(load_table("bad_even"))
    assert not rep.ok
    assert any("even length 2" in msg for _, msg in rep.diagnostics)


def test_two_walks_are_nondeterministic():
    ct = load_table("bad_ambiguous")
    assert validate_well_formed(ct).ok
    rep = validate_deterministic(ct)
    assert [msg for _, msg in rep.diagnostics] == ["2 walks from A to C"]


def test_walk_counts():
    g = inheritance_graph(load_table("bad_ambiguous"))
    assert count_walks(g)["A"]["C"] == 2


def test_ground_rules_are_exempt_from_parity():
    ct = parse_class_table("Q x <: E E Z")
    assert validate_well_formed(ct).ok
