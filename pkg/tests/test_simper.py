import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import load_grammar, load_simper
from typetower.grammar import generate_cyk_simper, preprocess
from typetower.simper import (
    ArrayT,
    ArrayV,
    NAT,
    SYM,
    Outcome,
    SimperSyntaxError,
    SimperTypeError,
    check,
    desugar,
    format_program,
    interpret,
    is_core,
    parse_simper,
    typecheck,
)


def run(src, word=(), fuel=10_000):
    return interpret(parse_simper(src), list(word), fuel)


@pytest.mark.parametrize(
    "src, word, outcome",
    [
        ("x := 3 --x if x == 2 { halt }", "", Outcome.HALTED),
        ("x := 0 --x", "", Outcome.STUCK_END),
        ("a := array[2,3](0) a[1,2] := 5 if a[1,2] == 5 { halt }", "", Outcome.HALTED),
        ("a := array[2](0) a[2] := 1", "", Outcome.RUNTIME_ERROR),
        ("x := y", "", Outcome.RUNTIME_ERROR),
        ("L: goto L", "", Outcome.OUT_OF_FUEL),
        ('switch input[0] { "a" { halt } "b" { x := 1 } }', "a", Outcome.HALTED),
        ('switch input[0] { "a" { halt } "b" { x := 1 } }', "b", Outcome.STUCK_END),
        ('if n == 0 || input[0] == "a" { halt }', "", Outcome.HALTED),
        ('if n != 0 && input[0] == "a" { halt }', "", Outcome.STUCK_END),
        ("x := 1 y := x ++y if x != y { halt }", "", Outcome.HALTED),
        ("x := 0 while x != 3 { ++x } if x == 3 { goto B } x := 7 B: halt", "", Outcome.HALTED),
    ],
)
def test_interpreter_outcomes(src, word, outcome):
    assert run(src, word).outcome is outcome


def test_decrement_saturates_at_zero():
    assert run("x := 0 --x").env["x"] == 0


def test_values_are_copied_not_shared():
    r = run("a := array[2](0) b := a b[0] := 1 if a[0] == 0 { halt }")
    assert r.halted
    assert r.env["b"] == ArrayV((2,), [1, 0])


def test_step_counts_are_exact():
    # one step per executed assignment, test, increment and jump
    assert run("x := 0 ++x ++x halt").steps == 4


def test_typecheck_infers_types():
    env = check(parse_simper('x := 0  s := "a"  a := array[2, n](s)  b := array[3](a)'))
    assert env["x"] == NAT and env["s"] == SYM
    assert env["a"] == ArrayT(2, SYM)
    assert env["b"] == ArrayT(1, ArrayT(2, SYM))
    assert env["input"] == ArrayT(1, SYM)


@pytest.mark.parametrize(
    "src, fragment",
    [
        ('x := 0  x := "a"', "assigning sym"),
        ("n := 1", "read-only"),
        ('s := "a"  ++s', "needs a nat"),
        ('x := 0  if x == "a" { halt }', ""),
    ],
)
def test_type_errors(src, fragment):
    rep = typecheck(parse_simper(src))
    assert not rep.ok
    assert any(fragment in d for d in rep.diagnostics)
    with pytest.raises(SimperTypeError):
        check(parse_simper(src))


@pytest.mark.parametrize("src", ["x := ", "if x { halt }", "x := 0 }", "goto", 'x := "a'])
def test_syntax_errors(src):
    with pytest.raises(SimperSyntaxError):
        parse_simper(src)


def test_format_round_trip():
    p = load_simper("lambig_specialized")
    assert parse_simper(format_program(p)) == p


def _fixture_programs():
    yield load_simper("lambig_specialized")
    yield generate_cyk_simper(preprocess(load_grammar("anbn")))
    yield parse_simper('i := 0 while i != n { switch input[i] { "a" { ++i } "b" { goto E } } } halt E: i := 0')


@pytest.mark.parametrize("k", range(3))
def test_desugared_programs_behave_the_same(k):
    p = list(_fixture_programs())[k]
    core = desugar(p)
    assert is_core(core) and not is_core(p)
    symbols = "abcd" if k == 0 else "ab"
    for n in range(5):
        for w in itertools.product(symbols, repeat=n):
            a = interpret(p, list(w), 10**5)
            b = interpret(core, list(w), 10**5)
            assert a.outcome is b.outcome, w


@given(st.lists(st.sampled_from("ab"), max_size=8))
def test_nats_never_go_negative(word):
    r = interpret(parse_simper("x := n  while x != 0 { --x --x }  halt"), word, 1000)
    assert r.outcome in (Outcome.HALTED, Outcome.OUT_OF_FUEL)
    assert r.env["x"] >= 0
