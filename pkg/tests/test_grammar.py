import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load_grammar
from typetower.grammar import (
    Grammar,
    GrammarError,
    binarize,
    cyk_simper_source,
    eliminate_epsilon,
    generate_cyk_simper,
    grammar_size,
    nullable_set,
    parse_grammar,
    preprocess,
    preprocessed_cyk,
    reference_cyk,
)
from typetower.simper import check, interpret, program_size

GRAMMARS = ["ab", "anbn", "lambig"]


def in_lambig(w: str) -> bool:
    import re

    m = re.fullmatch(r"(a*)(b*)(c*)(d*)", w)
    if not m:
        return False
    a, b, c, d = (len(x) for x in m.groups())
    return (a == b and c == d) or (a == d and b == c)


def test_parse_and_format_round_trip(lambig):
    again = parse_grammar(lambig.format())
    assert sorted(again.productions) == sorted(lambig.productions)
    assert again.terminals == lambig.terminals and again.start == lambig.start
    assert lambig.start == "S"
    assert lambig.terminals == ["a", "d", "b", "c"]
    assert ("E", ()) in lambig.productions


@pytest.mark.parametrize(
    "text",
    [
        "S -> 'a'",                  # no start line
        "start: S\nS 'a'",           # no arrow
        "start: S\nS -> 'a",         # unterminated terminal
        "start: T\nS -> 'a'\nT -> 'T' T",  # name used both ways
    ],
)
def test_grammar_errors(text):
    with pytest.raises(GrammarError):
        parse_grammar(text)


def test_size_counts_terminals_and_productions(lambig):
    assert grammar_size(lambig) == 32
    assert grammar_size(load_grammar("ab")) == 2 + 3


def test_binarize_limits_lengths(lambig):
    b = binarize(lambig)
    assert max(len(r) for _, r in b.productions) <= 2
    assert ("X", ("a", "X'")) in b.productions and ("X'", ("X", "d")) in b.productions


def test_nullable_set(lambig):
    assert nullable_set(lambig) == {"S", "X", "Y", "E", "F", "G"}


def test_eliminate_epsilon_requires_binary_grammar(lambig):
    with pytest.raises(GrammarError):
        eliminate_epsilon(lambig)


def test_numbering_is_injective(lambig):
    pg = preprocess(lambig)
    assert pg.numbering["S"] == 0
    assert sorted(pg.numbering.values()) == list(range(len(pg.numbering)))
    assert all(pg.numbering[t] >= len(pg.nonterminals) for t in pg.terminals)


def test_no_epsilon_or_self_loops_after_preprocessing(lambig):
    pg = preprocess(lambig)
    assert all(r and r != (a,) for a, r in pg.binary + pg.unary)


@pytest.mark.parametrize("n", range(7))
def test_reference_cyk_on_anbn_matches_closed_form(n):
    g = load_grammar("anbn")
    for w in itertools.product("ab", repeat=n):
        s = "".join(w)
        expected = n % 2 == 0 and s == "a" * (n // 2) + "b" * (n // 2)
        assert reference_cyk(g, w) == expected


def test_reference_cyk_on_lambig_matches_closed_form(lambig):
    for n in range(7):
        for w in itertools.product("abcd", repeat=n):
            assert reference_cyk(lambig, w) == in_lambig("".join(w))


@pytest.mark.parametrize("name", GRAMMARS)
def test_preprocessing_preserves_the_language(name):
    g = load_grammar(name)
    pg = preprocess(g)
    for n in range(7 if name != "lambig" else 6):
        for w in itertools.product(g.terminals, repeat=n):
            assert preprocessed_cyk(pg, w) == reference_cyk(g, w)


@pytest.mark.parametrize("name", ["ab", "anbn"])
def test_generated_parser_matches_oracle(name):
    g = load_grammar(name)
    p = generate_cyk_simper(preprocess(g))
    check(p)
    for n in range(9):
        for w in itertools.product(g.terminals, repeat=n):
            assert interpret(p, list(w), 10**6).halted == reference_cyk(g, w)


def test_generated_source_mentions_each_production(lambig):
    pg = preprocess(lambig)
    src = cyk_simper_source(pg)
    assert src.startswith("if n == 0 { halt }")
    assert src.count("// ") == len(pg.binary) + len(pg.unary) + 1
    assert f"T[0, n, {pg.numbering['S']}] == 1" in src


def test_parser_size_is_affine_in_grammar_size():
    def features(name):
        pg = preprocess(load_grammar(name))
        return len(pg.binary), len(pg.unary), len(pg.terminals), program_size(generate_cyk_simper(pg))

    rows = [features(n) for n in GRAMMARS]
    # each binary production, unary production and terminal adds a fixed amount of code
    per_binary, per_unary, per_terminal = 20, 13, 7
    bases = {size - per_binary * b - per_unary * u - per_terminal * t for b, u, t, size in rows}
    assert len(bases) <= 2  # only the nullable-start guard differs


@settings(max_examples=30, deadline=None)
@given(
    prods=st.lists(
        st.tuples(st.sampled_from("ST"), st.lists(st.sampled_from(["S", "T", "a", "b"]), max_size=3)),
        min_size=1,
        max_size=5,
    ),
    word=st.lists(st.sampled_from("ab"), max_size=4),
)
def test_random_grammars_preprocess_soundly(prods, word):
    productions = [(a, tuple(r)) for a, r in prods] + [("T", ("a",))]
    g = Grammar(["a", "b"], ["S", "T"], productions, "S")
    pg = preprocess(g)
    expected = reference_cyk(g, word)
    assert preprocessed_cyk(pg, word) == expected
    assert interpret(generate_cyk_simper(pg), word, 10**6).halted == expected
