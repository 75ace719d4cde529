"""Context-free grammars: preprocessing, a reference CYK oracle and CYK parser generation.

Text format::

    start: S
    S -> X | Y
    X -> 'a' X 'd' | F
    E -> 'a' E 'b' |          # an empty alternative is epsilon

Terminals are single-quoted, nonterminals are bare identifiers (a trailing
prime is allowed, as in ``X'``). ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property

from .simper.ast import Program
from .simper.parser import parse_simper

Production = tuple[str, tuple[str, ...]]


class GrammarError(ValueError):
    pass


@dataclass
class Grammar:
    terminals: list[str]
    nonterminals: list[str]
    productions: list[Production]
    start: str

    def __post_init__(self):
        ts, ns = set(self.terminals), set(self.nonterminals)
        if ts & ns:
            raise GrammarError(f"symbols used as terminal and nonterminal: {sorted(ts & ns)}")
        if self.start not in ns:
            raise GrammarError(f"start symbol {self.start} is not a nonterminal")
        for lhs, rhs in self.productions:
            if lhs not in ns:
                raise GrammarError(f"left-hand side {lhs} is not a nonterminal")
            for x in rhs:
                if x not in ts and x not in ns:
                    raise GrammarError(f"unknown symbol {x} in a production of {lhs}")

    def is_terminal(self, x: str) -> bool:
        return x in self._terminal_set

    @cached_property
    def _terminal_set(self) -> frozenset:
        return frozenset(self.terminals)

    def by_lhs(self) -> dict[str, list[tuple[str, ...]]]:
        out: dict[str, list[tuple[str, ...]]] = {a: [] for a in self.nonterminals}
        for lhs, rhs in self.productions:
            out[lhs].append(rhs)
        return out

    def format(self) -> str:
        lines = [f"start: {self.start}"]
        for a, alts in self.by_lhs().items():
            if alts:
                body = " | ".join(" ".join(self._show(x) for x in rhs) for rhs in alts)
                lines.append(f"{a} -> {body}".rstrip())
        return "\n".join(lines) + "\n"

    def _show(self, x: str) -> str:
        return f"'{x}'" if self.is_terminal(x) else x


_TOKEN = re.compile(r"\s*(?:'([^'\s]+)'|([A-Za-z_][A-Za-z0-9_']*)|(\|))")


def parse_grammar(text: str) -> Grammar:
    start = None
    terminals: dict[str, None] = {}
    nonterminals: dict[str, None] = {}
    prods: list[Production] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("start:"):
            start = line[len("start:") :].strip()
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", start):
                raise GrammarError(f"line {lineno}: bad start symbol {start!r}")
            nonterminals.setdefault(start)
            continue
        if "->" not in line:
            raise GrammarError(f"line {lineno}: expected 'A -> ...'")
        lhs, rhs_text = (s.strip() for s in line.split("->", 1))
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", lhs):
            raise GrammarError(f"line {lineno}: bad nonterminal {lhs!r}")
        nonterminals.setdefault(lhs)
        alt: list[str] = []
        pos = 0
        while pos < len(rhs_text):
            m = _TOKEN.match(rhs_text, pos)
            if not m:
                if rhs_text[pos:].strip() == "":
                    break
                raise GrammarError(f"line {lineno}: cannot read {rhs_text[pos:]!r}")
            pos = m.end()
            if m.group(3):
                prods.append((lhs, tuple(alt)))
                alt = []
            elif m.group(1):
                terminals.setdefault(m.group(1))
                alt.append(m.group(1))
            else:
                nonterminals.setdefault(m.group(2))
                alt.append(m.group(2))
        prods.append((lhs, tuple(alt)))
    if start is None:
        raise GrammarError("missing 'start:' line")
    return Grammar(list(terminals), list(nonterminals), prods, start)


def grammar_size(g: Grammar) -> int:
    return len(g.terminals) + sum(len(rhs) + 1 for _, rhs in g.productions)


def _fresh(name: str, taken: set) -> str:
    new = name + "'"
    while new in taken:
        new += "'"
    taken.add(new)
    return new


def binarize(g: Grammar) -> Grammar:
    """Split long right-hand sides after their first symbol until every one has length ≤ 2."""
    taken = set(g.nonterminals) | set(g.terminals)
    nts = list(g.nonterminals)
    prods: list[Production] = []
    for lhs, rhs in g.productions:
        while len(rhs) > 2:
            fresh = _fresh(lhs, taken)
            nts.append(fresh)
            prods.append((lhs, (rhs[0], fresh)))
            lhs, rhs = fresh, rhs[1:]
        prods.append((lhs, rhs))
    return Grammar(list(g.terminals), nts, prods, g.start)


def nullable_set(g: Grammar) -> set[str]:
    null: set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.productions:
            if lhs not in null and all(x in null for x in rhs):
                null.add(lhs)
                changed = True
    return null


@dataclass
class PreprocessedGrammar:
    binary: list[Production]
    unary: list[Production]
    terminals: list[str]
    nullable_start: bool
    numbering: dict[str, int]
    nonterminals: list[str]
    start: str
    size: int = 0
    source: Grammar | None = field(default=None, repr=False)

    def as_grammar(self) -> Grammar:
        return Grammar(list(self.terminals), list(self.nonterminals), self.binary + self.unary, self.start)


def eliminate_epsilon(g: Grammar) -> PreprocessedGrammar:
    """Remove ε-productions from a binarized grammar.

    The result has no nullable nonterminals; whether the start symbol was
    nullable is kept in ``nullable_start``.
    """
    if any(len(rhs) > 2 for _, rhs in g.productions):
        raise GrammarError("eliminate_epsilon expects a binarized grammar")
    null = nullable_set(g)
    prods = list(dict.fromkeys(g.productions))
    seen = set(prods)
    i = 0
    while i < len(prods):
        lhs, rhs = prods[i]
        for k, x in enumerate(rhs):
            if x in null:
                new = (lhs, rhs[:k] + rhs[k + 1 :])
                if new not in seen:
                    seen.add(new)
                    prods.append(new)
        i += 1
    prods = [(a, r) for a, r in prods if r and r != (a,)]
    used = list(dict.fromkeys([g.start, *g.nonterminals]))
    numbering = {x: i for i, x in enumerate(used + list(g.terminals))}
    return PreprocessedGrammar(
        binary=[p for p in prods if len(p[1]) == 2],
        unary=[p for p in prods if len(p[1]) == 1],
        terminals=list(g.terminals),
        nullable_start=g.start in null,
        numbering=numbering,
        nonterminals=used,
        start=g.start,
        size=grammar_size(g),
        source=g,
    )


def preprocess(g: Grammar) -> PreprocessedGrammar:
    pg = eliminate_epsilon(binarize(g))
    pg.source = g
    return pg


def reference_cyk(g: Grammar, word) -> bool:
    """Membership by the inductive CYK definition, evaluated as a least fixed point.

    Works for any grammar (long right-hand sides and ε-productions included).
    Spans are processed shortest first; within one span the derivable
    nonterminals are iterated to a fixed point, which is where a derivation
    may refer back to the same span through nullable neighbours.
    """
    w = list(word)
    n = len(w)
    by_lhs = g.by_lhs()
    derives: dict[tuple[int, int], set[str]] = {}

    def holds(p: int, q: int, x: str) -> bool:
        if g.is_terminal(x):
            return q == p + 1 and w[p] == x
        return x in derives.get((p, q), ())

    def splits(rhs, i: int, j: int) -> bool:
        # positions reachable after matching a prefix of rhs starting at i
        reach = {i}
        for x in rhs:
            nxt = set()
            for p in reach:
                for q in range(p, j + 1):
                    if holds(p, q, x):
                        nxt.add(q)
            if not nxt:
                return False
            reach = nxt
        return j in reach

    for length in range(n + 1):
        for i in range(n - length + 1):
            j = i + length
            cur = derives.setdefault((i, j), set())
            changed = True
            while changed:
                changed = False
                for a, alts in by_lhs.items():
                    if a in cur:
                        continue
                    if any(splits(rhs, i, j) for rhs in alts):
                        cur.add(a)
                        changed = True
    return g.start in derives[(0, n)]


def preprocessed_cyk(pg: PreprocessedGrammar, word) -> bool:
    """Membership using only the preprocessed productions (ε via ``nullable_start``)."""
    if not word:
        return pg.nullable_start
    return reference_cyk(pg.as_grammar(), word)


# ---------------------------------------------------------------- parser generation


def _sym_literal(t: str) -> str:
    if '"' in t or "\\" in t or not t.isprintable():
        raise GrammarError(f"terminal {t!r} cannot be written as a Simper symbol")
    return f'"{t}"'


def cyk_simper_source(pg: PreprocessedGrammar) -> str:
    num = pg.numbering
    width = len(num)
    nts = len(pg.nonterminals)
    out: list[str] = []
    emit = out.append
    if pg.nullable_start:
        emit("if n == 0 { halt }")
    emit(f"sn := n  ++sn  T := array[sn, sn, {width}](0)")
    emit("i := 0  si := 1  while i != n {")
    emit("  switch input[i] {")
    for t in pg.terminals:
        emit(f"    {_sym_literal(t)} {{ T[i, si, {num[t]}] := 1 }}")
    emit("  }")
    emit("  ++i  ++si")
    emit("}")
    emit("k := 1  while k != sn {")
    emit("  i := 0  ik := k  while ik != sn {")
    emit("    j := i  ++j  while j != ik {")
    for a, (x, y) in pg.binary:
        emit(f"      // {a} -> {x} {y}")
        emit(f"      if T[i, j, {num[x]}] == 1 && T[j, ik, {num[y]}] == 1 {{ T[i, ik, {num[a]}] := 1 }}")
    emit("      ++j")
    emit("    }")
    emit("    ++i  ++ik")
    emit("  }")
    emit("  i := 0  ik := k  while ik != sn {")
    emit(f"    j := 0  while j != {nts} {{  // {nts} nonterminals")
    for a, (x,) in pg.unary:
        emit(f"      // {a} -> {x}")
        emit(f"      if T[i, ik, {num[x]}] == 1 {{ T[i, ik, {num[a]}] := 1 }}")
    emit("      ++j")
    emit("    }")
    emit("    ++i  ++ik")
    emit("  }")
    emit("  ++k")
    emit("}")
    emit(f"if T[0, n, {num[pg.start]}] == 1 {{ halt }}")
    return "\n".join(out) + "\n"


def generate_cyk_simper(pg: PreprocessedGrammar) -> Program:
    return parse_simper(cyk_simper_source(pg))
