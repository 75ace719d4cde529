"""Class tables over arity-1 classes plus the nullary terminator ``Z``.

A rule ``C x <: D1 ... Dk x`` rewrites the head class ``C`` of a tower into
``D1 ... Dk`` followed by whatever came after ``C``; a rule ``C x <: D1 ... Dk Z``
discards the remainder. Towers are stored as tuples of class names with the
trailing ``Z`` left implicit, so ``()`` is the tower ``Z``.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

TERMINATOR = "Z"
VARIABLE = "x"
NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

Tower = tuple[str, ...]


class ClassTableError(ValueError):
    """Raised for malformed class-table or query text."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple[str, ...]
    ground: bool = False  # tail is Z instead of the variable

    def __post_init__(self):
        if not self.ground and not self.rhs:
            raise ClassTableError(f"rule '{self.lhs} x <: x' is a trivial cycle")
        for name in (self.lhs, *self.rhs):
            check_class_name(name)

    @property
    def head(self) -> str | None:
        return self.rhs[0] if self.rhs else None

    def __str__(self) -> str:
        end = TERMINATOR if self.ground else VARIABLE
        return " ".join([self.lhs, VARIABLE, "<:", *self.rhs, end])


def check_class_name(name: str) -> None:
    if not NAME_RE.match(name) or name in (TERMINATOR, VARIABLE):
        raise ClassTableError(f"invalid class name {name!r}")


@dataclass(frozen=True)
class ClassTable:
    rules: tuple[Rule, ...] = ()
    classes: frozenset[str] = field(default=frozenset(), compare=False)

    def __post_init__(self):
        names = set()
        seen_arcs: dict[tuple[str, str | None], Rule] = {}
        for r in self.rules:
            names.add(r.lhs)
            names.update(r.rhs)
            arc = (r.lhs, r.head)
            if arc in seen_arcs:
                raise ClassTableError(
                    f"rules '{seen_arcs[arc]}' and '{r}' share the arc {r.lhs} -> {r.head or TERMINATOR}"
                )
            seen_arcs[arc] = r
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "classes", frozenset(names))

    def rules_by_lhs(self) -> dict[str, list[tuple[int, Rule]]]:
        out: dict[str, list[tuple[int, Rule]]] = defaultdict(list)
        for i, r in enumerate(self.rules):
            out[r.lhs].append((i, r))
        return out

    def __len__(self) -> int:
        return len(self.rules)


@dataclass(frozen=True)
class SubtypeQuery:
    subtype: Tower
    supertype: Tower

    def __str__(self) -> str:
        return f"{render_tower(self.subtype)}  <:  {render_tower(self.supertype)}"


@dataclass
class ValidationReport:
    well_formed: bool = True
    deterministic: bool = True
    acyclic: bool = True
    diagnostics: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(
            self.well_formed and other.well_formed,
            self.deterministic and other.deterministic,
            self.acyclic and other.acyclic,
            self.diagnostics + other.diagnostics,
        )


# ---------------------------------------------------------------- text format


def render_tower(t: Iterable[str]) -> str:
    return " ".join([*t, TERMINATOR])


def parse_tower(text: str, line: int = 0) -> Tower:
    words = text.split()
    if not words or words[-1] != TERMINATOR:
        raise ClassTableError(f"tower {text!r} must end in {TERMINATOR}", line)
    body = words[:-1]
    for w in body:
        if w == TERMINATOR:
            raise ClassTableError(f"{TERMINATOR} may only terminate a tower", line)
        check_class_name(w)
    return tuple(body)


def parse_class_table(text: str) -> ClassTable:
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "<:" not in line:
            raise ClassTableError("expected '<:'", lineno, len(line.rstrip()) + 1)
        left, right = line.split("<:", 1)
        lw = left.split()
        if len(lw) != 2 or lw[1] != VARIABLE:
            raise ClassTableError("left side must be 'Name x'", lineno, 1)
        rw = right.split()
        col = line.index("<:") + 3
        if not rw or rw[-1] not in (VARIABLE, TERMINATOR):
            raise ClassTableError("right side must end in 'x' or 'Z'", lineno, col)
        try:
            for w in (lw[0], *rw[:-1]):
                check_class_name(w)
            rules.append(Rule(lw[0], tuple(rw[:-1]), ground=rw[-1] == TERMINATOR))
        except ClassTableError as e:
            raise ClassTableError(str(e), lineno, col) from None
    try:
        return ClassTable(tuple(rules))
    except ClassTableError as e:
        raise ClassTableError(str(e), len(text.splitlines())) from None


def serialize_class_table(ct: ClassTable) -> str:
    return "".join(f"{r}\n" for r in ct.rules)


def parse_query(text: str) -> SubtypeQuery:
    """Parse ``SUB <: SUPER`` or two whitespace-separated towers."""
    if "<:" in text:
        a, b = text.split("<:", 1)
        return SubtypeQuery(parse_tower(a), parse_tower(b))
    words = text.split()
    try:
        cut = words.index(TERMINATOR) + 1
    except ValueError:
        raise ClassTableError("query needs two towers ending in Z") from None
    return SubtypeQuery(parse_tower(" ".join(words[:cut])), parse_tower(" ".join(words[cut:])))


# ---------------------------------------------------------------- validation


def validate_well_formed(ct: ClassTable) -> ValidationReport:
    """Variable-tail rules must have an odd number of classes on the right."""
    rep = ValidationReport()
    for r in ct.rules:
        if not r.ground and len(r.rhs) % 2 == 0:
            rep.well_formed = False
            rep.diagnostics.append((str(r), f"right side has even length {len(r.rhs)}"))
    return rep


def inheritance_graph(ct: ClassTable) -> dict[str, set[str]]:
    """Adjacency map with one arc lhs -> head per rule (bare-Z rules add none)."""
    g: dict[str, set[str]] = {c: set() for c in ct.classes}
    for r in ct.rules:
        if r.head is not None:
            g[r.lhs].add(r.head)
    return g


def _topological_order(g: dict[str, set[str]]) -> tuple[list[str], list[str]]:
    """Kahn's algorithm; returns (order, nodes left on cycles)."""
    indeg = {v: 0 for v in g}
    for v in g:
        for w in g[v]:
            indeg[w] += 1
    ready = sorted(v for v, d in indeg.items() if d == 0)
    order = []
    while ready:
        v = ready.pop()
        order.append(v)
        for w in sorted(g[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return order, sorted(v for v, d in indeg.items() if d > 0)


def _find_cycle(g: dict[str, set[str]], leftover: list[str]) -> list[str]:
    # every leftover node has a leftover predecessor, so walking backwards must loop
    alive = set(leftover)
    preds: dict[str, list[str]] = defaultdict(list)
    for v in sorted(alive):
        for w in g[v]:
            if w in alive:
                preds[w].append(v)
    v = leftover[0]
    path, index = [v], {v: 0}
    while True:
        v = preds[v][0]
        if v in index:
            cycle = path[index[v]:] + [v]
            return cycle[::-1]
        index[v] = len(path)
        path.append(v)


def count_walks(g: dict[str, set[str]]) -> dict[str, dict[str, int]]:
    """Number of walks between every ordered pair of an acyclic graph."""
    order, cyclic = _topological_order(g)
    if cyclic:
        raise ValueError("graph has a cycle")
    counts: dict[str, dict[str, int]] = {}
    for v in reversed(order):
        row = {v: 1}
        for w in g[v]:
            for t, c in counts[w].items():
                row[t] = row.get(t, 0) + c
        counts[v] = row
    return counts


def _walks_between(g: dict[str, set[str]], src: str, dst: str) -> int:
    memo: dict[str, int] = {}

    def go(v: str) -> int:
        if v not in memo:
            memo[v] = (v == dst) + sum(go(w) for w in g[v])
        return memo[v]

    return go(src)


def validate_deterministic(ct: ClassTable) -> ValidationReport:
    """Acyclic inheritance graph with at most one walk between any two classes.

    Reachability sets are kept as int bitsets; two successors of a node whose
    reach sets intersect witness a pair joined by more than one walk.
    """
    rep = ValidationReport()
    g = inheritance_graph(ct)
    order, cyclic = _topological_order(g)
    if cyclic:
        cycle = _find_cycle(g, cyclic)
        rep.acyclic = rep.deterministic = False
        rep.diagnostics.append((cycle[0], "cycle " + " -> ".join(cycle)))
        return rep
    bit = {v: 1 << i for i, v in enumerate(sorted(g))}
    names = {b.bit_length() - 1: v for v, b in bit.items()}
    reach: dict[str, int] = {}
    for v in reversed(order):
        acc = 0
        for w in sorted(g[v]):
            r = reach[w]
            clash = acc & r
            if clash:
                dst = names[(clash & -clash).bit_length() - 1]
                n = _walks_between(g, v, dst)
                rep.deterministic = False
                rep.diagnostics.append((v, f"{n} walks from {v} to {dst}"))
            acc |= r
        reach[v] = acc | bit[v]
    return rep


def validate(ct: ClassTable) -> ValidationReport:
    return validate_well_formed(ct).merge(validate_deterministic(ct))
