"""Compile an extended Turing machine into a class table whose subtyping
machine simulates it, and map subtyping configurations back to tape views.

The rules are written once for the left orientation and mirrored: the mirror
swaps L and R in every role and marker, and reverses the written string so
that it still lands on the tape in reading order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .classtable import ClassTable, Rule, SubtypeQuery, Tower
from .subtyper import MachineConfig
from .turing import ExtendedTM, TmConfig, validate_etm

ROLES = ("wL", "wR", "L", "R", "LR", "RL")
N, E, ML, MR = "N", "E", "ML", "MR"
HASH = "L_hash"


def mangle(sym: str) -> str:
    """Injective map to identifier characters; ``_`` and non-alphanumerics are hex-escaped."""
    return "".join(c if c.isascii() and c.isalnum() else f"_{ord(c):x}_" for c in sym)


def unmangle(text: str) -> str:
    out, i = [], 0
    while i < len(text):
        if text[i] == "_":
            j = text.index("_", i + 1)
            out.append(chr(int(text[i + 1 : j], 16)))
            i = j + 1
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


class UnrecognizedConfig(ValueError):
    pass


@dataclass(frozen=True)
class ReductionNaming:
    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    initial: str
    halt: str

    def q(self, state: str, role: str) -> str:
        if role not in ROLES:
            raise ValueError(f"unknown role {role}")
        return f"Q{role}_{mangle(state)}"

    def letter(self, a: str | None) -> str:
        """Class for a letter; ``None`` (the end marker ``#``) maps to :data:`HASH`."""
        if a is None:
            return HASH
        m = mangle(a)
        if m == "hash":  # keep clear of the end-marker class
            m = "_68_ash"
        return "L_" + m

    def parse_q(self, name: str) -> tuple[str, str] | None:
        if not name.startswith("Q") or "_" not in name:
            return None
        role, _, rest = name[1:].partition("_")
        if role not in ROLES:
            return None
        try:
            state = unmangle(rest)
        except ValueError:
            return None
        return (state, role) if state in self.states else None

    def parse_letter(self, name: str) -> tuple[bool, str | None]:
        """(is_letter, symbol); symbol None stands for ``#``."""
        if name == HASH:
            return True, None
        if not name.startswith("L_"):
            return False, None
        rest = name[2:]
        try:
            sym = unmangle(rest)
        except ValueError:
            return False, None
        return (True, sym) if sym in self.alphabet and self.letter(sym) == name else (False, None)


def naming_for(m: ExtendedTM) -> ReductionNaming:
    return ReductionNaming(tuple(m.states), tuple(m.alphabet), m.initial, m.halt)


def _flip(side: str) -> str:
    return {"L": "R", "R": "L"}[side]


def _rules_for_side(m: ExtendedTM, nm: ReductionNaming, side: str) -> list[Rule]:
    o = _flip(side)
    marker = {"L": ML, "R": MR}
    q = nm.q
    rules = []
    for s in m.states:
        w = q(s, "w" + side)
        rules.append(Rule(w, (marker[side], N, q(s, side))))
        rules.append(Rule(w, (marker[o], N, w, marker[o], N)))
        for a in (*m.alphabet, None):
            la = nm.letter(a)
            rules.append(Rule(w, (la, N, w, la, N)))
        if s == m.halt:
            rules.append(Rule(w, (E, E), ground=True))
        else:
            rules.append(Rule(w, (E, q(s, side + o), N)))
        rules.append(Rule(E, (q(s, side + o), N, q(s, "w" + o), E, E)))
    for s in m.states:
        for read in (*m.alphabet, None):
            t = m.delta[s, read]
            beta = t.write if side == "L" else t.write[::-1]
            written = tuple(x for b in beta for x in (nm.letter(b), N))
            pre = (nm.letter(read), N, q(t.to, "w" + side))
            if read is None:
                pre += (HASH, N)
            if t.dir == "S":
                body = (marker["R" if side == "L" else "L"], N) + written
            elif t.dir == side:
                body = (marker[side], N) + written
            else:
                body = written + (marker[o], N)
            rules.append(Rule(q(s, side), pre + body))
    return rules


def expected_rule_count(m: ExtendedTM) -> int:
    """Per state and orientation: |Σ|+5 structural rules and |Σ|+1 δ rules."""
    return len(m.states) * (4 * len(m.alphabet) + 12)


def etm_to_classtable(m: ExtendedTM) -> tuple[ClassTable, ReductionNaming]:
    diags = validate_etm(m)
    if diags:
        raise ValueError("invalid machine: " + "; ".join(diags[:3]))
    nm = naming_for(m)
    rules = _rules_for_side(m, nm, "L") + _rules_for_side(m, nm, "R")
    ct = ClassTable(tuple(rules))
    assert len(ct) == expected_rule_count(m)
    return ct, nm


def initial_query(m: ExtendedTM, nm: ReductionNaming, word: Sequence[str]) -> SubtypeQuery:
    bad = [a for a in word if a not in m.alphabet]
    if bad:
        raise ValueError(f"input letters outside the alphabet: {bad}")
    sub: list[str] = [nm.q(m.initial, "wR"), HASH, N]
    for a in reversed(word):
        sub += [nm.letter(a), N]
    sub += [ML, N, HASH, N, E, E]
    return SubtypeQuery(tuple(sub), (E, E))


# ---------------------------------------------------------------- classification


@dataclass(frozen=True)
class Transient:
    reason: str = ""


@dataclass(frozen=True)
class Simulated:
    tm_config: TmConfig
    head_gap: int  # index of the state class among the letters of the tape line
    head_side: str  # "L" or "R": the side of the gap the machine head points to
    waiting: bool


SimulatedView = Transient | Simulated


def classify_config(nm: ReductionNaming, cfg: MachineConfig) -> SimulatedView:
    lhs, rhs = cfg.lhs, cfg.rhs
    if lhs and rhs and lhs[0] == N and rhs[0] == N:
        lhs, rhs = lhs[1:], rhs[1:]  # a reflexive step is pending
        if rhs and nm.parse_q(rhs[0]) is not None:
            lhs, rhs = rhs, lhs  # the state then sits on the other side of the head
    names = lhs + rhs
    kinds = [nm.parse_q(c) for c in names]
    qs = [k for k in kinds if k is not None]
    if any(role in ("LR", "RL") for _, role in qs):
        return Transient("turning at a tape end")
    known = {N, E, ML, MR}
    for c, k in zip(names, kinds):
        if k is None and c not in known and not nm.parse_letter(c)[0]:
            raise UnrecognizedConfig(f"unknown class {c}")
    if not qs:
        if all(c == E for c in names):
            return Transient("halting")
        raise UnrecognizedConfig("no state class")
    if len(qs) != 1 or kinds[0] is None:
        raise UnrecognizedConfig("expected exactly one state class, at the head of the subtype")
    state, role = qs[0]
    qname = lhs[0]
    if role in ("wR", "R"):
        line = tuple(reversed(lhs[1:])) + (qname,) + rhs
    else:
        line = tuple(reversed(rhs)) + (qname,) + lhs[1:]
    return _read_line(nm, state, role, qname, line)


def _read_line(nm: ReductionNaming, state: str, role: str, qname: str, line: Tower) -> Simulated:
    if len(line) < 4 or line[:2] != (E, E) or line[-2:] != (E, E):
        raise UnrecognizedConfig("tape line must be framed by E E")
    body = line[2:-2]
    # strip the N padding: markers and letters come in (X, N) pairs read towards the state
    cells: list[str] = []
    qpos = body.index(qname)
    left, right = body[:qpos], body[qpos + 1 :]
    if len(left) % 2 or len(right) % 2:
        raise UnrecognizedConfig("odd padding around the state class")
    for i in range(0, len(left), 2):
        if left[i] != N:
            raise UnrecognizedConfig("left half is not N-padded")
        cells.append(left[i + 1])
    cells.append(qname)
    for i in range(0, len(right), 2):
        if right[i + 1] != N:
            raise UnrecognizedConfig("right half is not N-padded")
        cells.append(right[i])
    letters: list[str | None] = []
    head = None  # index into letters of the simulated head
    gap = None
    for c in cells:
        if c == qname:
            gap = len(letters)
            if role in ("L", "R"):
                head = ("after" if role == "R" else "before", len(letters))
            continue
        if c in (ML, MR):
            if head is not None:
                raise UnrecognizedConfig("two head markers")
            head = ("after" if c == MR else "before", len(letters))
            continue
        ok, sym = nm.parse_letter(c)
        if not ok:
            raise UnrecognizedConfig(f"unexpected class {c} on the tape")
        letters.append(sym)
    if head is None:
        raise UnrecognizedConfig("no head marker")
    if len(letters) < 2 or letters[0] is not None or letters[-1] is not None:
        raise UnrecognizedConfig("tape must be delimited by # at both ends")
    if any(x is None for x in letters[1:-1]):
        raise UnrecognizedConfig("# inside the tape")
    kind, pos = head
    j = pos - 1 if kind == "before" else pos
    if not 0 <= j < len(letters):
        raise UnrecognizedConfig("head marker outside the tape")
    inner = letters[1:-1]
    if j == 0:
        tm = TmConfig(state, (), None, tuple(inner))
    elif j == len(letters) - 1:
        tm = TmConfig(state, tuple(inner), None, ())
    else:
        tm = TmConfig(state, tuple(inner[: j - 1]), inner[j - 1], tuple(inner[j:]))
    side = "L" if kind == "before" else "R"
    return Simulated(tm, gap, side, role in ("wL", "wR"))


# ---------------------------------------------------------------- Java output


def java_tower(tower: Sequence[str], end: str = "Z") -> str:
    """``C1<? super C2<? super ... end>>``; the head is never wildcarded."""
    if not tower:
        return end
    out = tower[0]
    for c in tower[1:]:
        out += f"<? super {c}"
    out += f"<? super {end}" + ">" * len(tower)
    return out


def java_rule_type(r: Rule) -> str:
    end = "Z" if r.ground else "x"
    if not r.rhs:
        return end
    first, rest = r.rhs[0], r.rhs[1:]
    if not rest:
        return f"{first}<{end}>"
    return f"{first}<{java_tower(rest, end)}>"


def emit_java_interfaces(ct: ClassTable, nm: ReductionNaming | None = None) -> str:
    by_lhs = ct.rules_by_lhs()
    order = list(dict.fromkeys(c for r in ct.rules for c in (r.lhs, *r.rhs)))
    lines = ["interface Z {}"]
    for c in order:
        if c not in by_lhs:
            lines.append(f"interface {c}<x> {{}}")
    for c in order:
        if c in by_lhs:
            sups = [java_rule_type(r) for _, r in by_lhs[c]]
            lines.append(f"interface {c}<x> extends\n  " + ",\n  ".join(sups) + " {}")
    return "\n".join(lines) + "\n"


def emit_query_harness(nm: ReductionNaming | None, q: SubtypeQuery) -> str:
    return (
        "class Main {\n"
        f"  {java_tower(q.supertype)}\n"
        f"  doit({java_tower(q.subtype)} v) {{return v;}}\n"
        "}\n"
    )


_JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue default do double
    else enum extends final finally float for goto if implements import instanceof int interface
    long native new package private protected public return short static strictfp super switch
    synchronized this throw throws transient try void volatile while true false null var""".split()
)


def java_method_name(sym: str) -> str:
    m = mangle(sym)
    if m[0].isalpha() and m not in _JAVA_KEYWORDS:
        return m
    return "l" + m


def emit_builder(nm: ReductionNaming, letters: Sequence[str], names: dict[str, str] | None = None) -> str:
    """Fluent builder whose methods push letters; ``names`` overrides the method names."""
    if not letters:
        raise ValueError("builder needs at least one letter")
    start = java_tower([ML, N, HASH, N, E, E])
    stop = java_tower([nm.q(nm.initial, "wR"), HASH, N], "x")
    lines = [
        "abstract class B<x> {",
        f"  static B<{start}> start;",
        f"  abstract {stop} stop();",
    ]
    names = names or {}

    def method(a: str) -> str:
        return java_method_name(names.get(a, a))

    for a in letters:
        lines.append(f"  abstract B<{java_tower([nm.letter(a), N], 'x')}> {method(a)}();")
    lines.append("}")
    calls = "".join(f".{method(a)}()" for a in letters)
    lines.append(f"// usage: {java_tower([E, E])} t = B.start{calls}.stop();")
    return "\n".join(lines) + "\n"


def emit_java(
    ct: ClassTable,
    nm: ReductionNaming | None,
    q: SubtypeQuery,
    builder_letters: Sequence[str] | None = None,
    names: dict[str, str] | None = None,
) -> str:
    """One self-contained compilation unit."""
    parts = [emit_java_interfaces(ct, nm)]
    if builder_letters and nm is not None:
        parts.append(emit_builder(nm, builder_letters, names))
    parts.append(emit_query_harness(nm, q))
    return "\n".join(parts)
