"""Extended Turing machines: transitions write a (possibly multi-letter) string.

The blank symbol is ``None`` and only ever appears as the current symbol at
either end of the tape; it is never written.
"""

from __future__ import annotations

import re
import weakref
from dataclasses import dataclass
from typing import Iterable, Sequence

DIRS = ("L", "S", "R")
BLANK_TEXT = "_"
REJECT = "reject"
_TOKEN_RE = re.compile(r"[^\s,#]+\Z")



class TmFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Transition:
    to: str
    write: tuple[str, ...]
    dir: str

    def __str__(self) -> str:
        return f"{self.to},{' '.join(self.write)},{self.dir}"


@dataclass(frozen=True)
class TmConfig:
    state: str
    left: tuple[str, ...]
    current: str | None
    right: tuple[str, ...]

    def tape(self) -> tuple[str, ...]:
        return self.left + ((self.current,) if self.current is not None else ()) + self.right

    def __str__(self) -> str:
        cur = BLANK_TEXT if self.current is None else self.current
        return f"{self.state}: {' '.join(self.left)} [{cur}] {' '.join(self.right)}".replace("  ", " ")


@dataclass
class ExtendedTM:
    states: tuple[str, ...]
    initial: str
    halt: str
    alphabet: tuple[str, ...]
    delta: dict[tuple[str, str | None], Transition]
    reject: str | None = None  # non-halting spin state, if the machine has one

    def transitions(self):
        for q in self.states:
            for a in (*self.alphabet, None):
                if (q, a) in self.delta:
                    yield q, a, self.delta[q, a]

    @property
    def size(self) -> int:
        return len(self.states) + len(self.delta)


def spin_transitions(state: str, alphabet: Sequence[str]) -> dict[tuple[str, str | None], Transition]:
    """Self-loops keeping the machine in ``state`` forever without moving."""
    d = {(state, a): Transition(state, (a,), "S") for a in alphabet}
    d[state, None] = Transition(state, (alphabet[0],), "S")
    return d


def make_etm(
    states: Iterable[str],
    initial: str,
    halt: str,
    alphabet: Iterable[str],
    delta: dict[tuple[str, str | None], Transition],
    *,
    fill_reject: bool = False,
) -> ExtendedTM:
    """Build a machine, adding the halt self-loops and (optionally) a reject spin state.

    With ``fill_reject`` every missing (state, read) pair goes to ``reject``.
    """
    alphabet = tuple(dict.fromkeys(alphabet))
    states = list(dict.fromkeys([initial, *states, halt]))
    delta = dict(delta)
    uses_reject = fill_reject or any(t.to == REJECT for t in delta.values())
    if uses_reject and REJECT not in states:
        states.append(REJECT)
    for k, v in spin_transitions(halt, alphabet).items():
        delta.setdefault(k, v)
    if uses_reject:
        for k, v in spin_transitions(REJECT, alphabet).items():
            delta.setdefault(k, v)
    if fill_reject:
        for q in states:
            for a in (*alphabet, None):
                delta.setdefault((q, a), Transition(REJECT, (alphabet[0],), "S"))
    return ExtendedTM(tuple(states), initial, halt, alphabet, delta, REJECT if uses_reject else None)


def validate_etm(m: ExtendedTM) -> list[str]:
    diags = []
    letters = set(m.alphabet)
    states = set(m.states)
    for name in (m.initial, m.halt):
        if name not in states:
            diags.append(f"state {name} not declared")
    for q in m.states:
        for a in (*m.alphabet, None):
            t = m.delta.get((q, a))
            where = f"({q}, {BLANK_TEXT if a is None else a})"
            if t is None:
                diags.append(f"{where}: no transition")
                continue
            if t.dir not in DIRS:
                diags.append(f"{where}: bad direction {t.dir}")
            if t.to not in states:
                diags.append(f"{where}: unknown target state {t.to}")
            if t.dir == "S" and len(t.write) != 1:
                diags.append(f"{where}: direction S must write exactly one letter")
            bad = [b for b in t.write if b not in letters]
            if bad:
                diags.append(f"{where}: writes letters outside the alphabet {bad}")
            if q == m.halt:
                if t.to != m.halt or t.dir != "S" or (a is not None and t.write != (a,)):
                    diags.append(f"{where}: halt state must loop on itself writing what it read")
    for (q, a) in m.delta:
        if q not in states or (a is not None and a not in letters):
            diags.append(f"({q}, {a}): transition for undeclared state or letter")
    return diags


def tm_step(m: ExtendedTM, c: TmConfig) -> TmConfig:
    t = m.delta[c.state, c.current]
    if t.dir == "S":
        return TmConfig(t.to, c.left, t.write[0], c.right)
    if t.dir == "L":
        right = t.write + c.right
        if c.left:
            return TmConfig(t.to, c.left[:-1], c.left[-1], right)
        return TmConfig(t.to, (), None, right)
    left = c.left + t.write
    if c.right:
        return TmConfig(t.to, left, c.right[0], c.right[1:])
    return TmConfig(t.to, left, None, ())


def initial_config(m: ExtendedTM, word: Sequence[str]) -> TmConfig:
    return TmConfig(m.initial, (), None, tuple(word))


@dataclass
class TmRunResult:
    halted: bool
    steps: int
    final: TmConfig
    trace: list[TmConfig] | None = None


# machines are unhashable dataclasses, so the cache is keyed by id and guarded by a weak reference
_TABLES: dict[int, tuple[weakref.ref, int, dict]] = {}


def _run_table(m: ExtendedTM) -> dict:
    hit = _TABLES.get(id(m))
    if hit is not None and hit[0]() is m and hit[1] == len(m.delta):
        return hit[2]
    table = {k: (t.to, t.write, t.dir, tuple(reversed(t.write))) for k, t in m.delta.items()}
    _TABLES[id(m)] = (weakref.ref(m, lambda _, k=id(m): _TABLES.pop(k, None)), len(m.delta), table)
    return table


def tm_run(
    m: ExtendedTM,
    word: Sequence[str],
    fuel: int,
    want_trace: bool = False,
    stop: Iterable[str] = (),
    fast: bool | None = None,
) -> TmRunResult:
    """Run from ``(initial, ε, ⊥, word)`` until the halt state or ``fuel`` steps.

    States in ``stop`` (typically spin states) also end the run early.
    ``fast`` selects the compiled runner; by default it is used for long
    trace-less runs.
    """
    bad = [a for a in word if a not in m.alphabet]
    if bad:
        raise ValueError(f"input letters outside the alphabet: {bad}")
    if not want_trace and (fast or (fast is None and fuel > 100_000)):
        from . import fasttm

        if fast or fasttm.available():
            return fasttm.runner_for(m).run(word, fuel, stop)
    if want_trace:
        c = initial_config(m, word)
        trace = [c]
        steps = 0
        ends = {m.halt, *stop}
        while c.state not in ends and steps < fuel:
            c = tm_step(m, c)
            steps += 1
            trace.append(c)
        return TmRunResult(c.state == m.halt, steps, c, trace)
    # stacks: left grows to the right, right is stored reversed
    left: list[str] = []
    right = list(reversed(word))
    cur = None
    state = m.initial
    halt = m.halt
    ends = {halt, *stop}
    delta = _run_table(m)
    steps = 0
    while state not in ends and steps < fuel:
        to, write, d, rwrite = delta[state, cur]
        if d == "S":
            cur = write[0]
        elif d == "R":
            left.extend(write)
            cur = right.pop() if right else None
        else:
            right.extend(rwrite)
            cur = left.pop() if left else None
        state = to
        steps += 1
    final = TmConfig(state, tuple(left), cur, tuple(reversed(right)))
    return TmRunResult(state == halt, steps, final)


# ---------------------------------------------------------------- text format


def _letter(tok: str, lineno: int) -> str:
    if not _TOKEN_RE.match(tok) or tok == BLANK_TEXT:
        raise TmFormatError(f"line {lineno}: bad letter {tok!r}")
    return tok


def parse_tm(text: str) -> ExtendedTM:
    header: dict[str, list[str]] = {}
    delta: dict[tuple[str, str | None], Transition] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            src, dst = (s.strip() for s in line.split("->", 1))
            sp = [s.strip() for s in src.split(",")]
            dp = [s.strip() for s in dst.split(",")]
            if len(sp) != 2 or len(dp) != 3:
                raise TmFormatError(f"line {lineno}: expected 'q,a -> q2,b1 b2,D'")
            q, a = sp
            read = None if a == BLANK_TEXT else _letter(a, lineno)
            if dp[2] not in DIRS:
                raise TmFormatError(f"line {lineno}: direction must be one of L S R")
            write = tuple(_letter(w, lineno) for w in dp[1].split())
            if (q, read) in delta:
                raise TmFormatError(f"line {lineno}: duplicate transition for ({q}, {a})")
            delta[q, read] = Transition(dp[0], write, dp[2])
        elif ":" in line:
            key, val = line.split(":", 1)
            header[key.strip()] = val.split()
        else:
            raise TmFormatError(f"line {lineno}: cannot parse {line!r}")
    for key in ("initial", "halt", "alphabet"):
        if key not in header:
            raise TmFormatError(f"missing header '{key}:'")
    alphabet = [_letter(a, 0) for a in header["alphabet"]]
    if not alphabet:
        raise TmFormatError("alphabet must not be empty")
    declared = header.get("states", [])
    # mentioning `reject` lets the file omit transitions: they all spin there
    fill = REJECT in declared or any(t.to == REJECT for t in delta.values())
    states = declared + [q for q, _ in delta] + [t.to for t in delta.values()]
    states = [s for s in dict.fromkeys(states) if s != REJECT]
    m = make_etm(states, header["initial"][0], header["halt"][0], alphabet, delta, fill_reject=fill)
    diags = validate_etm(m)
    if diags:
        raise TmFormatError("; ".join(diags[:5]))
    return m


def serialize_tm(m: ExtendedTM) -> str:
    lines = [
        f"states: {' '.join(m.states)}",
        f"initial: {m.initial}",
        f"halt: {m.halt}",
        f"alphabet: {' '.join(m.alphabet)}",
    ]
    for q, a, t in m.transitions():
        lines.append(f"{q},{BLANK_TEXT if a is None else a} -> {t}")
    return "\n".join(lines) + "\n"
