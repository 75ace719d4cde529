"""Subtyping-machine interpreter.

A configuration is a pending obligation ``lhs <: rhs`` between two towers.
One step matches the head of ``rhs`` against a rewrite chain starting at the
head of ``lhs``, consumes both heads and swaps the sides (contravariance):
the rest of ``rhs`` becomes the new subtype, and the chain's suffix followed
by the rest of ``lhs`` becomes the new supertype.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .classtable import ClassTable, SubtypeQuery, Tower, render_tower, validate_deterministic


@dataclass(frozen=True)
class MachineConfig:
    lhs: Tower
    rhs: Tower

    def __str__(self) -> str:
        return f"{render_tower(self.lhs)}  <:  {render_tower(self.rhs)}"

    def render(self, flipped: bool = False) -> str:
        """Compact two-sided notation: ``Z Cm..C1 ◁ D1..Dn Z`` or ``Z Dn..D1 ▷ C1..Cm Z``."""
        left, right = (self.rhs, self.lhs) if flipped else (self.lhs, self.rhs)
        arrow = "▷" if flipped else "◁"
        return "Z" + "".join(reversed(left)) + f" {arrow} " + "".join(right) + "Z"


@dataclass(frozen=True)
class ChainResult:
    consumed_head: str | None  # None: the chain derives the bare tower Z
    suffix: tuple[str, ...]
    ground: bool
    rules_applied: tuple[int, ...] = ()


@dataclass(frozen=True)
class Halted:
    pass


@dataclass(frozen=True)
class Stuck:
    reason: str


@dataclass(frozen=True)
class Continue:
    next: MachineConfig
    chain: ChainResult


@dataclass(frozen=True)
class Ambiguous:
    chains: tuple[ChainResult, ...]


StepOutcome = Halted | Stuck | Continue | Ambiguous


class Outcome(enum.Enum):
    ACCEPT = "HaltedAccept"
    STUCK = "Stuck"
    OUT_OF_FUEL = "OutOfFuel"
    AMBIGUOUS = "AmbiguousError"


@dataclass
class RunResult:
    outcome: Outcome
    steps_taken: int
    final: MachineConfig
    trace: list[MachineConfig] | None = None
    reason: str = ""


class Verdict(enum.Enum):
    SUBTYPE = "Subtype"
    NOT_SUBTYPE = "NotSubtype"
    UNKNOWN = "Unknown"


class AmbiguousTableError(RuntimeError):
    """The table admits two different chains for one step."""


class _Index:
    """Per-table lookup structures, built once and cached by identity."""

    def __init__(self, ct: ClassTable):
        self.ct = ct
        self.by_lhs = ct.rules_by_lhs()
        self._preds: dict[str | None, list[str]] | None = None
        self._reaches: dict[str | None, set[str]] = {}
        self._chains: dict[tuple[str, str | None], tuple[ChainResult, ...]] = {}

    def can_reach(self, target: str | None) -> set[str]:
        """Classes with a walk to ``target`` (None: to a bare-Z rule)."""
        if target not in self._reaches:
            if self._preds is None:
                self._preds = {}
                for r in self.ct.rules:
                    self._preds.setdefault(r.head, []).append(r.lhs)
            preds = self._preds
            seen = {target} if target is not None else set()
            todo = list(preds.get(target, ()))
            while todo:
                v = todo.pop()
                if v not in seen:
                    seen.add(v)
                    todo.extend(preds.get(v, ()))
            self._reaches[target] = seen
        return self._reaches[target]

    def chains(self, start: str, target: str | None) -> tuple[ChainResult, ...]:
        key = (start, target)
        if key not in self._chains:
            self._chains[key] = tuple(self._search(start, target))
        return self._chains[key]

    def _search(self, start: str, target: str | None) -> list[ChainResult]:
        useful = self.can_reach(target)
        if start not in useful:
            return []
        out = []
        limit = len(self.ct.rules) + 1  # guards cyclic tables
        stack = [(start, (), False, ())]
        while stack:
            head, suffix, ground, applied = stack.pop()
            if head == target:
                out.append(ChainResult(head, suffix, ground, applied))
            if len(applied) >= limit:
                continue
            for i, r in self.by_lhs.get(head, ()):
                new_suffix = r.rhs[1:] + (() if r.ground else suffix)
                new_ground = ground or r.ground
                if r.head is None:
                    if target is None:
                        out.append(ChainResult(None, (), True, applied + (i,)))
                elif r.head in useful:
                    stack.append((r.head, new_suffix, new_ground, applied + (i,)))
        return out


_index_cache: dict[int, _Index] = {}


def _index(ct: ClassTable) -> _Index:
    idx = _index_cache.get(id(ct))
    if idx is None or idx.ct is not ct:
        if len(_index_cache) > 32:
            _index_cache.clear()
        idx = _index_cache[id(ct)] = _Index(ct)
    return idx


def chain_search(ct: ClassTable, start: str, target: str | None) -> list[ChainResult]:
    """All derivations ``start x <:* target suffix (x|Z)``; target None asks for bare Z."""
    return list(_index(ct).chains(start, target))


def replay_chain(ct: ClassTable, start: Tower, chain: ChainResult) -> Tower:
    """Apply ``chain.rules_applied`` to the tower ``start`` rule by rule."""
    tower = start
    for i in chain.rules_applied:
        r = ct.rules[i]
        if not tower or tower[0] != r.lhs:
            raise ValueError(f"rule {r} does not apply to {render_tower(tower)}")
        tower = r.rhs + (() if r.ground else tower[1:])
    return tower


def step(ct: ClassTable, cfg: MachineConfig) -> StepOutcome:
    lhs, rhs = cfg.lhs, cfg.rhs
    idx = _index(ct)
    if not rhs:
        if not lhs or idx.chains(lhs[0], None):
            return Halted()
        return Stuck(f"no chain from {lhs[0]} to Z")
    if not lhs:
        return Stuck(f"Z is not a subtype of {rhs[0]}")
    chains = idx.chains(lhs[0], rhs[0])
    if not chains:
        return Stuck(f"no chain from {lhs[0]} to {rhs[0]}")
    nexts = {}
    for c in chains:
        sup = c.suffix if c.ground else c.suffix + lhs[1:]
        nexts.setdefault(MachineConfig(rhs[1:], sup), c)
    if len(nexts) > 1:
        return Ambiguous(tuple(chains))
    (nxt, chain), = nexts.items()
    return Continue(nxt, chain)


def run(
    ct: ClassTable,
    q: SubtypeQuery,
    fuel: int,
    want_trace: bool = False,
    fast: bool | None = None,
) -> RunResult:
    """Iterate :func:`step` from ``q`` for at most ``fuel`` steps.

    ``fast=None`` picks the compiled engine for trace-less runs when it is
    available; both engines give identical results.
    """
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    cfg = MachineConfig(q.subtype, q.supertype)
    if not want_trace and fast is not False:
        from . import fastsub

        if fast or fastsub.available():
            try:
                return fastsub.engine_for(ct).run(cfg, fuel)
            except fastsub.NondeterministicTable:
                if fast:
                    raise
    trace = [cfg] if want_trace else None
    steps = 0
    while True:
        out = step(ct, cfg)
        if isinstance(out, Halted):
            return RunResult(Outcome.ACCEPT, steps, cfg, trace)
        if isinstance(out, Stuck):
            return RunResult(Outcome.STUCK, steps, cfg, trace, out.reason)
        if isinstance(out, Ambiguous):
            return RunResult(Outcome.AMBIGUOUS, steps, cfg, trace, f"{len(out.chains)} chains")
        if steps >= fuel:
            return RunResult(Outcome.OUT_OF_FUEL, steps, cfg, trace)
        cfg = out.next
        steps += 1
        if trace is not None:
            trace.append(cfg)


def decide_subtype(ct: ClassTable, t1: Tower, t2: Tower, fuel: int) -> Verdict:
    res = run(ct, SubtypeQuery(tuple(t1), tuple(t2)), fuel)
    if res.outcome is Outcome.AMBIGUOUS:
        rep = validate_deterministic(ct)
        raise AmbiguousTableError("; ".join(m for _, m in rep.diagnostics) or res.reason)
    return {
        Outcome.ACCEPT: Verdict.SUBTYPE,
        Outcome.STUCK: Verdict.NOT_SUBTYPE,
        Outcome.OUT_OF_FUEL: Verdict.UNKNOWN,
    }[res.outcome]


def format_trace(trace: list[MachineConfig]) -> str:
    return "".join(f"{c}\n" for c in trace)
