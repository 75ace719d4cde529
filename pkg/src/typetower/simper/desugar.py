"""Rewrite ``while`` and ``switch`` into labels, gotos and ifs."""

from __future__ import annotations

import itertools

from .ast import Eq, Goto, If, Label, Program, Switch, While, walk


def desugar(p: Program) -> Program:
    taken = {s.name for s in walk(p.body) if isinstance(s, Label)}
    counter = itertools.count()

    def fresh() -> str:
        while True:
            name = f"_loop{next(counter)}"
            if name not in taken:
                taken.add(name)
                return name

    def block(stmts) -> tuple:
        out = []
        for s in stmts:
            if isinstance(s, While):
                head = fresh()
                out.append(Label(head, s.line))
                out.append(If(s.cond, block(s.body) + (Goto(head, s.line),), None, s.line))
            elif isinstance(s, Switch):
                # nested else-chain: the first matching arm runs, the rest are skipped
                chain = None
                for v, body in reversed(s.arms):
                    chain = (If(Eq(s.value, v), block(body), chain, s.line),)
                out += chain or ()
            elif isinstance(s, If):
                out.append(If(s.cond, block(s.then), None if s.orelse is None else block(s.orelse), s.line))
            else:
                out.append(s)
        return tuple(out)

    return Program(block(p.body))


def is_core(p: Program) -> bool:
    return not any(isinstance(s, (While, Switch)) for s in walk(p.body))
