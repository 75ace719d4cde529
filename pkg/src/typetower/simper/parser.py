"""Recursive-descent parser for Simper source."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    And, ArrayLit, Assign, Dec, Eq, Goto, Halt, If, Inc, Index, Label, NatLit, Neq, Or,
    Program, Switch, SymLit, Var, While, walk,
)

KEYWORDS = {"goto", "if", "else", "halt", "while", "switch", "array"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<nat>\d+)
  | (?P<str>"[^"\n]*")
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|\+\+|--|==|!=|&&|\|\||[{}\[\](),:])
    """,
    re.VERBOSE,
)


class SimperSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line, self.column = line, column
        super().__init__(f"{line}:{column}: {message}")


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SimperSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            if kind == "id" and m.group() in KEYWORDS:
                kind = "kw"
            toks.append(Token(kind, m.group(), line, pos - line_start + 1))
        nl = m.group().count("\n")
        if nl:
            line += nl
            line_start = m.start() + m.group().rindex("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        found = tok.text or "end of input"
        raise SimperSyntaxError(f"{msg} (found {found!r})", tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if self.peek().text != text or self.peek().kind == "str":
            self.error(f"expected {text!r}")
        return self.next()

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.text == text and t.kind in ("op", "kw")

    # statements ---------------------------------------------------------

    def block(self) -> tuple:
        self.expect("{")
        out = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                self.error("unclosed block")
            out.append(self.stmt())
        self.next()
        return tuple(out)

    def stmt(self):
        t = self.peek()
        line = t.line
        if t.kind == "id" and self.peek(1).text == ":" and self.peek(1).kind == "op":
            self.i += 2
            return Label(t.text, line)
        if t.kind == "kw":
            if t.text == "goto":
                self.next()
                name = self.next()
                if name.kind != "id":
                    self.error("expected a label", name)
                return Goto(name.text, line)
            if t.text == "halt":
                self.next()
                return Halt(line)
            if t.text == "if":
                self.next()
                c = self.cond()
                then = self.block()
                orelse = None
                if self.at("else"):
                    self.next()
                    orelse = self.block()
                return If(c, then, orelse, line)
            if t.text == "while":
                self.next()
                c = self.cond()
                return While(c, self.block(), line)
            if t.text == "switch":
                self.next()
                v = self.value()
                self.expect("{")
                arms = []
                while not self.at("}"):
                    if self.peek().kind == "eof":
                        self.error("unclosed switch")
                    arms.append((self.value(), self.block()))
                self.next()
                return Switch(v, tuple(arms), line)
        if self.at("++") or self.at("--"):
            op = self.next().text
            target = self.lvalue()
            return Inc(target, line) if op == "++" else Dec(target, line)
        if t.kind == "id":
            target = self.lvalue()
            self.expect(":=")
            return Assign(target, self.value(), line)
        self.error("expected a statement")

    # values and conditions ---------------------------------------------

    def lvalue(self):
        t = self.next()
        if t.kind != "id":
            self.error("expected a variable", t)
        if self.at("["):
            return Index(t.text, self.value_list("[", "]"))
        return Var(t.text)

    def value_list(self, open_: str, close: str) -> tuple:
        self.expect(open_)
        vals = [self.value()]
        while self.at(","):
            self.next()
            vals.append(self.value())
        self.expect(close)
        return tuple(vals)

    def value(self):
        t = self.peek()
        if t.kind == "nat":
            self.next()
            return NatLit(int(t.text))
        if t.kind == "str":
            self.next()
            return SymLit(t.text[1:-1])
        if t.kind == "kw" and t.text == "array":
            self.next()
            dims = self.value_list("[", "]")
            self.expect("(")
            fill = self.value()
            self.expect(")")
            return ArrayLit(dims, fill)
        if t.kind == "id":
            return self.lvalue()
        self.error("expected a value")

    def cond(self):
        c = self.conj()
        while self.at("||"):
            self.next()
            c = Or(c, self.conj())
        return c

    def conj(self):
        c = self.atom()
        while self.at("&&"):
            self.next()
            c = And(c, self.atom())
        return c

    def atom(self):
        if self.at("("):
            self.next()
            c = self.cond()
            self.expect(")")
            return c
        left = self.value()
        if self.at("=="):
            self.next()
            return Eq(left, self.value())
        if self.at("!="):
            self.next()
            return Neq(left, self.value())
        self.error("expected '==' or '!='")


def parse_simper(text: str) -> Program:
    p = _Parser(text)
    body = []
    while p.peek().kind != "eof":
        body.append(p.stmt())
    prog = Program(tuple(body))
    seen: dict[str, int] = {}
    for s in walk(prog.body):
        if isinstance(s, Label):
            if s.name in seen:
                raise SimperSyntaxError(f"duplicate label {s.name} (first at line {seen[s.name]})", s.line, 1)
            seen[s.name] = s.line
    for s in walk(prog.body):
        if isinstance(s, Goto) and s.name not in seen:
            raise SimperSyntaxError(f"goto to undefined label {s.name}", s.line, 1)
    return prog
