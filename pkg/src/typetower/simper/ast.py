"""Syntax tree for Simper programs, plus a printer producing parseable source."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Index:
    name: str
    indices: tuple["Value", ...]


@dataclass(frozen=True)
class NatLit:
    value: int


@dataclass(frozen=True)
class SymLit:
    value: str


@dataclass(frozen=True)
class ArrayLit:
    dims: tuple["Value", ...]
    fill: "Value"


Value = Union[Var, Index, NatLit, SymLit, ArrayLit]
LValue = Union[Var, Index]


@dataclass(frozen=True)
class And:
    left: "Cond"
    right: "Cond"


@dataclass(frozen=True)
class Or:
    left: "Cond"
    right: "Cond"


@dataclass(frozen=True)
class Eq:
    left: Value
    right: Value


@dataclass(frozen=True)
class Neq:
    left: Value
    right: Value


Cond = Union[And, Or, Eq, Neq]


@dataclass(frozen=True)
class Label:
    name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Goto:
    name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assign:
    target: LValue
    value: Value
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: Cond
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] | None = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Inc:
    target: LValue
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Dec:
    target: LValue
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Halt:
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class While:
    cond: Cond
    body: tuple["Stmt", ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Switch:
    value: Value
    arms: tuple[tuple[Value, tuple["Stmt", ...]], ...]
    line: int = field(default=0, compare=False)


Stmt = Union[Label, Goto, Assign, If, Inc, Dec, Halt, While, Switch]


@dataclass(frozen=True)
class Program:
    body: tuple[Stmt, ...]

    def __str__(self) -> str:
        return format_program(self)


def walk(stmts) -> "list[Stmt]":
    """Every statement, nested ones included, in source order."""
    out = []
    for s in stmts:
        out.append(s)
        if isinstance(s, If):
            out += walk(s.then)
            if s.orelse is not None:
                out += walk(s.orelse)
        elif isinstance(s, While):
            out += walk(s.body)
        elif isinstance(s, Switch):
            for _, b in s.arms:
                out += walk(b)
    return out


def program_size(p: Program) -> int:
    """Number of syntax nodes (statements, conditions, values); the ``|p|`` of cost bounds."""

    def count(x) -> int:
        if isinstance(x, (tuple, list)):
            return sum(count(y) for y in x)
        if hasattr(x, "__dataclass_fields__"):
            return 1 + sum(count(getattr(x, f)) for f in x.__dataclass_fields__ if f != "line")
        return 0

    return count(p.body)


# ---------------------------------------------------------------- printing


def format_value(v: Value) -> str:
    if isinstance(v, Var):
        return v.name
    if isinstance(v, Index):
        return f"{v.name}[{', '.join(map(format_value, v.indices))}]"
    if isinstance(v, NatLit):
        return str(v.value)
    if isinstance(v, SymLit):
        return '"' + v.value + '"'
    return f"array[{', '.join(map(format_value, v.dims))}]({format_value(v.fill)})"


def format_cond(c: Cond) -> str:
    if isinstance(c, Eq):
        return f"{format_value(c.left)} == {format_value(c.right)}"
    if isinstance(c, Neq):
        return f"{format_value(c.left)} != {format_value(c.right)}"

    def sub(x: Cond, right: bool) -> str:
        text = format_cond(x)
        # && binds tighter than ||; both associate to the left
        if isinstance(c, And) and isinstance(x, Or) or right and type(x) is type(c):
            return f"({text})"
        return text

    op = "&&" if isinstance(c, And) else "||"
    return f"{sub(c.left, False)} {op} {sub(c.right, True)}"


def _format_block(stmts, indent: int) -> list[str]:
    lines = []
    pad = "  " * indent
    for s in stmts:
        if isinstance(s, Label):
            lines.append(f"{pad}{s.name}:")
        elif isinstance(s, Goto):
            lines.append(f"{pad}goto {s.name}")
        elif isinstance(s, Assign):
            lines.append(f"{pad}{format_value(s.target)} := {format_value(s.value)}")
        elif isinstance(s, Inc):
            lines.append(f"{pad}++{format_value(s.target)}")
        elif isinstance(s, Dec):
            lines.append(f"{pad}--{format_value(s.target)}")
        elif isinstance(s, Halt):
            lines.append(f"{pad}halt")
        elif isinstance(s, If):
            lines.append(f"{pad}if {format_cond(s.cond)} {{")
            lines += _format_block(s.then, indent + 1)
            if s.orelse is not None:
                lines.append(f"{pad}}} else {{")
                lines += _format_block(s.orelse, indent + 1)
            lines.append(f"{pad}}}")
        elif isinstance(s, While):
            lines.append(f"{pad}while {format_cond(s.cond)} {{")
            lines += _format_block(s.body, indent + 1)
            lines.append(f"{pad}}}")
        elif isinstance(s, Switch):
            lines.append(f"{pad}switch {format_value(s.value)} {{")
            for v, body in s.arms:
                lines.append(f"{pad}  {format_value(v)} {{")
                lines += _format_block(body, indent + 2)
                lines.append(f"{pad}  }}")
            lines.append(f"{pad}}}")
        else:  # pragma: no cover
            raise TypeError(s)
    return lines


def format_program(p: Program) -> str:
    return "\n".join(_format_block(p.body, 0)) + "\n"
