"""Type checking: one global type per variable, fixed by its assignments."""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    And, ArrayLit, Assign, Cond, Dec, Goto, Halt, If, Inc, Index, Label, NatLit, Or,
    Program, Switch, SymLit, Value, Var, While, walk,
)


@dataclass(frozen=True)
class NatT:
    def __str__(self):
        return "nat"


@dataclass(frozen=True)
class SymT:
    def __str__(self):
        return "sym"


@dataclass(frozen=True)
class BoolT:
    def __str__(self):
        return "bool"


@dataclass(frozen=True)
class ArrayT:
    dim: int
    elem: "SimperType"

    def __str__(self):
        return f"array {self.dim} {self.elem}"


SimperType = NatT | SymT | BoolT | ArrayT
NAT, SYM, BOOL = NatT(), SymT(), BoolT()
BUILTINS = {"input": ArrayT(1, SYM), "n": NAT}


class SimperTypeError(ValueError):
    def __init__(self, diagnostics: list[str]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(diagnostics))


@dataclass
class TypeReport:
    env: dict[str, SimperType]
    diagnostics: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics


class _Unknown(Exception):
    pass


def _value_type(v: Value, env: dict, strict: bool, diags: list, where: str) -> SimperType | None:
    """Type of ``v``; in non-strict mode unknown variables raise ``_Unknown``."""
    if isinstance(v, NatLit):
        return NAT
    if isinstance(v, SymLit):
        return SYM
    if isinstance(v, Var):
        if v.name not in env:
            if not strict:
                raise _Unknown
            diags.append(f"{where}: variable {v.name} is never assigned")
            return None
        return env[v.name]
    if isinstance(v, Index):
        if v.name not in env:
            if not strict:
                raise _Unknown
            diags.append(f"{where}: variable {v.name} is never assigned")
            return None
        t = env[v.name]
        for i in v.indices:
            ti = _value_type(i, env, strict, diags, where)
            if strict and ti is not None and ti != NAT:
                diags.append(f"{where}: index {i} of {v.name} has type {ti}, expected nat")
        if not isinstance(t, ArrayT):
            if strict:
                diags.append(f"{where}: {v.name} has type {t} and cannot be indexed")
            return None
        if len(v.indices) != t.dim:
            if strict:
                diags.append(f"{where}: {v.name} has {t.dim} dimensions, indexed with {len(v.indices)}")
            return None
        return t.elem
    assert isinstance(v, ArrayLit)
    for d in v.dims:
        td = _value_type(d, env, strict, diags, where)
        if strict and td is not None and td != NAT:
            diags.append(f"{where}: array dimension has type {td}, expected nat")
    tf = _value_type(v.fill, env, strict, diags, where)
    return None if tf is None else ArrayT(len(v.dims), tf)


def _cond(c: Cond, env: dict, diags: list, where: str) -> None:
    if isinstance(c, (And, Or)):
        _cond(c.left, env, diags, where)
        _cond(c.right, env, diags, where)
        return
    a = _value_type(c.left, env, True, diags, where)
    b = _value_type(c.right, env, True, diags, where)
    if a is None or b is None:
        return
    if a != b:
        diags.append(f"{where}: comparing {a} with {b}")
    elif isinstance(a, ArrayT):
        diags.append(f"{where}: arrays cannot be compared")


def typecheck(p: Program) -> TypeReport:
    stmts = walk(p.body)
    env: dict[str, SimperType] = dict(BUILTINS)
    diags: list[str] = []
    # infer from plain assignments until nothing changes
    changed = True
    while changed:
        changed = False
        for s in stmts:
            if isinstance(s, Assign) and isinstance(s.target, Var) and s.target.name not in env:
                try:
                    t = _value_type(s.value, env, False, [], "")
                except _Unknown:
                    continue
                if t is not None:
                    env[s.target.name] = t
                    changed = True
    for s in stmts:
        where = f"line {s.line}"
        if isinstance(s, Assign):
            if isinstance(s.target, Var) and s.target.name in BUILTINS:
                diags.append(f"{where}: {s.target.name} is read-only")
                continue
            if isinstance(s.target, Index) and s.target.name == "input":
                diags.append(f"{where}: input is read-only")
                continue
            lt = _value_type(s.target, env, True, diags, where)
            rt = _value_type(s.value, env, True, diags, where)
            if lt is not None and rt is not None and lt != rt:
                diags.append(f"{where}: assigning {rt} to {s.target.name} of type {lt}")
        elif isinstance(s, (Inc, Dec)):
            if s.target.name in BUILTINS:
                diags.append(f"{where}: {s.target.name} is read-only")
                continue
            t = _value_type(s.target, env, True, diags, where)
            if t is not None and t != NAT:
                op = "++" if isinstance(s, Inc) else "--"
                diags.append(f"{where}: {op} needs a nat, {s.target.name} has type {t}")
        elif isinstance(s, (If, While)):
            _cond(s.cond, env, diags, where)
        elif isinstance(s, Switch):
            t = _value_type(s.value, env, True, diags, where)
            for v, _ in s.arms:
                tv = _value_type(v, env, True, diags, where)
                if t is not None and tv is not None and t != tv:
                    diags.append(f"{where}: switch on {t} has an arm of type {tv}")
            if isinstance(t, ArrayT):
                diags.append(f"{where}: cannot switch on an array")
        else:
            assert isinstance(s, (Label, Goto, Halt))
    return TypeReport(env, diags)


def check(p: Program) -> dict[str, SimperType]:
    rep = typecheck(p)
    if not rep.ok:
        raise SimperTypeError(rep.diagnostics)
    return rep.env
