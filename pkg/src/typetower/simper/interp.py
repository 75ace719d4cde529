"""Reference interpreter for core Simper with step accounting.

Every core statement costs one step, except an assignment creating an
array literal, which costs the number of cells it allocates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .ast import (
    And, ArrayLit, Assign, Dec, Eq, Goto, Halt, If, Inc, Index, Label, NatLit, Neq, Or,
    Program, SymLit, Var,
)
from .desugar import desugar, is_core


class SimperRuntimeError(RuntimeError):
    pass


@dataclass
class ArrayV:
    dims: tuple[int, ...]
    data: list

    def offset(self, idx: Sequence[int]) -> int:
        if len(idx) != len(self.dims):
            raise SimperRuntimeError(f"{len(self.dims)}-dimensional array indexed with {len(idx)} indices")
        off = 0
        for i, d in zip(idx, self.dims):
            if not 0 <= i < d:
                raise SimperRuntimeError(f"index {list(idx)} out of bounds for dimensions {list(self.dims)}")
            off = off * d + i
        return off

    def copy(self) -> "ArrayV":
        return ArrayV(self.dims, [x.copy() if isinstance(x, ArrayV) else x for x in self.data])

    def cells(self) -> int:
        return sum(x.cells() if isinstance(x, ArrayV) else 1 for x in self.data)


class Outcome(enum.Enum):
    HALTED = "Halted"
    STUCK_END = "StuckEnd"
    OUT_OF_FUEL = "OutOfFuel"
    RUNTIME_ERROR = "RuntimeError"


@dataclass
class ExecResult:
    outcome: Outcome
    steps: int
    env: dict = field(default_factory=dict)
    message: str = ""

    @property
    def halted(self) -> bool:
        return self.outcome is Outcome.HALTED


def _lookup(env: dict, name: str):
    try:
        return env[name]
    except KeyError:
        raise SimperRuntimeError(f"variable {name} read before assignment") from None


def _compile_value(v) -> Callable[[dict], object]:
    if isinstance(v, NatLit):
        n = v.value
        return lambda env: n
    if isinstance(v, SymLit):
        s = v.value
        return lambda env: s
    if isinstance(v, Var):
        name = v.name
        return lambda env: _lookup(env, name)
    if isinstance(v, Index):
        name = v.name
        idx = [_compile_value(i) for i in v.indices]

        def get(env):
            arr = _lookup(env, name)
            return arr.data[arr.offset([f(env) for f in idx])]

        return get
    assert isinstance(v, ArrayLit)
    dims = [_compile_value(d) for d in v.dims]
    fill = _compile_value(v.fill)

    def make(env):
        ds = tuple(f(env) for f in dims)
        x = fill(env)
        n = math.prod(ds)
        if isinstance(x, ArrayV):
            return ArrayV(ds, [x.copy() for _ in range(n)])
        return ArrayV(ds, [x] * n)

    return make


def _compile_cond(c) -> Callable[[dict], bool]:
    if isinstance(c, And):
        a, b = _compile_cond(c.left), _compile_cond(c.right)
        return lambda env: a(env) and b(env)
    if isinstance(c, Or):
        a, b = _compile_cond(c.left), _compile_cond(c.right)
        return lambda env: a(env) or b(env)
    left, right = _compile_value(c.left), _compile_value(c.right)
    if isinstance(c, Eq):
        return lambda env: left(env) == right(env)
    assert isinstance(c, Neq)
    return lambda env: left(env) != right(env)


def _compile_store(target) -> Callable[[dict, object], None]:
    name = target.name
    if isinstance(target, Var):

        def store(env, x):
            env[name] = x.copy() if isinstance(x, ArrayV) else x

        return store
    idx = [_compile_value(i) for i in target.indices]

    def store_at(env, x):
        arr = _lookup(env, name)
        arr.data[arr.offset([f(env) for f in idx])] = x.copy() if isinstance(x, ArrayV) else x

    return store_at


# op codes
_NOP, _JUMP, _BRANCH, _EXEC, _HALT = range(5)


def _flatten(stmts, ops: list, labels: dict) -> None:
    for s in stmts:
        if isinstance(s, Label):
            labels[s.name] = len(ops)
            ops.append([_NOP, None, 1])
        elif isinstance(s, Goto):
            ops.append([_JUMP, s.name, 1])
        elif isinstance(s, Halt):
            ops.append([_HALT, None, 1])
        elif isinstance(s, If):
            branch = [_BRANCH, [_compile_cond(s.cond), None], 1]
            ops.append(branch)
            _flatten(s.then, ops, labels)
            if s.orelse is not None:
                skip = [_JUMP, None, 0]  # synthetic, free
                ops.append(skip)
                branch[1][1] = len(ops)
                _flatten(s.orelse, ops, labels)
                skip[1] = len(ops)
            else:
                branch[1][1] = len(ops)
        elif isinstance(s, Assign):
            val = _compile_value(s.value)
            store = _compile_store(s.target)
            if isinstance(s.value, ArrayLit):

                def run(env, val=val, store=store):
                    x = val(env)
                    store(env, x)
                    return max(1, x.cells())

            else:

                def run(env, val=val, store=store):
                    store(env, val(env))
                    return 1

            ops.append([_EXEC, run, None])
        elif isinstance(s, (Inc, Dec)):
            get = _compile_value(s.target)
            store = _compile_store(s.target)
            delta = 1 if isinstance(s, Inc) else -1

            def run(env, get=get, store=store, delta=delta):
                store(env, max(0, get(env) + delta))
                return 1

            ops.append([_EXEC, run, None])
        else:
            raise ValueError(f"not a core statement: {type(s).__name__}")


def compile_ops(p: Program) -> list:
    ops: list = []
    labels: dict[str, int] = {}
    _flatten(p.body, ops, labels)
    for op in ops:
        if op[0] == _JUMP and isinstance(op[1], str):
            op[1] = labels[op[1]]
    return ops


def initial_env(word: Sequence[str]) -> dict:
    return {"input": ArrayV((len(word),), list(word)), "n": len(word)}


def interpret(p: Program, word: Sequence[str], fuel: int) -> ExecResult:
    if not is_core(p):
        p = desugar(p)
    ops = compile_ops(p)
    env = initial_env(word)
    steps = 0
    pc = 0
    end = len(ops)
    try:
        while pc < end:
            kind, arg, cost = ops[pc]
            if kind == _EXEC:
                if steps >= fuel:
                    return ExecResult(Outcome.OUT_OF_FUEL, steps, env)
                c = arg(env)
                if steps + c > fuel:
                    return ExecResult(Outcome.OUT_OF_FUEL, fuel, env)
                steps += c
                pc += 1
                continue
            if steps + cost > fuel:
                return ExecResult(Outcome.OUT_OF_FUEL, steps, env)
            steps += cost
            if kind == _NOP:
                pc += 1
            elif kind == _JUMP:
                pc = arg
            elif kind == _BRANCH:
                pc = pc + 1 if arg[0](env) else arg[1]
            else:
                return ExecResult(Outcome.HALTED, steps, env)
    except SimperRuntimeError as e:
        return ExecResult(Outcome.RUNTIME_ERROR, steps, env, str(e))
    return ExecResult(Outcome.STUCK_END, steps, env)
