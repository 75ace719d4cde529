"""Compile core Simper programs into extended Turing machines.

Tape layout, left to right: one zone per variable, ``zl_x ... zr_x``, starting
with ``input`` and ``n``, then the program's variables in first-assignment
order, then compiler temporaries and scratch counters. Nats are stored in
binary with the least significant bit first (zero is ``b0``), symbols as one
letter, arrays as nested ``dl_k ... dr_k`` blocks.

The machine reads the bare input word and builds the zones itself. Between
statements the head is somewhere inside the zoned region; every statement
starts by searching for the zone it needs. Runtime errors and falling off
the end of the program lead to the ``reject`` spin state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .reduction import mangle, unmangle
from .simper.ast import (
    And, ArrayLit, Assign, Dec, Eq, Goto, Halt, If, Inc, Index, Label, NatLit, Neq, Or,
    Program, SymLit, Var, walk,
)
from .simper.desugar import desugar, is_core
from .simper.interp import ArrayV
from .simper.types import NAT, ArrayT, NatT, SimperType, SymT, _value_type, check
from .turing import REJECT, ExtendedTM, Transition, make_etm, spin_transitions

B0, B1 = "b0", "b1"
MDN, MUP, MPOS = "mark_dn", "mark_up", "mark_pos"
START, HALT, TRAP = "start", "halt", "trap"
TEMP_PREFIX = "$t"
SCRATCH_PREFIX = "$s"


class CompileError(ValueError):
    pass


def sym_letter(s: str) -> str:
    return "s_" + mangle(s)


def zl(x: str) -> str:
    return "zl_" + mangle(x)


def zr(x: str) -> str:
    return "zr_" + mangle(x)


def dl(k: int) -> str:
    return f"dl_{k}"


def dr(k: int) -> str:
    return f"dr_{k}"


# ---------------------------------------------------------------- representation


def nat_bits(k: int) -> list[str]:
    if k < 0:
        raise ValueError("nats are nonnegative")
    if k == 0:
        return [B0]
    out = []
    while k:
        out.append(B1 if k & 1 else B0)
        k >>= 1
    return out


def rep(v) -> list[str]:
    """Tape letters for a runtime value (int, str or :class:`ArrayV`)."""
    if isinstance(v, ArrayV):
        return _rep_array(v.dims, v.data)
    if isinstance(v, bool):
        raise TypeError("booleans have no tape representation")
    if isinstance(v, int):
        return nat_bits(v)
    if isinstance(v, str):
        return [sym_letter(v)]
    raise TypeError(f"cannot represent {v!r}")


def _rep_array(dims: tuple, data: list) -> list[str]:
    if not dims:
        return rep(data[0])
    level = len(dims) - 1
    stride = math.prod(dims[1:])
    out = []
    for i in range(dims[0]):
        out.append(dl(level))
        out += _rep_array(dims[1:], data[i * stride : (i + 1) * stride])
        out.append(dr(level))
    return out


class DecodeError(ValueError):
    pass


def decode_rep(letters: Sequence[str], t: SimperType):
    letters = list(letters)
    if isinstance(t, NatT):
        if not letters or any(x not in (B0, B1) for x in letters):
            raise DecodeError(f"not a nat: {letters}")
        return sum(1 << i for i, x in enumerate(letters) if x == B1)
    if isinstance(t, SymT):
        if len(letters) != 1 or not letters[0].startswith("s_"):
            raise DecodeError(f"not a symbol: {letters}")
        return unmangle(letters[0][2:])
    if isinstance(t, ArrayT):
        dims, data = _decode_array(letters, t.dim, t.elem)
        return ArrayV(dims, data)
    raise DecodeError(f"no representation for type {t}")


def _decode_array(letters: list, dim: int, elem: SimperType):
    if dim == 0:
        return (), [decode_rep(letters, elem)]
    open_, close = dl(dim - 1), dr(dim - 1)
    blocks, i = [], 0
    while i < len(letters):
        if letters[i] != open_:
            raise DecodeError(f"expected {open_} at position {i}")
        j = letters.index(close, i + 1) if close in letters[i + 1 :] else -1
        if j < 0:
            raise DecodeError(f"unclosed {open_}")
        blocks.append(letters[i + 1 : j])
        i = j + 1
    if not blocks:
        return (0,) * dim, []
    subs = [_decode_array(b, dim - 1, elem) for b in blocks]
    inner = subs[0][0]
    if any(s[0] != inner for s in subs):
        raise DecodeError("ragged array")
    return (len(blocks),) + inner, [x for s in subs for x in s[1]]


# ---------------------------------------------------------------- preprocessing


@dataclass(frozen=True)
class _Setup:
    """Condition atom preceded by temporaries that must be computed first."""

    stmts: tuple
    atom: object


def _base(v) -> str | None:
    return v.name if isinstance(v, (Var, Index)) else None


def preprocess_array_accesses(p: Program) -> Program:
    """Make every array index a variable or a literal.

    Other index expressions (nested accesses) are computed into fresh
    temporaries just before the statement, or just before the comparison that
    needs them, so short-circuit evaluation is preserved. Copies and
    comparisons between two places of the same variable also go through a
    temporary, so the two tape markers involved never share a zone.
    """
    if not is_core(p):
        p = desugar(p)
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"{TEMP_PREFIX}{counter[0] - 1}"

    def simple_index(v, pre: list):
        if isinstance(v, (Var, NatLit)):
            return v
        t = fresh()
        pre += hoist(v, t)
        return Var(t)

    def hoist(v, name: str) -> list:
        pre: list = []
        v = fix_value(v, pre)
        return pre + [Assign(Var(name), v)]

    def fix_value(v, pre: list):
        if isinstance(v, Index):
            return Index(v.name, tuple(simple_index(i, pre) for i in v.indices))
        if isinstance(v, ArrayLit):
            dims = tuple(simple_index(d, pre) for d in v.dims)
            return ArrayLit(dims, fix_value(v.fill, pre))
        return v

    def fix_atom(c):
        pre: list = []
        left, right = fix_value(c.left, pre), fix_value(c.right, pre)
        if _base(left) is not None and _base(left) == _base(right):
            t = fresh()
            pre.append(Assign(Var(t), right))
            right = Var(t)
        atom = type(c)(left, right)
        return _Setup(tuple(pre), atom) if pre else atom

    def fix_cond(c):
        if isinstance(c, (And, Or)):
            return type(c)(fix_cond(c.left), fix_cond(c.right))
        return fix_atom(c)

    def block(stmts) -> tuple:
        out: list = []
        for s in stmts:
            if isinstance(s, Assign):
                pre: list = []
                target = fix_value(s.target, pre)
                value = fix_value(s.value, pre)
                if _base(value) is not None and _base(value) == _base(target):
                    if value == target:
                        out += pre
                        out.append(Label(f"{TEMP_PREFIX}nop{counter[0]}", s.line))
                        counter[0] += 1
                        continue
                    t = fresh()
                    pre.append(Assign(Var(t), value, s.line))
                    value = Var(t)
                out += pre
                out.append(Assign(target, value, s.line))
            elif isinstance(s, (Inc, Dec)):
                pre = []
                target = fix_value(s.target, pre)
                out += pre
                out.append(type(s)(target, s.line))
            elif isinstance(s, If):
                out.append(If(fix_cond(s.cond), block(s.then), None if s.orelse is None else block(s.orelse), s.line))
            else:
                out.append(s)
        return tuple(out)

    return Program(block(p.body))


def _all_values(p: Program):
    def values_in(v):
        yield v
        if isinstance(v, Index):
            for i in v.indices:
                yield from values_in(i)
        elif isinstance(v, ArrayLit):
            for d in v.dims:
                yield from values_in(d)
            yield from values_in(v.fill)

    def conds(c):
        if isinstance(c, (And, Or)):
            yield from conds(c.left)
            yield from conds(c.right)
        elif isinstance(c, _Setup):
            for s in c.stmts:
                yield from stmt_values(s)
            yield from conds(c.atom)
        else:
            yield from values_in(c.left)
            yield from values_in(c.right)

    def stmt_values(s):
        if isinstance(s, Assign):
            yield from values_in(s.target)
            yield from values_in(s.value)
        elif isinstance(s, (Inc, Dec)):
            yield from values_in(s.target)
        elif isinstance(s, If):
            yield from conds(s.cond)

    for s in walk(p.body):
        yield from stmt_values(s)


def _setup_assigns(p: Program):
    def conds(c):
        if isinstance(c, (And, Or)):
            yield from conds(c.left)
            yield from conds(c.right)
        elif isinstance(c, _Setup):
            yield from c.stmts

    for s in walk(p.body):
        if isinstance(s, If):
            yield from conds(s.cond)


# ---------------------------------------------------------------- machine builder


class _Builder:
    def __init__(self, letters: list[str]):
        self.letters = letters
        self.delta: dict[tuple[str, str | None], tuple[str, tuple[str, ...], str]] = {}
        self.count = 0
        self.parent: dict[str, str] = {}

    def fresh(self) -> str:
        self.count += 1
        return f"q{self.count}"

    def add(self, q: str, read: str | None, to: str, write, d: str) -> None:
        key = (q, read)
        if key in self.delta:
            raise CompileError(f"internal: two transitions for {key}")
        write = tuple(write)
        assert len(write) <= 2 and (d != "S" or len(write) == 1)
        self.delta[key] = (to, write, d)

    def find(self, q: str) -> str:
        while q in self.parent:
            q = self.parent[q]
        return q

    def alias(self, a: str, b: str) -> None:
        """Merge two states (used for labels, gotos and joins)."""
        a, b = self.find(a), self.find(b)
        if a == b:
            return
        # keep fixed names as representatives
        if a in (START, HALT, REJECT, TRAP):
            a, b = b, a
        self.parent[a] = b

    # one-state scanners -------------------------------------------------

    def scan(self, q: str, d: str, stops: dict, blank=None) -> None:
        """Move in direction ``d`` over every letter except the ``stops``.

        A stop maps to a target state (reached by a no-op step) or to a full
        ``(to, write, dir)`` transition.
        """
        for x in self.letters:
            if x in stops:
                s = stops[x]
                if isinstance(s, str):
                    self.add(q, x, s, (x,), "S")
                else:
                    self.add(q, x, *s)
            else:
                self.add(q, x, q, (x,), d)
        if blank is not None:
            self.add(q, None, *blank)

    def step(self, q: str, d: str, to: str) -> None:
        """Move one cell without changing the tape."""
        for x in self.letters:
            self.add(q, x, to, (x,), d)
        self.add(q, None, to, (), d)


# ---------------------------------------------------------------- compiler


@dataclass
class SizeReport:
    states: int
    transitions: int
    letters: int
    zones: int
    program_size: int


@dataclass
class CompiledProgram:
    machine: ExtendedTM
    layout: tuple[str, ...]
    types: dict[str, SimperType]
    input_letters: dict[str, str]
    statement_states: frozenset[str] = frozenset()  # zones are well formed in these states

    def encode_input(self, word: Sequence[str]) -> list[str]:
        try:
            return [self.input_letters[s] for s in word]
        except KeyError as e:
            raise ValueError(f"symbol {e.args[0]!r} is not in the machine's input alphabet") from None

    def size_report(self, program_size: int = 0) -> SizeReport:
        m = self.machine
        return SizeReport(len(m.states), len(m.delta), len(m.alphabet), len(self.layout), program_size)


class _Compiler:
    def __init__(self, p: Program, env: dict, input_symbols: Sequence[str]):
        self.p = p
        self.entries: list[str] = []  # states where a statement begins
        self.env = dict(env)
        lits = [v.value for v in _all_values(p) if isinstance(v, SymLit)]
        self.syms = list(dict.fromkeys([*input_symbols, *lits]))
        self.input_symbols = list(dict.fromkeys(input_symbols)) or self.syms
        for s in [*_setup_assigns(p), *walk(p.body)]:
            if isinstance(s, Assign):
                self._note_temp(s)
        maxdim = 0
        for name, t in self.env.items():
            if isinstance(t, ArrayT):
                if isinstance(t.elem, ArrayT):
                    raise CompileError(f"{name}: arrays of arrays are not supported")
                maxdim = max(maxdim, t.dim)
        self.banks = self._scratch_banks(p)
        scratch = [s for bank in self.banks for s in bank]
        for s in scratch:
            self.env[s] = NAT
        user = [v for v in dict.fromkeys(self._assignment_order()) if not v.startswith("$")]
        temps = sorted((v for v in self.env if v.startswith(TEMP_PREFIX)), key=lambda v: int(v[2:]))
        self.layout = ["input", "n", *[v for v in user if v not in ("input", "n")], *temps, *scratch]
        self.zone_index = {z: i for i, z in enumerate(self.layout)}
        self.end = zr(self.layout[-1])
        letters = [B0, B1, *(sym_letter(s) for s in self.syms)]
        for z in self.layout:
            letters += [zl(z), zr(z)]
        for k in range(maxdim):
            letters += [dl(k), dr(k)]
        letters += [MDN, MUP, MPOS]
        self.b = _Builder(letters)
        self.value_letters = [B0, B1, *(sym_letter(s) for s in self.syms)]
        self.array_letters = self.value_letters + [x for k in range(maxdim) for x in (dl(k), dr(k))]
        self.pos: str | None = None
        self.labels: dict[str, str] = {}

    def _scratch_banks(self, p: Program) -> list[list[str]]:
        """Scratch counters for index walks; a second bank when two indexed places meet."""

        def var_arity(v) -> int:
            return len(v.indices) if isinstance(v, Index) and any(isinstance(i, Var) for i in v.indices) else 0

        one, two = 0, 0
        for v in _all_values(p):
            if isinstance(v, Index):
                one = max(one, len(v.indices))
            elif isinstance(v, ArrayLit):
                one = max(one, 1)
        pairs = []
        for s in [*walk(p.body), *_setup_assigns(p)]:
            if isinstance(s, Assign):
                pairs.append((s.target, s.value))
            elif isinstance(s, If):
                stack = [s.cond]
                while stack:
                    c = stack.pop()
                    if isinstance(c, (And, Or)):
                        stack += [c.left, c.right]
                    elif isinstance(c, _Setup):
                        stack.append(c.atom)
                    else:
                        pairs.append((c.left, c.right))
        for a, b in pairs:
            if var_arity(a) and var_arity(b):
                two = max(two, var_arity(b))
        banks = [[f"{SCRATCH_PREFIX}{k}" for k in range(one)]]
        if two:
            banks.append([f"{SCRATCH_PREFIX}{one + k}" for k in range(two)])
        return banks

    def _note_temp(self, s: Assign) -> None:
        if isinstance(s.target, Var) and s.target.name not in self.env:
            t = _value_type(s.value, self.env, True, [], "")
            if t is None:
                raise CompileError(f"cannot type {s.target.name}")
            self.env[s.target.name] = t

    def _assignment_order(self):
        for s in walk(self.p.body):
            if isinstance(s, Assign):
                yield s.target.name

    # seeking -------------------------------------------------------------

    def seek(self, q: str, letter: str, zone: str) -> str:
        """Move to ``letter``, known to lie in ``zone``; returns the state on it."""
        b = self.b
        out = b.fresh()
        if self.pos is None:
            if letter == self.end:
                b.scan(q, "R", {letter: out})
            else:
                back = b.fresh()
                b.scan(q, "R", {letter: out, self.end: (back, (self.end,), "L")})
                b.scan(back, "L", {letter: out})
        else:
            here, there = self.zone_index[self.pos], self.zone_index[zone]
            if there > here or (there == here and letter == zr(zone)):
                b.scan(q, "R", {letter: out})
            elif there < here or letter == zl(zone):
                b.scan(q, "L", {letter: out})
            else:
                back = b.fresh()
                b.scan(q, "R", {letter: out, zr(zone): (back, (zr(zone),), "L")})
                b.scan(back, "L", {letter: out})
        self.pos = zone
        return out

    def _dir(self, src: str, dst: str) -> str:
        return "R" if self.zone_index[dst] > self.zone_index[src] else "L"

    def insert_before(self, q: str, here: str, x: str) -> str:
        """Head on the known letter ``here``: put ``x`` to its left and stay on ``here``."""
        b = self.b
        mid, out = b.fresh(), b.fresh()
        b.add(q, here, mid, (x, here), "R")
        b.step(mid, "L", out)
        return out

    # locating places -----------------------------------------------------

    def prepare(self, q: str, place, bank: int = 0) -> str:
        """Copy the variable indices of ``place`` into a scratch bank."""
        if isinstance(place, Index):
            for k, idx in enumerate(place.indices):
                if isinstance(idx, Var):
                    q = self.copy_plain(q, Var(self.banks[bank][k]), idx)
                elif not isinstance(idx, NatLit):
                    raise CompileError("index must be a variable or a literal after preprocessing")
        return q

    def walk(self, q: str, place, bank: int = 0) -> tuple[str, str, str, str]:
        """Head onto the opener of a prepared place. Returns (state, opener, closer, zone)."""
        if isinstance(place, Var):
            return self.seek(q, zl(place.name), place.name), zl(place.name), zr(place.name), place.name
        a = place.name
        t = self.env.get(a)
        if not isinstance(t, ArrayT) or t.dim != len(place.indices):
            raise CompileError(f"bad array access {a}")
        n = t.dim
        b = self.b
        q = self.seek(q, zl(a), a)
        for k, idx in enumerate(place.indices):
            level = n - 1 - k
            m = dl(level)
            parent_close = zr(a) if k == 0 else dr(level + 1)
            if isinstance(idx, NatLit):
                for r in range(idx.value + 1):
                    nxt = b.fresh()
                    b.scan(q, "R", {m: nxt if r == idx.value else (nxt, (m,), "R"), parent_close: REJECT})
                    q = nxt
                continue
            scr = self.banks[bank][k]
            loop, marked = q, b.fresh()
            b.scan(loop, "R", {m: (marked, (m, MPOS), "R"), parent_close: REJECT})
            self.pos = a
            at_scr = self.seek(marked, zl(scr), scr)
            is_zero, nonzero = self.test_zero(at_scr, zl(scr), zr(scr))
            # zero: back to the mark, drop it, stand on the block opener
            self.pos = scr
            back = self.seek(is_zero, MPOS, a)
            done = b.fresh()
            b.add(back, MPOS, done, (), "L")
            # otherwise count down and look for the next block
            self.pos = scr
            to_start = self.seek(nonzero, zl(scr), scr)
            dec_done = self.dec_at(to_start, zl(scr), zr(scr))
            self.pos = scr
            back2 = self.seek(dec_done, MPOS, a)
            b.add(back2, MPOS, loop, (), "R")
            q = done
        self.pos = a
        return q, dl(0), dr(0), a

    def locate(self, q: str, place) -> tuple[str, str, str, str]:
        return self.walk(self.prepare(q, place), place)

    # arithmetic ----------------------------------------------------------

    def test_zero(self, q: str, opener: str, closer: str) -> tuple[str, str]:
        """Head on the opener of a nat: branch on zero. Empty zones reject."""
        b = self.b
        t0, t1, yes, no = b.fresh(), b.fresh(), b.fresh(), b.fresh()
        b.add(q, opener, t0, (opener,), "R")
        b.add(t0, B0, t1, (B0,), "R")
        b.add(t0, B1, no, (B1,), "S")
        b.add(t0, closer, REJECT, (closer,), "S")
        b.add(t1, closer, yes, (closer,), "S")
        b.add(t1, B0, no, (B0,), "S")
        b.add(t1, B1, no, (B1,), "S")
        return yes, no

    def inc_at(self, q: str, opener: str, closer: str) -> str:
        b = self.b
        first, loop, out = b.fresh(), b.fresh(), b.fresh()
        b.add(q, opener, first, (opener,), "R")
        for s in (first, loop):
            b.add(s, B1, loop, (B0,), "R")
            b.add(s, B0, out, (B1,), "S")
        b.add(first, closer, REJECT, (closer,), "S")
        b.add(loop, closer, out, (B1, closer), "L")
        return out

    def dec_at(self, q: str, opener: str, closer: str) -> str:
        b = self.b
        first, zeros, trim, undo, dropped, out = (b.fresh() for _ in range(6))
        b.add(q, opener, first, (opener,), "R")
        b.add(first, closer, REJECT, (closer,), "S")
        b.add(first, B1, out, (B0,), "S")
        b.add(first, B0, zeros, (B1,), "R")
        b.add(zeros, B0, zeros, (B1,), "R")
        b.add(zeros, B1, trim, (B0,), "R")
        # ran off the end: the value was zero, restore its single bit
        b.add(zeros, closer, undo, (closer,), "L")
        b.add(undo, B1, out, (B0,), "S")
        # the borrow cleared the top bit: drop it
        b.add(trim, closer, dropped, (closer,), "L")
        b.add(dropped, B0, out, (), "R")
        b.add(trim, B0, out, (B0,), "S")
        b.add(trim, B1, out, (B1,), "S")
        return out

    # writing -------------------------------------------------------------

    def erase(self, q: str, opener: str, closer: str) -> str:
        """From the opener, delete the contents; the head ends on the closer."""
        b = self.b
        loop, out = b.fresh(), b.fresh()
        b.add(q, opener, loop, (opener,), "R")
        for x in b.letters:
            if x == closer:
                b.add(loop, x, out, (x,), "S")
            else:
                b.add(loop, x, loop, (), "R")
        return out

    def write_letters(self, q: str, opener: str, closer: str, letters: list[str]) -> str:
        q = self.erase(q, opener, closer)
        for x in letters:
            q = self.insert_before(q, closer, x)
        return q

    def copy_plain(self, q: str, target: Var, source: Var) -> str:
        """Copy between two plain variables (used for scratch counters)."""
        return self._copy(q, target, source, 0, 0)

    def copy(self, q: str, target, source) -> str:
        """``target := source`` for places in two different variables."""
        tb = 0
        sb = 1 if isinstance(target, Index) and isinstance(source, Index) and any(
            isinstance(i, Var) for i in target.indices
        ) and any(isinstance(i, Var) for i in source.indices) else 0
        q = self.prepare(q, target, tb)
        q = self.prepare(q, source, sb)
        return self._copy(q, target, source, tb, sb)

    def _copy(self, q: str, target, source, tb: int, sb: int) -> str:
        b = self.b
        q, o_d, c_d, zd = self.walk(q, target, tb)
        q = self.erase(q, o_d, c_d)
        q = self.insert_before(q, c_d, MDN)
        q, o_s, c_s, zs = self.walk(q, source, sb)
        if zs == zd:
            raise CompileError("internal: copy within one zone")
        first = b.fresh()
        b.add(q, o_s, first, (o_s, MUP), "R")
        scalar = isinstance(source, Index) or not isinstance(self.env[source.name], ArrayT)
        letters = self.value_letters if scalar else self.array_letters
        out = self._copy_loop(first, c_s, letters, self._dir(zs, zd), self._dir(zd, zs), scalar, None)
        self.pos = zd
        return out

    def _copy_loop(self, first, closer, letters, to_dst, to_src, scalar, stop_after):
        """Copy the symbols right of ``mark_up`` to the left of ``mark_dn``.

        ``first`` has the head just right of ``mark_up``. The copy ends at
        ``closer`` or, when ``stop_after`` is given, once that letter has been
        copied. Both marks are removed.
        """
        b = self.b
        loop, finish, back_to_src = b.fresh(), b.fresh(), b.fresh()
        if stop_after is None:
            b.add(first, closer, REJECT if scalar else finish, (closer,), "S" if scalar else "L")
            b.add(loop, closer, finish, (closer,), "L")
        for y in letters:
            swap, carry, at_dn, put = b.fresh(), b.fresh(), b.fresh(), b.fresh()
            b.add(first, y, swap, (MUP,), "L")
            b.add(loop, y, swap, (MUP,), "L")
            b.add(swap, MUP, carry, (y,), "R")
            b.scan(carry, to_dst, {MDN: at_dn})
            b.add(at_dn, MDN, put, (y, MDN), "R")
            b.step(put, "L", finish if y == stop_after else back_to_src)
        at_up = b.fresh()
        b.scan(back_to_src, to_src, {MUP: at_up})
        b.add(at_up, MUP, loop, (MUP,), "R")
        out, gone, other = b.fresh(), b.fresh(), b.fresh()
        if stop_after is None:
            # on mark_up, just left of the closer
            b.add(finish, MUP, gone, (), "R")
            b.scan(gone, to_dst, {MDN: other})
            b.add(other, MDN, out, (), "R")
        else:
            # on mark_dn
            b.add(finish, MDN, gone, (), "L")
            b.scan(gone, to_src, {MUP: other})
            b.add(other, MUP, out, (), "R")
        return out

    def build_array(self, q: str, target: Var, lit: ArrayLit) -> str:
        b = self.b
        x = target.name
        fill = lit.fill
        if isinstance(fill, ArrayLit):
            raise CompileError("array literals must be filled with a nat or a symbol")
        if isinstance(fill, (NatLit, SymLit)):
            q, o, c, _ = self.locate(q, target)
            q = self.write_letters(q, o, c, rep(fill.value))
        else:
            q = self.copy(q, target, fill)
        scr = self.banks[0][0]
        n = len(lit.dims)
        for j in range(n):
            dim = lit.dims[n - 1 - j]
            # wrap everything built so far into one block of level j
            q = self.seek(q, zl(x), x)
            wrapped = b.fresh()
            b.add(q, zl(x), wrapped, (zl(x), dl(j)), "R")
            q = self.seek(wrapped, zr(x), x)
            q = self.insert_before(q, zr(x), dr(j))
            if isinstance(dim, NatLit):
                q, o, c, _ = self.locate(q, Var(scr))
                q = self.write_letters(q, o, c, nat_bits(dim.value))
            else:
                q = self.copy_plain(q, Var(scr), dim)
            q, o, c, _ = self.locate(q, Var(scr))
            zero, nonzero = self.test_zero(q, o, c)
            joined = b.fresh()
            # no blocks at all
            self.pos = scr
            zq, zo, zc, _ = self.locate(zero, target)
            b.alias(self.erase(zq, zo, zc), joined)
            # one block exists: count down, appending a copy of the first block each time
            self.pos = scr
            qd, o, c, _ = self.locate(nonzero, Var(scr))
            loop = self.dec_at(qd, o, c)
            self.pos = scr
            lq, o, c, _ = self.locate(loop, Var(scr))
            done, more = self.test_zero(lq, o, c)
            b.alias(done, joined)
            self.pos = scr
            aq = self.seek(more, zr(x), x)
            aq = self.insert_before(aq, zr(x), MDN)
            aq = self.seek(aq, zl(x), x)
            first = b.fresh()
            b.add(aq, zl(x), first, (zl(x), MUP), "R")
            aq = self._copy_loop(first, None, self.array_letters, "R", "L", False, dr(j))
            self.pos = x
            aq, o, c, _ = self.locate(aq, Var(scr))
            b.alias(self.dec_at(aq, o, c), loop)
            self.pos = None
            q = joined
        return q

    # conditions ----------------------------------------------------------

    def branch(self, c, q: str, yes: str, no: str) -> None:
        b = self.b
        self.pos = None
        if isinstance(c, (And, Or)):
            mid = b.fresh()
            if isinstance(c, And):
                self.branch(c.left, q, mid, no)
            else:
                self.branch(c.left, q, yes, mid)
            self.branch(c.right, mid, yes, no)
        elif isinstance(c, _Setup):
            for s in c.stmts:
                nxt = b.fresh()
                self.statement(s, q, nxt)
                q = nxt
            self.branch(c.atom, q, yes, no)
        elif isinstance(c, Eq):
            self.compare(c.left, c.right, q, yes, no)
        elif isinstance(c, Neq):
            self.compare(c.left, c.right, q, no, yes)
        else:  # pragma: no cover
            raise CompileError(f"unknown condition {c}")
        self.pos = None

    def compare(self, left, right, q: str, yes: str, no: str) -> None:
        b = self.b
        lits = (NatLit, SymLit)
        if isinstance(left, lits) and isinstance(right, lits):
            b.alias(q, yes if left == right else no)
            return
        if isinstance(left, lits):
            left, right = right, left
        if isinstance(right, lits):
            q, o, c, _ = self.locate(q, left)
            s = b.fresh()
            b.add(q, o, s, (o,), "R")
            for i, x in enumerate(rep(right.value)):
                nxt = b.fresh()
                for y in b.letters:
                    if y == x:
                        b.add(s, y, nxt, (y,), "R")
                    else:
                        b.add(s, y, REJECT if i == 0 and y == c else no, (y,), "S")
                s = nxt
            for y in b.letters:
                b.add(s, y, yes if y == c else no, (y,), "S")
            return
        # two places: mark both, then compare symbol by symbol
        lb = 0
        rb = 1 if isinstance(left, Index) and isinstance(right, Index) and len(self.banks) > 1 else 0
        if rb == 0 and isinstance(left, Index) and isinstance(right, Index):
            if any(isinstance(i, Var) for i in left.indices) and any(isinstance(i, Var) for i in right.indices):
                raise CompileError("internal: missing second scratch bank")
        q = self.prepare(q, left, lb)
        q = self.prepare(q, right, rb)
        q, oa, ca, za = self.walk(q, left, lb)
        a_marked = b.fresh()
        b.add(q, oa, a_marked, (oa, MDN), "R")
        q, ob, cb, zb = self.walk(a_marked, right, rb)
        b_marked = b.fresh()
        b.add(q, ob, b_marked, (ob, MUP), "R")
        if za == zb:
            raise CompileError("internal: comparison within one zone")
        to_a, to_b = self._dir(zb, za), self._dir(za, zb)
        # exits: the head is just right of mark_up; remove both marks
        exits = {}
        for target in (yes, no):
            s0, s1, s2, s3 = b.fresh(), b.fresh(), b.fresh(), b.fresh()
            b.scan(s0, "L", {MUP: s1})
            b.add(s1, MUP, s2, (), "L")
            b.scan(s2, to_a, {MDN: s3})
            b.add(s3, MDN, target, (), "R")
            exits[target] = s0
        at_dn, first_a, read_a = b.fresh(), b.fresh(), b.fresh()
        b.scan(b_marked, to_a, {MDN: at_dn})
        b.add(at_dn, MDN, first_a, (MDN,), "R")
        end = object()
        for y in [*self.value_letters, end]:
            seek_up, at_up, read_b = b.fresh(), b.fresh(), b.fresh()
            if y is end:
                b.add(first_a, ca, REJECT, (ca,), "S")
                b.add(read_a, ca, seek_up, (ca,), "S")
            else:
                swap = b.fresh()
                b.add(first_a, y, swap, (MDN,), "L")
                b.add(read_a, y, swap, (MDN,), "L")
                b.add(swap, MDN, seek_up, (y,), "R")
            b.scan(seek_up, to_b, {MUP: at_up})
            b.add(at_up, MUP, read_b, (MUP,), "R")
            for z in b.letters:
                if y is end:
                    b.add(read_b, z, exits[yes] if z == cb else exits[no], (z,), "S")
                elif z == y:
                    swap, back, dn = b.fresh(), b.fresh(), b.fresh()
                    b.add(read_b, z, swap, (MUP,), "L")
                    b.add(swap, MUP, back, (z,), "R")
                    b.scan(back, to_a, {MDN: dn})
                    b.add(dn, MDN, read_a, (MDN,), "R")
                else:
                    b.add(read_b, z, exits[no], (z,), "S")

    # statements ----------------------------------------------------------

    def label_state(self, name: str) -> str:
        if name not in self.labels:
            self.labels[name] = self.b.fresh()
        return self.labels[name]

    def statement(self, s, q: str, out: str) -> None:
        b = self.b
        self.pos = None
        if isinstance(s, Label):
            b.alias(q, self.label_state(s.name))
            b.alias(q, out)
        elif isinstance(s, Goto):
            b.alias(q, self.label_state(s.name))
        elif isinstance(s, Halt):
            b.alias(q, HALT)
        elif isinstance(s, (Inc, Dec)):
            q, o, c, _ = self.locate(q, s.target)
            b.alias(self.inc_at(q, o, c) if isinstance(s, Inc) else self.dec_at(q, o, c), out)
        elif isinstance(s, Assign):
            v = s.value
            if isinstance(v, (NatLit, SymLit)):
                q, o, c, _ = self.locate(q, s.target)
                end = self.write_letters(q, o, c, rep(v.value))
            elif isinstance(v, (Var, Index)):
                end = self.copy(q, s.target, v)
            elif isinstance(v, ArrayLit):
                if not isinstance(s.target, Var):
                    raise CompileError("array literals can only be assigned to variables")
                end = self.build_array(q, s.target, v)
            else:  # pragma: no cover
                raise CompileError(f"unsupported value {v}")
            b.alias(end, out)
        elif isinstance(s, If):
            yes, no = b.fresh(), b.fresh()
            self.branch(s.cond, q, yes, no)
            self.block(s.then, yes, out)
            if s.orelse is None:
                b.alias(no, out)
            else:
                self.block(s.orelse, no, out)
        else:
            raise CompileError(f"unsupported statement {type(s).__name__}")
        self.pos = None

    def block(self, stmts, q: str, out: str) -> None:
        for s in stmts:
            nxt = self.b.fresh()
            self.entries.append(q)
            self.statement(s, q, nxt)
            q = nxt
        self.b.alias(q, out)

    # prologue ------------------------------------------------------------

    def prologue(self) -> str:
        """Turn the bare input word into zones; returns the state where the body starts."""
        b = self.b
        inputs = [sym_letter(s) for s in self.input_symbols]
        wrap = b.fresh()
        b.add(START, None, wrap, (zl("input"),), "R")
        for x in inputs:
            b.add(wrap, x, wrap, (dl(0), x), "R")
        rest = [zr("input"), zl("n"), B0, zr("n")]
        for z in self.layout[2:]:
            rest += [zl(z), zr(z)]
        q = wrap
        for i in range(0, len(rest), 2):
            nxt = b.fresh()
            b.add(q, None, nxt, rest[i : i + 2], "R")
            q = nxt
        # back onto the last marker, then left to the end of the input
        back, closing, after = b.fresh(), b.fresh(), b.fresh()
        b.add(q, None, back, (), "L")
        b.scan(back, "L", {zr("input"): (closing, (zr("input"),), "L")})
        # walking left, each input letter gets its dr_0
        for x in inputs:
            b.add(closing, x, after, (x, dr(0)), "L")
        b.add(after, dl(0), closing, (dl(0),), "L")
        # count the elements into n; mark_pos walks through the input zone
        count = b.fresh()
        b.add(closing, zl("input"), count, (zl("input"), MPOS), "R")
        step_on, found, done, body = b.fresh(), b.fresh(), b.fresh(), b.fresh()
        for x in [*inputs, dr(0), dl(0)]:
            swap = b.fresh()
            b.add(count, x, swap, (MPOS,), "L")
            b.add(swap, MPOS, found if x == dl(0) else step_on, (x,), "R")
        b.step(step_on, "R", count)
        self.pos = "input"
        q = self.seek(found, zl("n"), "n")
        q = self.inc_at(q, zl("n"), zr("n"))
        q = self.seek(q, MPOS, "input")
        b.alias(q, step_on)
        b.add(count, zr("input"), done, (zr("input"),), "L")
        b.add(done, MPOS, body, (), "R")
        self.pos = None
        return body

    def compile(self) -> ExtendedTM:
        body = self.prologue()
        self.block(self.p.body, body, REJECT)
        return self.finish()

    def finish(self) -> ExtendedTM:
        b = self.b
        delta: dict[tuple[str, str | None], Transition] = {}
        for (q, x), (to, w, d) in b.delta.items():
            key = (b.find(q), x)
            t = Transition(b.find(to), w, d)
            if key in delta and delta[key] != t:
                raise CompileError(f"internal: conflicting transitions for {key}")
            delta[key] = t
        if any(q in (HALT, REJECT) for q, _ in delta):
            raise CompileError("internal: a final state has outgoing transitions")
        states = {START, HALT, REJECT, TRAP}
        for (q, _), t in delta.items():
            states.update((q, t.to))
        busy = {q for q, _ in delta}
        for q in states - {HALT, REJECT, TRAP}:
            if q not in busy:
                # an empty loop such as `L: goto L`
                delta.update(spin_transitions(q, b.letters))
                continue
            for x in (*b.letters, None):
                delta.setdefault((q, x), Transition(TRAP, (b.letters[0],), "S"))
        delta.update(spin_transitions(TRAP, b.letters))
        order = [START, *sorted(states - {START, HALT, REJECT, TRAP}, key=_state_key), TRAP]
        m = make_etm(order, START, HALT, b.letters, delta)
        assert all(len(t.write) <= 2 for t in m.delta.values())
        return m


def _state_key(q: str):
    return (0, int(q[1:])) if q[1:].isdigit() else (1, q)


def compile_program(p: Program, input_symbols: Sequence[str] = ()) -> CompiledProgram:
    """Typecheck, desugar, preprocess and compile ``p``.

    ``input_symbols`` lists the symbols that may appear in the input word; by
    default every symbol literal of the program.
    """
    env = check(p)
    pp = preprocess_array_accesses(desugar(p))
    c = _Compiler(pp, env, input_symbols)
    m = c.compile()
    letters = {s: sym_letter(s) for s in c.input_symbols}
    entries = frozenset(c.b.find(q) for q in c.entries) & set(m.states)
    return CompiledProgram(m, tuple(c.layout), c.env, letters, entries)


compile = compile_program  # noqa: A001  (module-level name used by callers)


# ---------------------------------------------------------------- tape inspection


class TapeStructureError(ValueError):
    pass


def split_zones(tape: Sequence[str | None], layout: Sequence[str]) -> dict[str, list[str]]:
    """Check the zone structure of a tape and return each zone's contents."""
    cells = [x for x in tape if x is not None]
    zones: dict[str, list[str]] = {}
    i = 0
    marks = {MDN, MUP, MPOS}
    for z in layout:
        if i >= len(cells) or cells[i] != zl(z):
            raise TapeStructureError(f"expected {zl(z)} at cell {i}")
        j = i + 1
        while j < len(cells) and cells[j] != zr(z):
            if cells[j].startswith(("zl_", "zr_")):
                raise TapeStructureError(f"zone {z} is not closed before {cells[j]}")
            j += 1
        if j >= len(cells):
            raise TapeStructureError(f"zone {z} is not closed")
        body = [x for x in cells[i + 1 : j] if x not in marks]
        depth: list[str] = []
        for x in body:
            if x.startswith("dl_"):
                depth.append(x)
            elif x.startswith("dr_"):
                if not depth or depth.pop()[3:] != x[3:]:
                    raise TapeStructureError(f"unbalanced {x} in zone {z}")
        if depth:
            raise TapeStructureError(f"unbalanced array markers in zone {z}")
        zones[z] = body
        i = j + 1
    if i != len(cells):
        raise TapeStructureError("cells after the last zone")
    return zones


def decode_zones(cp: CompiledProgram, tape: Sequence[str | None]) -> dict:
    """Values of every initialized variable on a (settled) tape."""
    out = {}
    for z, body in split_zones(tape, cp.layout).items():
        if body or isinstance(cp.types.get(z), ArrayT):
            out[z] = decode_rep(body, cp.types[z])
    return out
