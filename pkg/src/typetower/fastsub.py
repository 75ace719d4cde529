"""Compiled stepping loop for long subtyping-machine runs.

Towers live in two int32 stacks (head on top) that swap roles every step.
Chains are looked up in a table filled on demand: when the kernel meets a
(head, target) pair it has not seen, it returns to Python, which computes the
chains with :func:`subtyper.chain_search` and resumes the kernel.
"""

from __future__ import annotations

import numpy as np

from .classtable import ClassTable, validate_deterministic
from .subtyper import MachineConfig, Outcome, RunResult, chain_search

try:
    import numba
    from numba import njit
except ImportError:  # pragma: no cover
    numba = None

_HALT, _STUCK, _FUEL, _MISS, _GROW, _AMBIG = range(6)
_NO_CHAIN = -1
_AMBIGUOUS = -3


def available() -> bool:
    return numba is not None


if numba is not None:

    @njit(cache=True)
    def _kernel(a, alen, b, blen, fuel, nclasses, table, starts, lens, grounds, data, barez):
        steps = 0
        while True:
            if blen == 0:
                if alen == 0 or barez[a[alen - 1]]:
                    return _HALT, steps, a, alen, b, blen, -1
                return _STUCK, steps, a, alen, b, blen, -1
            if alen == 0:
                return _STUCK, steps, a, alen, b, blen, -1
            c = a[alen - 1]
            d = b[blen - 1]
            key = c * nclasses + d
            if c == d:
                k = -2
            else:
                if key not in table:
                    return _MISS, steps, a, alen, b, blen, key
                k = table[key]
                if k == _NO_CHAIN:
                    return _STUCK, steps, a, alen, b, blen, key
                if k == _AMBIGUOUS:
                    return _AMBIG, steps, a, alen, b, blen, key
            if steps >= fuel:
                return _FUEL, steps, a, alen, b, blen, -1
            if k >= 0 and (0 if grounds[k] else alen - 1) + lens[k] > a.shape[0]:
                return _GROW, steps, a, alen, b, blen, -1
            alen -= 1
            blen -= 1
            if k >= 0:
                n = lens[k]
                if grounds[k]:
                    alen = 0
                s = starts[k]
                for t in range(n - 1, -1, -1):
                    a[alen] = data[s + t]
                    alen += 1
            a, b = b, a
            alen, blen = blen, alen
            steps += 1


class NondeterministicTable(ValueError):
    """The compiled engine only runs tables with at most one walk between two classes."""


class FastEngine:
    def __init__(self, ct: ClassTable):
        rep = validate_deterministic(ct)
        if not rep.ok:
            raise NondeterministicTable("fast engine needs a deterministic table: " + rep.diagnostics[0][1])
        self.ct = ct
        self.names = sorted(ct.classes)
        self.ids = {n: i for i, n in enumerate(self.names)}
        self.table = numba.typed.Dict.empty(numba.types.int64, numba.types.int64)
        # chain storage, grown by doubling
        self._nchains = 0
        self._ndata = 0
        self._starts = np.zeros(64, dtype=np.int64)
        self._lens = np.zeros(64, dtype=np.int64)
        self._grounds = np.zeros(64, dtype=np.bool_)
        self._data = np.zeros(256, dtype=np.int32)
        self._nclasses = 1 << 20
        self.barez = np.array([bool(chain_search(ct, n, None)) for n in self.names], dtype=np.bool_)

    def _intern(self, name: str) -> int:
        # classes outside the table never match any rule
        if name not in self.ids:
            self.ids[name] = len(self.names)
            self.names.append(name)
            self.barez = np.append(self.barez, False)
            if len(self.names) >= self._nclasses:
                raise ValueError("too many classes for the fast engine")
        return self.ids[name]

    def _add_chain(self, key: int) -> None:
        c, d = divmod(key, self._nclasses)
        chains = chain_search(self.ct, self.names[c], self.names[d])
        if not chains:
            self.table[key] = _NO_CHAIN
            return
        if len({(ch.suffix, ch.ground) for ch in chains}) > 1:
            self.table[key] = _AMBIGUOUS
            return
        ch = chains[0]
        suffix = [self._intern(x) for x in ch.suffix]
        if self._nchains == self._starts.shape[0]:
            grow = self._starts.shape[0]
            self._starts = np.concatenate([self._starts, np.zeros(grow, dtype=np.int64)])
            self._lens = np.concatenate([self._lens, np.zeros(grow, dtype=np.int64)])
            self._grounds = np.concatenate([self._grounds, np.zeros(grow, dtype=np.bool_)])
        while self._ndata + len(suffix) > self._data.shape[0]:
            self._data = np.concatenate([self._data, np.zeros(self._data.shape[0], dtype=np.int32)])
        i = self._nchains
        self._starts[i] = self._ndata
        self._lens[i] = len(suffix)
        self._grounds[i] = ch.ground
        self._data[self._ndata : self._ndata + len(suffix)] = suffix
        self._ndata += len(suffix)
        self._nchains += 1
        self.table[key] = i

    def run(self, cfg: MachineConfig, fuel: int) -> RunResult:
        lhs = [self._intern(x) for x in reversed(cfg.lhs)]
        rhs = [self._intern(x) for x in reversed(cfg.rhs)]
        cap = 2 * (len(lhs) + len(rhs)) + 1024
        a = np.zeros(cap, dtype=np.int32)
        b = np.zeros(cap, dtype=np.int32)
        a[: len(lhs)] = lhs
        b[: len(rhs)] = rhs
        alen, blen = len(lhs), len(rhs)
        total = 0
        while True:
            starts, lens, grounds, data = self._starts, self._lens, self._grounds, self._data
            code, steps, a, alen, b, blen, key = _kernel(
                a, alen, b, blen, fuel - total, self._nclasses,
                self.table, starts, lens, grounds, data, self.barez,
            )
            total += steps
            if code == _MISS:
                self._add_chain(key)
                continue
            if code == _GROW:
                cap = 2 * max(a.shape[0], b.shape[0])
                a = np.concatenate([a, np.zeros(cap - a.shape[0], dtype=np.int32)])
                b = np.concatenate([b, np.zeros(cap - b.shape[0], dtype=np.int32)])
                continue
            final = MachineConfig(
                tuple(self.names[i] for i in a[:alen][::-1]),
                tuple(self.names[i] for i in b[:blen][::-1]),
            )
            outcome = {
                _HALT: Outcome.ACCEPT,
                _STUCK: Outcome.STUCK,
                _FUEL: Outcome.OUT_OF_FUEL,
                _AMBIG: Outcome.AMBIGUOUS,
            }[code]
            return RunResult(outcome, total, final)


_engines: dict[int, FastEngine] = {}


def engine_for(ct: ClassTable) -> FastEngine:
    eng = _engines.get(id(ct))
    if eng is None or eng.ct is not ct:
        if len(_engines) > 8:
            _engines.clear()
        eng = _engines[id(ct)] = FastEngine(ct)
    return eng
