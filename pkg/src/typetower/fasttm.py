"""Compiled runner for extended Turing machines (same results as ``tm_run``)."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

from .turing import ExtendedTM, TmConfig, TmRunResult

_DONE, _GROW = 0, 1
_DIR = {"L": 0, "S": 1, "R": 2}


def available() -> bool:
    return njit is not None


if njit is not None:

    @njit(cache=True)
    def _kernel(state, cur, left, nleft, right, nright, fuel, ends, to, dirs, wstart, wlen, wdata, nletters):
        steps = 0
        while steps < fuel and not ends[state]:
            k = state * nletters + cur
            n = wlen[k]
            s = wstart[k]
            d = dirs[k]
            if d == 1:
                cur = wdata[s]
            elif d == 2:
                if nleft + n > left.shape[0]:
                    return _GROW, steps, state, cur, nleft, nright
                for t in range(n):
                    left[nleft] = wdata[s + t]
                    nleft += 1
                if nright > 0:
                    nright -= 1
                    cur = right[nright]
                else:
                    cur = 0
            else:
                if nright + n > right.shape[0]:
                    return _GROW, steps, state, cur, nleft, nright
                for t in range(n - 1, -1, -1):
                    right[nright] = wdata[s + t]
                    nright += 1
                if nleft > 0:
                    nleft -= 1
                    cur = left[nleft]
                else:
                    cur = 0
            state = to[k]
            steps += 1
        return _DONE, steps, state, cur, nleft, nright


class FastTM:
    def __init__(self, m: ExtendedTM):
        self.m = m
        self.states = list(m.states)
        self.sid = {q: i for i, q in enumerate(self.states)}
        self.letters = [None, *m.alphabet]
        self.lid = {a: i for i, a in enumerate(self.letters)}
        nl = len(self.letters)
        size = len(self.states) * nl
        self.to = np.zeros(size, dtype=np.int64)
        self.dirs = np.zeros(size, dtype=np.int64)
        self.wstart = np.zeros(size, dtype=np.int64)
        self.wlen = np.zeros(size, dtype=np.int64)
        data: list[int] = []
        for (q, a), t in m.delta.items():
            k = self.sid[q] * nl + self.lid[a]
            self.to[k] = self.sid[t.to]
            self.dirs[k] = _DIR[t.dir]
            self.wstart[k] = len(data)
            self.wlen[k] = len(t.write)
            data.extend(self.lid[x] for x in t.write)
        self.wdata = np.array(data or [0], dtype=np.int64)

    def run(self, word: Sequence[str], fuel: int, stop: Iterable[str] = ()) -> TmRunResult:
        nl = len(self.letters)
        ends = np.zeros(len(self.states), dtype=np.bool_)
        ends[self.sid[self.m.halt]] = True
        for q in stop:
            if q in self.sid:
                ends[self.sid[q]] = True
        cap = 2 * len(word) + 1024
        left = np.zeros(cap, dtype=np.int64)
        right = np.zeros(cap, dtype=np.int64)
        for i, a in enumerate(reversed(word)):
            right[i] = self.lid[a]
        nleft, nright = 0, len(word)
        state, cur, total = self.sid[self.m.initial], 0, 0
        while True:
            code, steps, state, cur, nleft, nright = _kernel(
                state, cur, left, nleft, right, nright, fuel - total, ends,
                self.to, self.dirs, self.wstart, self.wlen, self.wdata, nl,
            )
            total += steps
            if code == _GROW:
                left = np.concatenate([left, np.zeros(left.shape[0], dtype=np.int64)])
                right = np.concatenate([right, np.zeros(right.shape[0], dtype=np.int64)])
                continue
            break
        name = self.letters
        final = TmConfig(
            self.states[state],
            tuple(name[i] for i in left[:nleft]),
            name[cur],
            tuple(name[i] for i in right[:nright][::-1]),
        )
        return TmRunResult(final.state == self.m.halt, total, final)


_runners: dict[int, FastTM] = {}


def runner_for(m: ExtendedTM) -> FastTM:
    r = _runners.get(id(m))
    if r is None or r.m is not m:
        if len(_runners) > 8:
            _runners.clear()
        r = _runners[id(m)] = FastTM(m)
    return r
