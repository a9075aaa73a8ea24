"""NFAs and DFAs over arbitrary hashable symbol alphabets.

Transition languages of unranked tree automata are NFAs whose "symbols"
are tree-automaton states, so nothing here assumes string alphabets.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from ..regexes import (
    RAlt, RCat, REmpty, REps, ROpt, RPlus, RStar, RSym, Regex,
)


@dataclass
class Nfa:
    """Epsilon-NFA; states are 0..n-1, an edge symbol of None is epsilon."""

    n: int
    initial: frozenset[int]
    finals: frozenset[int]
    edges: dict[int, tuple[tuple[object, int], ...]]

    def eps_closure(self, states) -> frozenset[int]:
        seen = set(states)
        stack = list(states)
        while stack:
            s = stack.pop()
            for sym, t in self.edges.get(s, ()):
                if sym is None and t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    def step(self, states: frozenset[int], symbol) -> frozenset[int]:
        nxt = {t for s in states for sym, t in self.edges.get(s, ())
               if sym is not None and sym == symbol}
        return self.eps_closure(nxt)

    def start(self) -> frozenset[int]:
        return self.eps_closure(self.initial)

    def accepts(self, word) -> bool:
        cur = self.start()
        for sym in word:
            cur = self.step(cur, sym)
            if not cur:
                return False
        return bool(cur & self.finals)

    def symbols(self) -> frozenset:
        return frozenset(sym for es in self.edges.values()
                         for sym, _ in es if sym is not None)

    def shortest_word(self, allowed=None):
        """A shortest accepted word over the allowed symbols, or None."""
        syms = self.symbols() if allowed is None else \
            [s for s in self.symbols() if s in allowed]
        start = self.start()
        if start & self.finals:
            return []
        seen = {start}
        queue = deque([(start, [])])
        while queue:
            cur, word = queue.popleft()
            for sym in syms:
                nxt = self.step(cur, sym)
                if not nxt or nxt in seen:
                    continue
                if nxt & self.finals:
                    return word + [sym]
                seen.add(nxt)
                queue.append((nxt, word + [sym]))
        return None

    def words_upto(self, max_len: int, charge=None):
        """All accepted words of length <= max_len, shortest first.

        The word space is exponential; `charge` is called once per visited
        word so callers can enforce budgets.
        """
        queue = deque([(self.start(), [])])
        while queue:
            cur, word = queue.popleft()
            if charge is not None:
                charge()
            if cur & self.finals:
                yield list(word)
            if len(word) == max_len:
                continue
            for sym in sorted(self.symbols(), key=repr):
                nxt = self.step(cur, sym)
                if nxt:
                    queue.append((nxt, word + [sym]))

    def determinize(self, alphabet) -> "Dfa":
        """Complete subset-construction DFA over the given alphabet."""
        alphabet = tuple(alphabet)
        start = self.start()
        index = {start: 0}
        order = [start]
        trans: dict[tuple[int, object], int] = {}
        i = 0
        while i < len(order):
            cur = order[i]
            for sym in alphabet:
                nxt = self.step(cur, sym)
                j = index.get(nxt)
                if j is None:
                    j = len(order)
                    index[nxt] = j
                    order.append(nxt)
                trans[(i, sym)] = j
            i += 1
        finals = frozenset(i for i, ss in enumerate(order) if ss & self.finals)
        return Dfa(len(order), 0, finals, trans, alphabet, tuple(order))


@dataclass
class Dfa:
    """Complete DFA produced by subset construction."""

    n: int
    initial: int
    finals: frozenset[int]
    trans: dict[tuple[int, object], int]
    alphabet: tuple
    subsets: tuple = ()  # underlying NFA state sets, parallel to 0..n-1

    def step(self, state: int, symbol) -> int:
        return self.trans[(state, symbol)]

    def accepts(self, word) -> bool:
        cur = self.initial
        for sym in word:
            cur = self.step(cur, sym)
        return cur in self.finals


class _Builder:
    def __init__(self):
        self.count = 0
        self.edges: dict[int, list] = {}

    def state(self) -> int:
        s = self.count
        self.count += 1
        return s

    def edge(self, a: int, sym, b: int) -> None:
        self.edges.setdefault(a, []).append((sym, b))

    def build(self, initial, finals) -> Nfa:
        edges = {k: tuple(v) for k, v in self.edges.items()}
        return Nfa(self.count, frozenset(initial), frozenset(finals), edges)


def regex_to_nfa(r: Regex) -> Nfa:
    """Thompson construction."""
    b = _Builder()
    start, end = _compile(r, b)
    return b.build([start], [end])


def _compile(r: Regex, b: _Builder) -> tuple[int, int]:
    if isinstance(r, RSym):
        s, e = b.state(), b.state()
        b.edge(s, r.name, e)
        return s, e
    if isinstance(r, REps):
        s = b.state()
        return s, s
    if isinstance(r, REmpty):
        return b.state(), b.state()
    if isinstance(r, RCat):
        first, last = None, None
        for part in r.parts:
            s, e = _compile(part, b)
            if first is None:
                first = s
            else:
                b.edge(last, None, s)
            last = e
        return first, last
    if isinstance(r, RAlt):
        s, e = b.state(), b.state()
        for alt in r.alts:
            s2, e2 = _compile(alt, b)
            b.edge(s, None, s2)
            b.edge(e2, None, e)
        return s, e
    s, e = b.state(), b.state()
    s2, e2 = _compile(r.inner, b)
    b.edge(s, None, s2)
    b.edge(e2, None, e)
    if isinstance(r, RStar):
        b.edge(s, None, e)
        b.edge(e2, None, s2)
    elif isinstance(r, RPlus):
        b.edge(e2, None, s2)
    else:  # ROpt
        b.edge(s, None, e)
    return s, e


def nfa_word(word) -> Nfa:
    """NFA accepting exactly the given word."""
    b = _Builder()
    cur = b.state()
    start = cur
    for sym in word:
        nxt = b.state()
        b.edge(cur, sym, nxt)
        cur = nxt
    return b.build([start], [cur])


def nfa_padded(middle, pad_symbol) -> Nfa:
    """NFA for pad* m1 pad* m2 ... pad*, for the symbols in `middle`."""
    b = _Builder()
    cur = b.state()
    start = cur
    b.edge(cur, pad_symbol, cur)
    for sym in middle:
        nxt = b.state()
        b.edge(cur, sym, nxt)
        b.edge(nxt, pad_symbol, nxt)
        cur = nxt
    return b.build([start], [cur])
