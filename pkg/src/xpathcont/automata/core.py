"""Unranked tree automata: NTAs, deterministic classifiers, products.

Every automaton here exposes the same bottom-up word interface:

    alphabet                     -- label alphabet (iterable of str)
    word_init()                  -- state for reading a children sequence
    word_step(ws, child_state)   -- advance over one child's tree state
    node_states(ws, label)       -- tree states assignable to a node whose
                                    children produced ws (one element for
                                    deterministic automata)
    is_final(state)              -- acceptance at the root

Nondeterminism lives entirely in node_states: the word side is made
deterministic by subset simulation, so one generic least-fixpoint search
(`find_accepted_tree`) covers emptiness, products and complements, and
reconstructs witness trees from backpointers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable

from ..budget import Budget, ResourceExceeded
from ..trees import XmlTree
from .nfa import Nfa

if TYPE_CHECKING:  # avoids a cycle: dtd.py uses the NFA machinery
    from ..dtd import Dtd


@dataclass
class UnrankedNTA:
    """Explicit NTA: per (state, label) transition languages given as NFAs.

    A run labels every vertex with a state such that the children's state
    word lies in the vertex's (state, label) language; it accepts when the
    root state is final.
    """

    states: tuple
    alphabet: tuple[str, ...]
    finals: frozenset
    delta: dict[tuple[object, str], Nfa]

    def __post_init__(self):
        declared = set(self.states)
        for (q, a) in self.delta:
            if q not in declared or a not in self.alphabet:
                raise ValueError(f"transition ({q!r}, {a!r}) references "
                                 "undeclared state or symbol")
        self._keys = sorted(self.delta, key=repr)

    def word_init(self):
        return tuple(self.delta[k].start() for k in self._keys)

    def word_step(self, ws, child_state):
        return tuple(self.delta[k].step(part, child_state)
                     for k, part in zip(self._keys, ws))

    def node_states(self, ws, label):
        out = []
        for k, part in zip(self._keys, ws):
            q, a = k
            if a == label and part & self.delta[k].finals:
                out.append(q)
        return out

    def is_final(self, q) -> bool:
        return q in self.finals

    def word_dead(self, ws) -> bool:
        return not any(ws)


@dataclass
class UnrankedDTA:
    """Bottom-up deterministic automaton given by per-node classifiers.

    Determinism is by construction: `classify` maps every (children word,
    label) pair to exactly one state, so transition languages of distinct
    states are disjoint and every tree has exactly one run.

    `useless`, when set, marks states that no accepted tree carries at any
    vertex; the emptiness search prunes them.  Complementation clears the
    flag (the complement accepts through exactly those states).  `dead`
    marks word states that can only ever classify to useless states.
    """

    alphabet: tuple[str, ...]
    init: object
    step: Callable
    classify: Callable
    final: Callable
    description: str = "dta"
    useless: Callable | None = None
    dead: Callable | None = None

    def word_init(self):
        return self.init

    def word_step(self, ws, child_state):
        return self.step(ws, child_state)

    def node_states(self, ws, label):
        return (self.classify(ws, label),)

    def is_final(self, q) -> bool:
        return self.final(q)

    def prunable(self, q) -> bool:
        return self.useless is not None and self.useless(q)

    def word_dead(self, ws) -> bool:
        return self.dead is not None and self.dead(ws)

    def run_state(self, t: XmlTree):
        """The unique state at the root of t."""
        ws = self.init
        for c in t.children:
            ws = self.step(ws, self.run_state(c))
        return self.classify(ws, t.label)

    def accepts(self, t: XmlTree) -> bool:
        return self.final(self.run_state(t))


def dta_complement(a: UnrankedDTA) -> UnrankedDTA:
    """Accepts exactly the trees (over a's alphabet) that a rejects."""
    return UnrankedDTA(a.alphabet, a.init, a.step, a.classify,
                       lambda q: not a.final(q),
                       description=f"not({a.description})")


@dataclass
class ProductAcceptor:
    """Intersection of automata over the common alphabet."""

    parts: tuple

    def __post_init__(self):
        common = set(self.parts[0].alphabet)
        for p in self.parts[1:]:
            common &= set(p.alphabet)
        self.alphabet = tuple(sorted(common))

    def word_init(self):
        return tuple(p.word_init() for p in self.parts)

    def word_step(self, ws, child_state):
        out = []
        for p, w, q in zip(self.parts, ws, child_state):
            w2 = p.word_step(w, q)
            if w2 is None:
                return None
            out.append(w2)
        return tuple(out)

    def node_states(self, ws, label):
        choices = [list(p.node_states(w, label))
                   for p, w in zip(self.parts, ws)]
        return itertools.product(*choices)

    def is_final(self, q) -> bool:
        return all(p.is_final(x) for p, x in zip(self.parts, q))

    def prunable(self, q) -> bool:
        return any(getattr(p, "prunable", _never)(x)
                   for p, x in zip(self.parts, q))

    def word_dead(self, ws) -> bool:
        return any(getattr(p, "word_dead", _never)(w)
                   for p, w in zip(self.parts, ws))


def _never(_q) -> bool:
    return False


def product(*parts) -> ProductAcceptor:
    return ProductAcceptor(tuple(parts))


def find_accepted_tree(acc, budget: Budget | None = None) -> XmlTree | None:
    """Some tree accepted by `acc`, or None if its language is empty.

    Least fixpoint over inhabited tree states and reachable word states,
    processed incrementally: every (word state, inhabited state) pair is
    expanded exactly once, and each newly inhabited state records one
    witness tree built from the word-state backpointers.
    """
    budget = budget or Budget()
    alphabet = tuple(acc.alphabet)
    prunable = getattr(acc, "prunable", _never)
    word_dead = getattr(acc, "word_dead", _never)
    init = acc.word_init()
    inhabited: dict = {}
    seen = {init: ()}  # word state -> witness children
    new_ws = [init]
    new_states: list = []

    def consider_ws(ws, kids) -> None:
        if ws is not None and ws not in seen and not word_dead(ws):
            budget.charge_state()
            seen[ws] = kids
            new_ws.append(ws)

    while new_ws or new_states:
        if new_ws:
            ws = new_ws.pop()
            kids = seen[ws]
            for a in alphabet:
                for q in acc.node_states(ws, a):
                    if q not in inhabited and not prunable(q):
                        budget.charge_state()
                        inhabited[q] = XmlTree(a, (), kids)
                        if acc.is_final(q):
                            return inhabited[q]
                        new_states.append(q)
            for q, wit in list(inhabited.items()):
                consider_ws(acc.word_step(ws, q), kids + (wit,))
        else:
            q = new_states.pop()
            wit = inhabited[q]
            for ws in list(seen):
                consider_ws(acc.word_step(ws, q), seen[ws] + (wit,))
    return None


def nta_is_empty(a, budget: Budget | None = None) -> bool:
    """True iff the automaton accepts no tree at all."""
    return find_accepted_tree(a, budget) is None


def dta_containment(a: UnrankedDTA, b: UnrankedDTA,
                    budget: Budget | None = None) -> tuple[bool, XmlTree | None]:
    """Whether L(a) is a subset of L(b); a separating tree otherwise."""
    wit = find_accepted_tree(product(a, dta_complement(b)), budget)
    return wit is None, wit


# ---------------------------------------------------------------------------
# DTD compilation


_POISON = "__poison__"


def dtd_to_dta(d: Dtd, extra_symbols: Iterable[str] = ()) -> UnrankedDTA:
    """Deterministic automaton with L(automaton) = L(d).

    One state per DTD symbol plus a reject state (None); a vertex's state
    is its own label when its child-state word satisfies the label's rule.
    `extra_symbols` widens the alphabet; trees using them are rejected,
    which keeps products over larger alphabets meaningful.
    """
    from .nfa import regex_to_nfa

    symbols = sorted(d.symbols)
    symbol_set = frozenset(symbols)
    index = {sym: i for i, sym in enumerate(symbols)}
    alphabet = tuple(sorted(symbol_set | set(extra_symbols)))
    dfas = {sym: regex_to_nfa(d.rule(sym)).determinize(symbols)
            for sym in symbols}
    trans = [dfas[sym].trans for sym in symbols]
    finals = [dfas[sym].finals for sym in symbols]
    init = tuple(dfas[sym].initial for sym in symbols)

    def step(ws, child_state):
        if ws is _POISON or child_state not in symbol_set:
            return _POISON
        return tuple(tr[(part, child_state)] for tr, part in zip(trans, ws))

    def classify(ws, label):
        if ws is _POISON or label not in symbol_set:
            return None
        i = index[label]
        return label if ws[i] in finals[i] else None

    def final(q):
        return q == d.start

    # No valid tree carries the reject state at any vertex, so emptiness
    # searches may prune it (the complement clears this flag).
    return UnrankedDTA(alphabet, init, step, classify, final,
                       description=f"dtd({d.start})",
                       useless=lambda q: q is None,
                       dead=lambda ws: ws is _POISON)
