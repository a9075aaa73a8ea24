"""Progress automata for filter-free child/descendant path queries.

A query p = p1//p2//...//pk (child steps inside each block, optional
leading self step) matches a tree iff some root path's label word matches
the corresponding anchored-blocks-with-gaps pattern.  The progress DFA
tracks, per path, the maximal match progress; from it we build

* a nondeterministic match automaton (guesses the matching path), and
* a deterministic co-match automaton (accepts exactly the non-matching
  trees) whose states are the sets of contexts from which the subtree
  completes the query.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..syntax import Axis, Path, Seq, Step
from .core import UnrankedDTA, UnrankedNTA
from .nfa import Dfa, Nfa, _Builder


class UnsupportedFeature(ValueError):
    pass


def _steps_of(p: Path) -> list[Step]:
    items = p.items if isinstance(p, Seq) else [p]
    steps = []
    for it in items:
        if not isinstance(it, Step):
            raise UnsupportedFeature("disjunction not allowed here")
        if it.filters:
            raise UnsupportedFeature("filters not allowed here")
        if it.test is None:
            raise UnsupportedFeature("wildcard not allowed here")
        if it.axis is Axis.SELF and (len(steps) > 0):
            raise UnsupportedFeature("non-leading self step; normalize first")
        steps.append(it)
    return steps


_OTHER = "__other__"


@dataclass
class ProgressDfa:
    """advance() consumes one label per tree level, root label first."""

    dfa: Dfa
    done_states: frozenset[int]
    known: frozenset[str]

    @property
    def initial(self) -> int:
        return self.dfa.initial

    def advance(self, state: int, label: str) -> int:
        # every label outside the declared alphabet behaves like one fresh
        # symbol: it can fill gaps but never satisfies a node test
        return self.dfa.step(state, label if label in self.known else _OTHER)

    def is_done(self, state: int) -> bool:
        return state in self.done_states

    def states(self) -> list[int]:
        return list(range(self.dfa.n))


def path_progress_dfa(p: Path, alphabet) -> ProgressDfa:
    """Deterministic progress tracker for p over the given alphabet."""
    steps = _steps_of(p)
    full = tuple(alphabet) + (_OTHER,)
    b = _Builder()
    pre_root = b.state()
    done = b.state()
    for a in full:
        b.edge(done, a, done)

    cur = pre_root
    if steps and steps[0].axis is Axis.SELF:
        nxt = done if len(steps) == 1 else b.state()
        b.edge(pre_root, steps[0].test, nxt)
        cur = nxt
        steps = steps[1:]
    else:
        nxt = b.state()
        for a in full:
            b.edge(pre_root, a, nxt)
        cur = nxt

    for i, step in enumerate(steps):
        target = done if i == len(steps) - 1 else b.state()
        if step.axis is Axis.DESCENDANT:
            for a in full:
                b.edge(cur, a, cur)
        b.edge(cur, step.test, target)
        cur = target

    nfa = b.build([pre_root], [done])
    dfa = nfa.determinize(full)
    # The done state is absorbing, so a subset state is "done" iff it
    # contains it.
    done_subsets = frozenset(i for i, ss in enumerate(dfa.subsets) if done in ss)
    return ProgressDfa(dfa, done_subsets, frozenset(alphabet))


_OFF = "off"


def build_match_nta(p: Path, alphabet) -> UnrankedNTA:
    """NTA accepting exactly the trees matched by p (child/descendant only).

    States are path contexts (progress before a node's own label) plus an
    off-path state; the automaton guesses the matching path.
    """
    prog = path_progress_dfa(p, alphabet)
    contexts = _reachable_contexts(prog, alphabet)
    states = tuple(("ctx", s) for s in contexts) + ((_OFF,),)
    off = (_OFF,)
    delta: dict[tuple[object, str], Nfa] = {}
    for a in alphabet:
        delta[(off, a)] = _nfa_star(off)
        for s in contexts:
            nxt = prog.advance(s, a)
            if prog.is_done(nxt):
                delta[(("ctx", s), a)] = _nfa_star(off)
            else:
                delta[(("ctx", s), a)] = _nfa_one_among(("ctx", nxt), off)
    finals = frozenset({("ctx", prog.initial)})
    return UnrankedNTA(states, tuple(alphabet), finals, delta)


def build_comatch_dta(q: Path, alphabet) -> UnrankedDTA:
    """Deterministic automaton accepting exactly the trees NOT matched by q.

    The state of a vertex is the set of contexts from which its subtree
    completes q; the tree matches q iff the root's set contains the initial
    context.
    """
    prog = path_progress_dfa(q, alphabet)
    contexts = _reachable_contexts(prog, alphabet)
    init = frozenset()

    def step(acc, child_state):
        return acc | child_state

    def classify(acc, label):
        bad = set()
        for s in contexts:
            nxt = prog.advance(s, label)
            if prog.is_done(nxt) or nxt in acc:
                bad.add(s)
        return frozenset(bad)

    def final(state):
        return prog.initial not in state

    return UnrankedDTA(tuple(alphabet), init, step, classify, final,
                       description="comatch")


def _reachable_contexts(prog: ProgressDfa, alphabet) -> list[int]:
    seen = {prog.initial}
    stack = [prog.initial]
    while stack:
        s = stack.pop()
        for a in alphabet:
            t = prog.advance(s, a)
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return sorted(seen)


def _nfa_star(sym) -> Nfa:
    b = _Builder()
    s = b.state()
    b.edge(s, sym, s)
    return b.build([s], [s])


def _nfa_one_among(needed, pad) -> Nfa:
    b = _Builder()
    s0, s1 = b.state(), b.state()
    b.edge(s0, pad, s0)
    b.edge(s0, needed, s1)
    b.edge(s1, pad, s1)
    return b.build([s0], [s1])
