"""Deterministic bottom-up automaton for the full filter/wildcard fragment.

The state at a vertex v is a pair (S, D): S holds the sub-expressions (and
self-closures of sub-expressions) that match with v as context, D those
that match strictly below v.  Membership follows local rules: a leading
child step consults the children's S sets via its self-closure, a leading
descendant step consults S and D, a self step checks the node test and its
filters and continuation within S itself.  Only reachable states ever
materialize; wildcards are matched symbolically, which keeps the automaton
deterministic without alphabet expansion.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..syntax import Axis, FOr, Filter, LPath, Path, Seq, Step, Union, VarEq, VarNeq, seq
from .core import UnrankedDTA


class UnsupportedFeature(ValueError):
    pass


def self_closure(p: Path) -> Path:
    if isinstance(p, Union):
        return Union(tuple(self_closure(a) for a in p.alts))
    if isinstance(p, Seq):
        head = p.items[0]
        if not isinstance(head, Step):
            # A leading union distributes before closing.
            return self_closure(Union(tuple(
                seq([alt] + list(p.items[1:])) for alt in head.alts)))
        return Seq((Step(Axis.SELF, head.test, head.filters),) + p.items[1:])
    return Step(Axis.SELF, p.test, p.filters)


@dataclass
class _Member:
    kind: str                    # "child" | "descendant" | "self" | "union" | "or"
    test: str | None = None      # for self members
    closure: int = -1            # for child/descendant members
    rest: int | None = None      # continuation, for self members
    requires: tuple[int, ...] = ()  # filter members, for self members
    alts: tuple[int, ...] = ()   # for union/or members


class _Universe:
    def __init__(self):
        self.index: dict[object, int] = {}
        self.members: list[_Member] = []

    def add_path(self, p: Path) -> int:
        hit = self.index.get(p)
        if hit is not None:
            return hit
        i = len(self.members)
        self.index[p] = i
        self.members.append(None)  # reserve: recursion may revisit
        if isinstance(p, Union):
            alts = tuple(self.add_path(a) for a in p.alts)
            self.members[i] = _Member("union", alts=alts)
            return i
        if isinstance(p, Seq):
            head = p.items[0]
            if isinstance(head, Union):
                flat = Union(tuple(seq([alt] + list(p.items[1:]))
                                   for alt in head.alts))
                alts = tuple(self.add_path(a) for a in flat.alts)
                self.members[i] = _Member("union", alts=alts)
                return i
            rest = self.add_path(seq(list(p.items[1:])))
        else:
            head, rest = p, None
        if not isinstance(head, Step):
            raise UnsupportedFeature("unexpected path shape")
        requires = tuple(self.add_filter(f) for f in head.filters)
        if head.axis is Axis.SELF:
            self.members[i] = _Member("self", test=head.test, rest=rest,
                                      requires=requires)
            return i
        closed = self.add_path(self_closure(p))
        kind = "child" if head.axis is Axis.CHILD else "descendant"
        self.members[i] = _Member(kind, closure=closed)
        return i

    def add_filter(self, f: Filter) -> int:
        if isinstance(f, LPath):
            return self.add_path(f.path)
        if isinstance(f, FOr):
            hit = self.index.get(f)
            if hit is not None:
                return hit
            i = len(self.members)
            self.index[f] = i
            self.members.append(None)
            alts = tuple(self.add_filter(a) for a in f.alts)
            self.members[i] = _Member("or", alts=alts)
            return i
        raise UnsupportedFeature("variable comparisons not supported here")


def build_subexpr_dta(p: Path, alphabet) -> UnrankedDTA:
    """Deterministic automaton accepting exactly the trees matching p."""
    uni = _Universe()
    top = uni.add_path(p)
    members = uni.members
    # leading child/descendant members depend only on the children, the
    # rest need a fixpoint within the node
    flat = [(1 << i, m) for i, m in enumerate(members)
            if m.kind in ("child", "descendant")]
    looped = [(1 << i, m) for i, m in enumerate(members)
              if m.kind not in ("child", "descendant")]

    cache: dict[tuple[int, int, str], tuple[int, int]] = {}

    def classify(ws, label):
        key = (ws[0], ws[1], label)
        hit = cache.get(key)
        if hit is not None:
            return hit
        any_s, any_sd = ws
        s_mask = 0
        for bit, m in flat:
            source = any_s if m.kind == "child" else any_sd
            if source & (1 << m.closure):
                s_mask |= bit
        changed = True
        while changed:
            changed = False
            for bit, m in looped:
                if s_mask & bit:
                    continue
                if m.kind == "self":
                    ok = (m.test is None or m.test == label) \
                        and (m.rest is None or s_mask & (1 << m.rest)) \
                        and all(s_mask & (1 << r) for r in m.requires)
                else:
                    ok = any(s_mask & (1 << a) for a in m.alts)
                if ok:
                    s_mask |= bit
                    changed = True
        state = (s_mask, any_sd)
        cache[key] = state
        return state

    def step(ws, child_state):
        cs, cd = child_state
        return (ws[0] | cs, ws[1] | cs | cd)

    def final(state):
        return bool(state[0] & (1 << top))

    return UnrankedDTA(tuple(alphabet), (0, 0), step, classify, final,
                       description="subexpr")
