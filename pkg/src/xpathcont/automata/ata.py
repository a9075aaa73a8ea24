"""Alternating automata on ranked trees, for bounded-counterexample search.

States are sub-expressions (plus node tests); transitions are positive
Boolean formulas over (child index, state) atoms, with index 0 meaning the
current node.  On any tree of rank <= k the automaton accepts iff the
expression matches, and a counterexample search for containment only needs
trees with few branching nodes, so saturation over reachable pairs of
evaluation states decides the bounded difference exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..budget import Budget
from ..syntax import (
    Axis, FOr, Filter, LPath, Path, Seq, Step, Union, seq,
)
from ..trees import XmlTree


class UnsupportedFeature(ValueError):
    pass


class RankExceeded(ValueError):
    pass


# Positive Boolean formulas ------------------------------------------------

BTRUE = ("true",)
BFALSE = ("false",)


def batom(j: int, state) -> tuple:
    return ("atom", j, state)


def band(parts) -> tuple:
    parts = [p for p in parts if p != BTRUE]
    if any(p == BFALSE for p in parts):
        return BFALSE
    if not parts:
        return BTRUE
    if len(parts) == 1:
        return parts[0]
    return ("and", tuple(parts))


def bor(parts) -> tuple:
    parts = [p for p in parts if p != BFALSE]
    if any(p == BTRUE for p in parts):
        return BTRUE
    if not parts:
        return BFALSE
    if len(parts) == 1:
        return parts[0]
    return ("or", tuple(parts))


def beval(f: tuple, atom_true) -> bool:
    if f == BTRUE:
        return True
    if f == BFALSE:
        return False
    if f[0] == "atom":
        return atom_true(f[1], f[2])
    if f[0] == "and":
        return all(beval(p, atom_true) for p in f[1])
    return any(beval(p, atom_true) for p in f[1])


@dataclass
class RankedAta:
    rank: int
    alphabet: tuple[str, ...]
    initial: object
    states: tuple
    delta: dict[tuple[object, str, int], tuple]

    def formula(self, state, label: str, m: int) -> tuple:
        return self.delta.get((state, label, m), BFALSE)


# Construction ---------------------------------------------------------------


def wildcard_expand(p: Path, alphabet) -> Path:
    """Replace every wildcard node test with a disjunction over the alphabet."""
    labels = sorted(alphabet)

    def walk(q: Path) -> Path:
        if isinstance(q, Union):
            return Union(tuple(walk(a) for a in q.alts))
        if isinstance(q, Seq):
            return seq([walk(i) for i in q.items])
        filters = tuple(walk_f(f) for f in q.filters)
        if q.test is not None:
            return Step(q.axis, q.test, filters)
        return Union(tuple(Step(q.axis, a, filters) for a in labels))

    def walk_f(f: Filter) -> Filter:
        if isinstance(f, LPath):
            return LPath(walk(f.path))
        if isinstance(f, FOr):
            return FOr(tuple(walk_f(a) for a in f.alts))
        return f

    return walk(p)


def _first_and_rest(p: Path) -> tuple[Step, Path | None]:
    if isinstance(p, Seq):
        head = p.items[0]
        rest = seq(list(p.items[1:]))
        return head, rest
    return p, None


def build_ata(p: Path, alphabet, k: int) -> RankedAta:
    """ATA accepting, on trees of rank <= k, exactly the trees matching p.

    p must be normalized; wildcards are expanded over the alphabet first.
    k must be at least the filter bound of p plus one so that counterexample
    search stays complete.
    """
    from ..patterns import filter_bound

    alphabet = tuple(sorted(alphabet))
    p = wildcard_expand(p, alphabet)
    if k < 1:
        raise ValueError("rank bound must be positive")
    if k < filter_bound(p):
        raise ValueError("rank bound below the filter bound")

    states: dict[object, None] = {}
    delta: dict[tuple[object, str, int], tuple] = {}

    def add_state(x) -> object:
        if x in states:
            return x
        states[x] = None
        build_transitions(x)
        return x

    def unwrap(f: Filter):
        if isinstance(f, LPath):
            return add_state(f.path)
        if isinstance(f, FOr):
            return add_state(f)
        raise UnsupportedFeature("variable comparisons not supported here")

    def build_transitions(x) -> None:
        if isinstance(x, tuple) and x and x[0] == "label":
            for m in range(k + 1):
                delta[(x, x[1], m)] = BTRUE
            return
        if isinstance(x, FOr):
            alts = [unwrap(a) for a in x.alts]
            f = bor([batom(0, a) for a in alts])
            for a in alphabet:
                for m in range(k + 1):
                    delta[(x, a, m)] = f
            return
        if isinstance(x, Union):
            alts = [add_state(a) for a in x.alts]
            f = bor([batom(0, a) for a in alts])
            for a in alphabet:
                for m in range(k + 1):
                    delta[(x, a, m)] = f
            return
        if isinstance(x, Seq) and isinstance(x.items[0], Union):
            # a leading union distributes
            head, rest_items = x.items[0], list(x.items[1:])
            flat = Union(tuple(seq([alt] + rest_items) for alt in head.alts))
            alts = [add_state(a) for a in flat.alts]
            f = bor([batom(0, a) for a in alts])
            for a in alphabet:
                for m in range(k + 1):
                    delta[(x, a, m)] = f
            return
        head, rest = _first_and_rest(x)
        sigma = head.test
        label_state = ("label", sigma)
        add_state(label_state)
        rest_state = add_state(rest) if rest is not None else None
        filter_states = [unwrap(f) for f in head.filters]

        def at(j: int) -> tuple:
            parts = [batom(j, label_state)]
            if rest_state is not None:
                parts.append(batom(j, rest_state))
            parts.extend(batom(j, fs) for fs in filter_states)
            return band(parts)

        if head.axis is Axis.SELF:
            for m in range(k + 1):
                parts = []
                if rest_state is not None:
                    parts.append(batom(0, rest_state))
                parts.extend(batom(0, fs) for fs in filter_states)
                delta[(x, sigma, m)] = band(parts)
        elif head.axis is Axis.CHILD:
            for a in alphabet:
                for m in range(k + 1):
                    delta[(x, a, m)] = bor([at(j) for j in range(1, m + 1)])
        else:
            for a in alphabet:
                for m in range(k + 1):
                    delta[(x, a, m)] = bor(
                        [bor([batom(j, x), at(j)]) for j in range(1, m + 1)])

    initial = add_state(p)
    return RankedAta(k, alphabet, initial, tuple(states), delta)


# Acceptance -----------------------------------------------------------------


def ata_accepts(a: RankedAta, t: XmlTree) -> bool:
    """Least-fixpoint evaluation of the configuration graph [vertex, state]."""
    verts = dict(t.vertices())
    for pos, node in verts.items():
        if len(node.children) > a.rank:
            raise RankExceeded(f"node {pos} has {len(node.children)} children")
    true: set[tuple] = set()
    changed = True
    while changed:
        changed = False
        for pos, node in verts.items():
            m = len(node.children)
            for q in a.states:
                if (pos, q) in true:
                    continue

                def atom_true(j, q2, pos=pos):
                    target = pos if j == 0 else pos + (j - 1,)
                    return (target, q2) in true

                if beval(a.formula(q, node.label, m), atom_true):
                    true.add((pos, q))
                    changed = True
    return ((), a.initial) in true


# Bounded difference search --------------------------------------------------


def _true_set(a: RankedAta, label: str, child_sets: list[frozenset]) -> frozenset:
    """States that hold at a node with the given label and children sets.

    Exact because the transition formulas reference strictly smaller
    configurations except through index 0, which the fixpoint resolves.
    """
    m = len(child_sets)
    cur: set = set()
    changed = True
    while changed:
        changed = False
        for q in a.states:
            if q in cur:
                continue

            def atom_true(j, q2):
                return (q2 in cur) if j == 0 else (q2 in child_sets[j - 1])

            if beval(a.formula(q, label, m), atom_true):
                cur.add(q)
                changed = True
    return frozenset(cur)


def bounded_nonempty_diff(ap: RankedAta, aq: RankedAta, k: int,
                          max_forks: int, budget: Budget | None = None,
                          shape=None) -> XmlTree | None:
    """A tree of rank <= k with <= max_forks branching nodes accepted by ap
    and rejected by aq, or None if no such tree exists.

    Works by saturating the reachable (true-set(ap), true-set(aq)) pairs
    bottom-up; both ATAs come from `build_ata`, whose formulas treat child
    indices symmetrically, so children can be combined as multisets.  An
    optional `shape` component (deterministic, with `leaf/state/accepting`)
    restricts the search to trees of a required shape.
    """
    budget = budget or Budget()
    if set(ap.alphabet) != set(aq.alphabet):
        raise ValueError("automata must share an alphabet")
    alphabet = ap.alphabet

    # key -> (forks, witness); keys carry the optional shape state
    best: dict[tuple, tuple[int, XmlTree]] = {}
    tcache_p: dict = {}
    tcache_q: dict = {}

    def tset(a: RankedAta, cache: dict, label: str, child_sets: tuple) -> frozenset:
        key = (label, child_sets)
        hit = cache.get(key)
        if hit is None:
            hit = _true_set(a, label, list(child_sets))
            cache[key] = hit
        return hit

    def consider(key, forks, witness, out: list) -> None:
        old = best.get(key)
        if old is not None and old[0] <= forks:
            return
        budget.charge_state()
        best[key] = (forks, witness)
        out.append(key)

    def accepting(key) -> bool:
        tp, tq, sh = key
        if ap.initial not in tp or aq.initial in tq:
            return False
        return shape.accepting(sh) if shape is not None else True

    fresh: list[tuple] = []
    for a in alphabet:
        sh = shape.state(a, []) if shape is not None else None
        if shape is not None and sh is None:
            continue
        key = (tset(ap, tcache_p, a, ()), tset(aq, tcache_q, a, ()), sh)
        consider(key, 0, XmlTree(a, (), ()), fresh)
    for key in fresh:
        if accepting(key):
            return best[key][1]

    while fresh:
        frontier, fresh = set(fresh), []
        all_keys = list(best)
        for m in range(1, k + 1):
            for combo in itertools.combinations_with_replacement(all_keys, m):
                if not any(c in frontier for c in combo):
                    continue
                forks = sum(best[c][0] for c in combo) + (1 if m >= 2 else 0)
                if forks > max_forks:
                    continue
                budget.charge_tree()
                kids = tuple(best[c][1] for c in combo)
                child_p = tuple(c[0] for c in combo)
                child_q = tuple(c[1] for c in combo)
                for a in alphabet:
                    sh = shape.state(a, [c[2] for c in combo]) \
                        if shape is not None else None
                    if shape is not None and sh is None:
                        continue
                    key = (tset(ap, tcache_p, a, child_p),
                           tset(aq, tcache_q, a, child_q), sh)
                    consider(key, forks, XmlTree(a, (), kids), fresh)
        for key in fresh:
            if accepting(key):
                return best[key][1]
    return None
