"""Tree patterns for disjunction-free expressions.

A pattern is the tree rendering of a conjunctive expression: nodes carry a
node test (or wildcard) and variable constraints, edges are child or
descendant edges, and one node on the spine is the selecting node.  A tree
matches the expression iff there is a homomorphism mapping the pattern root
to the tree root, respecting labels (except at wildcards), sending child
edges to parent/child pairs and descendant edges to proper ancestries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .syntax import (
    Axis, FOr, Filter, LPath, Path, Seq, Step, Union, VarEq, VarNeq, seq,
)
from .trees import XmlTree


@dataclass(eq=False)
class PatternNode:
    id: int
    test: str | None
    constraints: tuple[tuple[str, str, bool], ...] = ()  # (var, attr, is_eq)
    edges: tuple[tuple[Axis, "PatternNode"], ...] = ()


@dataclass(eq=False)
class TreePattern:
    root: PatternNode
    selecting: PatternNode

    def nodes(self) -> list[PatternNode]:
        out, stack = [], [self.root]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(c for _, c in n.edges)
        return out

    def dump(self) -> str:
        lines: list[str] = []

        def rec(n: PatternNode, depth: int, kind: str) -> None:
            test = "*" if n.test is None else n.test
            cs = "".join(
                f"[${v}{'=' if eq else '!='}@{a}]" for v, a, eq in n.constraints)
            mark = " <== selecting" if n is self.selecting else ""
            lines.append("  " * depth + f"{kind}{test}{cs}{mark}")
            for k, c in n.edges:
                rec(c, depth + 1, "//" if k is Axis.DESCENDANT else "/")

        rec(self.root, 0, "")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# DNF


def dnf_disjuncts(p: Path) -> Iterator[Path]:
    """Disjunction-free expressions whose union has the semantics of p.

    Produced lazily; there can be exponentially many.
    """
    if isinstance(p, Union):
        for a in p.alts:
            yield from dnf_disjuncts(a)
    elif isinstance(p, Seq):
        for combo in itertools.product(*(dnf_disjuncts(i) for i in p.items)):
            yield seq(combo)
    else:
        for filters in itertools.product(*(_filter_choices(f) for f in p.filters)):
            yield Step(p.axis, p.test, filters)


def _filter_choices(f: Filter) -> Iterator[Filter]:
    if isinstance(f, LPath):
        for d in dnf_disjuncts(f.path):
            yield LPath(d)
    elif isinstance(f, FOr):
        for a in f.alts:
            yield from _filter_choices(a)
    else:
        yield f


# ---------------------------------------------------------------------------
# Pattern construction


def to_tree_pattern(p: Path) -> TreePattern:
    """Build the pattern of a disjunction-free expression.

    The pattern root stands for the evaluation context (the tree root); a
    leading self step merges into it.
    """
    counter = itertools.count()
    root = PatternNode(next(counter), None)
    selecting = _attach_path(root, p, counter)
    return TreePattern(root, selecting)


def _attach_path(at: PatternNode, p: Path, counter) -> PatternNode:
    if isinstance(p, (Union,)):
        raise ValueError("expression contains disjunction")
    items = p.items if isinstance(p, Seq) else (p,)
    cur = at
    for step in items:
        if isinstance(step, (Union, Seq)):
            raise ValueError("expression contains disjunction")
        if step.axis is Axis.SELF:
            if cur is not at:
                raise ValueError("non-leading self step; normalize first")
            _merge_into_node(cur, step, counter)
            continue
        node = PatternNode(next(counter), step.test)
        cur.edges = cur.edges + ((step.axis, node),)
        _add_filters(node, step.filters, counter)
        cur = node
    return cur


def _merge_into_node(node: PatternNode, step: Step, counter) -> None:
    if step.test is not None:
        if node.test is not None and node.test != step.test:
            raise ValueError("unsatisfiable self merge; normalize first")
        node.test = step.test
    _add_filters(node, step.filters, counter)


def _add_filters(node: PatternNode, filters, counter) -> None:
    for f in filters:
        if isinstance(f, FOr):
            raise ValueError("expression contains disjunction")
        if isinstance(f, LPath):
            path = f.path
            if _leads_self(path):
                first = path if isinstance(path, Step) else path.items[0]
                rest = None if isinstance(path, Step) else seq(list(path.items[1:]))
                _merge_into_node(node, first, counter)
                if rest is not None:
                    _attach_path(node, rest, counter)
            else:
                _attach_path(node, path, counter)
        else:
            node.constraints = node.constraints + (
                (f.var, f.attr, isinstance(f, VarEq)),)


def _leads_self(p: Path) -> bool:
    if isinstance(p, Step):
        return p.axis is Axis.SELF
    if isinstance(p, Seq):
        return _leads_self(p.items[0])
    return False


# ---------------------------------------------------------------------------
# Homomorphism search


def _candidates(pat: TreePattern, t: XmlTree, rho) -> dict | None:
    """Bottom-up candidate images per pattern node; None if root infeasible.

    With an assignment the variable constraints restrict candidates; without
    one they are ignored (the caller solves them separately).
    """
    nodes_by_pos = dict(t.vertices())
    positions = list(nodes_by_pos)
    kids = {pos: [pos + (i,) for i in range(len(nodes_by_pos[pos].children))]
            for pos in positions}
    desc = {pos: [q for q in positions if len(q) > len(pos) and q[: len(pos)] == pos]
            for pos in positions}

    cand: dict[int, set] = {}

    def feasible(n: PatternNode, pos) -> bool:
        node = nodes_by_pos[pos]
        if n.test is not None and node.label != n.test:
            return False
        if rho is not None:
            for var, attr, is_eq in n.constraints:
                if var not in rho:
                    raise KeyError(f"unbound variable ${var}")
                val = node.attr(attr)
                if val is None or ((rho[var] == val) is not is_eq):
                    return False
        for kind, c in n.edges:
            targets = kids[pos] if kind is Axis.CHILD else desc[pos]
            if not any(w in cand[c.id] for w in targets):
                return False
        return True

    def visit(n: PatternNode) -> None:
        for _, c in n.edges:
            visit(c)
        cand[n.id] = {pos for pos in positions if feasible(n, pos)}

    visit(pat.root)
    return {"cand": cand, "kids": kids, "desc": desc}


def find_homomorphism(pat: TreePattern, t: XmlTree, rho=None) -> dict | None:
    """One homomorphism (pattern node id -> vertex position), or None."""
    info = _candidates(pat, t, rho)
    cand, kids, desc = info["cand"], info["kids"], info["desc"]
    if () not in cand[pat.root.id]:
        return None
    hom: dict[int, tuple] = {}

    def build(n: PatternNode, pos) -> None:
        hom[n.id] = pos
        for kind, c in n.edges:
            targets = kids[pos] if kind is Axis.CHILD else desc[pos]
            w = next(w for w in targets if w in cand[c.id])
            build(c, w)

    build(pat.root, ())
    return hom


def pattern_homomorphisms(pat: TreePattern, t: XmlTree) -> Iterator[dict]:
    """All label/structure homomorphisms, ignoring variable constraints."""
    info = _candidates(pat, t, None)
    cand, kids, desc = info["cand"], info["kids"], info["desc"]
    if () not in cand[pat.root.id]:
        return
    order = pat.nodes()

    def extend(i: int, hom: dict) -> Iterator[dict]:
        if i == len(order):
            yield dict(hom)
            return
        n = order[i]
        parent = next((m for m in order if any(c is n for _, c in m.edges)), None)
        if parent is None:
            choices = [()] if () in cand[n.id] else []
        else:
            kind = next(k for k, c in parent.edges if c is n)
            base = hom[parent.id]
            targets = kids[base] if kind is Axis.CHILD else desc[base]
            choices = [w for w in targets if w in cand[n.id]]
        for w in choices:
            hom[n.id] = w
            yield from extend(i + 1, hom)
            del hom[n.id]

    yield from extend(0, {})


# ---------------------------------------------------------------------------
# Measures over the lazy DNF


def filter_bound(p: Path) -> int:
    """Max number of location-path filter occurrences in any DNF disjunct."""
    if isinstance(p, Union):
        return max(filter_bound(a) for a in p.alts)
    if isinstance(p, Seq):
        return sum(filter_bound(i) for i in p.items)
    return sum(_fb_filter(f) for f in p.filters)


def _fb_filter(f: Filter) -> int:
    if isinstance(f, LPath):
        return 1 + filter_bound(f.path)
    if isinstance(f, FOr):
        return max(_fb_filter(a) for a in f.alts)
    return 0


def max_disjunct_nodes(p: Path) -> int:
    """Max number of pattern nodes (non-self steps) in any DNF disjunct."""
    if isinstance(p, Union):
        return max(max_disjunct_nodes(a) for a in p.alts)
    if isinstance(p, Seq):
        return sum(max_disjunct_nodes(i) for i in p.items)
    own = 1 if p.axis in (Axis.CHILD, Axis.DESCENDANT) else 0
    return own + sum(_mdn_filter(f) for f in p.filters)


def _mdn_filter(f: Filter) -> int:
    if isinstance(f, LPath):
        return max_disjunct_nodes(f.path)
    if isinstance(f, FOr):
        return max(_mdn_filter(a) for a in f.alts)
    return 0
