"""XML-trees: ordered labeled trees with integer-valued attributes.

The term syntax is ``label[@attr=int,...](child, child, ...)``, e.g.
``a(b,c(d))`` or ``b[@a=3]``.  Attributes serialize in sorted order;
children keep their order (document order is part of the model even though
no query operator observes it).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, NamedTuple

from .syntax import (
    Axis, FOr, Filter, LPath, Path, Seq, Step, Union, VarEq, VarNeq,
)


class TreeSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


@dataclass(frozen=True)
class XmlTree:
    label: str
    attrs: tuple[tuple[str, int], ...] = ()
    children: tuple[XmlTree, ...] = ()

    def attr(self, name: str) -> int | None:
        for k, v in self.attrs:
            if k == name:
                return v
        return None

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    def vertices(self) -> Iterator[tuple[tuple[int, ...], "XmlTree"]]:
        """Yields (tree-domain position, node) pairs; the root is ()."""
        stack = [((), self)]
        while stack:
            pos, node = stack.pop()
            yield pos, node
            for i, c in reversed(list(enumerate(node.children))):
                stack.append((pos + (i,), c))

    def node_at(self, pos: tuple[int, ...]) -> "XmlTree":
        node = self
        for i in pos:
            node = node.children[i]
        return node

    def all_values(self) -> set[int]:
        vals: set[int] = set()
        for _, node in self.vertices():
            vals.update(v for _, v in node.attrs)
        return vals

    def __str__(self) -> str:
        return serialize_tree(self)


def tree(label: str, attrs: Mapping[str, int] | None = None,
         children=()) -> XmlTree:
    pairs = tuple(sorted((attrs or {}).items()))
    return XmlTree(label, pairs, tuple(children))


# ---------------------------------------------------------------------------
# Term syntax


_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_#$!")


def parse_tree(text: str) -> XmlTree:
    t, i = _parse_node(text, 0)
    i = _skip_ws(text, i)
    if i != len(text):
        raise TreeSyntaxError("trailing input", i)
    return t


def _skip_ws(s: str, i: int) -> int:
    while i < len(s) and s[i].isspace():
        i += 1
    return i


def _parse_name(s: str, i: int) -> tuple[str, int]:
    i = _skip_ws(s, i)
    j = i
    while j < len(s) and s[j] in _NAME_CHARS:
        j += 1
    if j == i:
        raise TreeSyntaxError("name expected", i)
    return s[i:j], j


def _parse_node(s: str, i: int) -> tuple[XmlTree, int]:
    label, i = _parse_name(s, i)
    attrs: dict[str, int] = {}
    i = _skip_ws(s, i)
    if i < len(s) and s[i] == "[":
        i += 1
        while True:
            i = _skip_ws(s, i)
            if i >= len(s) or s[i] != "@":
                raise TreeSyntaxError("'@' expected", i)
            name, i = _parse_name(s, i + 1)
            i = _skip_ws(s, i)
            if i >= len(s) or s[i] != "=":
                raise TreeSyntaxError("'=' expected", i)
            i = _skip_ws(s, i + 1)
            j = i
            if j < len(s) and s[j] == "-":
                j += 1
            while j < len(s) and s[j].isdigit():
                j += 1
            if j == i or s[i:j] == "-":
                raise TreeSyntaxError("integer expected", i)
            if name in attrs:
                raise TreeSyntaxError(f"duplicate attribute {name!r}", i)
            attrs[name] = int(s[i:j])
            i = _skip_ws(s, j)
            if i < len(s) and s[i] == ",":
                i += 1
                continue
            if i < len(s) and s[i] == "]":
                i += 1
                break
            raise TreeSyntaxError("',' or ']' expected", i)
    children: list[XmlTree] = []
    i = _skip_ws(s, i)
    if i < len(s) and s[i] == "(":
        i += 1
        while True:
            child, i = _parse_node(s, i)
            children.append(child)
            i = _skip_ws(s, i)
            if i < len(s) and s[i] == ",":
                i += 1
                continue
            if i < len(s) and s[i] == ")":
                i += 1
                break
            raise TreeSyntaxError("',' or ')' expected", i)
    return tree(label, attrs, children), i


def serialize_tree(t: XmlTree) -> str:
    out = t.label
    if t.attrs:
        out += "[" + ",".join(f"@{k}={v}" for k, v in t.attrs) + "]"
    if t.children:
        out += "(" + ",".join(serialize_tree(c) for c in t.children) + ")"
    return out


# ---------------------------------------------------------------------------
# Evaluation (XPath semantics, optionally relative to an assignment)


Assignment = Mapping[str, int]


class EvalResult(NamedTuple):
    selected: frozenset
    matched: bool


class _Evaluator:
    """Computes the binary relation of each subexpression bottom-up.

    Polynomial in |t|*|p|: every distinct subexpression node is evaluated
    once over the vertex set.
    """

    def __init__(self, t: XmlTree, rho: Assignment | None):
        self.t = t
        self.rho = rho
        self.nodes = dict(t.vertices())
        self.verts = list(self.nodes)
        self.kids = {pos: [pos + (i,) for i in range(len(self.nodes[pos].children))]
                     for pos in self.verts}
        self.desc: dict[tuple, list] = {}
        for pos in self.verts:
            self.desc[pos] = [q for q in self.verts
                              if len(q) > len(pos) and q[: len(pos)] == pos]
        self.rel_memo: dict[Path, frozenset] = {}
        self.row_memo: dict[Path, frozenset] = {}

    def relation(self, p: Path) -> frozenset:
        hit = self.rel_memo.get(p)
        if hit is not None:
            return hit
        if isinstance(p, Union):
            pairs = frozenset().union(*(self.relation(a) for a in p.alts))
        elif isinstance(p, Seq):
            pairs = self.relation(p.items[0])
            for it in p.items[1:]:
                right = self.relation(it)
                by_src: dict = {}
                for u, v in right:
                    by_src.setdefault(u, []).append(v)
                pairs = frozenset((u, w) for u, v in pairs
                                  for w in by_src.get(v, ()))
        else:
            pairs = self._step_relation(p)
        self.rel_memo[p] = pairs
        return pairs

    def _step_relation(self, p: Step) -> frozenset:
        out = []
        for u in self.verts:
            if p.axis is Axis.CHILD:
                targets = self.kids[u]
            elif p.axis is Axis.DESCENDANT:
                targets = self.desc[u]
            else:
                targets = [u]
            for v in targets:
                node = self.nodes[v]
                if p.test is not None and node.label != p.test:
                    continue
                if all(self._holds(v, f) for f in p.filters):
                    out.append((u, v))
        return frozenset(out)

    def _match_rows(self, p: Path) -> frozenset:
        hit = self.row_memo.get(p)
        if hit is None:
            hit = frozenset(u for u, _ in self.relation(p))
            self.row_memo[p] = hit
        return hit

    def _holds(self, v: tuple, f: Filter) -> bool:
        if isinstance(f, LPath):
            return v in self._match_rows(f.path)
        if isinstance(f, FOr):
            return any(self._holds(v, a) for a in f.alts)
        if self.rho is None or f.var not in self.rho:
            raise KeyError(f"unbound variable ${f.var}")
        val = self.nodes[v].attr(f.attr)
        if val is None:
            # Comparisons against a missing attribute never hold.
            return False
        return (self.rho[f.var] == val) if isinstance(f, VarEq) \
            else (self.rho[f.var] != val)


def evaluate(p: Path, t: XmlTree, rho: Assignment | None = None) -> EvalResult:
    """Vertices v with (root, v) in the relation of p, plus the match flag."""
    ev = _Evaluator(t, rho)
    selected = frozenset(v for u, v in ev.relation(p) if u == ())
    return EvalResult(selected, bool(selected))


def matches(p: Path, t: XmlTree, rho: Assignment | None = None) -> bool:
    return evaluate(p, t, rho).matched


def evaluate_existential(p: Path, t: XmlTree):
    """True plus a witness assignment iff some assignment makes p match t.

    The search walks pattern homomorphisms of each disjunct and solves the
    induced constraints: equalities pin a variable to an attribute value,
    inequalities only exclude values, so unpinned variables always get a
    fresh value.
    """
    from .patterns import dnf_disjuncts, to_tree_pattern, pattern_homomorphisms

    fresh_base = max(t.all_values(), default=0) + 1
    for disjunct in dnf_disjuncts(p):
        pat = to_tree_pattern(disjunct)
        for hom in pattern_homomorphisms(pat, t):
            rho = _solve_constraints(pat, hom, t, p, fresh_base)
            if rho is not None:
                return True, rho
    return False, None


def _solve_constraints(pat, hom, t: XmlTree, whole: Path, fresh_base: int):
    pinned: dict[str, int] = {}
    excluded: dict[str, set[int]] = {}
    for node in pat.nodes():
        v = hom[node.id]
        for var, attr, is_eq in node.constraints:
            val = t.node_at(v).attr(attr)
            if val is None:
                return None
            if is_eq:
                if pinned.setdefault(var, val) != val:
                    return None
            else:
                excluded.setdefault(var, set()).add(val)
    for var, val in pinned.items():
        if val in excluded.get(var, ()):
            return None
    rho = dict(pinned)
    nxt = fresh_base
    from .fragments import detect_features

    for var in sorted(detect_features(whole).variables):
        if var not in rho:
            while nxt in excluded.get(var, ()):
                nxt += 1
            rho[var] = nxt
            nxt += 1
    return rho
