"""Containment engines for expressions with variable comparisons."""

from __future__ import annotations

import itertools

from ..automata import bounded_nonempty_diff, build_ata, wildcard_expand
from ..budget import Budget, Stats
from ..fragments import detect_features, labels_of
from ..patterns import dnf_disjuncts, filter_bound, to_tree_pattern
from ..syntax import (
    Axis, FOr, Filter, LPath, Path, Seq, Step, Union, VarEq, VarNeq, seq,
    union,
)
from ..trees import XmlTree, evaluate, evaluate_existential, tree
from .base import (
    CONTAINED, NOT_CONTAINED, EngineError, Instance, Verdict,
    checked_witness, minimize_witness,
)
from .nodtd import fresh_label


def set_partitions(items):
    """All partitions of a list into nonempty blocks."""
    items = list(items)
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]
        yield [[head]] + part


# ---------------------------------------------------------------------------
# XPath semantics (externally bound variables)


def substitute_vars(p: Path, subst: dict[str, str]) -> Path:
    def walk(x: Path) -> Path:
        if isinstance(x, Union):
            return Union(tuple(walk(a) for a in x.alts))
        if isinstance(x, Seq):
            return Seq(tuple(walk(i) for i in x.items))
        return Step(x.axis, x.test, tuple(walk_f(f) for f in x.filters))

    def walk_f(f: Filter) -> Filter:
        if isinstance(f, LPath):
            return LPath(walk(f.path))
        if isinstance(f, FOr):
            return FOr(tuple(walk_f(a) for a in f.alts))
        cls = type(f)
        return cls(subst.get(f.var, f.var), f.attr)

    return walk(p)


def encode_vars(p: Path, reps: list[str]) -> Path:
    """Rewrite variable comparisons into label navigation over the encoding
    of (tree, assignment) pairs: an attribute a of v becomes an a-labeled
    child of v whose own child names the variable holding the value (or
    'none')."""

    def walk(x: Path) -> Path:
        if isinstance(x, Union):
            return Union(tuple(walk(a) for a in x.alts))
        if isinstance(x, Seq):
            return Seq(tuple(walk(i) for i in x.items))
        return Step(x.axis, x.test, tuple(walk_f(f) for f in x.filters))

    def walk_f(f: Filter) -> Filter:
        if isinstance(f, LPath):
            return LPath(walk(f.path))
        if isinstance(f, FOr):
            return FOr(tuple(walk_f(a) for a in f.alts))
        if isinstance(f, VarEq):
            return LPath(seq([Step(Axis.CHILD, f.attr),
                              Step(Axis.CHILD, f.var)]))
        others = [Step(Axis.CHILD, r) for r in reps if r != f.var]
        others.append(Step(Axis.CHILD, "none"))
        return LPath(seq([Step(Axis.CHILD, f.attr), union(others)]))

    return walk(p)


class EncodingShape:
    """Shape of encoded (tree, assignment) pairs: element nodes may carry
    element children plus at most one child per attribute name, every
    attribute node has exactly one value child, value nodes are leaves."""

    def __init__(self, elements, attributes, values):
        self.elements = frozenset(elements)
        self.attributes = frozenset(attributes)
        self.values = frozenset(values)

    def state(self, label, child_states):
        if label in self.values:
            return "value" if not child_states else None
        if label in self.attributes:
            if len(child_states) == 1 and child_states[0] == "value":
                return ("attr", label)
            return None
        if label in self.elements:
            names = [s[1] for s in child_states if isinstance(s, tuple)]
            if len(names) != len(set(names)):
                return None
            if all(s == "elem" or isinstance(s, tuple) for s in child_states):
                return "elem"
            return None
        return None

    def accepting(self, state) -> bool:
        return state == "elem"


def contain_xvars(p: Path, q: Path, budget: Budget | None = None) -> Verdict:
    """Equality-type reduction to variable-free containment.

    For each equality type the variables collapse to representatives and
    the comparison-free encodings are compared over shape-restricted
    bounded trees; containment holds iff every equality type passes.
    """
    budget = budget or Budget()
    stats = Stats()
    feats = detect_features(p).union(detect_features(q))
    elem = labels_of(p) | labels_of(q)
    attrs = sorted(feats.attributes)
    variables = sorted(feats.variables)
    if not variables:
        raise EngineError("no variables; use a plain engine")
    reserved = set(attrs) | set(variables) | {"none"}
    if elem & reserved:
        raise EngineError(
            "element labels must be disjoint from attribute and variable "
            f"names here; clashes: {sorted(elem & reserved)}")
    if "none" in set(attrs) | set(variables):
        raise EngineError("'none' is reserved by the encoding")
    fresh = fresh_label(elem, attrs, variables, {"none"})
    elem_full = sorted(elem | {fresh})

    for partition in set_partitions(variables):
        subst = {v: min(block) for block in partition for v in block}
        reps = sorted(set(subst.values()))
        p_e = encode_vars(wildcard_expand(substitute_vars(p, subst), elem_full),
                          reps)
        q_e = encode_vars(wildcard_expand(substitute_vars(q, subst), elem_full),
                          reps)
        gamma = list(elem_full) + attrs + reps + ["none"]
        fb = filter_bound(p_e)
        k = fb + 1
        ap = build_ata(p_e, gamma, k)
        aq = build_ata(q_e, gamma, k)
        shape = EncodingShape(elem_full, attrs, set(reps) | {"none"})
        wit = bounded_nonempty_diff(ap, aq, k, fb, budget, shape=shape)
        if wit is not None:
            t, rep_values = _decode_encoding(wit, set(elem_full), set(attrs))
            rho = {v: rep_values.get(subst[v], 0) for v in variables}
            inst = Instance(p, q, semantics="xvars")
            t = minimize_witness(inst, checked_witness(inst, t, rho), rho)
            return Verdict(NOT_CONTAINED, "xvars", witness=t,
                           witness_assignment=rho, stats=stats.finish(budget))
    return Verdict(CONTAINED, "xvars", stats=stats.finish(budget))


def _decode_encoding(wit: XmlTree, elements: set[str], attributes: set[str]):
    """Encoded witness back to a tree with attributes plus representative
    values; value 0 stands for "matches no variable"."""
    rep_values: dict[str, int] = {}

    def value_of(label: str) -> int:
        if label == "none":
            return 0
        if label not in rep_values:
            rep_values[label] = len(rep_values) + 1
        return rep_values[label]

    def walk(node: XmlTree) -> XmlTree:
        attr_map: dict[str, int] = {}
        kids = []
        for c in node.children:
            if c.label in attributes:
                attr_map[c.label] = value_of(c.children[0].label)
            else:
                kids.append(walk(c))
        return tree(node.label, attr_map, kids)

    return walk(wit), rep_values


# ---------------------------------------------------------------------------
# Existential semantics


def _q_attr_tests(q: Path) -> set[tuple[str, str]]:
    """(node label, attribute) pairs that q can test."""
    pairs: set[tuple[str, str]] = set()

    def walk(x: Path) -> None:
        if isinstance(x, Union):
            for a in x.alts:
                walk(a)
        elif isinstance(x, Seq):
            for i in x.items:
                walk(i)
        else:
            for f in x.filters:
                walk_f(x.test, f)

    def walk_f(label, f: Filter) -> None:
        if isinstance(f, LPath):
            walk(f.path)
        elif isinstance(f, FOr):
            for a in f.alts:
                walk_f(label, a)
        else:
            pairs.add((label, f.attr))

    walk(q)
    return pairs


def contain_evars(p: Path, q: Path, budget: Budget | None = None) -> Verdict:
    """Canonical-tree search under existential variable semantics.

    For each disjunct of p, candidate counterexamples take the disjunct's
    pattern shape with descendant edges routed through fresh intermediate
    nodes; attribute values only matter up to their equality pattern, so
    assignments are enumerated in first-occurrence normal form.
    """
    budget = budget or Budget()
    stats = Stats()
    feats = detect_features(p).union(detect_features(q))
    if feats.uses_wildcard:
        raise EngineError("wildcards with existential variables are refused")
    fresh = fresh_label(labels_of(p), labels_of(q))
    q_pairs = _q_attr_tests(q)
    inst = Instance(p, q, semantics="evars")

    for disjunct in dnf_disjuncts(p):
        pat = to_tree_pattern(disjunct)
        skeleton = _Skeleton(pat, fresh, q_pairs)
        for t in skeleton.canonical_trees(budget):
            ok_p, _ = evaluate_existential(disjunct, t)
            if not ok_p:
                continue
            ok_q, _ = evaluate_existential(q, t)
            if ok_q:
                continue
            _, rho = evaluate_existential(p, t)
            t = minimize_witness(inst, checked_witness(inst, t, rho), rho)
            _, rho = evaluate_existential(p, t)
            return Verdict(NOT_CONTAINED, "evars", witness=t,
                           witness_assignment=rho, stats=stats.finish(budget))
    return Verdict(CONTAINED, "evars", stats=stats.finish(budget))


class _Skeleton:
    """Pattern-shaped tree with enumerable attribute slots."""

    def __init__(self, pat, fresh: str, q_pairs: set[tuple[str, str]]):
        self.fresh = fresh
        self.slots: list[tuple[int, str, bool]] = []  # (node idx, attr, required)
        self.nodes: list[dict] = []
        self.root = self._build(pat.root, q_pairs)

    def _build(self, pnode, q_pairs) -> int:
        idx = len(self.nodes)
        label = pnode.test if pnode.test is not None else self.fresh
        spec = {"label": label, "children": []}
        self.nodes.append(spec)
        p_attrs = {a for _, a, _ in pnode.constraints}
        q_attrs = {a for lab, a in q_pairs if lab == label}
        for a in sorted(p_attrs | q_attrs):
            self.slots.append((idx, a, a in p_attrs))
        for kind, c in pnode.edges:
            sub = self._build(c, q_pairs)
            spec["children"].append((kind, sub))
        return idx

    def canonical_trees(self, budget: Budget):
        for values in self._assignments(0, 0, []):
            budget.charge_tree()
            attr_maps: dict[int, dict[str, int]] = {}
            for (idx, a, _), v in zip(self.slots, values):
                if v is not None:
                    attr_maps.setdefault(idx, {})[a] = v
            yield self._materialize(0, attr_maps)

    def _assignments(self, i: int, used: int, acc: list):
        if i == len(self.slots):
            yield list(acc)
            return
        _, _, required = self.slots[i]
        options = list(range(used + 1))
        if not required:
            options.append(None)
        for v in options:
            acc.append(v)
            yield from self._assignments(
                i + 1, used + 1 if v == used else used, acc)
            acc.pop()

    def _materialize(self, idx: int, attr_maps) -> XmlTree:
        spec = self.nodes[idx]
        kids = []
        for kind, sub in spec["children"]:
            child = self._materialize(sub, attr_maps)
            if kind is Axis.DESCENDANT:
                child = XmlTree(self.fresh, (), (child,))
            kids.append(child)
        return tree(spec["label"], attr_maps.get(idx, {}), kids)
