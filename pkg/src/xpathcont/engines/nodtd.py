"""Containment engines without a DTD: bounded counterexamples and
finite-alphabet alternating-automata search."""

from __future__ import annotations

import itertools

from ..budget import Budget, Stats
from ..fragments import detect_features, labels_of
from ..patterns import (
    PatternNode, dnf_disjuncts, filter_bound, max_disjunct_nodes,
    to_tree_pattern,
)
from ..automata import build_ata, bounded_nonempty_diff
from ..syntax import Axis, Path
from ..trees import XmlTree, evaluate
from .base import (
    CONTAINED, NOT_CONTAINED, EngineError, Instance, Verdict,
    checked_witness, minimize_witness,
)


def fresh_label(*label_sets) -> str:
    used = set().union(*label_sets)
    if "#" not in used:
        return "#"
    i = 0
    while f"#{i}" in used:
        i += 1
    return f"#{i}"


def _require_plain(p: Path, q: Path) -> None:
    f = detect_features(p).union(detect_features(q))
    if f.uses_variables:
        raise EngineError("variables are not supported by this engine")


def contain_nodtd_conp(p: Path, q: Path, budget: Budget | None = None,
                       exhaustive: bool = False) -> Verdict:
    """Bounded-counterexample search over an infinite label alphabet.

    If p is not contained in q there is a counterexample whose shape is a
    pattern of some disjunct of p with each descendant edge stretched into
    a chain of at most m+1 fresh-labeled nodes (m bounds the disjunct
    sizes of q) and wildcards drawn from p's labels plus one fresh symbol.
    The default strategy enumerates exactly those trees; the exhaustive
    strategy scans every tree up to the 2n(m+2) node bound and is only
    meant for cross-validation on tiny instances.
    """
    _require_plain(p, q)
    budget = budget or Budget()
    stats = Stats()
    fresh = fresh_label(labels_of(p), labels_of(q))
    n = max(max_disjunct_nodes(p), 1)
    m = max_disjunct_nodes(q)
    labels = [fresh] + sorted(labels_of(p))

    if exhaustive:
        from ..oracle import enumerate_trees

        bound = 2 * n * (m + 2)
        if bound > 8:
            raise EngineError(
                f"exhaustive strategy refused at bound {bound}; it exists "
                "for cross-validation on tiny instances only")
        for t in enumerate_trees(labels, bound):
            budget.charge_tree()
            if evaluate(p, t).matched and not evaluate(q, t).matched:
                inst = Instance(p, q)
                t = minimize_witness(inst, checked_witness(inst, t))
                return Verdict(NOT_CONTAINED, "conp", witness=t,
                               stats=stats.finish(budget))
        return Verdict(CONTAINED, "conp", stats=stats.finish(budget))

    inst = Instance(p, q)
    for disjunct in dnf_disjuncts(p):
        pat = to_tree_pattern(disjunct)
        for t in pattern_expansions(pat, labels, m + 1):
            budget.charge_tree()
            if evaluate(disjunct, t).matched and not evaluate(q, t).matched:
                t = minimize_witness(inst, checked_witness(inst, t))
                return Verdict(NOT_CONTAINED, "conp", witness=t,
                               stats=stats.finish(budget))
    return Verdict(CONTAINED, "conp", stats=stats.finish(budget))


def pattern_expansions(pat, labels, max_chain: int):
    """Trees obtained from a pattern by labeling wildcards and stretching
    descendant edges into fresh-labeled chains of 0..max_chain inner nodes.

    The fresh symbol must be first in `labels`.
    """
    fresh = labels[0]
    wild_nodes = [n for n in pat.nodes() if n.test is None]
    desc_edges = [(n, i) for n in pat.nodes()
                  for i, (kind, _) in enumerate(n.edges)
                  if kind is Axis.DESCENDANT]
    label_choices = [labels] * len(wild_nodes)
    chain_choices = [range(max_chain + 1)] * len(desc_edges)
    for chains in itertools.product(*chain_choices):
        chain_by_edge = {(id(n), i): c
                         for (n, i), c in zip(desc_edges, chains)}
        for labeling in itertools.product(*label_choices):
            label_of = {n.id: lab for n, lab in zip(wild_nodes, labeling)}

            def build(node) -> XmlTree:
                kids = []
                for i, (kind, child) in enumerate(node.edges):
                    sub = build(child)
                    if kind is Axis.DESCENDANT:
                        for _ in range(chain_by_edge.get((id(node), i), 0)):
                            sub = XmlTree(fresh, (), (sub,))
                    kids.append(sub)
                label = node.test if node.test is not None else label_of[node.id]
                return XmlTree(label, (), tuple(kids))

            yield build(pat.root)


def contain_finite_alphabet(p: Path, q: Path, alphabet,
                            budget: Budget | None = None) -> Verdict:
    """Alternating-automata search over a fixed finite alphabet.

    Counterexamples only need rank f(p)+1 and at most f(p) branching
    nodes, where f is the per-disjunct filter bound, so saturating the
    bounded product of the two automata decides containment exactly.
    """
    _require_plain(p, q)
    alphabet = frozenset(alphabet)
    missing = (labels_of(p) | labels_of(q)) - alphabet
    if missing:
        raise EngineError(f"alphabet does not cover labels {sorted(missing)}")
    budget = budget or Budget()
    stats = Stats()
    fb = filter_bound(p)
    k = fb + 1
    ap = build_ata(p, alphabet, k)
    aq = build_ata(q, alphabet, k)
    wit = bounded_nonempty_diff(ap, aq, k, fb, budget)
    if wit is None:
        return Verdict(CONTAINED, "finite", stats=stats.finish(budget))
    inst = Instance(p, q)
    wit = minimize_witness(inst, checked_witness(inst, wit))
    return Verdict(NOT_CONTAINED, "finite", witness=wit,
                   stats=stats.finish(budget))
