"""Brute-force ground truth: exhaustive tree enumeration and bounded
containment checks used to validate every engine.

Enumeration is canonical (each tree once up to sibling reordering, which
no query operator observes) except for DTD languages, where child order
matters and trees are produced by derivation instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .budget import Budget, ResourceExceeded
from .dtd import Dtd, _rule_nfa
from .fragments import detect_features, labels_of
from .patterns import max_disjunct_nodes
from .syntax import Path
from .trees import XmlTree, evaluate, serialize_tree


def enumerate_trees(alphabet, max_nodes: int, attr_config=None,
                    ordered: bool = False):
    """All trees with 1..max_nodes nodes over the alphabet, lazily.

    attr_config is an optional (attribute names, value bound) pair: each
    node then carries any subset of the attributes with values in
    0..bound.  Canonical sibling order (sorted by serialized form) unless
    ordered=True.
    """
    labels = sorted(alphabet)
    attr_options = _attr_options(attr_config)

    def trees(size: int):
        for label in labels:
            for attrs in attr_options:
                for kids in children_lists(size - 1):
                    yield XmlTree(label, attrs, kids)

    def children_lists(total: int):
        if total == 0:
            yield ()
            return
        for first_size in range(1, total + 1):
            for first in trees(first_size):
                key = serialize_tree(first)
                for rest in children_lists(total - first_size):
                    if not ordered and rest and serialize_tree(rest[0]) < key:
                        continue
                    yield (first,) + rest

    for size in range(1, max_nodes + 1):
        yield from trees(size)


def _attr_options(attr_config):
    if attr_config is None:
        return [()]
    names, bound = attr_config
    per_name = [[None] + list(range(bound + 1)) for _ in names]
    out = []
    for values in itertools.product(*per_name):
        out.append(tuple(sorted(
            (n, v) for n, v in zip(sorted(names), values) if v is not None)))
    return out


def trees_of_dtd(d: Dtd, max_nodes: int) -> list[XmlTree]:
    """All trees of L(d) with at most max_nodes nodes, by derivation."""
    cache: dict[tuple[str, int], list[XmlTree]] = {}

    def gen(sym: str, budget: int) -> list[XmlTree]:
        if budget < 1:
            return []
        key = (sym, budget)
        hit = cache.get(key)
        if hit is not None:
            return hit
        out: list[XmlTree] = []
        nfa = _rule_nfa(d.rule(sym))
        for word in nfa.words_upto(budget - 1):
            for kids in _assign(word, budget - 1, gen):
                out.append(XmlTree(sym, (), kids))
        cache[key] = out
        return out

    return gen(d.start, max_nodes)


def _assign(word, remaining: int, gen):
    if not word:
        yield ()
        return
    head, rest = word[0], word[1:]
    for t in gen(head, remaining - len(rest)):
        for kids in _assign(rest, remaining - t.size, gen):
            yield (t,) + kids


@dataclass
class OracleResult:
    contained: bool
    witness: XmlTree | None = None
    witness_assignment: dict[str, int] | None = None
    exact: bool = False
    trees_scanned: int = 0

    @property
    def outcome(self) -> str:
        return "Contained" if self.contained else "NotContained"


def oracle_decide(inst, max_nodes: int, value_bound: int | None = None,
                  budget: Budget | None = None) -> OracleResult:
    """Scan all trees up to the bound for a counterexample.

    Exact (not merely up-to-bound) for the plain DTD-free fragment when
    max_nodes reaches the 2n(m+2) small-model bound, and for existential
    variables when the bound covers the canonical-tree size; otherwise the
    Contained answer means contained-up-to-bound.
    """
    budget = budget or Budget()
    p, q = inst.p, inst.q
    feats = detect_features(p).union(detect_features(q))
    labels = labels_of(p) | labels_of(q)
    if inst.dtd is not None:
        candidates = trees_of_dtd(inst.dtd, max_nodes)
        exact = False
    else:
        if inst.alphabet is not None:
            alphabet = set(inst.alphabet)
            exact = False
        else:
            from .engines.nodtd import fresh_label

            alphabet = labels | {fresh_label(labels)}
            n = max(max_disjunct_nodes(p), 1)
            m = max_disjunct_nodes(q)
            exact = inst.semantics == "plain" and max_nodes >= 2 * n * (m + 2)
        attr_config = None
        if feats.uses_variables:
            k = max(len(feats.attributes), 1)
            if value_bound is None:
                value_bound = max_nodes * k
            attr_config = (sorted(feats.attributes), value_bound)
            exact = False
        candidates = enumerate_trees(alphabet, max_nodes, attr_config)

    scanned = 0
    if inst.semantics == "xvars":
        values = list(range((value_bound or 1) + 1))
        assignments = [dict(zip(sorted(feats.variables), combo))
                       for combo in itertools.product(
                           values, repeat=len(feats.variables))]
        for t in candidates:
            scanned += 1
            budget.charge_tree()
            for rho in assignments:
                if evaluate(p, t, rho).matched and not evaluate(q, t, rho).matched:
                    return OracleResult(False, t, rho, exact, scanned)
        return OracleResult(True, exact=exact, trees_scanned=scanned)

    if inst.semantics == "evars":
        if inst.dtd is None and value_bound is not None:
            canonical = 2 * (max_disjunct_nodes(p) + 1)
            exact = max_nodes >= canonical and value_bound >= canonical * max(
                len(feats.attributes), 1)
        for t in candidates:
            scanned += 1
            budget.charge_tree()
            rho = _brute_exists(p, t, feats.variables)
            if rho is not None and _brute_exists(q, t, feats.variables) is None:
                return OracleResult(False, t, rho, exact, scanned)
        return OracleResult(True, exact=exact, trees_scanned=scanned)

    for t in candidates:
        scanned += 1
        budget.charge_tree()
        if evaluate(p, t).matched and not evaluate(q, t).matched:
            return OracleResult(False, t, None, exact, scanned)
    return OracleResult(True, exact=exact, trees_scanned=scanned)


def _brute_exists(p: Path, t: XmlTree, variables) -> dict[str, int] | None:
    """Existential match by brute force over the value pool: every value in
    the tree plus one fresh value per variable."""
    varlist = sorted(detect_features(p).variables | set(variables))
    if not varlist:
        return {} if evaluate(p, t).matched else None
    base = sorted(t.all_values())
    fresh_start = (max(base) + 1) if base else 1
    pool = base + [fresh_start + i for i in range(len(varlist))]
    for combo in itertools.product(pool, repeat=len(varlist)):
        rho = dict(zip(varlist, combo))
        if evaluate(p, t, rho).matched:
            return rho
    return None
