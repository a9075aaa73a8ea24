"""Containment engines relative to a DTD.

Three routes, by fragment: a polynomial product-automaton construction for
pure child/descendant paths, a backtracking search mirroring the recursive
check for the child+filter fragment, and the deterministic subexpression
automaton for everything else.
"""

from __future__ import annotations

import itertools

from ..automata import (
    build_comatch_dta, build_match_nta, build_subexpr_dta, dta_complement,
    dtd_to_dta, find_accepted_tree, product,
)
from ..budget import Budget, Stats
from ..dtd import Dtd, _rule_nfa
from ..fragments import detect_features
from ..patterns import PatternNode, TreePattern, to_tree_pattern
from ..syntax import Axis, Path, Step
from ..trees import XmlTree
from .base import (
    CONTAINED, NOT_CONTAINED, EngineError, Instance, Verdict,
    checked_witness, minimize_witness,
)


def contain_dtd_ptime(p: Path, q: Path, d: Dtd,
                      budget: Budget | None = None) -> Verdict:
    """Product of the DTD automaton, the match automaton of p and the
    co-match automaton of q; containment iff the product is empty."""
    for expr in (p, q):
        f = detect_features(expr)
        if f.uses_filter or f.uses_wildcard or f.uses_disjunction \
                or f.uses_variables:
            raise EngineError("only child/descendant label steps supported")
    budget = budget or Budget()
    stats = Stats()
    sigma = sorted(d.symbols)
    acceptor = product(dtd_to_dta(d), build_match_nta(p, sigma),
                       build_comatch_dta(q, sigma))
    wit = find_accepted_tree(acceptor, budget)
    if wit is None:
        return Verdict(CONTAINED, "ptime-dtd", stats=stats.finish(budget))
    inst = Instance(p, q, dtd=d)
    wit = minimize_witness(inst, checked_witness(inst, wit))
    return Verdict(NOT_CONTAINED, "ptime-dtd", witness=wit,
                   stats=stats.finish(budget))


def contain_dtd_exptime(p: Path, q: Path, d: Dtd,
                        budget: Budget | None = None) -> Verdict:
    """Subexpression-automata route for the full fragment."""
    for expr in (p, q):
        if detect_features(expr).uses_variables:
            raise EngineError("variables are not supported by this engine")
    budget = budget or Budget()
    stats = Stats()
    sigma = sorted(d.symbols)
    acceptor = product(dtd_to_dta(d), build_subexpr_dta(p, sigma),
                       dta_complement(build_subexpr_dta(q, sigma)))
    wit = find_accepted_tree(acceptor, budget)
    if wit is None:
        return Verdict(CONTAINED, "exptime-dtd", stats=stats.finish(budget))
    inst = Instance(p, q, dtd=d)
    wit = minimize_witness(inst, checked_witness(inst, wit))
    return Verdict(NOT_CONTAINED, "exptime-dtd", witness=wit,
                   stats=stats.finish(budget))


# ---------------------------------------------------------------------------
# child+filter fragment


def contain_dtd_conp(p: Path, q: Path, d: Dtd,
                     budget: Budget | None = None) -> Verdict:
    """Top-down recursive search for a conforming tree matching p but not q.

    Nondeterministic guesses become backtracking: candidate child words are
    enumerated from the rule automata up to a pumping bound, sub-expression
    choices and child-to-position mappings are tried exhaustively, and
    results are memoized on (symbol, expression set, avoided expression).
    """
    budget = budget or Budget()
    stats = Stats()
    search = _ConpSearch(d, budget)
    pat_p = _child_pattern(p, d.start)
    pat_q = _child_pattern(q, d.start)
    if pat_p is None:  # p cannot match the root symbol
        return Verdict(CONTAINED, "conp-dtd", note="p cannot match any tree "
                       "of the DTD", stats=stats.finish(budget))
    if pat_q is None:  # q can never match, so any model of p separates
        wit = search.check_p(d.start, frozenset(pat_p))
    else:
        wit = search.check_p_not_q(d.start, frozenset(pat_p), pat_q)
    if wit is None:
        return Verdict(CONTAINED, "conp-dtd", stats=stats.finish(budget))
    inst = Instance(p, q, dtd=d)
    wit = minimize_witness(inst, checked_witness(inst, wit))
    return Verdict(NOT_CONTAINED, "conp-dtd", witness=wit,
                   stats=stats.finish(budget))


def _child_pattern(expr: Path, start: str):
    """Pattern of a child+filter expression anchored at the DTD root.

    Returns the root's level-1 pattern nodes (the root itself carries only
    the start-symbol constraint), or None when the expression cannot match
    a tree rooted at the start symbol.
    """
    f = detect_features(expr)
    if f.uses_descendant or f.uses_wildcard or f.uses_disjunction \
            or f.uses_variables:
        raise EngineError("only child steps and filters supported")
    pat = to_tree_pattern(expr)
    for node in pat.nodes():
        if node.constraints:
            raise EngineError("variables are not supported by this engine")
    root = pat.root
    if root.test is not None and root.test != start:
        return None
    return tuple(c for _, c in root.edges)


def _child_pattern_single(expr_nodes) -> bool:
    return all(not n.edges for n in expr_nodes)


class _ConpSearch:
    def __init__(self, d: Dtd, budget: Budget):
        self.d = d
        self.budget = budget
        self.minimal = _minimal_trees(d)
        self.memo_p: dict = {}
        self.memo_pq: dict = {}
        self.memo_nq: dict = {}

    # -- helpers ----------------------------------------------------------

    def _words(self, symbol: str, marks: int):
        """Candidate child words of the symbol's rule.

        A word accommodating `marks` marked positions can be pumped down to
        (marks+1)*(S+1)+marks letters for an S-state rule automaton, so the
        enumeration is complete at that length.
        """
        nfa = _rule_nfa(self.d.rule(symbol))
        bound = (marks + 1) * (nfa.n + 1) + marks
        return nfa.words_upto(bound, charge=self.budget.charge_tree)

    @staticmethod
    def _mappings(exprs, word):
        """All ways to map every expression to a position of its root symbol."""
        choices = []
        for e in exprs:
            positions = [j for j, sym in enumerate(word) if sym == e.test]
            choices.append(positions)
        if any(not c for c in choices):
            return
        for combo in itertools.product(*choices):
            groups: dict[int, list] = {}
            for e, j in zip(exprs, combo):
                groups.setdefault(j, []).append(e)
            yield groups

    # -- Checknotq --------------------------------------------------------

    def check_not_q(self, a: str, q: PatternNode):
        """A tree with root a conforming to the DTD and not matching q."""
        if q.test != a:
            return self.minimal[a]
        if not q.edges:
            return None
        key = (a, q)
        if key in self.memo_nq:
            return self.memo_nq[key]
        self.memo_nq[key] = None  # cycle guard; recursion strictly descends q
        result = None
        for _, q1 in q.edges:
            sub = self.check_not_q_root(q1)
            for word in self._words(a, 1):
                if q1.test not in word:
                    result = XmlTree(a, (), tuple(
                        self.minimal[sym] for sym in word))
                    break
                if sub is not None:
                    result = XmlTree(a, (), tuple(
                        sub if sym == q1.test else self.minimal[sym]
                        for sym in word))
                    break
            if result is not None:
                break
        self.memo_nq[key] = result
        return result

    def check_not_q_root(self, q1: PatternNode):
        return self.check_not_q(q1.test, q1)

    # -- CheckP -----------------------------------------------------------

    def check_p(self, a: str, exprs: frozenset):
        """A tree with root a conforming to the DTD and matching all exprs."""
        if any(e.test != a for e in exprs):
            return None
        if not exprs:
            return self.minimal[a]
        key = (a, exprs)
        if key in self.memo_p:
            return self.memo_p[key]
        self.memo_p[key] = None
        level1 = [c for e in exprs for _, c in e.edges]
        result = None
        for word in self._words(a, len(level1)):
            for groups in self._mappings(level1, word):
                subs = {}
                ok = True
                for j, members in groups.items():
                    sub = self.check_p(word[j], frozenset(members))
                    if sub is None:
                        ok = False
                        break
                    subs[j] = sub
                if ok:
                    result = XmlTree(a, (), tuple(
                        subs.get(j, self.minimal[sym])
                        for j, sym in enumerate(word)))
                    break
            if result is not None:
                break
        self.memo_p[key] = result
        return result

    # -- CheckPnotq -------------------------------------------------------

    def check_p_not_q(self, a: str, exprs: frozenset, q: PatternNode):
        """A tree with root a conforming to the DTD, matching all exprs but
        not q (both sides anchored at the root)."""
        if any(e.test != a for e in exprs):
            return None
        if q.test != a:
            return self.check_p(a, exprs)
        if not q.edges:
            return None
        key = (a, exprs, q)
        if key in self.memo_pq:
            return self.memo_pq[key]
        self.memo_pq[key] = None
        level1 = [c for e in exprs for _, c in e.edges]
        result = None
        for _, q1 in q.edges:
            not_q1 = self.check_not_q_root(q1)
            for word in self._words(a, len(level1) + 1):
                if q1.test in word and not_q1 is None:
                    # every q1-rooted subtree would match q1; the only hope
                    # is a mapping whose recursive calls avoid q1, handled
                    # below only at mapped positions, so unmapped positions
                    # of q1's symbol are fatal.
                    mapped_needed = True
                else:
                    mapped_needed = False
                for groups in self._mappings(level1, word):
                    if mapped_needed and any(
                            sym == q1.test and j not in groups
                            for j, sym in enumerate(word)):
                        continue
                    subs = {}
                    ok = True
                    for j, members in groups.items():
                        if word[j] == q1.test:
                            sub = self.check_p_not_q(
                                word[j], frozenset(members), q1)
                        else:
                            sub = self.check_p(word[j], frozenset(members))
                        if sub is None:
                            ok = False
                            break
                        subs[j] = sub
                    if not ok:
                        continue
                    kids = []
                    for j, sym in enumerate(word):
                        if j in subs:
                            kids.append(subs[j])
                        elif sym == q1.test:
                            kids.append(not_q1)
                        else:
                            kids.append(self.minimal[sym])
                    result = XmlTree(a, (), tuple(kids))
                    break
                if result is not None:
                    break
            if result is not None:
                break
        self.memo_pq[key] = result
        return result


def _minimal_trees(d: Dtd) -> dict[str, XmlTree]:
    """One small conforming tree per symbol (the DTD must be sanitized)."""
    trees: dict[str, XmlTree] = {}
    while len(trees) < len(d.symbols):
        grew = False
        for sym in d.symbols:
            if sym in trees:
                continue
            word = _rule_nfa(d.rule(sym)).shortest_word(allowed=trees.keys())
            if word is not None:
                trees[sym] = XmlTree(sym, (), tuple(trees[w] for w in word))
                grew = True
        if not grew:
            raise EngineError("DTD contains unproductive symbols; sanitize first")
    return trees
