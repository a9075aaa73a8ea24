"""DTDs as grammars with regular expressions on rule right-hand sides.

Line format, one rule per line; the first rule's left-hand side is the
start symbol::

    a -> a b | eps
    b -> c
    c -> eps

A tree matches a DTD iff its root carries the start symbol and every
vertex's child-label word belongs to the language of its label's rule.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

from . import regexes
from .automata.nfa import Nfa, regex_to_nfa
from .regexes import Regex, drop_symbols, parse_regex, serialize_regex, symbols_of
from .trees import XmlTree


class DtdError(ValueError):
    pass


class EmptyLanguageError(DtdError):
    """Sanitizing found that the DTD derives no tree at all."""


@dataclass(frozen=True)
class Dtd:
    start: str
    rules: tuple[tuple[str, Regex], ...]

    @property
    def symbols(self) -> frozenset[str]:
        return frozenset(sym for sym, _ in self.rules)

    def rule(self, symbol: str) -> Regex:
        for sym, r in self.rules:
            if sym == symbol:
                return r
        raise KeyError(symbol)

    def size(self) -> int:
        """Total symbol occurrences over all rules plus the alphabet size."""
        return len(self.rules) + sum(_regex_weight(r) for _, r in self.rules)

    def __str__(self) -> str:
        return serialize_dtd(self)


def _regex_weight(r: Regex) -> int:
    if isinstance(r, regexes.RSym):
        return 1
    if isinstance(r, (regexes.REps, regexes.REmpty)):
        return 0
    if isinstance(r, regexes.RCat):
        return sum(_regex_weight(p) for p in r.parts)
    if isinstance(r, regexes.RAlt):
        return sum(_regex_weight(a) for a in r.alts)
    return _regex_weight(r.inner)


def parse_dtd(text: str) -> Dtd:
    rules: list[tuple[str, Regex]] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if "->" not in line:
            raise DtdError(f"line {lineno}: missing '->'")
        lhs, rhs = line.split("->", 1)
        sym = lhs.strip()
        if not sym:
            raise DtdError(f"line {lineno}: empty left-hand side")
        if sym in seen:
            raise DtdError(f"line {lineno}: duplicate rule for {sym!r}")
        seen.add(sym)
        try:
            rules.append((sym, parse_regex(rhs)))
        except regexes.RegexSyntaxError as exc:
            raise DtdError(f"line {lineno}: {exc}") from exc
    if not rules:
        raise DtdError("empty DTD")
    declared = {sym for sym, _ in rules}
    for sym, r in rules:
        missing = symbols_of(r) - declared
        if missing:
            raise DtdError(
                f"rule for {sym!r} uses undefined symbol(s) {sorted(missing)}")
    return Dtd(rules[0][0], tuple(rules))


def serialize_dtd(d: Dtd) -> str:
    return "\n".join(f"{sym} -> {serialize_regex(r)}" for sym, r in d.rules) + "\n"


@functools.lru_cache(maxsize=4096)
def _rule_nfa(r: Regex) -> Nfa:
    return regex_to_nfa(r)


def matches_dtd(t: XmlTree, d: Dtd) -> bool:
    if t.label != d.start:
        return False
    symbols = d.symbols
    for _, node in t.vertices():
        if node.label not in symbols:
            return False
        word = [c.label for c in node.children]
        if not _rule_nfa(d.rule(node.label)).accepts(word):
            return False
    return True


def sanitize_dtd(d: Dtd) -> Dtd:
    """Keep only useful symbols (those occurring in some tree of L(d)).

    A symbol is productive when its rule accepts some word of productive
    symbols, and reachable when it occurs on an accepting rule path from
    the start symbol after dead symbols are removed.  Pruning dead symbols
    from the rule regexes leaves the tree language unchanged.
    """
    productive: set[str] = set()
    while True:
        grew = False
        for sym, r in d.rules:
            if sym in productive:
                continue
            if _rule_nfa(r).shortest_word(allowed=productive) is not None:
                productive.add(sym)
                grew = True
        if not grew:
            break
    if d.start not in productive:
        raise EmptyLanguageError(f"start symbol {d.start!r} derives no tree")

    dead = d.symbols - productive
    pruned = {sym: drop_symbols(r, frozenset(dead)) for sym, r in d.rules
              if sym in productive}

    reachable = {d.start}
    frontier = [d.start]
    while frontier:
        sym = frontier.pop()
        for target in _symbols_on_accepting_paths(pruned[sym]):
            if target not in reachable:
                reachable.add(target)
                frontier.append(target)

    useful = reachable & productive
    rules = tuple((sym, pruned[sym]) for sym, _ in d.rules if sym in useful)
    return Dtd(d.start, rules)


def _symbols_on_accepting_paths(r: Regex) -> frozenset[str]:
    """Symbols occurring in some accepted word of r."""
    nfa = _rule_nfa(r)
    # forward-reachable from the start
    fwd = set(nfa.start())
    stack = list(fwd)
    while stack:
        s = stack.pop()
        for _, t in nfa.edges.get(s, ()):
            if t not in fwd:
                fwd.add(t)
                stack.append(t)
    # backward-reachable from the finals
    back_edges: dict[int, list[int]] = {}
    for s, es in nfa.edges.items():
        for _, t in es:
            back_edges.setdefault(t, []).append(s)
    bwd = set(nfa.finals)
    stack = list(bwd)
    while stack:
        s = stack.pop()
        for p in back_edges.get(s, ()):
            if p not in bwd:
                bwd.add(p)
                stack.append(p)
    live = fwd & bwd
    return frozenset(sym for s in live for sym, t in nfa.edges.get(s, ())
                     if sym is not None and t in live)
