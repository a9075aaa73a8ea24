"""Regular expressions over symbol alphabets, as used in DTD rules.

Syntax: juxtaposition concatenates (``a b``), ``|`` alternates, postfix
``*``/``+``/``?`` repeat, parentheses group, ``eps`` is the empty word.
The smart constructors simplify away the empty language, which is how
useless symbols get pruned from rules.
"""

from __future__ import annotations

from dataclasses import dataclass


class RegexSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


@dataclass(frozen=True)
class RSym:
    name: str


@dataclass(frozen=True)
class REps:
    pass


@dataclass(frozen=True)
class REmpty:
    pass


@dataclass(frozen=True)
class RCat:
    parts: tuple


@dataclass(frozen=True)
class RAlt:
    alts: tuple


@dataclass(frozen=True)
class RStar:
    inner: "Regex"


@dataclass(frozen=True)
class RPlus:
    inner: "Regex"


@dataclass(frozen=True)
class ROpt:
    inner: "Regex"


Regex = RSym | REps | REmpty | RCat | RAlt | RStar | RPlus | ROpt

EPS = REps()
EMPTY = REmpty()


def rcat(parts) -> Regex:
    flat = []
    for p in parts:
        if isinstance(p, REmpty):
            return EMPTY
        if isinstance(p, REps):
            continue
        if isinstance(p, RCat):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return EPS
    if len(flat) == 1:
        return flat[0]
    return RCat(tuple(flat))


def ralt(alts) -> Regex:
    flat = []
    for a in alts:
        if isinstance(a, REmpty):
            continue
        if isinstance(a, RAlt):
            flat.extend(a.alts)
        else:
            flat.append(a)
    if not flat:
        return EMPTY
    if len(flat) == 1:
        return flat[0]
    # dedup while preserving order
    seen, out = set(), []
    for a in flat:
        if a not in seen:
            seen.add(a)
            out.append(a)
    return out[0] if len(out) == 1 else RAlt(tuple(out))


def rstar(inner: Regex) -> Regex:
    if isinstance(inner, (REmpty, REps)):
        return EPS
    if isinstance(inner, RStar):
        return inner
    return RStar(inner)


def rplus(inner: Regex) -> Regex:
    if isinstance(inner, REmpty):
        return EMPTY
    if isinstance(inner, REps):
        return EPS
    return RPlus(inner)


def ropt(inner: Regex) -> Regex:
    if isinstance(inner, (REmpty, REps)):
        return EPS
    return ROpt(inner)


def symbols_of(r: Regex) -> frozenset[str]:
    if isinstance(r, RSym):
        return frozenset([r.name])
    if isinstance(r, (REps, REmpty)):
        return frozenset()
    if isinstance(r, RCat):
        return frozenset().union(*(symbols_of(p) for p in r.parts))
    if isinstance(r, RAlt):
        return frozenset().union(*(symbols_of(a) for a in r.alts))
    return symbols_of(r.inner)


def drop_symbols(r: Regex, dead: frozenset[str]) -> Regex:
    """Replace dead symbols by the empty language and simplify."""
    if isinstance(r, RSym):
        return EMPTY if r.name in dead else r
    if isinstance(r, (REps, REmpty)):
        return r
    if isinstance(r, RCat):
        return rcat(drop_symbols(p, dead) for p in r.parts)
    if isinstance(r, RAlt):
        return ralt(drop_symbols(a, dead) for a in r.alts)
    inner = drop_symbols(r.inner, dead)
    if isinstance(r, RStar):
        return rstar(inner)
    if isinstance(r, RPlus):
        return rplus(inner)
    return ropt(inner)


def serialize_regex(r: Regex) -> str:
    return _ser(r, 0)


def _ser(r: Regex, prec: int) -> str:
    # prec levels: 0 alt, 1 cat, 2 postfix
    if isinstance(r, RSym):
        return r.name
    if isinstance(r, REps):
        return "eps"
    if isinstance(r, REmpty):
        return "(eps eps)"  # unreachable in sanitized DTDs; keep it parseable
    if isinstance(r, RAlt):
        s = " | ".join(_ser(a, 1) for a in r.alts)
        return f"({s})" if prec > 0 else s
    if isinstance(r, RCat):
        s = " ".join(_ser(p, 2) for p in r.parts)
        return f"({s})" if prec > 1 else s
    mark = {"RStar": "*", "RPlus": "+", "ROpt": "?"}[type(r).__name__]
    return _ser(r.inner, 3) + mark


_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_#$!")


def parse_regex(text: str) -> Regex:
    toks = _tokenize(text)
    r, i = _parse_alt(toks, 0)
    if i != len(toks) - 1:  # EOF sentinel
        raise RegexSyntaxError("trailing input", toks[i][2])
    return r


def _tokenize(text: str):
    toks = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _NAME_CHARS:
            j = i
            while j < len(text) and text[j] in _NAME_CHARS:
                j += 1
            word = text[i:j]
            toks.append(("EPS" if word == "eps" else "NAME", word, i))
            i = j
            continue
        kinds = {"|": "PIPE", "*": "STAR", "+": "PLUS", "?": "OPT",
                 "(": "LPAREN", ")": "RPAREN"}
        if c in kinds:
            toks.append((kinds[c], c, i))
            i += 1
            continue
        raise RegexSyntaxError(f"unexpected character {c!r}", i)
    toks.append(("EOF", "", len(text)))
    return toks


def _parse_alt(toks, i):
    alts = []
    r, i = _parse_cat(toks, i)
    alts.append(r)
    while toks[i][0] == "PIPE":
        r, i = _parse_cat(toks, i + 1)
        alts.append(r)
    return ralt(alts), i


def _parse_cat(toks, i):
    parts = []
    while toks[i][0] in ("NAME", "EPS", "LPAREN"):
        r, i = _parse_postfix(toks, i)
        parts.append(r)
    if not parts:
        raise RegexSyntaxError("expression expected", toks[i][2])
    return rcat(parts), i


def _parse_postfix(toks, i):
    kind, text, pos = toks[i]
    if kind == "NAME":
        r, i = RSym(text), i + 1
    elif kind == "EPS":
        r, i = EPS, i + 1
    else:
        r, i = _parse_alt(toks, i + 1)
        if toks[i][0] != "RPAREN":
            raise RegexSyntaxError("')' expected", toks[i][2])
        i += 1
    while toks[i][0] in ("STAR", "PLUS", "OPT"):
        r = {"STAR": rstar, "PLUS": rplus, "OPT": ropt}[toks[i][0]](r)
        i += 1
    return r, i
