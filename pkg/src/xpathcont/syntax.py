"""Abstract syntax, parser, serializer and normalizer for downward XPath.

Both the full syntax (``child::a[child::b]/descendant::c``) and the
abbreviated syntax (``a[b]//c``, ``.//c``, ``$x = @a``, ``|``, ``or``) are
accepted, and may be mixed.  The serializer emits canonical abbreviated
syntax.  Only the downward axes exist: ``self``, ``child`` and
``descendant``.  Absolute location paths (a leading ``/``) are rejected.

Names (labels, attributes, variables) are words over ``[A-Za-z0-9_]``;
``#``, ``$`` and ``!`` are additionally allowed as single-character labels.
``or`` is a reserved word and cannot be used as a label.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class XPathSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class Axis(enum.Enum):
    SELF = "self"
    CHILD = "child"
    DESCENDANT = "descendant"


# A node test of None is the wildcard '*'.
@dataclass(frozen=True)
class Step:
    axis: Axis
    test: str | None
    filters: tuple[Filter, ...] = ()


@dataclass(frozen=True)
class Seq:
    """Path composition p1/p2/...; items are steps or unions, never Seqs."""

    items: tuple[Path, ...]


@dataclass(frozen=True)
class Union:
    """n-ary path disjunction p1|p2|...; alternatives are never Unions."""

    alts: tuple[Path, ...]


@dataclass(frozen=True)
class LPath:
    """A location-path filter [p]."""

    path: Path


@dataclass(frozen=True)
class FOr:
    """n-ary 'or' of filter expressions; alternatives are never FOrs."""

    alts: tuple[Filter, ...]


@dataclass(frozen=True)
class VarEq:
    """[$var = @attr]"""

    var: str
    attr: str


@dataclass(frozen=True)
class VarNeq:
    """[$var != @attr]"""

    var: str
    attr: str


Path = Step | Seq | Union
Filter = LPath | FOr | VarEq | VarNeq


class _Unsatisfiable:
    """Result of normalizing an expression that cannot match any tree."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNSAT"


UNSAT = _Unsatisfiable()


def seq(items) -> Path:
    """Compose paths, flattening nested Seqs and collapsing singletons."""
    flat: list[Path] = []
    for it in items:
        if isinstance(it, Seq):
            flat.extend(it.items)
        else:
            flat.append(it)
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat))


def union(alts) -> Path:
    flat: list[Path] = []
    for a in alts:
        if isinstance(a, Union):
            flat.extend(a.alts)
        else:
            flat.append(a)
    if len(flat) == 1:
        return flat[0]
    return Union(tuple(flat))


def for_(alts) -> Filter:
    flat: list[Filter] = []
    for a in alts:
        if isinstance(a, FOr):
            flat.extend(a.alts)
        else:
            flat.append(a)
    if len(flat) == 1:
        return flat[0]
    return FOr(tuple(flat))


# ---------------------------------------------------------------------------
# Tokenizer


_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    toks: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _NAME_CHARS:
            j = i
            while j < n and text[j] in _NAME_CHARS:
                j += 1
            word = text[i:j]
            toks.append(_Token("OR" if word == "or" else "NAME", word, i))
            i = j
            continue
        if c == "$":
            if i + 1 < n and text[i + 1] in _NAME_CHARS:
                j = i + 1
                while j < n and text[j] in _NAME_CHARS:
                    j += 1
                toks.append(_Token("VAR", text[i + 1 : j], i))
                i = j
            else:
                toks.append(_Token("NAME", "$", i))
                i += 1
            continue
        if c == "@":
            j = i + 1
            while j < n and text[j] in _NAME_CHARS:
                j += 1
            if j == i + 1:
                raise XPathSyntaxError("attribute name expected after '@'", i)
            toks.append(_Token("ATTR", text[i + 1 : j], i))
            i = j
            continue
        if c == "!":
            if i + 1 < n and text[i + 1] == "=":
                toks.append(_Token("NEQ", "!=", i))
                i += 2
            else:
                toks.append(_Token("NAME", "!", i))
                i += 1
            continue
        if c == "/":
            if i + 1 < n and text[i + 1] == "/":
                toks.append(_Token("DSLASH", "//", i))
                i += 2
            else:
                toks.append(_Token("SLASH", "/", i))
                i += 1
            continue
        if c == ":":
            if i + 1 < n and text[i + 1] == ":":
                toks.append(_Token("AXIS_SEP", "::", i))
                i += 2
            else:
                raise XPathSyntaxError("single ':' is not a token", i)
            continue
        simple = {"|": "PIPE", "[": "LBRACK", "]": "RBRACK", "(": "LPAREN",
                  ")": "RPAREN", "*": "STAR", ".": "DOT", "=": "EQ", "#": None}
        if c == "#":
            toks.append(_Token("NAME", "#", i))
            i += 1
            continue
        if c in simple:
            toks.append(_Token(simple[c], c, i))
            i += 1
            continue
        raise XPathSyntaxError(f"unexpected character {c!r}", i)
    toks.append(_Token("EOF", "", n))
    return toks


# ---------------------------------------------------------------------------
# Parser (recursive descent)


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> _Token:
        t = self.next()
        if t.kind != kind:
            raise XPathSyntaxError(f"expected {kind}, found {t.text!r}", t.pos)
        return t

    def parse(self) -> Path:
        if self.peek().kind in ("SLASH", "DSLASH"):
            raise XPathSyntaxError("absolute location paths are not allowed",
                                   self.peek().pos)
        p = self.path()
        t = self.peek()
        if t.kind != "EOF":
            raise XPathSyntaxError(f"trailing input {t.text!r}", t.pos)
        return p

    def path(self) -> Path:
        alts = [self.seq()]
        while self.peek().kind == "PIPE":
            self.next()
            alts.append(self.seq())
        return union(alts)

    def seq(self) -> Path:
        items = [self.item()]
        while self.peek().kind in ("SLASH", "DSLASH"):
            op = self.next()
            it = self.item()
            if op.kind == "DSLASH":
                it = _promote_descendant(it, op.pos)
            items.append(it)
        # './/e' desugars to a single descendant step: a bare leading 'self::*'
        # is the identity relation and is dropped at parse time.
        if len(items) > 1 and items[0] == Step(Axis.SELF, None, ()):
            items = items[1:]
        return seq(items)

    def item(self) -> Path:
        t = self.peek()
        if t.kind == "LPAREN":
            self.next()
            p = self.path()
            self.expect("RPAREN")
            return p
        return self.step()

    def step(self) -> Step:
        t = self.peek()
        axis = Axis.CHILD
        if t.kind == "NAME" and t.text in ("self", "child", "descendant") \
                and self.toks[self.i + 1].kind == "AXIS_SEP":
            self.next()
            self.next()
            axis = Axis(t.text)
            t = self.peek()
        if t.kind == "DOT":
            if axis is not Axis.CHILD or self.toks[self.i - 1].kind == "AXIS_SEP":
                raise XPathSyntaxError("'.' cannot carry an explicit axis", t.pos)
            self.next()
            return Step(Axis.SELF, None, self.filters())
        if t.kind == "STAR":
            self.next()
            return Step(axis, None, self.filters())
        if t.kind == "NAME":
            self.next()
            return Step(axis, t.text, self.filters())
        raise XPathSyntaxError(f"node test expected, found {t.text!r}", t.pos)

    def filters(self) -> tuple[Filter, ...]:
        out: list[Filter] = []
        while self.peek().kind == "LBRACK":
            self.next()
            out.append(self.fexpr())
            self.expect("RBRACK")
        return tuple(out)

    def fexpr(self) -> Filter:
        alts = [self.fterm()]
        while self.peek().kind == "OR":
            self.next()
            alts.append(self.fterm())
        return for_(alts)

    def fterm(self) -> Filter:
        t = self.peek()
        if t.kind == "VAR":
            self.next()
            op = self.next()
            if op.kind not in ("EQ", "NEQ"):
                raise XPathSyntaxError("'=' or '!=' expected after variable", op.pos)
            attr = self.expect("ATTR")
            cls = VarEq if op.kind == "EQ" else VarNeq
            return cls(t.text, attr.text)
        return LPath(self.path())


def _promote_descendant(p: Path, pos: int) -> Path:
    """Desugar '//': turn the first step of p into a descendant step."""
    if isinstance(p, Step):
        if p.axis is not Axis.CHILD:
            raise XPathSyntaxError("'//' must be followed by a child-axis step", pos)
        return Step(Axis.DESCENDANT, p.test, p.filters)
    if isinstance(p, Seq):
        return Seq((_promote_descendant(p.items[0], pos),) + p.items[1:])
    return Union(tuple(_promote_descendant(a, pos) for a in p.alts))


def parse_expression(text: str) -> Path:
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Serializer (canonical abbreviated syntax)


def serialize(p: Path) -> str:
    return _ser_path(p, top=True)


def _ser_path(p: Path, top: bool) -> str:
    if isinstance(p, Union):
        s = "|".join(_ser_path(a, top=True) for a in p.alts)
        return s if top else f"({s})"
    if isinstance(p, Seq):
        out = _ser_item(p.items[0])
        if _leads_with_descendant(p.items[0]):
            out = ".//" + out
        for it in p.items[1:]:
            sep = "//" if _leads_with_descendant(it) else "/"
            out += sep + _ser_item(it)
        return out
    step = _ser_step(p)
    return ".//" + step if p.axis is Axis.DESCENDANT else step


def _ser_item(item: Path) -> str:
    """Render one Seq item; '//' separators are the caller's business."""
    if isinstance(item, Step):
        return _ser_step(item)
    return _ser_path(item, top=False)


def _leads_with_descendant(item: Path) -> bool:
    """True for a bare descendant step; such items render via '//' or './/'."""
    return isinstance(item, Step) and item.axis is Axis.DESCENDANT


def _ser_step(s: Step) -> str:
    fs = "".join(f"[{_ser_filter(f)}]" for f in s.filters)
    test = "*" if s.test is None else s.test
    if s.axis is Axis.SELF:
        core = "." if s.test is None else f"self::{s.test}"
        return core + fs
    return test + fs


def _ser_filter(f: Filter) -> str:
    if isinstance(f, VarEq):
        return f"${f.var}=@{f.attr}"
    if isinstance(f, VarNeq):
        return f"${f.var}!=@{f.attr}"
    if isinstance(f, FOr):
        return " or ".join(_ser_filter(a) for a in f.alts)
    return _ser_path(f.path, top=False)


# ---------------------------------------------------------------------------
# Size


def expression_size(p: Path) -> int:
    """Number of child and descendant steps in p, filters included."""
    if isinstance(p, Step):
        n = 1 if p.axis in (Axis.CHILD, Axis.DESCENDANT) else 0
        return n + sum(_filter_size(f) for f in p.filters)
    if isinstance(p, Seq):
        return sum(expression_size(it) for it in p.items)
    return sum(expression_size(a) for a in p.alts)


def _filter_size(f: Filter) -> int:
    if isinstance(f, LPath):
        return expression_size(f.path)
    if isinstance(f, FOr):
        return sum(_filter_size(a) for a in f.alts)
    return 0


# ---------------------------------------------------------------------------
# Normalization
#
# Merges every non-leading self step into its predecessor: a step
# axis::s[es]/self::s'[fs] becomes axis::g[es][fs] where g is s if s' is the
# wildcard, s' if s is the wildcard or equal to s', and unsatisfiable when s
# and s' are two distinct labels.  A filter whose path starts with a self
# step is merged into the carrying step the same way.  The result either has
# self steps only in leading position or is UNSAT.


_CLASH = object()  # test merge failure marker


def _merge_tests(t1: str | None, t2: str | None):
    if t2 is None:
        return t1
    if t1 is None or t1 == t2:
        return t2
    return _CLASH


def normalize(p: Path) -> Path | _Unsatisfiable:
    return _norm_path(p, leading=True)


def _norm_path(p: Path, leading: bool) -> Path | _Unsatisfiable:
    if isinstance(p, Union):
        alts = []
        for a in p.alts:
            na = _norm_path(a, leading)
            if na is not UNSAT:
                alts.append(na)
        return union(alts) if alts else UNSAT
    if isinstance(p, Step):
        return _norm_step(p, leading)
    return _norm_seq(list(p.items), leading)


def _norm_seq(items: list[Path], leading: bool) -> Path | _Unsatisfiable:
    parts: list[Path] = []
    for idx, raw in enumerate(items):
        item = _norm_path(raw, leading and idx == 0)
        if item is UNSAT:
            return UNSAT
        queue = list(item.items) if isinstance(item, Seq) else [item]
        for part in queue:
            if isinstance(part, Step) and part.axis is Axis.SELF and parts:
                merged = _merge_self_into(parts.pop(), part)
                if merged is UNSAT:
                    return UNSAT
                parts.append(merged)
            elif isinstance(part, Union) and parts and _has_leading_self(part):
                # Distribute the predecessor over the union so that the
                # leading self steps find their predecessor.
                prev = parts.pop()
                d = _norm_path(union([seq([prev, a]) for a in part.alts]),
                               leading and not parts)
                if d is UNSAT:
                    return UNSAT
                queue2 = list(d.items) if isinstance(d, Seq) else [d]
                parts.extend(queue2)
            else:
                parts.append(part)
    if leading and len(parts) > 1 and parts[0] == Step(Axis.SELF, None, ()):
        parts = parts[1:]
    return seq(parts)


def _has_leading_self(p: Path) -> bool:
    if isinstance(p, Step):
        return p.axis is Axis.SELF
    if isinstance(p, Seq):
        return _has_leading_self(p.items[0])
    return any(_has_leading_self(a) for a in p.alts)


def _merge_self_into(prev: Path, selfstep: Step) -> Path | _Unsatisfiable:
    if isinstance(prev, Step):
        test = _merge_tests(prev.test, selfstep.test)
        if test is _CLASH:
            return UNSAT
        return Step(prev.axis, test, prev.filters + selfstep.filters)
    if isinstance(prev, Seq):
        merged = _merge_self_into(prev.items[-1], selfstep)
        if merged is UNSAT:
            return UNSAT
        return seq(list(prev.items[:-1]) + [merged])
    alts = []
    for a in prev.alts:
        m = _merge_self_into(a, selfstep)
        if m is not UNSAT:
            alts.append(m)
    return union(alts) if alts else UNSAT


_TRUE = object()  # filter that always holds; dropped


def _norm_step(s: Step, leading: bool) -> Path | _Unsatisfiable:
    filters: list[Filter] = []
    for f in s.filters:
        nf = _norm_filter(f)
        if nf is UNSAT:
            return UNSAT
        if nf is _TRUE:
            continue
        filters.append(nf)

    # An 'or' filter with a self-leading branch forces a case split of the
    # whole step, since the branch constrains the step's own node test.
    for i, f in enumerate(filters):
        if isinstance(f, FOr) and any(
                isinstance(a, LPath) and _has_leading_self(a.path) for a in f.alts):
            variants = []
            for a in f.alts:
                rest = filters[:i] + [a] + filters[i + 1:]
                v = _norm_step(Step(s.axis, s.test, tuple(rest)), leading)
                if v is not UNSAT:
                    variants.append(v)
            return union(variants) if variants else UNSAT

    # Merge self-leading filter paths into the step itself.
    test = s.test
    out: list[Filter] = []
    work = list(filters)
    while work:
        f = work.pop(0)
        if isinstance(f, LPath) and _has_leading_self(f.path):
            path = f.path
            if isinstance(path, Union):
                # all alts lead with self here only if _has_leading_self saw
                # one; a mixed union cannot be merged conjunctively, split:
                variants = []
                for a in path.alts:
                    rest = [LPath(a)] + work
                    v = _norm_step(Step(s.axis, test, tuple(out + rest)), leading)
                    if v is not UNSAT:
                        variants.append(v)
                return union(variants) if variants else UNSAT
            first = path if isinstance(path, Step) else path.items[0]
            if isinstance(first, Union):
                tail = [] if isinstance(path, Step) else list(path.items[1:])
                variants = []
                for a in first.alts:
                    rest = [LPath(seq([a] + tail))] + work
                    v = _norm_step(Step(s.axis, test, tuple(out + rest)), leading)
                    if v is not UNSAT:
                        variants.append(v)
                return union(variants) if variants else UNSAT
            remainder = None if isinstance(path, Step) else seq(list(path.items[1:]))
            test = _merge_tests(test, first.test)
            if test is _CLASH:
                return UNSAT
            work = list(first.filters) + ([LPath(remainder)] if remainder else []) + work
        else:
            out.append(f)
    return Step(s.axis, test, tuple(out))


def _norm_filter(f: Filter):
    if isinstance(f, (VarEq, VarNeq)):
        return f
    if isinstance(f, LPath):
        np = _norm_path(f.path, leading=False)
        if np is UNSAT:
            return UNSAT
        if np == Step(Axis.SELF, None, ()):
            return _TRUE
        return LPath(np)
    alts = []
    for a in f.alts:
        na = _norm_filter(a)
        if na is _TRUE:
            return _TRUE
        if na is not UNSAT:
            alts.append(na)
    return for_(alts) if alts else UNSAT
