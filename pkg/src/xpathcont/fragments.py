"""Feature detection and fragment classification.

``classify`` maps the syntactic features of a containment instance to the
decision engine that handles it, together with the complexity class of the
instance's fragment and the theorem tag the verdict cites.  Labels follow
the fragment lattice: fragments whose exact complexity is not settled get
the label UNKNOWN, and fragments with no applicable engine get the engine
id "none" (the dispatcher refuses those).
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    Axis, FOr, Filter, LPath, Path, Seq, Step, Union, VarEq, VarNeq,
)


@dataclass(frozen=True)
class FeatureSet:
    uses_child: bool = False
    uses_descendant: bool = False
    uses_filter: bool = False
    uses_wildcard: bool = False
    uses_disjunction: bool = False
    uses_variables: bool = False
    uses_inequality: bool = False
    variables: frozenset[str] = frozenset()
    attributes: frozenset[str] = frozenset()

    def union(self, other: FeatureSet) -> FeatureSet:
        return FeatureSet(
            self.uses_child or other.uses_child,
            self.uses_descendant or other.uses_descendant,
            self.uses_filter or other.uses_filter,
            self.uses_wildcard or other.uses_wildcard,
            self.uses_disjunction or other.uses_disjunction,
            self.uses_variables or other.uses_variables,
            self.uses_inequality or other.uses_inequality,
            self.variables | other.variables,
            self.attributes | other.attributes,
        )


def detect_features(p: Path) -> FeatureSet:
    acc = {
        "child": False, "desc": False, "filter": False, "wild": False,
        "disj": False, "vars": set(), "ineq": False, "attrs": set(),
    }
    _scan_path(p, acc)
    return FeatureSet(
        uses_child=acc["child"],
        uses_descendant=acc["desc"],
        uses_filter=acc["filter"],
        uses_wildcard=acc["wild"],
        uses_disjunction=acc["disj"],
        uses_variables=bool(acc["vars"]),
        uses_inequality=acc["ineq"],
        variables=frozenset(acc["vars"]),
        attributes=frozenset(acc["attrs"]),
    )


def _scan_path(p: Path, acc: dict) -> None:
    if isinstance(p, Union):
        acc["disj"] = True
        for a in p.alts:
            _scan_path(a, acc)
    elif isinstance(p, Seq):
        for it in p.items:
            _scan_path(it, acc)
    else:
        if p.axis is Axis.CHILD:
            acc["child"] = True
        elif p.axis is Axis.DESCENDANT:
            acc["desc"] = True
        if p.test is None:
            acc["wild"] = True
        for f in p.filters:
            _scan_filter(f, acc)


def _scan_filter(f: Filter, acc: dict) -> None:
    if isinstance(f, LPath):
        # Variable comparisons inside brackets do not count as the filter
        # feature; only location-path predicates do.
        acc["filter"] = True
        _scan_path(f.path, acc)
    elif isinstance(f, FOr):
        acc["disj"] = True
        for a in f.alts:
            _scan_filter(a, acc)
    else:
        acc["vars"].add(f.var)
        acc["attrs"].add(f.attr)
        if isinstance(f, VarNeq):
            acc["ineq"] = True


def labels_of(p: Path) -> frozenset[str]:
    out: set[str] = set()

    def walk_path(q: Path) -> None:
        if isinstance(q, Union):
            for a in q.alts:
                walk_path(a)
        elif isinstance(q, Seq):
            for it in q.items:
                walk_path(it)
        else:
            if q.test is not None:
                out.add(q.test)
            for f in q.filters:
                walk_filter(f)

    def walk_filter(f: Filter) -> None:
        if isinstance(f, LPath):
            walk_path(f.path)
        elif isinstance(f, FOr):
            for a in f.alts:
                walk_filter(a)

    walk_path(p)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Classification


PLAIN = "plain"
XVARS = "xvars"
EVARS = "evars"

P = "P"
CONP = "coNP"
PSPACE = "PSPACE"
PI2P = "Pi2p"
EXPTIME = "EXPTIME"
UNDECIDABLE = "UNDECIDABLE"
UNKNOWN = "UNKNOWN"

ENGINE_CONP = "conp"
ENGINE_FINITE = "finite"
ENGINE_PTIME_DTD = "ptime-dtd"
ENGINE_CONP_DTD = "conp-dtd"
ENGINE_EXPTIME_DTD = "exptime-dtd"
ENGINE_XVARS = "xvars"
ENGINE_EVARS = "evars"
ENGINE_NONE = "none"


@dataclass(frozen=True)
class FragmentClass:
    engine: str
    complexity: str
    citation: str

    @property
    def refused(self) -> bool:
        return self.engine == ENGINE_NONE


def classify(fp: FeatureSet, fq: FeatureSet, has_dtd: bool,
             alphabet_mode: str, semantics: str) -> FragmentClass:
    """Pick the cheapest applicable engine for the combined feature set.

    alphabet_mode is "finite" or "infinite"; semantics is one of plain,
    xvars, evars.  Variables present under plain semantics are a caller
    error.
    """
    f = fp.union(fq)
    if semantics == PLAIN and f.uses_variables:
        raise ValueError("variables require xvars or evars semantics")
    if semantics != PLAIN and not f.uses_variables:
        semantics = PLAIN  # variable-free: both semantics coincide

    if semantics == EVARS:
        if (f.uses_wildcard and f.uses_descendant and f.uses_disjunction
                and f.uses_inequality):
            return FragmentClass(ENGINE_NONE, UNDECIDABLE, "Thm 5.7")
        if has_dtd:
            return FragmentClass(ENGINE_NONE, UNKNOWN, "Thm 5.5")
        if f.uses_wildcard:
            if not f.uses_inequality:
                return FragmentClass(ENGINE_NONE, PI2P, "Table 3")
            return FragmentClass(ENGINE_NONE, UNKNOWN, "Thm 5.7")
        label = CONP if not (f.uses_disjunction or f.uses_inequality) else PI2P
        return FragmentClass(ENGINE_EVARS, label, "Thm 5.5")

    if semantics == XVARS:
        if has_dtd:
            return FragmentClass(ENGINE_NONE, UNKNOWN, "Thm 5.1")
        if f.uses_wildcard and f.uses_descendant and f.uses_disjunction \
                and f.uses_inequality:
            return FragmentClass(ENGINE_XVARS, PSPACE, "Thm 5.1")
        if f.uses_inequality and not f.uses_wildcard and not f.uses_disjunction:
            # Only coNP-hardness is known for these rows.
            return FragmentClass(ENGINE_XVARS, UNKNOWN, "Thm 5.1")
        return FragmentClass(ENGINE_XVARS, PSPACE, "Thm 5.1")

    # Plain semantics.
    if has_dtd:
        if not (f.uses_filter or f.uses_wildcard or f.uses_disjunction):
            return FragmentClass(ENGINE_PTIME_DTD, P, "Thm 4.2")
        if f.uses_filter and not (f.uses_descendant or f.uses_wildcard
                                  or f.uses_disjunction):
            return FragmentClass(ENGINE_CONP_DTD, CONP, "Thm 4.4")
        complete = (f.uses_child and f.uses_descendant and f.uses_disjunction) \
            or (f.uses_child and f.uses_descendant and f.uses_filter
                and f.uses_wildcard)
        label = EXPTIME if complete else UNKNOWN
        return FragmentClass(ENGINE_EXPTIME_DTD, label, "Thm 4.6")
    if alphabet_mode == "finite":
        return FragmentClass(ENGINE_FINITE, PSPACE, "Thm 3.4")
    return FragmentClass(ENGINE_CONP, CONP, "Thm 3.1")
