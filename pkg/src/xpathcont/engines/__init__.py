"""Containment deciders and the feature-based dispatcher."""

from __future__ import annotations

from ..automata import build_subexpr_dta, dtd_to_dta, find_accepted_tree, product
from ..budget import Budget, ResourceExceeded, Stats
from ..dtd import EmptyLanguageError, sanitize_dtd
from ..fragments import (
    ENGINE_CONP, ENGINE_CONP_DTD, ENGINE_EVARS, ENGINE_EXPTIME_DTD,
    ENGINE_FINITE, ENGINE_NONE, ENGINE_PTIME_DTD, ENGINE_XVARS,
    FragmentClass, classify, detect_features, labels_of,
)
from ..patterns import dnf_disjuncts, to_tree_pattern
from ..syntax import Path, UNSAT, normalize
from ..trees import evaluate, evaluate_existential
from .base import (
    CONTAINED, EVARS, NOT_CONTAINED, PLAIN, REFUSED, XVARS,
    EngineError, Instance, Verdict, WitnessError, checked_witness,
    minimize_witness, replay_witness,
)
from .nodtd import (
    contain_finite_alphabet, contain_nodtd_conp, fresh_label,
    pattern_expansions,
)
from .vars import contain_evars, contain_xvars, _Skeleton
from .withdtd import contain_dtd_conp, contain_dtd_exptime, contain_dtd_ptime

CITATIONS = {
    ENGINE_CONP: "Thm 3.1",
    ENGINE_FINITE: "Thm 3.4",
    ENGINE_PTIME_DTD: "Thm 4.2",
    ENGINE_CONP_DTD: "Thm 4.4",
    ENGINE_EXPTIME_DTD: "Thm 4.6",
    ENGINE_XVARS: "Thm 5.1",
    ENGINE_EVARS: "Thm 5.5",
}

ORACLE_DEFAULT_BOUND = 6


def decide(inst: Instance, engine: str = "auto") -> Verdict:
    """Normalize, classify, dispatch, and double-check any counterexample."""
    budget = inst.budget if inst.budget is not None else Budget.from_env()
    stats = Stats()

    np_ = normalize(inst.p)
    nq = normalize(inst.q)
    fp = detect_features(np_ if np_ is not UNSAT else inst.p)
    fq = detect_features(nq if nq is not UNSAT else inst.q)
    fc = classify(fp, fq, inst.dtd is not None,
                  "finite" if inst.alphabet is not None else "infinite",
                  inst.semantics)

    if np_ is UNSAT:
        return Verdict(CONTAINED, fc.engine, fc.complexity, fc.citation,
                       note="p is unsatisfiable", stats=stats.finish(budget))

    chosen = fc.engine if engine == "auto" else engine
    if chosen == ENGINE_NONE:
        return Verdict(REFUSED, ENGINE_NONE, fc.complexity, fc.citation,
                       note="no decision procedure covers this fragment",
                       stats=stats.finish(budget))

    dtd = inst.dtd
    if dtd is not None:
        try:
            dtd = sanitize_dtd(dtd)
        except EmptyLanguageError:
            return Verdict(CONTAINED, fc.engine, fc.complexity, fc.citation,
                           note="the DTD derives no tree",
                           stats=stats.finish(budget))

    if chosen == "oracle":
        from ..oracle import oracle_decide

        checked = Instance(np_, inst.q, dtd, inst.alphabet, inst.semantics,
                           budget)
        res = oracle_decide(checked, ORACLE_DEFAULT_BOUND)
        outcome = CONTAINED if res.contained else NOT_CONTAINED
        note = "" if res.exact or not res.contained else \
            f"contained up to {ORACLE_DEFAULT_BOUND} nodes only"
        return Verdict(outcome, "oracle", fc.complexity, fc.citation,
                       witness=res.witness,
                       witness_assignment=res.witness_assignment,
                       note=note, stats=stats.finish(budget))

    if nq is UNSAT:
        # q matches nothing, so the verdict is satisfiability of p.
        found = _find_model(np_, dtd, inst.alphabet, inst.semantics, budget)
        note = "q is unsatisfiable"
        if found is None:
            return Verdict(CONTAINED, fc.engine, fc.complexity, fc.citation,
                           note=note + "; so is p",
                           stats=stats.finish(budget))
        wit, rho = found
        original = Instance(inst.p, inst.q, inst.dtd, inst.alphabet,
                            inst.semantics)
        wit = minimize_witness(original, checked_witness(original, wit, rho),
                               rho)
        return Verdict(NOT_CONTAINED, fc.engine, fc.complexity, fc.citation,
                       witness=wit, witness_assignment=rho, note=note,
                       stats=stats.finish(budget))

    if inst.alphabet is not None:
        missing = (labels_of(np_) | labels_of(nq)) - set(inst.alphabet)
        if missing:
            raise EngineError(
                f"alphabet does not cover labels {sorted(missing)}")

    if chosen == ENGINE_CONP:
        v = contain_nodtd_conp(np_, nq, budget)
    elif chosen == ENGINE_FINITE:
        if inst.alphabet is None:
            raise EngineError("the finite-alphabet engine needs an alphabet")
        v = contain_finite_alphabet(np_, nq, inst.alphabet, budget)
    elif chosen == ENGINE_PTIME_DTD:
        v = contain_dtd_ptime(np_, nq, dtd, budget)
    elif chosen == ENGINE_CONP_DTD:
        v = contain_dtd_conp(np_, nq, dtd, budget)
    elif chosen == ENGINE_EXPTIME_DTD:
        v = contain_dtd_exptime(np_, nq, dtd, budget)
    elif chosen == ENGINE_XVARS:
        v = contain_xvars(np_, nq, budget)
    elif chosen == ENGINE_EVARS:
        v = contain_evars(np_, nq, budget)
    else:
        raise EngineError(f"unknown engine {chosen!r}")

    v.complexity = fc.complexity
    v.citation = CITATIONS.get(chosen, fc.citation)
    if v.outcome == NOT_CONTAINED:
        # engines verify against the instance they saw; re-verify against
        # the original one
        original = Instance(inst.p, inst.q, inst.dtd, inst.alphabet,
                            inst.semantics)
        checked_witness(original, v.witness, v.witness_assignment)
    return v


def _find_model(p: Path, dtd, alphabet, semantics, budget):
    """A tree (and assignment, under variable semantics) matched by p, or
    None when p is unsatisfiable in the given context."""
    if dtd is not None:
        wit = find_accepted_tree(
            product(dtd_to_dta(dtd), build_subexpr_dta(p, sorted(dtd.symbols))),
            budget)
        return None if wit is None else (wit, None)
    if semantics in (XVARS, EVARS):
        fresh = fresh_label(labels_of(p))
        for disjunct in dnf_disjuncts(p):
            skeleton = _Skeleton(to_tree_pattern(disjunct), fresh, set())
            for t in skeleton.canonical_trees(budget):
                ok, rho = evaluate_existential(disjunct, t)
                if ok:
                    return t, rho
        return None
    labels = sorted(alphabet) if alphabet else \
        [fresh_label(labels_of(p))] + sorted(labels_of(p))
    for disjunct in dnf_disjuncts(p):
        pat = to_tree_pattern(disjunct)
        for t in pattern_expansions(pat, labels, 0):
            budget.charge_tree()
            if evaluate(disjunct, t).matched:
                return t, None
    return None


__all__ = [
    "CONTAINED", "NOT_CONTAINED", "REFUSED", "PLAIN", "XVARS", "EVARS",
    "CITATIONS", "EngineError", "Instance", "Verdict", "WitnessError",
    "Budget", "ResourceExceeded", "decide", "replay_witness",
    "checked_witness", "minimize_witness", "contain_nodtd_conp",
    "contain_finite_alphabet", "contain_dtd_ptime", "contain_dtd_conp",
    "contain_dtd_exptime", "contain_xvars", "contain_evars",
]
