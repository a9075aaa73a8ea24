"""Shared engine types: instances, verdicts, witness checking."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..budget import Budget, ResourceExceeded, Stats
from ..dtd import Dtd, matches_dtd
from ..syntax import Path
from ..trees import XmlTree, evaluate, evaluate_existential

CONTAINED = "Contained"
NOT_CONTAINED = "NotContained"
REFUSED = "Refused"

PLAIN = "plain"
XVARS = "xvars"
EVARS = "evars"


class EngineError(ValueError):
    """The instance is outside the engine's fragment."""


class WitnessError(AssertionError):
    """An engine produced a counterexample that does not replay."""


@dataclass
class Instance:
    p: Path
    q: Path
    dtd: Dtd | None = None
    alphabet: frozenset[str] | None = None
    semantics: str = PLAIN
    budget: Budget | None = None


@dataclass
class Verdict:
    outcome: str
    engine: str
    complexity: str = ""
    citation: str = ""
    witness: XmlTree | None = None
    witness_assignment: dict[str, int] | None = None
    note: str = ""
    stats: Stats | None = None

    @property
    def contained(self) -> bool:
        return self.outcome == CONTAINED


def replay_witness(inst: Instance, t: XmlTree,
                   rho: dict[str, int] | None = None) -> bool:
    """True iff t separates the instance: p matches, q does not, DTD holds."""
    if inst.dtd is not None and not matches_dtd(t, inst.dtd):
        return False
    if inst.semantics == EVARS:
        return evaluate_existential(inst.p, t)[0] \
            and not evaluate_existential(inst.q, t)[0]
    if inst.semantics == XVARS:
        if rho is None:
            return False
        return evaluate(inst.p, t, rho).matched \
            and not evaluate(inst.q, t, rho).matched
    return evaluate(inst.p, t).matched and not evaluate(inst.q, t).matched


def checked_witness(inst: Instance, t: XmlTree,
                    rho: dict[str, int] | None = None) -> XmlTree:
    if not replay_witness(inst, t, rho):
        raise WitnessError(f"witness does not replay: {t}")
    return t


def minimize_witness(inst: Instance, t: XmlTree,
                     rho: dict[str, int] | None = None) -> XmlTree:
    """Greedily delete leaves while the tree still separates the instance."""
    def without(node: XmlTree, pos: tuple[int, ...]) -> XmlTree:
        if len(pos) == 1:
            kids = node.children[: pos[0]] + node.children[pos[0] + 1:]
            return XmlTree(node.label, node.attrs, kids)
        i = pos[0]
        kids = list(node.children)
        kids[i] = without(kids[i], pos[1:])
        return XmlTree(node.label, node.attrs, tuple(kids))

    improved = True
    while improved:
        improved = False
        leaves = [pos for pos, node in t.vertices() if not node.children and pos]
        for pos in sorted(leaves, key=len, reverse=True):
            candidate = without(t, pos)
            if replay_witness(inst, candidate, rho):
                t = candidate
                improved = True
                break
    return t
