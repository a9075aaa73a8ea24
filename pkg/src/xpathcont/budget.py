"""Resource budgets shared by engines and automata constructions."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field


class ResourceExceeded(Exception):
    """A configured cap was hit; the verdict is unknown, never wrong."""


DEFAULT_BUDGET = 2_000_000


@dataclass
class Budget:
    """Caps on enumerated trees and automaton/search states."""

    max_trees: int = DEFAULT_BUDGET
    max_states: int = DEFAULT_BUDGET
    trees: int = 0
    states: int = 0

    def charge_tree(self, n: int = 1) -> None:
        self.trees += n
        if self.trees > self.max_trees:
            raise ResourceExceeded(f"tree budget exceeded ({self.max_trees})")

    def charge_state(self, n: int = 1) -> None:
        self.states += n
        if self.states > self.max_states:
            raise ResourceExceeded(f"state budget exceeded ({self.max_states})")

    @classmethod
    def from_env(cls) -> "Budget":
        raw = os.environ.get("XPC_BUDGET")
        if raw:
            n = int(raw)
            return cls(max_trees=n, max_states=n)
        return cls()


@dataclass
class Stats:
    trees_examined: int = 0
    states_built: int = 0
    elapsed_s: float = 0.0
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def finish(self, budget: Budget) -> "Stats":
        self.trees_examined = budget.trees
        self.states_built = budget.states
        self.elapsed_s = time.perf_counter() - self._t0
        return self
