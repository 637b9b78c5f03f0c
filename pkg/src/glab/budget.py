"""Search budgets and search statistics.

Every enumeration or membership question in this package is answered relative
to an explicit budget, so that a "no" can always be reported honestly as
"not within budget".  max_nodes bounds the size of any single tree considered;
max_trees bounds how many trees an enumeration stream may yield; the remaining
caps bound the internal state of the fixpoint engines.  Whenever a cap other
than the per-tree node bound cuts a search short, the search marks itself
exhausted and the callers surface that flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import GrammarError


@dataclass(frozen=True)
class Budget:
    max_nodes: int = 4096
    max_trees: int = 1_000_000
    max_steps: int = 2_000_000
    max_states: int = 50_000
    max_stack: int = 256
    max_demand: int = 64

    def __post_init__(self) -> None:
        for name in ("max_nodes", "max_trees", "max_steps", "max_states", "max_stack", "max_demand"):
            if getattr(self, name) < 1:
                raise GrammarError(f"budget field {name} must be positive")


DEFAULT_BUDGET = Budget()


@dataclass
class SearchStats:
    """Mutable counters threaded through a single search."""

    trees: int = 0
    steps: int = 0
    states: int = 0
    exhausted: bool = False
    reasons: list[str] = field(default_factory=list)

    def mark_exhausted(self, reason: str) -> None:
        self.exhausted = True
        if reason not in self.reasons:
            self.reasons.append(reason)


@dataclass(frozen=True)
class LanguageResult:
    """The strings found, plus whether any internal cap cut the search short.

    Words are tuples of terminal symbols sorted by length then
    lexicographically.  When exhausted is False the result is complete for
    every string whose minimal witness fits the budget.
    """

    words: tuple[tuple[str, ...], ...]
    exhausted: bool
    reasons: tuple[str, ...] = ()
