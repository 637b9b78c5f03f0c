"""Indexed grammars and their derivation trees.

An indexed grammar is a context-free skeleton whose nonterminals carry a stack
of index symbols.  Stacks are tuples with the front at position 0, so a push
puts the new index at position 0 and a pop removes it.  Three production
shapes exist:

    push   A -> B^f        one nonterminal daughter, f pushed onto its stack
    pop    A^f -> alpha    applicable when f is on top; daughters get the rest
    plain  A -> alpha      daughters copy the mother's stack unchanged

Terminal daughters always carry no stack.  A production with an empty right
hand side produces a single empty-string leaf, so internal nodes always have
at least one child and a derivation tree has at least two nodes.

Two language engines live here and deliberately stay separate so they can be
checked against each other:

* ``enumerate_derivations`` streams every derivation tree within a node budget
  in a fixed order (ascending node count, ties by the production-index
  sequence read in address order).  It is the reference semantics and the
  brute-force oracle.
* ``indexed_language_upto`` / ``indexed_membership`` run a worklist fixpoint
  over states (nonterminal, stack), computing for every reachable state the
  yields of bounded length together with a minimal witness.  State discovery
  is gated by an optimistic minimum-yield bound on truncated stacks, which is
  an exact exclusion; stack-length and state-count caps are budget events and
  set the exhausted flag.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Union

from .budget import Budget, DEFAULT_BUDGET, LanguageResult, SearchStats
from .errors import GrammarError
from .trees import ROOT, TreeAddress, TreeDomain, domain_of

Stack = tuple[str, ...]
Word = tuple[str, ...]


def _check_symbol(sym: str, role: str) -> None:
    if not sym or any(c.isspace() for c in sym):
        raise GrammarError(f"{role} symbol must be a non-empty token without whitespace: {sym!r}")


@dataclass(frozen=True)
class SymbolTable:
    """Declared nonterminals, terminals and indices, in declaration order.

    The three sets must be pairwise disjoint; order is preserved so that
    printing a grammar reproduces its source.
    """

    nonterminals: tuple[str, ...]
    terminals: tuple[str, ...]
    indices: tuple[str, ...]

    def __post_init__(self) -> None:
        for group, role in ((self.nonterminals, "nonterminal"), (self.terminals, "terminal"), (self.indices, "index")):
            for s in group:
                _check_symbol(s, role)
            if len(set(group)) != len(group):
                raise GrammarError(f"duplicate {role} declaration")
        n, t, i = set(self.nonterminals), set(self.terminals), set(self.indices)
        overlap = (n & t) | (n & i) | (t & i)
        if overlap:
            raise GrammarError(f"symbol classes must be disjoint, shared: {sorted(overlap)}")

    @cached_property
    def nonterminal_set(self) -> frozenset[str]:
        return frozenset(self.nonterminals)

    @cached_property
    def terminal_set(self) -> frozenset[str]:
        return frozenset(self.terminals)

    @cached_property
    def index_set(self) -> frozenset[str]:
        return frozenset(self.indices)


@dataclass(frozen=True)
class Push:
    """A -> B^f : push f onto the stack of the single daughter B."""

    lhs: str
    rhs: str
    index: str

    def __str__(self) -> str:
        return f"{self.lhs} -> {self.rhs} ^{self.index}"


@dataclass(frozen=True)
class Pop:
    """A^f -> alpha : applicable when f is on top; daughters get the popped stack."""

    lhs: str
    index: str
    rhs: tuple[str, ...]

    def __str__(self) -> str:
        rhs = " ".join(self.rhs) if self.rhs else "_"
        return f"{self.lhs} ^{self.index} -> {rhs}"


@dataclass(frozen=True)
class Plain:
    """A -> alpha : daughters copy the mother's stack."""

    lhs: str
    rhs: tuple[str, ...]

    def __str__(self) -> str:
        rhs = " ".join(self.rhs) if self.rhs else "_"
        return f"{self.lhs} -> {rhs}"


IndexedProduction = Union[Push, Pop, Plain]


@dataclass(frozen=True)
class IndexedGrammar:
    symbols: SymbolTable
    productions: tuple[IndexedProduction, ...]
    start: str

    def __post_init__(self) -> None:
        syms = self.symbols
        if self.start not in syms.nonterminal_set:
            raise GrammarError(f"start symbol {self.start!r} is not a declared nonterminal")
        for k, p in enumerate(self.productions):
            if p.lhs not in syms.nonterminal_set:
                raise GrammarError(f"rule {k}: left-hand side {p.lhs!r} is not a nonterminal")
            if isinstance(p, Push):
                if p.rhs not in syms.nonterminal_set:
                    raise GrammarError(f"rule {k}: push target {p.rhs!r} is not a nonterminal")
                if p.index not in syms.index_set:
                    raise GrammarError(f"rule {k}: {p.index!r} is not a declared index")
            else:
                if isinstance(p, Pop) and p.index not in syms.index_set:
                    raise GrammarError(f"rule {k}: {p.index!r} is not a declared index")
                for s in p.rhs:
                    if s not in syms.nonterminal_set and s not in syms.terminal_set:
                        raise GrammarError(f"rule {k}: {s!r} is neither nonterminal nor terminal")

    @cached_property
    def single_char_terminals(self) -> bool:
        return all(len(t) == 1 for t in self.symbols.terminals)

    def render_word(self, word: Word) -> str:
        sep = "" if self.single_char_terminals else " "
        return sep.join(word)

    def parse_word(self, text: str) -> Word:
        """Split surface text into terminal symbols and validate them."""
        if text == "":
            return ()
        parts = tuple(text) if self.single_char_terminals else tuple(text.split())
        for s in parts:
            if s not in self.symbols.terminal_set:
                raise GrammarError(f"{s!r} is not a terminal of this grammar")
        return parts


# --------------------------------------------------------------------------
# Derivation trees


@dataclass(frozen=True)
class NodeLabel:
    """Label of an internal node: a nonterminal with its index stack (front = top)."""

    symbol: str
    stack: Stack = ()


@dataclass(frozen=True)
class LeafLabel:
    """Label of a leaf: a terminal symbol, or "" for the empty string."""

    symbol: str


Label = Union[NodeLabel, LeafLabel]


@dataclass(frozen=True, eq=False)
class DerivationTree:
    """A labeled tree domain.

    Internal addresses carry NodeLabel, leaves carry LeafLabel; this shape
    constraint is definitional and enforced at construction.  Whether the tree
    is licensed by a particular grammar is a separate question answered by
    validate_derivation_tree.
    """

    domain: TreeDomain
    labels: Mapping[TreeAddress, Label]

    def __post_init__(self) -> None:
        if set(self.labels) != self.domain.addresses:
            raise GrammarError("labels must cover exactly the tree domain")
        for a in self.domain.sorted_addresses:
            lab = self.labels[a]
            if self.domain.out_degree(a) > 0 and not isinstance(lab, NodeLabel):
                raise GrammarError(f"internal node {a} must carry a nonterminal label")
            if self.domain.out_degree(a) == 0 and not isinstance(lab, LeafLabel):
                raise GrammarError(f"leaf {a} must carry a terminal or empty label")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DerivationTree)
            and self.domain.addresses == other.domain.addresses
            and dict(self.labels) == dict(other.labels)
        )

    def symbol_at(self, a: TreeAddress) -> str:
        return self.labels[a].symbol

    def stack_at(self, a: TreeAddress) -> Stack:
        lab = self.labels[a]
        return lab.stack if isinstance(lab, NodeLabel) else ()


def tree_of(labels: Mapping[TreeAddress, Label]) -> DerivationTree:
    return DerivationTree(domain_of(labels.keys()), dict(labels))


def terminal_symbols(t: DerivationTree) -> Word:
    """Leaf symbols in address order, empty-string leaves dropped."""
    out = []
    for a in t.domain.leaves:
        s = t.labels[a].symbol
        if s:
            out.append(s)
    return tuple(out)


def terminal_string(t: DerivationTree) -> str:
    """The terminal string: leaf symbols concatenated in address order."""
    return "".join(terminal_symbols(t))


# --------------------------------------------------------------------------
# Structural checks and the end-marker transformation


@dataclass(frozen=True)
class ReducedFormReport:
    is_reduced: bool
    offenders: tuple[int, ...]  # production indices


def _production_reduced(g: IndexedGrammar, p: IndexedProduction) -> bool:
    nts = g.symbols.nonterminal_set
    if isinstance(p, Push):
        return True
    if isinstance(p, Pop):
        return len(p.rhs) == 1 and p.rhs[0] in nts
    # plain: exactly two nonterminals, or a single terminal, or empty
    if len(p.rhs) == 2:
        return all(s in nts for s in p.rhs)
    if len(p.rhs) == 1:
        return p.rhs[0] in g.symbols.terminal_set
    return len(p.rhs) == 0


def reduced_form_check(g: IndexedGrammar) -> ReducedFormReport:
    offenders = tuple(k for k, p in enumerate(g.productions) if not _production_reduced(g, p))
    return ReducedFormReport(not offenders, offenders)


def marked_index_end_check(g: IndexedGrammar) -> bool:
    """True iff the start symbol occurs in exactly one production, that
    production is a push S -> A^e, and its index e occurs in no other rule."""
    mentions = []
    for k, p in enumerate(g.productions):
        occurs = p.lhs == g.start
        if isinstance(p, Push):
            occurs = occurs or p.rhs == g.start
        else:
            occurs = occurs or g.start in p.rhs
        if occurs:
            mentions.append(k)
    if len(mentions) != 1:
        return False
    p = g.productions[mentions[0]]
    if not isinstance(p, Push) or p.lhs != g.start:
        return False
    marker = p.index
    for k, q in enumerate(g.productions):
        if k == mentions[0]:
            continue
        if isinstance(q, (Push, Pop)) and q.index == marker:
            return False
    return True


def fresh_symbol(base: str, taken) -> str:
    """base if unused, else base_1, base_2, ..."""
    if base not in taken:
        return base
    k = 1
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"


def mark_index_end(g: IndexedGrammar) -> IndexedGrammar:
    """Wrap the grammar so every index stack ends in a fresh marker index.

    Adds a fresh start symbol S0 and a fresh index $ with the single rule
    S0 -> S^$.  The language is unchanged and reduced form is preserved.
    """
    taken = set(g.symbols.nonterminals) | set(g.symbols.terminals) | set(g.symbols.indices)
    s0 = fresh_symbol(g.start + "_0", taken)
    taken.add(s0)
    marker = fresh_symbol("$", taken)
    symbols = SymbolTable(
        g.symbols.nonterminals + (s0,),
        g.symbols.terminals,
        g.symbols.indices + (marker,),
    )
    productions = g.productions + (Push(s0, g.start, marker),)
    return IndexedGrammar(symbols, productions, s0)


# --------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    errors: tuple[tuple[TreeAddress, str, str], ...]  # (address, condition, message)
    license: Mapping[TreeAddress, int] | None

    @property
    def first_error(self) -> tuple[TreeAddress, str, str] | None:
        return self.errors[0] if self.errors else None


def _child_specs(g: IndexedGrammar, p: IndexedProduction, stack: Stack):
    """The labels a node's children must carry when licensed by p, or None
    when p does not apply to this (symbol-independent) stack."""
    if isinstance(p, Push):
        return [NodeLabel(p.rhs, (p.index,) + stack)]
    if isinstance(p, Pop):
        if not stack or stack[0] != p.index:
            return None
        tail = stack[1:]
    else:
        tail = stack
    rhs = p.rhs
    if not rhs:
        return [LeafLabel("")]
    specs: list[Label] = []
    for s in rhs:
        if s in g.symbols.nonterminal_set:
            specs.append(NodeLabel(s, tail))
        else:
            specs.append(LeafLabel(s))
    return specs


def validate_derivation_tree(g: IndexedGrammar, t: DerivationTree) -> ValidationReport:
    """Check the tree against the grammar and return the licensing map.

    Conditions: the root carries the start symbol with an empty stack and is
    internal; every internal node's children match exactly one production
    (the first matching production, in rule order, becomes its license);
    leaves carry declared terminals or the empty string.
    """
    errors: list[tuple[TreeAddress, str, str]] = []
    license: dict[TreeAddress, int] = {}
    root_label = t.labels[ROOT]
    if not isinstance(root_label, NodeLabel) or root_label.symbol != g.start or root_label.stack:
        errors.append((ROOT, "root", f"root must be the start symbol {g.start!r} with an empty stack"))
    for a in t.domain.sorted_addresses:
        lab = t.labels[a]
        if isinstance(lab, LeafLabel):
            if lab.symbol and lab.symbol not in g.symbols.terminal_set:
                errors.append((a, "leaf", f"{lab.symbol!r} is not a terminal of the grammar"))
            continue
        if lab.symbol not in g.symbols.nonterminal_set:
            errors.append((a, "symbol", f"{lab.symbol!r} is not a nonterminal of the grammar"))
            continue
        if any(i not in g.symbols.index_set for i in lab.stack):
            errors.append((a, "stack", f"stack {lab.stack} uses undeclared indices"))
            continue
        actual = [t.labels[c] for c in t.domain.children(a)]
        for k, p in enumerate(g.productions):
            if p.lhs != lab.symbol:
                continue
            specs = _child_specs(g, p, lab.stack)
            if specs is not None and specs == actual:
                license[a] = k
                break
        else:
            errors.append((a, "license", f"no production licenses {lab.symbol!r} with stack {lab.stack} and these children"))
    ok = not errors
    return ValidationReport(ok, tuple(errors), license if ok else None)


# --------------------------------------------------------------------------
# Enumeration stream

_LEAF = "leaf"


class _SizedEnumerator:
    """Memoized enumeration of subtrees with an exact node count.

    Results per (symbol, stack, size) are tuples of structure nodes sorted by
    their production-index sequence read in preorder, which equals address
    order; a structure node is (seq, label, children) where children mix
    structure nodes and leaf markers ("leaf", symbol).
    """

    def __init__(self, g: IndexedGrammar, budget: Budget, stats: SearchStats):
        self.g = g
        self.budget = budget
        self.stats = stats
        self.memo: dict[tuple[str, Stack, int], tuple] = {}

    def subtrees(self, sym: str, stack: Stack, size: int):
        key = (sym, stack, size)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if size < 2:
            self.memo[key] = ()
            return ()
        out = []
        for pi, p in enumerate(self.g.productions):
            if p.lhs != sym:
                continue
            specs = _child_specs(self.g, p, stack)
            if specs is None:
                continue
            self.stats.steps += 1
            if self.stats.steps > self.budget.max_steps:
                self.stats.mark_exhausted("max_steps")
                break
            slots = []
            fixed = 0
            for spec in specs:
                if isinstance(spec, LeafLabel):
                    slots.append(spec)
                    fixed += 1
                else:
                    slots.append(spec)
            free = [i for i, s in enumerate(slots) if isinstance(s, NodeLabel)]
            remaining = size - 1 - fixed
            if not free:
                if remaining == 0:
                    children = tuple((_LEAF, s.symbol) for s in slots)
                    out.append(((pi,), NodeLabel(sym, stack), children))
                continue
            # distribute `remaining` nodes over the nonterminal slots, >= 2 each
            for combo in _compositions(remaining, len(free), 2):
                parts = []
                dead = False
                for idx, sz in zip(free, combo):
                    spec = slots[idx]
                    subs = self.subtrees(spec.symbol, spec.stack, sz)
                    if not subs:
                        dead = True
                        break
                    parts.append(subs)
                if dead:
                    continue
                for chosen in itertools.product(*parts):
                    children: list = []
                    seq: tuple[int, ...] = (pi,)
                    it = iter(chosen)
                    for s in slots:
                        if isinstance(s, LeafLabel):
                            children.append((_LEAF, s.symbol))
                        else:
                            node = next(it)
                            children.append(node)
                            seq = seq + node[0]
                    out.append((seq, NodeLabel(sym, stack), tuple(children)))
        out.sort(key=lambda n: n[0])
        result = tuple(out)
        self.memo[key] = result
        return result


def _compositions(total: int, parts: int, minimum: int):
    """All ways to write total as an ordered sum of `parts` integers >= minimum."""
    if parts == 1:
        if total >= minimum:
            yield (total,)
        return
    for first in range(minimum, total - minimum * (parts - 1) + 1):
        for rest in _compositions(total - first, parts - 1, minimum):
            yield (first,) + rest


def _materialize(node) -> DerivationTree:
    labels: dict[TreeAddress, Label] = {}

    def walk(n, addr: TreeAddress) -> None:
        if n[0] == _LEAF:
            labels[addr] = LeafLabel(n[1])
            return
        _, lab, children = n
        labels[addr] = lab
        for i, c in enumerate(children, start=1):
            walk(c, addr.child(i))

    walk(node, ROOT)
    return tree_of(labels)


def enumerate_derivations(
    g: IndexedGrammar,
    budget: Budget = DEFAULT_BUDGET,
    stats: SearchStats | None = None,
) -> Iterator[DerivationTree]:
    """Stream every derivation tree with at most budget.max_nodes nodes.

    Order: ascending node count; within one node count, lexicographic by the
    sequence of production indices applied, read in address order.  The stream
    stops early when budget.max_trees trees have been yielded or the step cap
    is hit; `stats` (when given) records whether that happened.
    """
    stats = stats if stats is not None else SearchStats()
    enum = _SizedEnumerator(g, budget, stats)
    for size in range(2, budget.max_nodes + 1):
        for node in enum.subtrees(g.start, (), size):
            if stats.trees >= budget.max_trees:
                stats.mark_exhausted("max_trees")
                return
            stats.trees += 1
            yield _materialize(node)
        if stats.exhausted:
            return


# --------------------------------------------------------------------------
# Minimum-yield bound on truncated stacks

_TRUNC = "\x00..."
_TAU = 6


class _MinYieldOracle:
    """Optimistic lower bound on the yield length reachable from (sym, stack).

    Stacks are abstracted to their first _TAU entries plus a truncation
    marker; a pop on the marker optimistically matches every pop rule.  The
    least fixpoint is computed by worklist relaxation, so the bound is exact
    on the abstract system and a true lower bound on the concrete one.
    """

    def __init__(self, g: IndexedGrammar, cap: int):
        self.g = g
        self.cap = cap  # saturation value: maxlen + 1
        self.value: dict[tuple[str, Stack], int] = {}
        self.deps: dict[tuple[str, Stack], set[tuple[str, Stack]]] = {}

    def _abstract(self, sym: str, stack: Stack) -> tuple[str, Stack]:
        if len(stack) > _TAU:
            return (sym, stack[:_TAU] + (_TRUNC,))
        return (sym, stack)

    def _successors(self, state: tuple[str, Stack]):
        sym, stack = state
        truncated = stack and stack[-1] == _TRUNC
        core = stack[:-1] if truncated else stack
        for p in self.g.productions:
            if p.lhs != sym:
                continue
            if isinstance(p, Push):
                child = (p.index,) + core
                if truncated or len(child) > _TAU:
                    child = child[:_TAU] + (_TRUNC,)
                yield [self._key(p.rhs, child)], 0
            elif isinstance(p, Pop):
                if core:
                    if core[0] != p.index:
                        continue
                    tail: Stack = core[1:] + ((_TRUNC,) if truncated else ())
                elif truncated:
                    tail = (_TRUNC,)  # unknown suffix, optimistically any index
                else:
                    continue
                yield self._rhs_states(p.rhs, tail)
            else:
                tail = core + ((_TRUNC,) if truncated else ())
                yield self._rhs_states(p.rhs, tail)

    def _key(self, sym: str, stack: Stack):
        return (sym, stack)

    def _rhs_states(self, rhs: tuple[str, ...], tail: Stack):
        states = []
        terminals = 0
        for s in rhs:
            if s in self.g.symbols.nonterminal_set:
                states.append((s, tail))
            else:
                terminals += 1
        return states, terminals

    def bound(self, sym: str, stack: Stack) -> int:
        state = self._abstract(sym, stack)
        if state in self.value:
            return self.value[state]
        # discover the abstract closure from this state, then relax to fixpoint
        new = [state]
        seen = {state}
        succ_cache: dict = {}
        while new:
            s = new.pop()
            if s in self.value:
                continue
            self.value[s] = self.cap
            succ_cache[s] = list(self._successors(s))
            for children, _ in succ_cache[s]:
                for c in children:
                    self.deps.setdefault(c, set()).add(s)
                    if c not in seen and c not in self.value:
                        seen.add(c)
                        new.append(c)
        work = list(succ_cache)
        in_work = set(work)
        while work:
            s = work.pop()
            in_work.discard(s)
            best = self.value[s]
            for children, terminals in succ_cache.get(s) or self._cached_succ(succ_cache, s):
                total = terminals
                for c in children:
                    total += self.value.get(c, self.cap)
                    if total >= best:
                        break
                if total < best:
                    best = total
            if best < self.value[s]:
                self.value[s] = best
                for parent in self.deps.get(s, ()):
                    if parent not in in_work and parent in self.value:
                        work.append(parent)
                        in_work.add(parent)
        return self.value[state]

    def _cached_succ(self, cache, s):
        if s not in cache:
            cache[s] = list(self._successors(s))
        return cache[s]


# --------------------------------------------------------------------------
# Fixpoint language engine


@dataclass(frozen=True)
class _Entry:
    cost: int
    seq: tuple[int, ...]
    rule: int
    children: tuple  # ("t", sym) | ("eps",) | ("s", state, key)


_State = tuple[str, Stack]


class _IndexedFixpoint:
    """Per-state yield sets with minimal witnesses, to a least fixpoint."""

    def __init__(self, g: IndexedGrammar, maxlen: int, budget: Budget):
        self.g = g
        self.maxlen = maxlen
        self.budget = budget
        self.stats = SearchStats()
        self.oracle = _MinYieldOracle(g, maxlen + 1)
        self.entries: dict[_State, dict[Word, _Entry]] = {}
        self.deps: dict[_State, set[tuple[_State, int]]] = {}
        self.root: _State = (g.start, ())
        self._pending: list[tuple[_State, int]] = []
        self._pending_set: set[tuple[_State, int]] = set()
        self._stack_cap = min(budget.max_stack, budget.max_nodes)

    # -- state management

    def _discover(self, state: _State) -> bool:
        if state in self.entries:
            return True
        sym, stack = state
        if len(stack) > self._stack_cap:
            self.stats.mark_exhausted("max_stack")
            return False
        if self.oracle.bound(sym, stack) > self.maxlen:
            return False  # exact exclusion, not a budget event
        if len(self.entries) >= self.budget.max_states:
            self.stats.mark_exhausted("max_states")
            return False
        self.entries[state] = {}
        self.stats.states += 1
        for pi, p in enumerate(self.g.productions):
            if p.lhs == sym and _child_specs(self.g, p, stack) is not None:
                self._enqueue((state, pi))
        return True

    def _enqueue(self, combo: tuple[_State, int]) -> None:
        if combo not in self._pending_set:
            self._pending_set.add(combo)
            self._pending.append(combo)

    # -- relaxation

    def run(self) -> None:
        self._discover(self.root)
        while self._pending:
            if self.stats.steps > self.budget.max_steps:
                self.stats.mark_exhausted("max_steps")
                break
            combo = self._pending.pop(0)
            self._pending_set.discard(combo)
            self._process(combo)

    def _process(self, combo: tuple[_State, int]) -> None:
        state, pi = combo
        sym, stack = state
        p = self.g.productions[pi]
        specs = _child_specs(self.g, p, stack)
        if specs is None:
            return
        child_lists: list[list[tuple[Word, int, tuple[int, ...], tuple]]] = []
        for spec in specs:
            if isinstance(spec, LeafLabel):
                w: Word = (spec.symbol,) if spec.symbol else ()
                tag = ("t", spec.symbol) if spec.symbol else ("eps",)
                child_lists.append([(w, 1, (), tag)])
            else:
                cstate = (spec.symbol, spec.stack)
                if not self._discover(cstate):
                    return
                self.deps.setdefault(cstate, set()).add(combo)
                options = [
                    (y, e.cost, e.seq, ("s", cstate, y))
                    for y, e in sorted(self.entries[cstate].items())
                ]
                if not options:
                    return
                child_lists.append(options)
        changed = False
        for chosen in itertools.product(*child_lists):
            self.stats.steps += 1
            if self.stats.steps > self.budget.max_steps:
                self.stats.mark_exhausted("max_steps")
                return
            total_len = sum(len(c[0]) for c in chosen)
            if total_len > self.maxlen:
                continue
            cost = 1 + sum(c[1] for c in chosen)
            if cost > self.budget.max_nodes:
                continue
            word: Word = sum((c[0] for c in chosen), ())
            seq = (pi,) + sum((c[2] for c in chosen), ())
            entry = _Entry(cost, seq, pi, tuple(c[3] for c in chosen))
            store = self.entries[state]
            old = store.get(word)
            if old is None or (cost, seq) < (old.cost, old.seq):
                store[word] = entry
                changed = True
        if changed:
            for parent_combo in self.deps.get(state, ()):
                self._enqueue(parent_combo)

    # -- results

    def language(self) -> tuple[Word, ...]:
        words = self.entries.get(self.root, {})
        return tuple(sorted(words, key=lambda w: (len(w), w)))

    def witness(self, word: Word) -> DerivationTree | None:
        store = self.entries.get(self.root, {})
        if word not in store:
            return None
        labels: dict[TreeAddress, Label] = {}

        def build(state: _State, key: Word, addr: TreeAddress) -> None:
            sym, stack = state
            labels[addr] = NodeLabel(sym, stack)
            e = self.entries[state][key]
            for i, tag in enumerate(e.children, start=1):
                child_addr = addr.child(i)
                if tag[0] == "t":
                    labels[child_addr] = LeafLabel(tag[1])
                elif tag[0] == "eps":
                    labels[child_addr] = LeafLabel("")
                else:
                    build(tag[1], tag[2], child_addr)

        build(self.root, word, ROOT)
        return tree_of(labels)


def indexed_language_upto(g: IndexedGrammar, maxlen: int, budget: Budget = DEFAULT_BUDGET) -> LanguageResult:
    """All terminal strings of length <= maxlen with a derivation within budget.

    Sorted by length, then lexicographically.  When `exhausted` is False the
    result is complete for every string whose minimal derivation fits in
    budget.max_nodes nodes.
    """
    if maxlen < 0:
        raise GrammarError("maxlen must be >= 0")
    fp = _IndexedFixpoint(g, maxlen, budget)
    fp.run()
    return LanguageResult(fp.language(), fp.stats.exhausted, tuple(fp.stats.reasons))


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    witness: DerivationTree | None
    exhausted: bool


def indexed_membership(g: IndexedGrammar, w: Word | str, budget: Budget = DEFAULT_BUDGET) -> MembershipResult:
    """Decide whether w has a derivation within budget; on success return a
    minimal-node witness tree (ties broken by production-index sequence)."""
    word = g.parse_word(w) if isinstance(w, str) else tuple(w)
    for s in word:
        if s not in g.symbols.terminal_set:
            raise GrammarError(f"{s!r} is not a terminal of this grammar")
    fp = _IndexedFixpoint(g, len(word), budget)
    fp.run()
    witness = fp.witness(word)
    if witness is not None:
        report = validate_derivation_tree(g, witness)
        if not report.ok:  # pragma: no cover - engine invariant
            raise GrammarError(f"internal error: witness failed validation: {report.first_error}")
        return MembershipResult(True, witness, fp.stats.exhausted)
    return MembershipResult(False, None, fp.stats.exhausted)
