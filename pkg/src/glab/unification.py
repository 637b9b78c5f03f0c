"""Simple unification grammars and their constituent structures.

A simple unification grammar pairs a context-free skeleton with equation
schemata: every daughter slot of a production carries a finite set of
equations over the two arrows (up = the mother's address, down = the
daughter's), and every lexicon rule carries value equations over up only.
A c-structure is a categorized tree whose non-root nodes carry the schema of
their rule slot; the string it derives is grammatical when the instantiated
equations of the whole tree have a well-defined model.

The restricted subclass for stack-like behavior ("UGI" in the names below)
limits production schemata to three forms over one global attribute pair
(next, idx):

    copy    {up = dn}
    push    {dn next = up, dn idx = f}
    pop     {up next = dn, up idx = f}

and requires empty lexicon schemata.  For this subclass the module offers a
reduced form, a sink-mapped root wrapper, a canonical model construction and
a fixpoint language engine that tracks, per subtree, the string of values the
subtree demands below the free root node of the model.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterator, Mapping, Union

from .budget import Budget, DEFAULT_BUDGET, LanguageResult, SearchStats
from .errors import GrammarError, PreconditionError
from .features import (
    Consistent,
    Equation,
    FeatureStructure,
    Inconsistent,
    PathEq,
    SolveResult,
    ValEq,
    ValueClash,
    solve,
)
from .indexed import _check_symbol, fresh_symbol
from .trees import ROOT, TreeAddress, TreeDomain, domain_of

Path = tuple[str, ...]
Word = tuple[str, ...]


class Arrow(Enum):
    UP = "up"
    DOWN = "dn"

    @property
    def rank(self) -> int:
        return 0 if self is Arrow.UP else 1

    def __str__(self) -> str:
        return self.value


UP = Arrow.UP
DOWN = Arrow.DOWN


def _check_path(path: Path) -> None:
    for a in path:
        if not a or any(c.isspace() for c in a):
            raise GrammarError(f"attribute must be a non-empty token: {a!r}")


@dataclass(frozen=True)
class ArrowPathEq:
    """Two arrow-relative paths reach the same node.

    Stored in a canonical orientation (longer path first, up before down on
    ties) so that schema sets compare and print deterministically.
    """

    left: Arrow
    left_path: Path
    right: Arrow
    right_path: Path

    def __post_init__(self) -> None:
        _check_path(self.left_path)
        _check_path(self.right_path)
        flip = (len(self.left_path), -self.left.rank) < (len(self.right_path), -self.right.rank)
        if flip:
            left, lp = self.right, self.right_path
            right, rp = self.left, self.left_path
            object.__setattr__(self, "left", left)
            object.__setattr__(self, "left_path", lp)
            object.__setattr__(self, "right", right)
            object.__setattr__(self, "right_path", rp)

    def __str__(self) -> str:
        lhs = " ".join((str(self.left),) + self.left_path)
        rhs = " ".join((str(self.right),) + self.right_path)
        return f"{lhs} = {rhs}"


@dataclass(frozen=True)
class ArrowValEq:
    """An arrow-relative non-empty path carries an atomic value."""

    side: Arrow
    path: Path
    value: str

    def __post_init__(self) -> None:
        _check_path(self.path)
        if not self.path:
            raise GrammarError("value equations require a non-empty path")

    def __str__(self) -> str:
        return " ".join((str(self.side),) + self.path) + f" = {self.value}"


EqSchema = Union[ArrowPathEq, ArrowValEq]
Schema = frozenset


def _schema_key(e: EqSchema):
    if isinstance(e, ArrowPathEq):
        return (0, e.left.rank, e.left_path, e.right.rank, e.right_path, "")
    return (1, e.side.rank, e.path, 0, (), e.value)


def sorted_schema(schema: Schema) -> tuple[EqSchema, ...]:
    return tuple(sorted(schema, key=_schema_key))


def format_schema(schema: Schema) -> str:
    body = " ; ".join(str(e) for e in sorted_schema(schema))
    return "{ " + body + " }" if body else "{ }"


def copy_schema() -> Schema:
    return frozenset({ArrowPathEq(UP, (), DOWN, ())})


def push_schema(next_attr: str, idx_attr: str, value: str) -> Schema:
    return frozenset({ArrowPathEq(DOWN, (next_attr,), UP, ()), ArrowValEq(DOWN, (idx_attr,), value)})


def pop_schema(next_attr: str, idx_attr: str, value: str) -> Schema:
    return frozenset({ArrowPathEq(UP, (next_attr,), DOWN, ()), ArrowValEq(UP, (idx_attr,), value)})


def classify_schema(schema: Schema) -> tuple[str, str | None, tuple[str, str] | None] | None:
    """(kind, value, (next, idx)) for the three stack schema forms, else None."""
    eqs = list(schema)
    if len(eqs) == 1 and isinstance(eqs[0], ArrowPathEq):
        e = eqs[0]
        if e.left is UP and not e.left_path and e.right is DOWN and not e.right_path:
            return ("copy", None, None)
        return None
    if len(eqs) == 2:
        paths = [e for e in eqs if isinstance(e, ArrowPathEq)]
        vals = [e for e in eqs if isinstance(e, ArrowValEq)]
        if len(paths) == 1 and len(vals) == 1:
            pe, ve = paths[0], vals[0]
            if (
                len(pe.left_path) == 1
                and not pe.right_path
                and len(ve.path) == 1
                and pe.left is ve.side
                and pe.right is not ve.side
                and pe.left_path[0] != ve.path[0]
            ):
                pair = (pe.left_path[0], ve.path[0])
                return ("push" if pe.left is DOWN else "pop", ve.value, pair)
    return None


# --------------------------------------------------------------------------
# Grammars


@dataclass(frozen=True)
class Daughter:
    category: str
    schema: Schema

    def __post_init__(self) -> None:
        for e in self.schema:
            if not isinstance(e, (ArrowPathEq, ArrowValEq)):
                raise GrammarError("schema entries must be arrow equations")


@dataclass(frozen=True)
class UProduction:
    mother: str
    daughters: tuple[Daughter, ...]

    def __post_init__(self) -> None:
        if not self.daughters:
            raise GrammarError(f"production for {self.mother!r} needs at least one daughter")

    def __str__(self) -> str:
        parts = [f"{d.category} {format_schema(d.schema)}" for d in self.daughters]
        return f"{self.mother} -> " + " ".join(parts)


@dataclass(frozen=True)
class LexRule:
    mother: str
    word: str  # "" for the empty string
    schema: Schema

    def __post_init__(self) -> None:
        for e in self.schema:
            if not isinstance(e, ArrowValEq):
                raise GrammarError("lexicon schemata may contain value equations only")

    def __str__(self) -> str:
        w = self.word if self.word else "_"
        return f"{self.mother} -> {w} {format_schema(self.schema)}"


URule = Union[UProduction, LexRule]


@dataclass(frozen=True)
class SimpleUnificationGrammar:
    nonterminals: tuple[str, ...]
    terminals: tuple[str, ...]
    attributes: tuple[str, ...]
    values: tuple[str, ...]
    productions: tuple[UProduction, ...]
    lexicon: tuple[LexRule, ...]
    start: str

    def __post_init__(self) -> None:
        for group, role in (
            (self.nonterminals, "nonterminal"),
            (self.terminals, "terminal"),
            (self.attributes, "attribute"),
            (self.values, "value"),
        ):
            for s in group:
                _check_symbol(s, role)
            if len(set(group)) != len(group):
                raise GrammarError(f"duplicate {role} declaration")
        nts, ts = set(self.nonterminals), set(self.terminals)
        if nts & ts:
            raise GrammarError(f"nonterminals and terminals must be disjoint: {sorted(nts & ts)}")
        if self.start not in nts:
            raise GrammarError(f"start symbol {self.start!r} is not a declared nonterminal")
        attrs, vals = set(self.attributes), set(self.values)

        def check_schema(schema: Schema, where: str) -> None:
            for e in schema:
                if isinstance(e, ArrowPathEq):
                    used_attrs = set(e.left_path) | set(e.right_path)
                    used_vals: set[str] = set()
                else:
                    used_attrs = set(e.path)
                    used_vals = {e.value}
                if used_attrs - attrs:
                    raise GrammarError(f"{where}: undeclared attribute {sorted(used_attrs - attrs)}")
                if used_vals - vals:
                    raise GrammarError(f"{where}: undeclared value {sorted(used_vals - vals)}")

        for k, p in enumerate(self.productions):
            if p.mother not in nts:
                raise GrammarError(f"rule {k}: mother {p.mother!r} is not a nonterminal")
            for d in p.daughters:
                if d.category not in nts:
                    raise GrammarError(f"rule {k}: daughter {d.category!r} is not a nonterminal")
                check_schema(d.schema, f"rule {k}")
        for k, r in enumerate(self.lexicon):
            if r.mother not in nts:
                raise GrammarError(f"lexicon rule {k}: mother {r.mother!r} is not a nonterminal")
            if r.word and r.word not in ts:
                raise GrammarError(f"lexicon rule {k}: word {r.word!r} is not a terminal")
            check_schema(r.schema, f"lexicon rule {k}")

    @cached_property
    def combined_rules(self) -> tuple[URule, ...]:
        """Productions followed by lexicon rules; indices into this tuple are
        the rule references used by licensing and enumeration order."""
        return self.productions + self.lexicon

    @cached_property
    def single_char_terminals(self) -> bool:
        return all(len(t) == 1 for t in self.terminals)

    def render_word(self, word: Word) -> str:
        sep = "" if self.single_char_terminals else " "
        return sep.join(word)

    def parse_word(self, text: str) -> Word:
        if text == "":
            return ()
        parts = tuple(text) if self.single_char_terminals else tuple(text.split())
        terminal_set = set(self.terminals)
        for s in parts:
            if s not in terminal_set:
                raise GrammarError(f"{s!r} is not a terminal of this grammar")
        return parts


def used_values(g: SimpleUnificationGrammar) -> tuple[str, ...]:
    """Value symbols occurring in any rule, in declaration order."""
    seen: set[str] = set()
    for p in g.productions:
        for d in p.daughters:
            for e in d.schema:
                if isinstance(e, ArrowValEq):
                    seen.add(e.value)
    for r in g.lexicon:
        for e in r.schema:
            seen.add(e.value)
    return tuple(v for v in g.values if v in seen)


# --------------------------------------------------------------------------
# Constituent structures


@dataclass(frozen=True, eq=False)
class CStructure:
    """A categorized tree whose non-root nodes carry their rule-slot schema.

    categories maps every address to a nonterminal, terminal, or "" for the
    empty string; eqsets maps every non-root address to its schema.  Whether
    the structure is licensed by a grammar is checked by validate_cstructure.
    """

    domain: TreeDomain
    categories: Mapping[TreeAddress, str]
    eqsets: Mapping[TreeAddress, Schema]

    def __post_init__(self) -> None:
        if set(self.categories) != self.domain.addresses:
            raise GrammarError("categories must cover exactly the tree domain")
        if set(self.eqsets) != self.domain.addresses - {ROOT}:
            raise GrammarError("eqsets must cover exactly the non-root addresses")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CStructure)
            and self.domain.addresses == other.domain.addresses
            and dict(self.categories) == dict(other.categories)
            and dict(self.eqsets) == dict(other.eqsets)
        )

    @property
    def terminal_symbols(self) -> Word:
        out = []
        for a in self.domain.leaves:
            c = self.categories[a]
            if c:
                out.append(c)
        return tuple(out)

    @property
    def terminal_string(self) -> str:
        return "".join(self.terminal_symbols)


@dataclass(frozen=True)
class CsValidationReport:
    ok: bool
    errors: tuple[tuple[TreeAddress, str, str], ...]
    license: Mapping[TreeAddress, int] | None  # internal address -> combined rule index


def validate_cstructure(g: SimpleUnificationGrammar, cs: CStructure) -> CsValidationReport:
    """Check the tree against the grammar, licensing each internal node by the
    first combined rule (productions, then lexicon) matching its children's
    categories and schemata."""
    errors: list[tuple[TreeAddress, str, str]] = []
    license: dict[TreeAddress, int] = {}
    nts = set(g.nonterminals)
    ts = set(g.terminals)
    if cs.categories[ROOT] != g.start:
        errors.append((ROOT, "root", f"root must carry the start symbol {g.start!r}"))
    if cs.domain.out_degree(ROOT) == 0:
        errors.append((ROOT, "root", "the root must be licensed by a rule"))
    n_prods = len(g.productions)
    for a in cs.domain.sorted_addresses:
        cat = cs.categories[a]
        if cs.domain.out_degree(a) == 0:
            if a != ROOT and cat and cat not in ts:
                errors.append((a, "leaf", f"{cat!r} is not a terminal of the grammar"))
            continue
        if cat not in nts:
            errors.append((a, "symbol", f"{cat!r} is not a nonterminal of the grammar"))
            continue
        kids = cs.domain.children(a)
        actual = [(cs.categories[c], cs.eqsets[c]) for c in kids]
        found = None
        for k, p in enumerate(g.productions):
            if p.mother != cat or len(p.daughters) != len(actual):
                continue
            if all(d.category == ac and d.schema == asch for d, (ac, asch) in zip(p.daughters, actual)):
                found = k
                break
        if found is None and len(kids) == 1 and cs.domain.out_degree(kids[0]) == 0:
            leaf_cat, leaf_schema = actual[0]
            for k, r in enumerate(g.lexicon):
                if r.mother == cat and r.word == leaf_cat and r.schema == leaf_schema:
                    found = n_prods + k
                    break
        if found is None:
            errors.append((a, "license", f"no rule licenses {cat!r} with these children"))
        else:
            license[a] = found
    ok = not errors
    return CsValidationReport(ok, tuple(errors), license if ok else None)


def instantiate(schema: Schema, mother: TreeAddress, daughter: TreeAddress) -> frozenset[Equation]:
    """Substitute up by the mother's address and down by the daughter's."""
    if daughter.is_root or daughter.parent != mother:
        raise PreconditionError(f"{daughter} is not a daughter of {mother}")

    def at(arrow: Arrow) -> TreeAddress:
        return mother if arrow is UP else daughter

    out: set[Equation] = set()
    for e in schema:
        if isinstance(e, ArrowPathEq):
            out.add(PathEq(at(e.left), e.left_path, at(e.right), e.right_path))
        else:
            out.add(ValEq(at(e.side), e.path, e.value))
    return frozenset(out)


def collect_equations(cs: CStructure) -> frozenset[Equation]:
    """Union of the instantiated schemata of all non-root nodes."""
    out: set[Equation] = set()
    for a in cs.domain.sorted_addresses:
        if a.is_root:
            continue
        out |= instantiate(cs.eqsets[a], a.parent, a)
    return frozenset(out)


def generates_check(cs: CStructure) -> SolveResult:
    """Least-model consistency of the instantiated equations; the name domain
    is every address of the tree."""
    return solve(collect_equations(cs), cs.domain.addresses)


# --------------------------------------------------------------------------
# C-structure enumeration (reference engine)

_LEAF = "leaf"


class _SizedCsEnumerator:
    """Exact-size enumeration of c-structure subtrees spanning a word slice.

    Memoized per (category, start, end, size); entries are (seq, category,
    children) sorted by the combined-rule-index sequence in preorder.
    """

    def __init__(self, g: SimpleUnificationGrammar, word: Word, budget: Budget, stats: SearchStats):
        self.g = g
        self.word = word
        self.budget = budget
        self.stats = stats
        self.memo: dict[tuple[str, int, int, int], tuple] = {}

    def subtrees(self, cat: str, i: int, j: int, size: int):
        key = (cat, i, j, size)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if size < 2:
            self.memo[key] = ()
            return ()
        out = []
        n_prods = len(self.g.productions)
        for pi, p in enumerate(self.g.productions):
            if p.mother != cat:
                continue
            self.stats.steps += 1
            if self.stats.steps > self.budget.max_steps:
                self.stats.mark_exhausted("max_steps")
                break
            for combo in self._arrangements(p.daughters, i, j, size - 1):
                for chosen in itertools.product(*combo):
                    seq: tuple[int, ...] = (pi,)
                    for node in chosen:
                        seq = seq + node[0]
                    children = tuple((node, d.schema) for node, d in zip(chosen, p.daughters))
                    out.append((seq, cat, children))
        if not self.stats.exhausted and size == 2:
            for li, r in enumerate(self.g.lexicon):
                if r.mother != cat:
                    continue
                span = self.word[i:j]
                if span == ((r.word,) if r.word else ()):
                    leaf = (_LEAF, r.word)
                    out.append(((n_prods + li,), cat, ((leaf, r.schema),)))
        out.sort(key=lambda n: n[0])
        result = tuple(out)
        self.memo[key] = result
        return result

    def _arrangements(self, daughters, i: int, j: int, nodes_left: int):
        """All ways to give each daughter a contiguous slice and a size."""
        if len(daughters) == 1:
            subs = self.subtrees(daughters[0].category, i, j, nodes_left)
            if subs:
                yield (subs,)
            return
        d = daughters[0]
        for mid in range(i, j + 1):
            for sz in range(2, nodes_left - 2 * (len(daughters) - 1) + 1):
                subs = self.subtrees(d.category, i, mid, sz)
                if not subs:
                    continue
                for rest in self._arrangements(daughters[1:], mid, j, nodes_left - sz):
                    yield (subs,) + rest


def _size_ceiling(g: SimpleUnificationGrammar, n: int, max_nodes: int) -> int:
    """A sound upper bound on c-structure sizes over an n-symbol word.

    Without empty-string lexicon entries every leaf consumes a terminal, and
    without unit-production cycles a unary chain cannot repeat a category, so
    tree sizes are bounded; otherwise structures of every size may exist and
    the caller must sweep all sizes up to max_nodes.
    """
    if any(not r.word for r in g.lexicon):
        return max_nodes
    succ: dict[str, list[str]] = {}
    for p in g.productions:
        if len(p.daughters) == 1:
            succ.setdefault(p.mother, []).append(p.daughters[0].category)
    state: dict[str, int] = {}

    def cyclic(c: str) -> bool:
        if state.get(c) == 2:
            return False
        if state.get(c) == 1:
            return True
        state[c] = 1
        hit = any(cyclic(d) for d in succ.get(c, ()))
        state[c] = 2
        return hit

    if any(cyclic(c) for c in list(succ)):
        return max_nodes
    # n terminal leaves, their lexicon mothers, under n-1 branching nodes,
    # joined by unary chains of at most one node per category
    bound = 3 * n + (2 * n + 1) * len(g.nonterminals) + 2
    return min(max_nodes, bound)


def _materialize_cs(node, start_cat: str) -> CStructure:
    categories: dict[TreeAddress, str] = {}
    eqsets: dict[TreeAddress, Schema] = {}

    def walk(n, addr: TreeAddress) -> None:
        if n[0] == _LEAF:
            categories[addr] = n[1]
            return
        _, cat, children = n
        categories[addr] = cat
        for k, (child, schema) in enumerate(children, start=1):
            caddr = addr.child(k)
            eqsets[caddr] = schema
            walk(child, caddr)

    walk(node, ROOT)
    return CStructure(domain_of(categories.keys()), categories, eqsets)


def enumerate_cstructures(
    g: SimpleUnificationGrammar,
    word: Word | str,
    budget: Budget = DEFAULT_BUDGET,
    stats: SearchStats | None = None,
) -> Iterator[CStructure]:
    """Stream every c-structure whose terminal string is `word`, up to
    budget.max_nodes nodes, in ascending node count and rule-sequence order.

    The structures are valid for g by construction but not necessarily
    consistent; pair with generates_check to decide grammaticality.
    """
    w = g.parse_word(word) if isinstance(word, str) else tuple(word)
    for s in w:
        if s not in set(g.terminals):
            raise GrammarError(f"{s!r} is not a terminal of this grammar")
    stats = stats if stats is not None else SearchStats()
    enum = _SizedCsEnumerator(g, w, budget, stats)
    for size in range(2, _size_ceiling(g, len(w), budget.max_nodes) + 1):
        for node in enum.subtrees(g.start, 0, len(w), size):
            if stats.trees >= budget.max_trees:
                stats.mark_exhausted("max_trees")
                return
            stats.trees += 1
            yield _materialize_cs(node, g.start)
        if stats.exhausted:
            return


@dataclass(frozen=True)
class SugMembership:
    member: bool
    witness: CStructure | None
    model: FeatureStructure | None
    exhausted: bool


def sug_membership(g: SimpleUnificationGrammar, w: Word | str, budget: Budget = DEFAULT_BUDGET) -> SugMembership:
    """Search the c-structure stream for one that generates a model.

    This is the reference semantics: it tries every c-structure within budget
    and solves each equation set.  Exponential; meant for desk-scale inputs
    and for cross-checking the fixpoint engine.
    """
    stats = SearchStats()
    for cs in enumerate_cstructures(g, w, budget, stats):
        result = generates_check(cs)
        if isinstance(result, Consistent):
            return SugMembership(True, cs, result.model, stats.exhausted)
    return SugMembership(False, None, None, stats.exhausted)


# --------------------------------------------------------------------------
# The stack-schema subclass


@dataclass(frozen=True)
class UgiReport:
    """Classification of a grammar against the stack-schema subclass.

    offenders carries (kind, index, reason) with kind "production"/"lexicon";
    it lists the subclass violations, or the reduced-form violations when the
    grammar is in the subclass but not reduced.  attr_pair is the global
    (next, idx) pair when one is determined by the rules.
    """

    is_ugi: bool
    is_reduced: bool
    has_sink_mapped_root: bool
    offenders: tuple[tuple[str, int, str], ...]
    attr_pair: tuple[str, str] | None = None


def ugi_check(g: SimpleUnificationGrammar) -> UgiReport:
    offenders: list[tuple[str, int, str]] = []
    pair: tuple[str, str] | None = None
    kinds: dict[int, list[tuple[str, str | None]]] = {}
    for k, p in enumerate(g.productions):
        per_daughter: list[tuple[str, str | None]] = []
        for d in p.daughters:
            c = classify_schema(d.schema)
            if c is None:
                offenders.append(("production", k, f"daughter {d.category!r} schema {format_schema(d.schema)} is not copy/push/pop"))
                continue
            kind, value, dpair = c
            if dpair is not None:
                if pair is None:
                    pair = dpair
                elif pair != dpair:
                    offenders.append(("production", k, f"attribute pair {dpair} differs from {pair}"))
            per_daughter.append((kind, value))
        kinds[k] = per_daughter
    for k, r in enumerate(g.lexicon):
        if r.schema:
            offenders.append(("lexicon", k, "lexicon schemata must be empty"))
    is_ugi = not offenders

    is_reduced = False
    if is_ugi:
        reduced_offenders: list[tuple[str, int, str]] = []
        for k, p in enumerate(g.productions):
            shapes = [kind for kind, _ in kinds[k]]
            if len(shapes) == 1 and shapes[0] in ("push", "pop"):
                continue
            if len(shapes) == 2 and shapes == ["copy", "copy"]:
                continue
            reduced_offenders.append(("production", k, "not a unary push/pop or binary copy-copy rule"))
        is_reduced = not reduced_offenders
        offenders = reduced_offenders

    has_sink = False
    if is_ugi:
        mentions = [
            k
            for k, p in enumerate(g.productions)
            if p.mother == g.start or any(d.category == g.start for d in p.daughters)
        ]
        if len(mentions) == 1:
            k = mentions[0]
            p = g.productions[k]
            per = kinds[k]
            if p.mother == g.start and len(p.daughters) == 1 and per and per[0][0] == "push":
                marker = per[0][1]
                elsewhere = False
                for k2, p2 in enumerate(g.productions):
                    if k2 == k:
                        continue
                    for kind, value in kinds[k2]:
                        if value == marker:
                            elsewhere = True
                has_sink = not elsewhere

    return UgiReport(is_ugi, is_reduced, has_sink, tuple(offenders), pair)


def _require_ugi(g: SimpleUnificationGrammar, what: str) -> UgiReport:
    report = ugi_check(g)
    if not report.is_ugi:
        first = report.offenders[0] if report.offenders else ("?", -1, "unknown")
        raise PreconditionError(f"{what} needs stack-form schemata; offender: {first[0]} {first[1]}: {first[2]}")
    return report


def ugi_normalize(g: SimpleUnificationGrammar) -> SimpleUnificationGrammar:
    """Rewrite to reduced form: unary push/pop rules and binary copy-copy
    rules only, preserving the language.

    Steps: (i) push/pop daughters of rules with two or more daughters are
    detached through fresh unary nonterminals; (ii) rules with three or more
    (now all-copy) daughters are binarized with fresh nonterminals; (iii)
    unary copy rules are eliminated by composing them with the non-unit rules
    of their targets, to a fixpoint over the unit-reachability closure.
    Terminals never occur inside productions, so no step moves them.
    """
    _require_ugi(g, "normalization")
    taken = set(g.nonterminals) | set(g.terminals)
    fresh_nts: list[str] = []
    counter = itertools.count(1)

    def fresh() -> str:
        while True:
            name = fresh_symbol(f"X{next(counter)}", taken)
            taken.add(name)
            fresh_nts.append(name)
            return name

    # (i) detach push/pop daughters from wide rules
    stage1: list[UProduction] = []
    detached: list[UProduction] = []
    for p in g.productions:
        if len(p.daughters) == 1:
            stage1.append(p)
            continue
        new_daughters = []
        for d in p.daughters:
            kind, _, _ = classify_schema(d.schema)
            if kind == "copy":
                new_daughters.append(d)
            else:
                x = fresh()
                detached.append(UProduction(x, (Daughter(d.category, d.schema),)))
                new_daughters.append(Daughter(x, copy_schema()))
        stage1.append(UProduction(p.mother, tuple(new_daughters)))
    stage1.extend(detached)

    # (ii) binarize wide copy rules
    stage2: list[UProduction] = []
    for p in stage1:
        if len(p.daughters) <= 2:
            stage2.append(p)
            continue
        mother = p.mother
        rest = list(p.daughters)
        while len(rest) > 2:
            x = fresh()
            stage2.append(UProduction(mother, (rest[0], Daughter(x, copy_schema()))))
            mother = x
            rest = rest[1:]
        stage2.append(UProduction(mother, tuple(rest)))

    # (iii) eliminate unary copy rules through unit-pair composition
    def is_unit(p: UProduction) -> bool:
        return len(p.daughters) == 1 and classify_schema(p.daughters[0].schema)[0] == "copy"

    unit_next: dict[str, list[str]] = {}
    for p in stage2:
        if is_unit(p):
            unit_next.setdefault(p.mother, []).append(p.daughters[0].category)
    closure: dict[str, list[str]] = {}
    nt_order = list(g.nonterminals) + fresh_nts
    for a in nt_order:
        seen = [a]
        frontier = [a]
        while frontier:
            b = frontier.pop(0)
            for c in unit_next.get(b, ()):
                if c not in seen:
                    seen.append(c)
                    frontier.append(c)
        closure[a] = seen

    inv: dict[str, list[str]] = {a: [] for a in nt_order}
    for a in nt_order:
        for b in closure[a]:
            inv[b].append(a)

    productions: list[UProduction] = []
    seen_prods: set[UProduction] = set()
    for p in stage2:
        if is_unit(p):
            continue
        for mother in inv[p.mother]:
            q = UProduction(mother, p.daughters)
            if q not in seen_prods:
                seen_prods.add(q)
                productions.append(q)
    lexicon: list[LexRule] = []
    seen_lex: set[LexRule] = set()
    for r in g.lexicon:
        for mother in inv[r.mother]:
            q = LexRule(mother, r.word, r.schema)
            if q not in seen_lex:
                seen_lex.add(q)
                lexicon.append(q)

    return SimpleUnificationGrammar(
        g.nonterminals + tuple(fresh_nts),
        g.terminals,
        g.attributes,
        g.values,
        tuple(productions),
        tuple(lexicon),
        g.start,
    )


def sink_map_root(g: SimpleUnificationGrammar) -> SimpleUnificationGrammar:
    """Wrap the grammar so the start symbol occurs in exactly one rule, a
    unary push of a fresh marker value used nowhere else.

    A fresh spine symbol below the new start can push any used value any
    number of times before handing over to the old start next to a silent
    empty-string filler, so strings whose structures reach below the old root
    node of the model stay derivable.  Reduced form is preserved.
    """
    report = _require_ugi(g, "root wrapping")
    pair = report.attr_pair or ("next", "idx")
    taken = set(g.nonterminals) | set(g.terminals)
    s0 = fresh_symbol(g.start + "_0", taken)
    taken.add(s0)
    spine = fresh_symbol(g.start + "_p", taken)
    taken.add(spine)
    filler = fresh_symbol(g.start + "_e", taken)
    marker = fresh_symbol("$", set(g.values))
    next_attr, idx_attr = pair

    new_rules = [
        UProduction(s0, (Daughter(spine, push_schema(next_attr, idx_attr, marker)),)),
        UProduction(spine, (Daughter(g.start, copy_schema()), Daughter(filler, copy_schema()))),
    ]
    for f in used_values(g):
        new_rules.append(UProduction(spine, (Daughter(spine, push_schema(next_attr, idx_attr, f)),)))

    attributes = g.attributes + tuple(a for a in pair if a not in g.attributes)
    return SimpleUnificationGrammar(
        g.nonterminals + (s0, spine, filler),
        g.terminals,
        attributes,
        g.values + (marker,),
        g.productions + tuple(new_rules),
        g.lexicon + (LexRule(filler, "", frozenset()),),
        s0,
    )


# --------------------------------------------------------------------------
# Canonical model of a stack-schema c-structure

Sequence = tuple[TreeAddress, ...]


def canonical_fs(cs: CStructure) -> SolveResult:
    """Build the canonical model by mapping nodes to sequences top-down.

    The root gets a sequence of height+1 copies of the root address; a copy
    daughter shares its mother's sequence, a pop daughter drops the front
    element, a push daughter prepends its own address.  Transition edges are
    laid down exactly where some node demands them (next to the popped
    sequence, idx to the demanded value's node); leaves with empty schemata
    become isolated named nodes.  The only possible failure is two nodes with
    equal sequences demanding distinct idx values.
    """
    n = cs.domain.height
    seqs: dict[TreeAddress, Sequence | None] = {ROOT: (ROOT,) * (n + 1)}
    pair: tuple[str, str] | None = None
    demands: dict[Sequence, tuple[str, TreeAddress]] = {}
    next_sources: list[Sequence] = []

    for x in cs.domain.sorted_addresses:
        if x.is_root:
            continue
        schema = cs.eqsets[x]
        if not schema:
            seqs[x] = None  # isolated named node
            if cs.domain.out_degree(x) > 0:
                raise PreconditionError(f"internal node {x} has an empty schema; cannot map its daughters")
            continue
        c = classify_schema(schema)
        if c is None:
            raise PreconditionError(f"schema at {x} is not copy/push/pop: {format_schema(schema)}")
        kind, value, dpair = c
        if dpair is not None:
            if pair is None:
                pair = dpair
            elif pair != dpair:
                raise PreconditionError(f"schema at {x} uses attribute pair {dpair}, elsewhere {pair}")
        parent_seq = seqs[x.parent]
        if parent_seq is None:
            raise PreconditionError(f"node {x} hangs below an unmapped node")
        if kind == "copy":
            seqs[x] = parent_seq
            continue
        if kind == "pop":
            if len(parent_seq) < 2:
                raise GrammarError("internal error: sequence underflow while popping")
            seqs[x] = parent_seq[1:]
            demanded, at = parent_seq, x.parent
        else:
            seqs[x] = (x,) + parent_seq
            demanded, at = seqs[x], x
        next_sources.append(demanded)
        assert value is not None
        have = demands.get(demanded)
        if have is not None and have[0] != value:
            idx_attr = pair[1] if pair else "idx"
            return Inconsistent(ValueClash((have[1], (idx_attr,)), have[0], value))
        if have is None:
            demands[demanded] = (value, at)

    number: dict = {}
    nodes: list[int] = []
    names: dict[TreeAddress, int] = {}

    def assign(key) -> int:
        if key not in number:
            number[key] = len(nodes)
            nodes.append(len(nodes))
        return number[key]

    for x in cs.domain.sorted_addresses:
        s = seqs[x]
        key = ("seq", s) if s is not None else ("lone", x)
        names[x] = assign(key)
    values_in_order = sorted({v for v, _ in demands.values()})
    for v in values_in_order:
        assign(("val", v))

    delta: dict[int, dict[str, int]] = {}
    next_attr, idx_attr = pair if pair else ("next", "idx")
    for s in next_sources:
        q = number[("seq", s)]
        delta.setdefault(q, {})[next_attr] = number[("seq", s[1:])]
    for s, (v, _) in demands.items():
        q = number[("seq", s)]
        delta.setdefault(q, {})[idx_attr] = number[("val", v)]
    alpha = {number[("val", v)]: v for v in values_in_order}
    return Consistent(FeatureStructure(tuple(nodes), delta, alpha, names))


# --------------------------------------------------------------------------
# Fixpoint language engine for stack-schema grammars

_TRUNC = "\x00..."
_TAU = 6

Stack = tuple[str, ...]
_UState = tuple[str, Stack]


class _UgiMinYield:
    """Optimistic minimum yield length from (category, pushed stack).

    Same truncated-stack abstraction and worklist relaxation as the indexed
    engine; a pop on an empty stack is allowed here because it merely records
    a demand below the root node of the model.
    """

    def __init__(self, g: SimpleUnificationGrammar, cap: int):
        self.g = g
        self.cap = cap
        self.value: dict[_UState, int] = {}
        self.deps: dict[_UState, set[_UState]] = {}
        self._kinds: list[list[tuple[str, str | None]] | None] = []
        for p in g.productions:
            per = [classify_schema(d.schema) for d in p.daughters]
            if any(c is None for c in per):
                raise PreconditionError("fixpoint engine requires stack-form schemata")
            self._kinds.append([(c[0], c[1]) for c in per])  # type: ignore[index]

    def _abstract(self, state: _UState) -> _UState:
        cat, stack = state
        if len(stack) > _TAU:
            return (cat, stack[:_TAU] + (_TRUNC,))
        return state

    def _successors(self, state: _UState):
        cat, stack = state
        truncated = bool(stack) and stack[-1] == _TRUNC
        core = stack[:-1] if truncated else stack
        for pi, p in enumerate(self.g.productions):
            if p.mother != cat:
                continue
            children: list[_UState] = []
            dead = False
            for d, (kind, value) in zip(p.daughters, self._kinds[pi]):
                if kind == "copy":
                    cstack = stack
                elif kind == "push":
                    cstack = (value,) + core
                    if truncated or len(cstack) > _TAU:
                        cstack = cstack[:_TAU] + (_TRUNC,)
                else:  # pop
                    if core:
                        if core[0] != value:
                            dead = True
                            break
                        cstack = core[1:] + ((_TRUNC,) if truncated else ())
                    elif truncated:
                        cstack = (_TRUNC,)
                    else:
                        cstack = ()
                children.append((d.category, cstack))
            if not dead:
                yield children, 0
        for r in self.g.lexicon:
            if r.mother == cat:
                yield [], (1 if r.word else 0)

    def bound(self, cat: str, stack: Stack) -> int:
        state = self._abstract((cat, stack))
        if state in self.value:
            return self.value[state]
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
            if s not in succ_cache:
                succ_cache[s] = list(self._successors(s))
            for children, terminals in succ_cache[s]:
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


@dataclass(frozen=True)
class _UEntry:
    cost: int
    seq: tuple[int, ...]
    rule: int
    children: tuple  # ("t", word) | ("s", state, key, schema)


def _merge_demand(a: Stack, b: Stack) -> Stack | None:
    if len(a) <= len(b):
        return b if b[: len(a)] == a else None
    return a if a[: len(b)] == b else None


class _UgiFixpoint:
    """Per-state yields with demand strings, computed to a least fixpoint.

    An entry at state (category, pushed) is keyed by (yield, demand): the
    demand is the string of values that pops reaching below the model's free
    root node insist on, position by position.  Sibling demands must agree as
    prefixes of one another since they constrain the same chain; the root
    accepts any demand because the chain below a free node can always be
    built.
    """

    def __init__(self, g: SimpleUnificationGrammar, maxlen: int, budget: Budget):
        self.g = g
        self.maxlen = maxlen
        self.budget = budget
        self.stats = SearchStats()
        self.oracle = _UgiMinYield(g, maxlen + 1)
        self.entries: dict[_UState, dict[tuple[Word, Stack], _UEntry]] = {}
        self.deps: dict[_UState, set[tuple[_UState, int]]] = {}
        self.root: _UState = (g.start, ())
        self._pending: list[tuple[_UState, int]] = []
        self._pending_set: set[tuple[_UState, int]] = set()
        self._stack_cap = min(budget.max_stack, budget.max_nodes)
        self._kinds = self.oracle._kinds

    def _discover(self, state: _UState) -> bool:
        if state in self.entries:
            return True
        cat, stack = state
        if len(stack) > self._stack_cap:
            self.stats.mark_exhausted("max_stack")
            return False
        if self.oracle.bound(cat, stack) > self.maxlen:
            return False
        if len(self.entries) >= self.budget.max_states:
            self.stats.mark_exhausted("max_states")
            return False
        self.entries[state] = {}
        self.stats.states += 1
        n_prods = len(self.g.productions)
        for pi, p in enumerate(self.g.productions):
            if p.mother == cat:
                self._enqueue((state, pi))
        for li, r in enumerate(self.g.lexicon):
            if r.mother == cat:
                self._enqueue((state, n_prods + li))
        return True

    def _enqueue(self, combo: tuple[_UState, int]) -> None:
        if combo not in self._pending_set:
            self._pending_set.add(combo)
            self._pending.append(combo)

    def run(self) -> None:
        self._discover(self.root)
        while self._pending:
            if self.stats.steps > self.budget.max_steps:
                self.stats.mark_exhausted("max_steps")
                break
            combo = self._pending.pop(0)
            self._pending_set.discard(combo)
            self._process(combo)

    def _process(self, combo: tuple[_UState, int]) -> None:
        state, ri = combo
        cat, stack = state
        n_prods = len(self.g.productions)
        store = self.entries[state]
        changed = False
        if ri >= n_prods:
            r = self.g.lexicon[ri - n_prods]
            w: Word = (r.word,) if r.word else ()
            if len(w) <= self.maxlen:
                entry = _UEntry(2, (ri,), ri, (("t", r.word),))
                key = (w, ())
                old = store.get(key)
                if old is None or (entry.cost, entry.seq) < (old.cost, old.seq):
                    store[key] = entry
                    changed = True
        else:
            p = self.g.productions[ri]
            option_lists = []
            for d, (kind, value) in zip(p.daughters, self._kinds[ri]):
                prepend: str | None = None
                if kind == "copy":
                    cstack = stack
                elif kind == "push":
                    cstack = (value,) + stack
                else:
                    if stack:
                        if stack[0] != value:
                            return
                        cstack = stack[1:]
                    else:
                        cstack = ()
                        prepend = value
                cstate = (d.category, cstack)
                if not self._discover(cstate):
                    return
                self.deps.setdefault(cstate, set()).add(combo)
                options = []
                for (w, dem), e in sorted(self.entries[cstate].items()):
                    mapped = ((prepend,) + dem) if prepend is not None else dem
                    if len(mapped) > self.budget.max_demand:
                        self.stats.mark_exhausted("max_demand")
                        continue
                    options.append((w, mapped, e.cost, e.seq, ("s", cstate, (w, dem), d.schema)))
                if not options:
                    return
                option_lists.append(options)
            for chosen in itertools.product(*option_lists):
                self.stats.steps += 1
                if self.stats.steps > self.budget.max_steps:
                    self.stats.mark_exhausted("max_steps")
                    return
                total_len = sum(len(c[0]) for c in chosen)
                if total_len > self.maxlen:
                    continue
                cost = 1 + sum(c[2] for c in chosen)
                if cost > self.budget.max_nodes:
                    continue
                demand: Stack | None = ()
                for c in chosen:
                    demand = _merge_demand(demand, c[1])
                    if demand is None:
                        break
                if demand is None:
                    continue
                word: Word = sum((c[0] for c in chosen), ())
                seq = (ri,) + sum((c[3] for c in chosen), ())
                key = (word, demand)
                entry = _UEntry(cost, seq, ri, tuple(c[4] for c in chosen))
                old = store.get(key)
                if old is None or (cost, seq) < (old.cost, old.seq):
                    store[key] = entry
                    changed = True
        if changed:
            for parent_combo in self.deps.get(state, ()):
                self._enqueue(parent_combo)

    def language(self) -> tuple[Word, ...]:
        words = {w for (w, _) in self.entries.get(self.root, {})}
        return tuple(sorted(words, key=lambda w: (len(w), w)))

    def witness(self, word: Word) -> CStructure | None:
        store = self.entries.get(self.root, {})
        best_key = None
        best = None
        for (w, dem), e in sorted(store.items()):
            if w != word:
                continue
            if best is None or (e.cost, e.seq) < (best.cost, best.seq):
                best, best_key = e, (w, dem)
        if best_key is None:
            return None
        categories: dict[TreeAddress, str] = {}
        eqsets: dict[TreeAddress, Schema] = {}
        n_prods = len(self.g.productions)

        def build(state: _UState, key, addr: TreeAddress) -> None:
            e = self.entries[state][key]
            categories[addr] = state[0]
            if e.rule >= n_prods:
                r = self.g.lexicon[e.rule - n_prods]
                leaf = addr.child(1)
                categories[leaf] = r.word
                eqsets[leaf] = r.schema
                return
            for i, tag in enumerate(e.children, start=1):
                caddr = addr.child(i)
                eqsets[caddr] = tag[3]
                build(tag[1], tag[2], caddr)

        build(self.root, best_key, ROOT)
        return CStructure(domain_of(categories.keys()), categories, eqsets)


def ugi_language_upto(g: SimpleUnificationGrammar, maxlen: int, budget: Budget = DEFAULT_BUDGET) -> LanguageResult:
    """All grammatical strings of length <= maxlen whose best witness fits the
    budget, via the demand-string fixpoint.  Requires stack-form schemata."""
    if maxlen < 0:
        raise GrammarError("maxlen must be >= 0")
    _require_ugi(g, "the fixpoint language engine")
    fp = _UgiFixpoint(g, maxlen, budget)
    fp.run()
    return LanguageResult(fp.language(), fp.stats.exhausted, tuple(fp.stats.reasons))


@dataclass(frozen=True)
class UgiMembership:
    member: bool
    witness: CStructure | None
    model: FeatureStructure | None
    exhausted: bool


def ugi_membership(g: SimpleUnificationGrammar, w: Word | str, budget: Budget = DEFAULT_BUDGET) -> UgiMembership:
    """Fixpoint membership with a minimal consistent witness c-structure."""
    _require_ugi(g, "the fixpoint language engine")
    word = g.parse_word(w) if isinstance(w, str) else tuple(w)
    fp = _UgiFixpoint(g, len(word), budget)
    fp.run()
    witness = fp.witness(word)
    if witness is None:
        return UgiMembership(False, None, None, fp.stats.exhausted)
    report = validate_cstructure(g, witness)
    if not report.ok:  # pragma: no cover - engine invariant
        raise GrammarError(f"internal error: witness failed validation: {report.errors[0]}")
    result = generates_check(witness)
    if not isinstance(result, Consistent):  # pragma: no cover - engine invariant
        raise GrammarError(f"internal error: witness is inconsistent: {result.diagnosis}")
    return UgiMembership(True, witness, result.model, fp.stats.exhausted)


def sug_language_upto(g: SimpleUnificationGrammar, maxlen: int, budget: Budget = DEFAULT_BUDGET) -> LanguageResult:
    """Grammatical strings of length <= maxlen.

    Stack-form grammars go through the fixpoint engine; anything else falls
    back to a membership sweep over every string up to maxlen, which is
    exponential in maxlen and meant for small alphabets only.
    """
    if maxlen < 0:
        raise GrammarError("maxlen must be >= 0")
    if ugi_check(g).is_ugi:
        return ugi_language_upto(g, maxlen, budget)
    words: list[Word] = []
    exhausted = False
    reasons: list[str] = []
    for n in range(maxlen + 1):
        for combo in itertools.product(g.terminals, repeat=n):
            r = sug_membership(g, combo, budget)
            if r.member:
                words.append(combo)
            if r.exhausted:
                exhausted = True
                if "membership_budget" not in reasons:
                    reasons.append("membership_budget")
    words.sort(key=lambda w: (len(w), w))
    return LanguageResult(tuple(words), exhausted, tuple(reasons))
