"""Grammar-to-grammar transformations and the matching tree conversions.

An indexed grammar in reduced form whose index stacks end in a dedicated
marker maps rule by rule onto a simple unification grammar over the attribute
pair (next, idx): pushes become push schemata, pops become pop schemata,
two-nonterminal rules become copy-copy productions and terminal rules become
the lexicon.  The map is reversible, and derivation trees convert to
c-structures (and back) on the same tree domain, with index stacks realized
as value strings hanging off the model's nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .errors import GrammarError, PreconditionError
from .features import (
    FeatureStructure,
    satisfies_set,
    suffix_chain_structure,
)
from .indexed import (
    DerivationTree,
    IndexedGrammar,
    LeafLabel,
    NodeLabel,
    Plain,
    Pop,
    Push,
    SymbolTable,
    marked_index_end_check,
    reduced_form_check,
    tree_of,
    validate_derivation_tree,
)
from .trees import TreeAddress
from .unification import (
    CStructure,
    Daughter,
    LexRule,
    SimpleUnificationGrammar,
    UProduction,
    classify_schema,
    collect_equations,
    copy_schema,
    pop_schema,
    push_schema,
    ugi_check,
    validate_cstructure,
)

RuleRef = tuple[str, int]  # ("production" | "lexicon", position)


@dataclass(frozen=True)
class RuleCorrespondence:
    """Bijection between an indexed grammar's rules and a unification
    grammar's rules; images[k] is the production or lexicon slot that indexed
    rule k maps to."""

    images: tuple[RuleRef, ...]

    def __post_init__(self) -> None:
        for ref in self.images:
            kind, j = ref
            if kind not in ("production", "lexicon") or j < 0:
                raise GrammarError(f"bad rule reference {ref}")
        if len(set(self.images)) != len(self.images):
            raise GrammarError("rule correspondence is not injective")

    def image(self, k: int) -> RuleRef:
        if not 0 <= k < len(self.images):
            raise GrammarError(f"no indexed rule {k} in this correspondence")
        return self.images[k]

    @cached_property
    def _backward(self) -> Mapping[RuleRef, int]:
        return {ref: k for k, ref in enumerate(self.images)}

    def preimage(self, ref: RuleRef) -> int:
        if ref not in self._backward:
            raise GrammarError(f"no rule maps to {ref}")
        return self._backward[ref]

    def __len__(self) -> int:
        return len(self.images)


NEXT_ATTR = "next"
IDX_ATTR = "idx"


def _require_reduced_marked(g: IndexedGrammar, what: str) -> None:
    rep = reduced_form_check(g)
    if not rep.is_reduced:
        k = rep.offenders[0]
        raise PreconditionError(f"{what} needs reduced form; rule {k} is not: {g.productions[k]}")
    if not marked_index_end_check(g):
        raise PreconditionError(
            f"{what} needs a marked index end: the start symbol must occur in exactly one "
            "rule, a push of an index used nowhere else"
        )


def u_transform(g: IndexedGrammar) -> tuple[SimpleUnificationGrammar, RuleCorrespondence]:
    """Map a reduced, marked indexed grammar to its unification counterpart.

    Rule for rule: A -> B^f gives a push schema, A^f -> B a pop schema,
    A -> BC two copy schemata, A -> t (or the empty string) a lexicon entry
    with no equations.  Attributes are (next, idx) and the value symbols are
    the index symbols.
    """
    _require_reduced_marked(g, "the transformation")
    prods: list[UProduction] = []
    lex: list[LexRule] = []
    images: list[RuleRef] = []
    for p in g.productions:
        if isinstance(p, Push):
            images.append(("production", len(prods)))
            prods.append(UProduction(p.lhs, (Daughter(p.rhs, push_schema(NEXT_ATTR, IDX_ATTR, p.index)),)))
        elif isinstance(p, Pop):
            images.append(("production", len(prods)))
            prods.append(UProduction(p.lhs, (Daughter(p.rhs[0], pop_schema(NEXT_ATTR, IDX_ATTR, p.index)),)))
        elif len(p.rhs) == 2:
            images.append(("production", len(prods)))
            prods.append(
                UProduction(p.lhs, (Daughter(p.rhs[0], copy_schema()), Daughter(p.rhs[1], copy_schema())))
            )
        else:
            images.append(("lexicon", len(lex)))
            lex.append(LexRule(p.lhs, p.rhs[0] if p.rhs else "", frozenset()))
    gu = SimpleUnificationGrammar(
        g.symbols.nonterminals,
        g.symbols.terminals,
        (NEXT_ATTR, IDX_ATTR),
        g.symbols.indices,
        tuple(prods),
        tuple(lex),
        g.start,
    )
    return gu, RuleCorrespondence(tuple(images))


def reverse_u(g: SimpleUnificationGrammar) -> tuple[IndexedGrammar, RuleCorrespondence]:
    """Invert the transformation on a reduced, sink-mapped stack-form grammar.

    The declared value table becomes the index set; push/pop/copy-copy rules
    and the lexicon turn back into the four reduced production shapes.  The
    returned correspondence is keyed by the indexed rules of the output.
    """
    rep = ugi_check(g)
    if not rep.is_ugi:
        first = rep.offenders[0]
        raise PreconditionError(f"schemata are not stack-form; offender: {first[0]} {first[1]}: {first[2]}")
    if not rep.is_reduced:
        first = rep.offenders[0]
        raise PreconditionError(f"grammar is not reduced; offender: {first[0]} {first[1]}: {first[2]}")
    if not rep.has_sink_mapped_root:
        raise PreconditionError(
            "the start symbol must occur in exactly one production, a unary push of a value used nowhere else"
        )
    clash = set(g.values) & (set(g.nonterminals) | set(g.terminals))
    if clash:
        raise PreconditionError(f"value symbols {sorted(clash)} collide with the vocabulary; cannot serve as indices")
    if any(r.mother == g.start for r in g.lexicon):
        raise PreconditionError("the start symbol may not occur in the lexicon")

    prods: list = []
    images: list[RuleRef] = []
    for j, p in enumerate(g.productions):
        first_d = p.daughters[0]
        kind, value, _ = classify_schema(first_d.schema)  # type: ignore[misc]
        if len(p.daughters) == 1 and kind == "push":
            prods.append(Push(p.mother, first_d.category, value))
        elif len(p.daughters) == 1 and kind == "pop":
            prods.append(Pop(p.mother, value, (first_d.category,)))
        else:
            prods.append(Plain(p.mother, tuple(d.category for d in p.daughters)))
        images.append(("production", j))
    for j, r in enumerate(g.lexicon):
        prods.append(Plain(r.mother, (r.word,) if r.word else ()))
        images.append(("lexicon", j))
    symbols = SymbolTable(g.nonterminals, g.terminals, g.values)
    gi = IndexedGrammar(symbols, tuple(prods), g.start)
    return gi, RuleCorrespondence(tuple(images))


def end_marker(g: IndexedGrammar) -> str:
    """The dedicated stack-end index of a marked grammar (pre: marked)."""
    if not marked_index_end_check(g):
        raise PreconditionError("the grammar does not mark the end of its index stacks")
    for p in g.productions:
        if isinstance(p, Push) and p.lhs == g.start:
            return p.index
    raise GrammarError("internal error: marked grammar without a start push")  # pragma: no cover


def cstructure_from_derivation(
    g: IndexedGrammar, t: DerivationTree
) -> tuple[CStructure, FeatureStructure]:
    """Convert a derivation tree to a c-structure of the transformed grammar,
    plus the structure realizing every index stack of the tree as a value
    string.

    Same tree domain and node symbols; every non-root slot carries the schema
    of the transformed licensing rule.  The structure's nodes are the suffix
    strings of the stacks occurring in the tree (next drops the first value,
    idx names it) and each node address is mapped to its own stack, so all
    instantiated equations of the c-structure hold.
    """
    gu, corr = u_transform(g)
    rep = validate_derivation_tree(g, t)
    if not rep.ok:
        a, cond, msg = rep.errors[0]
        raise PreconditionError(f"not a derivation tree of the grammar: {a} [{cond}] {msg}")
    assert rep.license is not None

    categories: dict[TreeAddress, str] = {}
    eqsets: dict[TreeAddress, frozenset] = {}
    for a in t.domain.sorted_addresses:
        categories[a] = t.symbol_at(a)
    for a in t.domain.sorted_addresses:
        if t.domain.out_degree(a) == 0:
            continue
        kind, j = corr.image(rep.license[a])
        kids = t.domain.children(a)
        if kind == "production":
            rule = gu.productions[j]
            for child, d in zip(kids, rule.daughters):
                eqsets[child] = d.schema
        else:
            eqsets[kids[0]] = gu.lexicon[j].schema
    cs = CStructure(t.domain, categories, eqsets)

    names = {a: t.stack_at(a) for a in t.domain.internal}
    m = suffix_chain_structure(set(names.values()), names, NEXT_ATTR, IDX_ATTR)
    if not satisfies_set(m, collect_equations(cs)):  # pragma: no cover - conversion invariant
        raise GrammarError("internal error: stack structure violates the converted tree's equations")
    return cs, m


def idx_lst(
    m: FeatureStructure, q: int, next_attr: str = NEXT_ATTR, idx_attr: str = IDX_ATTR
) -> tuple[str, ...]:
    """Read the value string below a node: its own value if atomic, else the
    idx string followed by the next string when both edges are present, else
    the empty string.  The structure must be acyclic along these attributes."""
    if q not in set(m.nodes):
        raise GrammarError(f"no node {q} in this structure")
    memo: dict[int, tuple[str, ...]] = {}

    def go(node: int, trail: frozenset[int]) -> tuple[str, ...]:
        if node in memo:
            return memo[node]
        if node in trail:
            raise PreconditionError("idx/next edges form a cycle; the string is undefined")
        a = m.alpha.get(node)
        if a is not None:
            memo[node] = (a,)
            return memo[node]
        edges = m.delta.get(node, {})
        if idx_attr in edges and next_attr in edges:
            out = go(edges[idx_attr], trail | {node}) + go(edges[next_attr], trail | {node})
        else:
            out = ()
        memo[node] = out
        return out

    return go(q, frozenset())


def idx_lst_dollar(
    m: FeatureStructure,
    q: int,
    dollar: str,
    next_attr: str = NEXT_ATTR,
    idx_attr: str = IDX_ATTR,
) -> tuple[str, ...]:
    """Smallest prefix of the node's value string ending in the marker, or
    the empty string when the marker never shows up."""
    s = idx_lst(m, q, next_attr, idx_attr)
    for i, v in enumerate(s):
        if v == dollar:
            return s[: i + 1]
    return ()


def derivation_from_cstructure(
    g: IndexedGrammar, cs: CStructure, m: FeatureStructure
) -> DerivationTree:
    """Rebuild a derivation tree from a consistent c-structure of the
    transformed grammar and a model of its equations.

    Symbols carry over unchanged; the root gets the empty stack and every
    other internal node the marker-terminated prefix of its model node's
    value string.  The result is validated against the grammar, which fails
    only when the given structure is not a generated model of the tree."""
    gu, _ = u_transform(g)
    marker = end_marker(g)
    vrep = validate_cstructure(gu, cs)
    if not vrep.ok:
        a, cond, msg = vrep.errors[0]
        raise PreconditionError(f"not a c-structure of the transformed grammar: {a} [{cond}] {msg}")
    if not satisfies_set(m, collect_equations(cs)):
        raise PreconditionError("the structure does not satisfy the tree's instantiated equations")

    labels: dict[TreeAddress, object] = {}
    for a in cs.domain.sorted_addresses:
        if cs.domain.out_degree(a) == 0 and not a.is_root:
            labels[a] = LeafLabel(cs.categories[a])
        elif a.is_root:
            labels[a] = NodeLabel(cs.categories[a], ())
        else:
            stack = idx_lst_dollar(m, m.node_of(a), marker, NEXT_ATTR, IDX_ATTR)
            labels[a] = NodeLabel(cs.categories[a], stack)
    t = tree_of(labels)
    rep = validate_derivation_tree(g, t)
    if not rep.ok:
        a, cond, msg = rep.errors[0]
        raise GrammarError(
            f"the structure does not reconstruct a derivation (is it a generated model?): {a} [{cond}] {msg}"
        )
    return t
