"""Feature structures and a least-model solver for path equations.

A feature structure is a finite node set with a partial attribute-transition
map delta, a partial atomic-value labeling alpha, and a total naming of the
nodes from a finite name domain of tree addresses.  It is well defined when
it is describable (every node reachable from a named node), atomic (valued
nodes have no outgoing edges) and acyclic.

Equations come in exactly two shapes: a path equation equating the nodes
reached from two named nodes, and a value equation fixing the atomic value at
the end of a non-empty path.  ``solve`` decides whether a set of equations
has any well-defined model by building the least one with congruence closure
and inspecting it; rejection is sound because the least model maps
homomorphically into every model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .errors import GrammarError, PreconditionError
from .trees import TreeAddress

Path = tuple[str, ...]
Node = int
Term = tuple[TreeAddress, Path]


def format_path(path: Path) -> str:
    return ".".join(path) if path else "eps"


def format_term(term: Term) -> str:
    name, path = term
    return f"{name}" if not path else f"{name}.{'.'.join(path)}"


@dataclass(frozen=True)
class FeatureStructure:
    """Nodes with attribute edges, atomic values, and named entry points.

    delta maps node -> attribute -> node, alpha maps node -> value symbol,
    names maps every tree address of the name domain to a node.  Shape is
    validated here; well-definedness is a separate check so that defective
    structures can be built and examined.
    """

    nodes: tuple[Node, ...]
    delta: Mapping[Node, Mapping[str, Node]]
    alpha: Mapping[Node, str]
    names: Mapping[TreeAddress, Node]

    def __post_init__(self) -> None:
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise GrammarError("duplicate node identities")
        for q, edges in self.delta.items():
            if q not in known:
                raise GrammarError(f"delta source {q!r} is not a node")
            for a, r in edges.items():
                if not a:
                    raise GrammarError("empty attribute name")
                if r not in known:
                    raise GrammarError(f"delta target {r!r} is not a node")
        for q in self.alpha:
            if q not in known:
                raise GrammarError(f"alpha source {q!r} is not a node")
        for x, q in self.names.items():
            if q not in known:
                raise GrammarError(f"name {x} maps to unknown node {q!r}")

    def out_edges(self, q: Node) -> Mapping[str, Node]:
        return self.delta.get(q, {})

    def node_of(self, name: TreeAddress) -> Node:
        if name not in self.names:
            raise PreconditionError(f"unknown name {name}")
        return self.names[name]


def delta_path(m: FeatureStructure, q: Node, path: Path) -> Node | None:
    """Follow `path` from q; None as soon as any step is undefined."""
    cur: Node | None = q
    for a in path:
        if cur is None:
            return None
        cur = m.out_edges(cur).get(a)
    return cur


@dataclass(frozen=True)
class WellDefinedReport:
    describable: bool
    atomic: bool
    acyclic: bool
    unreachable: Node | None = None
    atom_with_edge: Node | None = None
    cycle: tuple[Node, Path] | None = None  # following the path returns to the node

    @property
    def well_defined(self) -> bool:
        return self.describable and self.atomic and self.acyclic


def well_defined_check(m: FeatureStructure) -> WellDefinedReport:
    """Three independent verdicts with witnesses.

    Witness choices are deterministic: the least unreachable node in node
    order, the least valued node with an out-edge, and the first cycle found
    by depth-first search in node order with attribute-sorted edges.
    """
    reached: set[Node] = set()
    frontier = sorted(set(m.names.values()))
    while frontier:
        q = frontier.pop()
        if q in reached:
            continue
        reached.add(q)
        frontier.extend(m.out_edges(q).values())
    unreachable = next((q for q in m.nodes if q not in reached), None)

    atom_with_edge = next((q for q in m.nodes if q in m.alpha and m.out_edges(q)), None)

    cycle: tuple[Node, Path] | None = None
    state: dict[Node, int] = {}  # 1 = on current path, 2 = done
    for start in m.nodes:
        if cycle is not None:
            break
        if state.get(start):
            continue
        # iterative DFS keeping the attribute path to each frame
        stack: list[tuple[Node, list[tuple[str, Node]]]] = [(start, sorted(m.out_edges(start).items()))]
        state[start] = 1
        trail: list[tuple[Node, str]] = []
        while stack:
            q, edges = stack[-1]
            if not edges:
                stack.pop()
                state[q] = 2
                if trail:
                    trail.pop()
                continue
            a, r = edges.pop(0)
            if state.get(r) == 1:
                # cycle: from r, follow the trail back to q, then a
                attrs = []
                seen_r = False
                for node, attr in trail + [(q, a)]:
                    if node == r:
                        seen_r = True
                    if seen_r:
                        attrs.append(attr)
                cycle = (r, tuple(attrs))
                break
            if state.get(r) != 2:
                state[r] = 1
                trail.append((q, a))
                stack.append((r, sorted(m.out_edges(r).items())))
        if cycle is not None:
            break

    return WellDefinedReport(
        describable=unreachable is None,
        atomic=atom_with_edge is None,
        acyclic=cycle is None,
        unreachable=unreachable,
        atom_with_edge=atom_with_edge,
        cycle=cycle,
    )


# --------------------------------------------------------------------------
# Equations


@dataclass(frozen=True)
class PathEq:
    """name1 . path1 and name2 . path2 reach the same node."""

    left_name: TreeAddress
    left_path: Path
    right_name: TreeAddress
    right_path: Path

    def __str__(self) -> str:
        return f"{format_term((self.left_name, self.left_path))} = {format_term((self.right_name, self.right_path))}"


@dataclass(frozen=True)
class ValEq:
    """name . path carries the atomic value; the path must be non-empty."""

    name: TreeAddress
    path: Path
    value: str

    def __post_init__(self) -> None:
        if not self.path:
            raise GrammarError("value equations require a non-empty path")

    def __str__(self) -> str:
        return f"{format_term((self.name, self.path))} = {self.value}"


Equation = Union[PathEq, ValEq]


def _eq_names(e: Equation) -> tuple[TreeAddress, ...]:
    if isinstance(e, PathEq):
        return (e.left_name, e.right_name)
    return (e.name,)


def _eq_key(e: Equation):
    if isinstance(e, PathEq):
        return (0, e.left_name, e.left_path, e.right_name, e.right_path, "")
    return (1, e.name, e.path, TreeAddress(), (), e.value)


def satisfies(m: FeatureStructure, e: Equation) -> bool:
    """Satisfaction requires definedness of every side."""
    if isinstance(e, PathEq):
        left = delta_path(m, m.node_of(e.left_name), e.left_path)
        right = delta_path(m, m.node_of(e.right_name), e.right_path)
        return left is not None and left == right
    target = delta_path(m, m.node_of(e.name), e.path)
    return target is not None and m.alpha.get(target) == e.value


def satisfies_set(m: FeatureStructure, es: Iterable[Equation]) -> bool:
    return all(satisfies(m, e) for e in es)


# --------------------------------------------------------------------------
# Solver


@dataclass(frozen=True)
class ValueClash:
    term: Term
    value_a: str
    value_b: str

    def __str__(self) -> str:
        return f"value clash at {format_term(self.term)}: {self.value_a} vs {self.value_b}"


@dataclass(frozen=True)
class AtomicityViolation:
    term: Term

    def __str__(self) -> str:
        return f"atomic node with outgoing attribute at {format_term(self.term)}"


@dataclass(frozen=True)
class CycleDetected:
    term: Term
    path: Path

    def __str__(self) -> str:
        return f"attribute cycle at {format_term(self.term)} via {format_path(self.path)}"


Diagnosis = Union[ValueClash, AtomicityViolation, CycleDetected]


@dataclass(frozen=True)
class Consistent:
    model: FeatureStructure
    consistent: bool = field(default=True, init=False)


@dataclass(frozen=True)
class Inconsistent:
    diagnosis: Diagnosis
    consistent: bool = field(default=False, init=False)


SolveResult = Union[Consistent, Inconsistent]


class _Closure:
    """Union-find over terms with per-class successor maps and value demands."""

    def __init__(self) -> None:
        self.terms: list[Term] = []
        self.index: dict[Term, int] = {}
        self.parent: list[int] = []
        self.succ: list[dict[str, int]] = []
        self.values: list[set[str]] = []

    def intern(self, name: TreeAddress, path: Path) -> int:
        last = -1
        for i in range(len(path) + 1):
            t = (name, path[:i])
            j = self.index.get(t)
            if j is None:
                j = len(self.terms)
                self.index[t] = j
                self.terms.append(t)
                self.parent.append(j)
                self.succ.append({})
                self.values.append(set())
                if i > 0:
                    self.add_edge(last, path[i - 1], j)
            last = j
        return last

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def add_edge(self, i: int, attr: str, j: int) -> None:
        ri = self.find(i)
        have = self.succ[ri].get(attr)
        if have is None:
            self.succ[ri][attr] = j
        else:
            self.union(have, j)

    def union(self, i: int, j: int) -> None:
        queue = [(i, j)]
        while queue:
            a, b = queue.pop()
            ra, rb = self.find(a), self.find(b)
            if ra == rb:
                continue
            if rb < ra:
                ra, rb = rb, ra
            # least index becomes the representative, keeping first occurrence
            self.parent[rb] = ra
            merged = self.succ[rb]
            self.succ[rb] = {}
            for attr, k in merged.items():
                have = self.succ[ra].get(attr)
                if have is None:
                    self.succ[ra][attr] = k
                else:
                    queue.append((have, k))
            self.values[ra].update(self.values[rb])
            self.values[rb] = set()

    def roots(self) -> list[int]:
        return [i for i in range(len(self.terms)) if self.find(i) == i]


def solve(equations: Iterable[Equation], name_domain: Iterable[TreeAddress]) -> SolveResult:
    """Decide consistency by building the least model.

    One node per congruence class of the path-prefix terms occurring in the
    equations plus the whole name domain; classes merge under path equations
    and functional closure of the transition map.  The class graph is then
    checked for value clashes, valued nodes with out-edges, and cycles, in
    that order, each with a deterministic witness.  Node identities in the
    returned model number the classes by first occurrence.
    """
    domain = sorted(set(name_domain))
    domain_set = set(domain)
    eqs = sorted(set(equations), key=_eq_key)
    for e in eqs:
        for n in _eq_names(e):
            if n not in domain_set:
                raise PreconditionError(f"equation uses name {n} outside the name domain")

    cl = _Closure()
    for n in domain:
        cl.intern(n, ())
    pairs: list[tuple[int, int]] = []
    demands: list[tuple[int, str]] = []
    for e in eqs:
        if isinstance(e, PathEq):
            li = cl.intern(e.left_name, e.left_path)
            ri = cl.intern(e.right_name, e.right_path)
            pairs.append((li, ri))
        else:
            demands.append((cl.intern(e.name, e.path), e.value))
    for li, ri in pairs:
        cl.union(li, ri)
    for i, v in demands:
        cl.values[cl.find(i)].add(v)

    roots = cl.roots()

    for r in roots:
        vs = sorted(cl.values[r])
        if len(vs) > 1:
            return Inconsistent(ValueClash(cl.terms[r], vs[0], vs[1]))
    for r in roots:
        if cl.values[r] and cl.succ[r]:
            return Inconsistent(AtomicityViolation(cl.terms[r]))

    # cycle check over the class graph, deterministic order
    edges: dict[int, list[tuple[str, int]]] = {
        r: sorted((a, cl.find(t)) for a, t in cl.succ[r].items()) for r in roots
    }
    state: dict[int, int] = {}
    for start in roots:
        if state.get(start):
            continue
        stack = [(start, list(edges[start]))]
        state[start] = 1
        trail: list[tuple[int, str]] = []
        while stack:
            q, out = stack[-1]
            if not out:
                stack.pop()
                state[q] = 2
                if trail:
                    trail.pop()
                continue
            a, r = out.pop(0)
            if state.get(r) == 1:
                attrs = []
                seen = False
                for node, attr in trail + [(q, a)]:
                    if node == r:
                        seen = True
                    if seen:
                        attrs.append(attr)
                return Inconsistent(CycleDetected(cl.terms[r], tuple(attrs)))
            if state.get(r) != 2:
                state[r] = 1
                trail.append((q, a))
                stack.append((r, list(edges[r])))

    number = {r: k for k, r in enumerate(roots)}
    nodes = tuple(range(len(roots)))
    delta = {
        number[r]: {a: number[t] for a, t in edges[r]}
        for r in roots
        if edges[r]
    }
    alpha = {number[r]: next(iter(cl.values[r])) for r in roots if cl.values[r]}
    names = {n: number[cl.find(cl.index[(n, ())])] for n in domain}
    return Consistent(FeatureStructure(nodes, delta, alpha, names))


# --------------------------------------------------------------------------
# Linked-list encoding of symbol strings


def suffix_chain_structure(
    strings: Iterable[tuple[str, ...]],
    names: Mapping[TreeAddress, tuple[str, ...]] | None = None,
    next_attr: str = "next",
    idx_attr: str = "idx",
) -> FeatureStructure:
    """Encode symbol strings as linked lists sharing suffixes and symbols.

    Nodes are all suffixes of the given strings plus one node per symbol;
    a non-empty suffix points via `next_attr` to its tail and via `idx_attr`
    to the node of its head symbol, which carries the symbol as its value.
    The empty suffix has no edges and no value.  `names` assigns tree
    addresses to suffix nodes (each named string must be a suffix).
    """
    suffixes: set[tuple[str, ...]] = set()
    symbols: set[str] = set()
    for s in strings:
        for i in range(len(s) + 1):
            suffixes.add(s[i:])
        symbols.update(s)
    order: list = sorted(suffixes, key=lambda s: (len(s), s)) + sorted(symbols)
    number = {key: k for k, key in enumerate(order)}
    nodes = tuple(range(len(order)))
    delta: dict[Node, dict[str, Node]] = {}
    alpha: dict[Node, str] = {}
    for s in suffixes:
        if s:
            delta[number[s]] = {idx_attr: number[s[0]], next_attr: number[s[1:]]}
    for c in symbols:
        alpha[number[c]] = c
    fs_names: dict[TreeAddress, Node] = {}
    for addr, s in (names or {}).items():
        if s not in suffixes:
            raise GrammarError(f"named string {s!r} is not a suffix of the given strings")
        fs_names[addr] = number[s]
    return FeatureStructure(nodes, delta, alpha, fs_names)
