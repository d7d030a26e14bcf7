"""Directed and partially directed graphs over integer-indexed variables.

Nodes are 0..n-1. A DAG is stored as per-node sorted parent tuples, which is
also its on-disk JSON form: ``{"n": 4, "parents": [[], [0], [0, 1], []]}``.
The module also hosts the backdoor machinery: d-separation, validity of
adjustment sets, and the four adjustment-set classes (parent set, o-set, and
their minimal prunings).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable, Sequence


class CycleError(ValueError):
    """Raised when edges that should form a DAG contain a directed cycle."""


class Dag:
    """Immutable directed acyclic graph.

    Parameters
    ----------
    n : int
        Number of nodes.
    parents : sequence of iterables
        ``parents[i]`` lists the parents of node ``i``. Lists are sorted and
        deduplicated on construction; a cycle raises ``CycleError``.

    Examples
    --------
    >>> g = Dag(3, [[], [0], [0, 1]])
    >>> g.children(0)
    (1, 2)
    >>> g.topological_order()
    (0, 1, 2)
    """

    __slots__ = ("n", "parents", "_children", "_topo")

    def __init__(self, n: int, parents: Sequence[Iterable[int]]):
        n = int(n)
        if n < 0:
            raise ValueError("node count must be nonnegative")
        if len(parents) != n:
            raise ValueError(f"expected {n} parent lists, got {len(parents)}")
        clean = []
        for i, ps in enumerate(parents):
            ps = tuple(sorted({int(p) for p in ps}))
            for p in ps:
                if not 0 <= p < n:
                    raise IndexError(f"parent {p} of node {i} out of range")
            if i in ps:
                raise ValueError(f"self-loop at node {i}")
            clean.append(ps)
        self.n = n
        self.parents = tuple(clean)
        kids: list[list[int]] = [[] for _ in range(n)]
        for i, ps in enumerate(self.parents):
            for p in ps:
                kids[p].append(i)
        self._children = tuple(tuple(c) for c in kids)
        self._topo = self._toposort()

    def _toposort(self) -> tuple[int, ...]:
        indeg = [len(ps) for ps in self.parents]
        ready = [i for i in range(self.n) if indeg[i] == 0]
        order: list[int] = []
        while ready:
            v = ready.pop()
            order.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != self.n:
            raise CycleError("parent lists contain a directed cycle")
        return tuple(order)

    def children(self, i: int) -> tuple[int, ...]:
        return self._children[i]

    def topological_order(self) -> tuple[int, ...]:
        return self._topo

    def edges(self) -> list[tuple[int, int]]:
        """All directed edges as (parent, child) pairs."""
        return [(p, c) for c in range(self.n) for p in self.parents[c]]

    def has_edge(self, u: int, v: int) -> bool:
        return u in self.parents[v]

    def adjacent(self, u: int, v: int) -> bool:
        return u in self.parents[v] or v in self.parents[u]

    def key(self) -> tuple[tuple[int, ...], ...]:
        """Hashable identity used to deduplicate sampled graphs."""
        return self.parents

    def __eq__(self, other) -> bool:
        return isinstance(other, Dag) and self.n == other.n and self.parents == other.parents

    def __hash__(self) -> int:
        return hash((self.n, self.parents))

    def __repr__(self) -> str:
        return f"Dag(n={self.n}, edges={self.edges()})"

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "parents": [list(p) for p in self.parents]})

    @classmethod
    def from_json(cls, text: str) -> "Dag":
        obj = json.loads(text)
        return cls(obj["n"], obj["parents"])


class Pdag:
    """Partially directed graph: disjoint sets of directed and undirected edges."""

    __slots__ = ("n", "directed", "undirected")

    def __init__(
        self,
        n: int,
        directed: Iterable[tuple[int, int]] = (),
        undirected: Iterable[tuple[int, int]] = (),
    ):
        self.n = int(n)
        dset: set[tuple[int, int]] = set()
        for u, v in directed:
            u, v = int(u), int(v)
            self._check_pair(u, v)
            if (v, u) in dset:
                raise ValueError(f"edge {u},{v} directed both ways")
            dset.add((u, v))
        uset: set[tuple[int, int]] = set()
        for a, b in undirected:
            a, b = int(a), int(b)
            self._check_pair(a, b)
            e = (min(a, b), max(a, b))
            if (a, b) in dset or (b, a) in dset:
                raise ValueError(f"edge {a},{b} both directed and undirected")
            uset.add(e)
        self.directed = frozenset(dset)
        self.undirected = frozenset(uset)

    def _check_pair(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError("self-loop")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise IndexError("edge endpoint out of range")

    def adjacent(self, u: int, v: int) -> bool:
        return (
            (u, v) in self.directed
            or (v, u) in self.directed
            or (min(u, v), max(u, v)) in self.undirected
        )

    def directed_parents(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(u for (u, v) in self.directed if v == i))

    def undirected_neighbors(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(a if b == i else b for (a, b) in self.undirected if i in (a, b)))

    def skeleton(self) -> frozenset[tuple[int, int]]:
        pairs = {(min(u, v), max(u, v)) for (u, v) in self.directed}
        return frozenset(pairs | self.undirected)

    def is_fully_directed(self) -> bool:
        return not self.undirected

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Pdag)
            and self.n == other.n
            and self.directed == other.directed
            and self.undirected == other.undirected
        )

    def __hash__(self) -> int:
        return hash((self.n, self.directed, self.undirected))

    def __repr__(self) -> str:
        return (
            f"Pdag(n={self.n}, directed={sorted(self.directed)}, "
            f"undirected={sorted(self.undirected)})"
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "directed": sorted([u, v] for (u, v) in self.directed),
                "undirected": sorted([a, b] for (a, b) in self.undirected),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Pdag":
        obj = json.loads(text)
        return cls(obj["n"], obj.get("directed", ()), obj.get("undirected", ()))

    @classmethod
    def from_dag(cls, dag: Dag) -> "Pdag":
        return cls(dag.n, directed=dag.edges())


class SetKind(Enum):
    """Adjustment-set classes; values double as the CLI spellings."""

    PARENT = "pa"
    MINIMAL_PARENT = "pa-min"
    O_SET = "o"
    MINIMAL_O_SET = "o-min"


@dataclass(frozen=True)
class AdjustmentSet:
    """A backdoor adjustment set for one ordered pair.

    ``contains_effect`` marks the sentinel {j}: interventions on the cause
    cannot reach the effect, so the intervention distribution collapses to
    the marginal of the effect variable.
    """

    kind: SetKind
    nodes: tuple[int, ...]
    contains_effect: bool = False

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes)))
        if self.contains_effect and len(self.nodes) != 1:
            raise ValueError("sentinel adjustment set must be the single node {j}")


def _check_node(dag: Dag, i: int) -> None:
    if not 0 <= i < dag.n:
        raise IndexError(f"node {i} out of range for n={dag.n}")


def _reach_up(dag: Dag, seeds: Iterable[int]) -> set[int]:
    """Seeds plus all their ancestors."""
    out = set(seeds)
    stack = list(out)
    while stack:
        v = stack.pop()
        for p in dag.parents[v]:
            if p not in out:
                out.add(p)
                stack.append(p)
    return out


def _reach_down(dag: Dag, seeds: Iterable[int]) -> set[int]:
    """Seeds plus all their descendants."""
    out = set(seeds)
    stack = list(out)
    while stack:
        v = stack.pop()
        for c in dag.children(v):
            if c not in out:
                out.add(c)
                stack.append(c)
    return out


def ancestors_and_descendants(dag: Dag, i: int) -> tuple[set[int], set[int]]:
    """Strict ancestor and descendant sets of node i (i in neither)."""
    _check_node(dag, i)
    return _reach_up(dag, [i]) - {i}, _reach_down(dag, [i]) - {i}


def d_separated(dag: Dag, x: int, y: int, z: Iterable[int] = ()) -> bool:
    """Test whether z d-separates x and y.

    Implemented as reachability on the moralized ancestral graph: restrict
    to the inclusive ancestors of {x, y} | z, marry co-parents, drop edge
    directions, delete z, and look for any x-y path. This is equivalent to
    blocking every path in the path-enumeration sense.
    """
    zs = frozenset(int(v) for v in z)
    _check_node(dag, x)
    _check_node(dag, y)
    for v in zs:
        _check_node(dag, v)
    if x == y:
        raise ValueError("x and y must differ")
    if x in zs or y in zs:
        raise ValueError("conditioning set overlaps {x, y}")

    anc = _reach_up(dag, {x, y} | zs)
    # Moral graph on the ancestral set. The set is ancestrally closed, so
    # every parent of a member is a member.
    adj: dict[int, set[int]] = {v: set() for v in anc}
    for v in anc:
        ps = dag.parents[v]
        for p in ps:
            adj[v].add(p)
            adj[p].add(v)
        for p, q in combinations(ps, 2):
            adj[p].add(q)
            adj[q].add(p)

    seen = {x}
    stack = [x]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w == y:
                return False
            if w not in seen and w not in zs:
                seen.add(w)
                stack.append(w)
    return True


def backdoor_graph(dag: Dag, i: int) -> Dag:
    """Copy of the DAG with every edge out of i deleted."""
    _check_node(dag, i)
    parents = [tuple(p for p in ps if p != i) if i in ps else ps for ps in dag.parents]
    return Dag(dag.n, parents)


def is_valid_adjustment(dag: Dag, i: int, j: int, z: Iterable[int]) -> bool:
    """Pearl's backdoor criterion for the covariate set z and pair (i, j).

    True iff z contains no descendant of i and z d-separates i and j in the
    backdoor graph. Sets containing j are never valid here; the sentinel
    branch is handled by ``adjustment_set`` instead.
    """
    zs = frozenset(int(v) for v in z)
    _check_node(dag, i)
    _check_node(dag, j)
    if i == j:
        raise ValueError("i and j must differ")
    if i in zs:
        raise ValueError("adjustment set must not contain the cause")
    if j in zs:
        return False
    desc = _reach_down(dag, [i]) - {i}
    if zs & desc:
        return False
    return d_separated(backdoor_graph(dag, i), i, j, zs)


def _prune_to_minimal(bdg: Dag, i: int, j: int, nodes: set[int]) -> set[int]:
    # Repeatedly drop the highest-indexed node whose removal keeps i,j
    # d-separated in the backdoor graph. The minimal subset is unique, so
    # the scan order only fixes the trajectory, not the result.
    keep = set(nodes)
    while True:
        for v in sorted(keep, reverse=True):
            if d_separated(bdg, i, j, keep - {v}):
                keep.discard(v)
                break
        else:
            return keep


def adjustment_set(dag: Dag, i: int, j: int, kind: SetKind | str) -> AdjustmentSet:
    """Compute the adjustment set of the requested class for the pair (i, j).

    Parent returns pa(i), collapsed to the sentinel {j} when j is itself a
    parent of i (the intervention then leaves the effect's marginal
    untouched). The path-aware kinds return the sentinel exactly when no
    directed path i -> ... -> j exists. The o-set collects parents of all
    nodes on proper causal paths and removes the forbidden nodes: inclusive
    descendants of causal-path nodes, plus i. Minimal kinds prune their base
    set to the unique subset from which no node can be removed without
    breaking d-separation in the backdoor graph.
    """
    kind = SetKind(kind)
    _check_node(dag, i)
    _check_node(dag, j)
    if i == j:
        raise ValueError("i and j must differ")

    pa = dag.parents[i]
    if kind is SetKind.PARENT:
        if j in pa:
            return AdjustmentSet(kind, (j,), contains_effect=True)
        return AdjustmentSet(kind, pa)

    desc_incl = _reach_down(dag, [i])
    if j not in desc_incl:
        return AdjustmentSet(kind, (j,), contains_effect=True)

    if kind is SetKind.MINIMAL_PARENT:
        minimal = _prune_to_minimal(backdoor_graph(dag, i), i, j, set(pa))
        return AdjustmentSet(kind, tuple(minimal))

    # Nodes on proper causal paths: descendants of i that reach j, i itself
    # excluded, j included.
    causal = (desc_incl & _reach_up(dag, [j])) - {i}
    o_nodes = set().union(*(dag.parents[c] for c in causal)) if causal else set()
    forbidden = _reach_down(dag, causal) | {i}
    o_nodes -= forbidden
    if kind is SetKind.O_SET:
        return AdjustmentSet(kind, tuple(o_nodes))
    minimal = _prune_to_minimal(backdoor_graph(dag, i), i, j, o_nodes)
    return AdjustmentSet(kind, tuple(minimal))
