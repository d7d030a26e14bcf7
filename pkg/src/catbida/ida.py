"""IDA-style baselines: backdoor plug-in estimates from a single PDAG.

The parent variant enumerates locally valid parent sets around each cause;
the optimal variant enumerates full consistent DAG extensions and uses their
o-sets. Point estimates use the same smoothed counts as the posterior means
of the Bayesian pipeline, so an empty PDAG reproduces the naive conditional
estimator exactly.
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

import numpy as np

from .data import Dataset
from .effects import effect_of_ipt
from .graphs import AdjustmentSet, CycleError, Dag, Pdag, SetKind, adjustment_set
from .posterior import DEFAULT_CELL_CAP, backdoor_posterior_params

EXTENSION_CAP = 10_000


def local_parent_sets(pdag: Pdag, i: int) -> list[tuple[int, ...]]:
    """Candidate parent sets of i across the PDAG's members, found locally.

    The directed parents are always in; a subset S of the undirected
    neighbors may be added iff orienting S into i creates no new collider at
    i, i.e. every node of S is adjacent to every other candidate parent.
    """
    directed = pdag.directed_parents(i)
    neighbors = pdag.undirected_neighbors(i)
    out = []
    for r in range(len(neighbors) + 1):
        for s in combinations(neighbors, r):
            if all(pdag.adjacent(a, b) for a, b in combinations(s, 2)) and all(
                pdag.adjacent(a, d) for a in s for d in directed
            ):
                out.append(tuple(sorted(directed + s)))
    return out


def _directed_path(children: Sequence[set[int]], src: int, dst: int) -> bool:
    stack = [src]
    seen = {src}
    while stack:
        u = stack.pop()
        for w in children[u]:
            if w == dst:
                return True
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def consistent_extensions(pdag: Pdag, cap: int = EXTENSION_CAP) -> list[Dag]:
    """Every DAG that orients the undirected edges without changing the
    skeleton, the given arcs, or the collider set.

    Raises when no extension exists or when more than cap are found.
    """
    n = pdag.n
    parents = [set(pdag.directed_parents(i)) for i in range(n)]
    children: list[set[int]] = [set() for _ in range(n)]
    for u, v in pdag.directed:
        children[u].add(v)
    try:
        Dag(n, parents)
    except CycleError:
        raise ValueError("PDAG has no consistent extension") from None

    colliders = set()
    for c in range(n):
        for a, b in combinations(sorted(parents[c]), 2):
            if not pdag.adjacent(a, b):
                colliders.add((a, c, b))

    def can_orient(u: int, v: int) -> bool:
        if _directed_path(children, v, u):
            return False
        for w in parents[v]:
            if w != u and not pdag.adjacent(w, u):
                if (min(u, w), v, max(u, w)) not in colliders:
                    return False
        return True

    edges = sorted(pdag.undirected)
    out: list[Dag] = []

    def recurse(k: int) -> None:
        if k == len(edges):
            if len(out) >= cap:
                raise ValueError(f"more than {cap} consistent extensions")
            out.append(Dag(n, parents))
            return
        x, y = edges[k]
        for u, v in ((x, y), (y, x)):
            if can_orient(u, v):
                parents[v].add(u)
                children[u].add(v)
                recurse(k + 1)
                parents[v].remove(u)
                children[u].remove(v)

    recurse(0)
    if not out:
        raise ValueError("PDAG has no consistent extension")
    return out


def _plugin_ipt(
    data: Dataset, i: int, j: int, aset: AdjustmentSet, ess: float, cell_cap: int
) -> np.ndarray:
    return backdoor_posterior_params(data, i, j, aset, ess, cell_cap).mean()


def ida_estimate(
    data: Dataset,
    pdag: Pdag,
    variant: str = "parent",
    ess: float = 1.0,
    kind: str = "jsd",
    extension_cap: int = EXTENSION_CAP,
    cell_cap: int = DEFAULT_CELL_CAP,
) -> tuple[np.ndarray, dict[tuple[int, int], np.ndarray]]:
    """Per-pair effect and IPT point estimates averaged over the candidate
    adjustment sets the PDAG admits. Diagonal effects are NaN."""
    n = data.n_vars
    if pdag.n != n:
        raise ValueError("PDAG node count does not match the data")
    if variant == "parent":
        parent_sets = {i: local_parent_sets(pdag, i) for i in range(n)}
    elif variant == "optimal":
        extensions = consistent_extensions(pdag, extension_cap)
    else:
        raise ValueError(f"unknown IDA variant {variant!r}")

    effects = np.full((n, n), np.nan)
    ipts: dict[tuple[int, int], np.ndarray] = {}
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            if variant == "parent":
                candidates = []
                for pa in parent_sets[i]:
                    if j in pa:
                        candidates.append(
                            AdjustmentSet(SetKind.PARENT, (j,), contains_effect=True)
                        )
                    else:
                        candidates.append(AdjustmentSet(SetKind.PARENT, pa, False))
            else:
                # distinct o-sets across the extensions, one estimate each
                candidates = sorted(
                    {adjustment_set(g, i, j, SetKind.O_SET) for g in extensions},
                    key=lambda a: (a.nodes, a.contains_effect),
                )
            tables = [_plugin_ipt(data, i, j, a, ess, cell_cap) for a in candidates]
            effects[i, j] = float(np.mean([effect_of_ipt(t, kind) for t in tables]))
            ipts[(i, j)] = np.mean(tables, axis=0)
    return effects, ipts


def naive_estimate(
    data: Dataset, kind: str = "conditional", ess: float = 1.0
) -> dict[tuple[int, int], np.ndarray]:
    """Reference IPT estimates without any adjustment.

    conditional: smoothed P(x_j | x_i) rows; marginal: every row the
    smoothed P(x_j), so all estimated effects are exactly zero.
    """
    if kind not in ("conditional", "marginal"):
        raise ValueError(f"unknown naive estimator {kind!r}")
    n = data.n_vars
    out: dict[tuple[int, int], np.ndarray] = {}
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            if kind == "conditional":
                aset = AdjustmentSet(SetKind.PARENT, (), contains_effect=False)
            else:
                aset = AdjustmentSet(SetKind.PARENT, (j,), contains_effect=True)
            out[(i, j)] = _plugin_ipt(data, i, j, aset, ess, DEFAULT_CELL_CAP)
    return out
