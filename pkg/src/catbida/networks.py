"""Ground-truth categorical Bayesian networks.

Random generation, forward sampling, and the exact intervention oracle via
the truncated factorization: P(x_j | do(x_i)) = sum over all joint
configurations (x_i fixed) of prod_{k != i} theta_{x_k | x_Gk}. CPT rows are
indexed by the shared mixed-radix convention (lowest-indexed parent varies
fastest), and the JSON form is
``{"cards": [...], "parents": [[...], ...], "cpts": [[row-major floats], ...]}``.
"""

from __future__ import annotations

import json
import math
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import Dataset, config_count, config_index
from .effects import effect_of_ipt
from .graphs import Dag

ENUMERATION_CAP = 1 << 24


class CptNetwork:
    """DAG plus one conditional probability table per node."""

    __slots__ = ("dag", "cards", "cpts")

    def __init__(self, dag: Dag, cards: Sequence[int], cpts: Sequence[np.ndarray]):
        self.dag = dag
        self.cards = tuple(int(c) for c in cards)
        if len(self.cards) != dag.n:
            raise ValueError("cards length must equal node count")
        if any(c < 2 for c in self.cards):
            raise ValueError("cardinalities must be >= 2")
        if len(cpts) != dag.n:
            raise ValueError("one CPT per node required")
        tables = []
        for i, table in enumerate(cpts):
            table = np.asarray(table, dtype=float)
            r_pa = config_count([self.cards[p] for p in dag.parents[i]])
            if table.shape != (r_pa, self.cards[i]):
                raise ValueError(
                    f"CPT {i} has shape {table.shape}, expected {(r_pa, self.cards[i])}"
                )
            if (table < 0).any() or np.abs(table.sum(axis=1) - 1.0).max() > 1e-12:
                raise ValueError(f"CPT {i} rows must be probability vectors")
            tables.append(table)
        self.cpts = tuple(tables)

    @property
    def n(self) -> int:
        return self.dag.n

    def to_json(self) -> str:
        return json.dumps(
            {
                "cards": list(self.cards),
                "parents": [list(p) for p in self.dag.parents],
                "cpts": [t.ravel().tolist() for t in self.cpts],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CptNetwork":
        obj = json.loads(text)
        cards = obj["cards"]
        dag = Dag(len(cards), obj["parents"])
        cpts = []
        for i, flat in enumerate(obj["cpts"]):
            r_pa = config_count([cards[p] for p in dag.parents[i]])
            cpts.append(np.asarray(flat, dtype=float).reshape(r_pa, cards[i]))
        return cls(dag, cards, cpts)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "CptNetwork":
        return cls.from_json(Path(path).read_text())


def random_network(
    n: int,
    expected_neighbors: float,
    cards: int | Sequence[int] = 2,
    seed=0,
) -> CptNetwork:
    """Random DAG (uniform topological order, i.i.d. edges) with uniform-Dirichlet CPTs.

    Each of the n(n-1)/2 admissible node pairs becomes an edge independently
    with probability expected_neighbors / (n - 1), directed along the drawn
    order, so the expected node degree is expected_neighbors.
    """
    if n < 1:
        raise ValueError("need at least one node")
    if isinstance(cards, int):
        cards = (cards,) * n
    cards = tuple(int(c) for c in cards)
    if n == 1:
        p = 0.0
    else:
        p = expected_neighbors / (n - 1)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"invalid edge probability {p} from expected_neighbors={expected_neighbors}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    parents: list[list[int]] = [[] for _ in range(n)]
    for a, b in combinations(range(n), 2):
        if rng.random() < p:
            parents[order[b]].append(order[a])
    dag = Dag(n, parents)
    cpts = []
    for i in range(n):
        r_pa = config_count([cards[q] for q in dag.parents[i]])
        cpts.append(rng.dirichlet(np.ones(cards[i]), size=r_pa))
    return CptNetwork(dag, cards, cpts)


def forward_sample(bn: CptNetwork, n_samples: int, seed=0) -> Dataset:
    """Ancestral sampling of N i.i.d. joint configurations."""
    if n_samples < 0:
        raise ValueError("sample count must be nonnegative")
    rng = np.random.default_rng(seed)
    codes = np.zeros((n_samples, bn.n), dtype=np.int64)
    for i in bn.dag.topological_order():
        pa = list(bn.dag.parents[i])
        rows = config_index(codes[:, pa], [bn.cards[p] for p in pa])
        probs = bn.cpts[i][rows]
        cum = np.cumsum(probs, axis=1)
        u = rng.random(n_samples)
        codes[:, i] = np.minimum((u[:, None] > cum).sum(axis=1), bn.cards[i] - 1)
    return Dataset(codes, bn.cards)


def _factor_tensor(bn: CptNetwork, k: int) -> np.ndarray:
    """CPT of node k as an n-dim broadcastable tensor over the joint space."""
    pa = bn.dag.parents[k]
    table = bn.cpts[k]
    # axis 0 of the CPT is mixed-radix with the lowest parent fastest, which
    # in C order means the reshaped axes run over parents in reverse
    arr = table.reshape([bn.cards[p] for p in reversed(pa)] + [bn.cards[k]])
    axis_nodes = list(reversed(pa)) + [k]
    arr = arr.transpose(np.argsort(axis_nodes))
    shape = [1] * bn.n
    for node in axis_nodes:
        shape[node] = bn.cards[node]
    return arr.reshape(shape)


def _joint_without(bn: CptNetwork, skip: int, cap: int) -> np.ndarray:
    states = config_count(bn.cards)
    if states > cap:
        raise ValueError(f"joint state space {states} exceeds the enumeration cap {cap}")
    acc = np.ones(bn.cards)
    for k in range(bn.n):
        if k != skip:
            acc = acc * _factor_tensor(bn, k)
    return acc


def _marginalize_pair(acc: np.ndarray, i: int, j: int) -> np.ndarray:
    other = tuple(k for k in range(acc.ndim) if k not in (i, j))
    table = acc.sum(axis=other)
    if i > j:
        table = table.T
    return table / table.sum(axis=1, keepdims=True)


def exact_intervention(bn: CptNetwork, i: int, j: int, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Exact IPT for (i, j): row x is P(x_j | do(x_i = x)).

    Sums the truncated factorization over the whole joint space; exact up to
    floating point, guarded by the enumeration cap.
    """
    if i == j:
        raise ValueError("i and j must differ")
    return _marginalize_pair(_joint_without(bn, i, cap), i, j)


def true_effects(bn: CptNetwork, kind: str = "jsd", cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Exact effect matrix over all ordered pairs; diagonal is NaN.

    The per-cause joint table is built once and marginalized per effect, so
    the cost is n joint enumerations rather than n^2.
    """
    if kind == "ate" and any(c != 2 for c in bn.cards):
        raise ValueError("ATE effects need an all-binary network")
    out = np.full((bn.n, bn.n), np.nan)
    for i in range(bn.n):
        acc = _joint_without(bn, i, cap)
        for j in range(bn.n):
            if j != i:
                out[i, j] = effect_of_ipt(_marginalize_pair(acc, i, j), kind)
    return out


def exact_ipts(bn: CptNetwork, cap: int = ENUMERATION_CAP) -> dict[tuple[int, int], np.ndarray]:
    """Exact IPTs for every ordered pair, keyed (cause, effect)."""
    out: dict[tuple[int, int], np.ndarray] = {}
    for i in range(bn.n):
        acc = _joint_without(bn, i, cap)
        for j in range(bn.n):
            if j != i:
                out[(i, j)] = _marginalize_pair(acc, i, j)
    return out
