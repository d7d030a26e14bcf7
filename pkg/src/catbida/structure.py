"""Posterior inference over DAG structures.

Three routes to a graph posterior or point estimate: exact enumeration of
all labeled DAGs (small n), Metropolis-Hastings over single-edge moves, and
a stable PC variant returning a PDAG. On top of a graph sample sits the
per-pair posterior over adjustment sets that the intervention posterior
mixes over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .data import Dataset
from .graphs import AdjustmentSet, Dag, Pdag, SetKind, adjustment_set
from .scoring import bdeu_log_score, g2_ci_test

Move = tuple[str, int, int]

EXACT_MAX_NODES = 5


class ScoreCache:
    """Memoized BDeu family scores for one (dataset, ess) pair."""

    __slots__ = ("data", "ess", "_scores")

    def __init__(self, data: Dataset, ess: float):
        self.data = data
        self.ess = float(ess)
        self._scores: dict[tuple[int, tuple[int, ...]], float] = {}

    def family(self, child: int, parents: tuple[int, ...]) -> float:
        key = (child, parents)
        score = self._scores.get(key)
        if score is None:
            score = bdeu_log_score(self.data, child, parents, self.ess)
            self._scores[key] = score
        return score

    def dag(self, dag: Dag) -> float:
        return sum(self.family(i, dag.parents[i]) for i in range(dag.n))


@dataclass(frozen=True, eq=False)
class DagSample:
    """Sample from a DAG posterior, either exact-weighted or an MCMC trace.

    For the exact provenance, weights are the normalized posterior
    probabilities in DAG order; for mcmc, weights is None and each of the M
    (possibly repeated) draws counts 1/M.
    """

    dags: tuple[Dag, ...]
    provenance: str
    weights: np.ndarray | None = None

    def __post_init__(self):
        if len(self.dags) < 1:
            raise ValueError("empty DAG sample")
        if self.provenance not in ("exact-weighted", "mcmc"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "exact-weighted":
            if self.weights is None:
                raise ValueError("exact-weighted sample needs weights")
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (len(self.dags),):
                raise ValueError("weights length mismatch")
            if (w < 0).any() or abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("exact weights must be nonnegative and sum to 1")
            object.__setattr__(self, "weights", w)
        elif self.weights is not None:
            raise ValueError("mcmc sample carries no weights")

    def __len__(self) -> int:
        return len(self.dags)

    def dag_probabilities(self) -> dict[Dag, float]:
        """Collapse repeats into a probability per distinct DAG."""
        out: dict[Dag, float] = {}
        if self.weights is not None:
            for dag, w in zip(self.dags, self.weights):
                out[dag] = out.get(dag, 0.0) + float(w)
        else:
            step = 1.0 / len(self.dags)
            for dag in self.dags:
                out[dag] = out.get(dag, 0.0) + step
        return out

    def save(self, path: str | Path) -> None:
        """One JSON DAG per line; exact weights go to a parallel <path>.weights file."""
        path = Path(path)
        path.write_text("".join(d.to_json() + "\n" for d in self.dags))
        if self.weights is not None:
            weight_path = Path(str(path) + ".weights")
            weight_path.write_text("".join(f"{float(w)!r}\n" for w in self.weights))

    @classmethod
    def load(cls, path: str | Path) -> "DagSample":
        path = Path(path)
        dags = tuple(
            Dag.from_json(line) for line in path.read_text().splitlines() if line.strip()
        )
        weight_path = Path(str(path) + ".weights")
        if weight_path.exists():
            weights = np.array([float(w) for w in weight_path.read_text().split()])
            return cls(dags, "exact-weighted", weights)
        return cls(dags, "mcmc")


def all_dags(n: int, max_parents: int | None = None) -> list[Dag]:
    """All labeled DAGs on n nodes, optionally indegree-capped.

    Each unordered pair takes one of three states (absent or either
    orientation); cyclic assignments are filtered out. 25 DAGs for n=3,
    543 for n=4, 29281 for n=5.
    """
    pairs = list(combinations(range(n), 2))
    out = []
    for states in product((0, 1, 2), repeat=len(pairs)):
        parents: list[list[int]] = [[] for _ in range(n)]
        for (a, b), s in zip(pairs, states):
            if s == 1:
                parents[b].append(a)
            elif s == 2:
                parents[a].append(b)
        if max_parents is not None and any(len(p) > max_parents for p in parents):
            continue
        try:
            out.append(Dag(n, parents))
        except ValueError:
            continue
    return out


def exact_dag_posterior(data: Dataset, ess: float, max_parents: int = 5) -> DagSample:
    """Full posterior over DAGs by enumeration, uniform prior over admissible DAGs."""
    n = data.n_vars
    if n > EXACT_MAX_NODES:
        raise ValueError(f"exact enumeration supports n <= {EXACT_MAX_NODES}, got {n}")
    dags = all_dags(n, max_parents)
    cache = ScoreCache(data, ess)
    logs = np.array([cache.dag(g) for g in dags])
    weights = np.exp(logs - logsumexp(logs))
    weights /= weights.sum()
    return DagSample(tuple(dags), "exact-weighted", weights)


def _has_path(children: Sequence[set[int]], src: int, dst: int) -> bool:
    if src == dst:
        return True
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


def _has_path_skipping(
    children: Sequence[set[int]], src: int, dst: int, skip: tuple[int, int]
) -> bool:
    """Like _has_path but ignores the single edge `skip`."""
    stack = [src]
    seen = {src}
    while stack:
        u = stack.pop()
        for w in children[u]:
            if (u, w) == skip:
                continue
            if w == dst:
                return True
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def _enumerate_moves(
    parents: Sequence[set[int]],
    children: Sequence[set[int]],
    max_parents: int,
    skeleton: frozenset[tuple[int, int]] | None,
) -> list[Move]:
    n = len(parents)
    moves: list[Move] = []
    for v in range(n):
        for u in sorted(parents[v]):
            moves.append(("del", u, v))
            # reversing u->v is acyclic iff no alternate directed path u..v
            if len(parents[u]) < max_parents and not _has_path_skipping(
                children, u, v, (u, v)
            ):
                moves.append(("rev", u, v))
    for u in range(n):
        for v in range(n):
            if u == v or u in parents[v] or v in parents[u]:
                continue
            if len(parents[v]) >= max_parents:
                continue
            if skeleton is not None and (min(u, v), max(u, v)) not in skeleton:
                continue
            if _has_path(children, v, u):
                continue
            moves.append(("add", u, v))
    return moves


def valid_moves(
    dag: Dag, max_parents: int, skeleton: Pdag | frozenset | None = None
) -> list[Move]:
    """Single-edge moves applicable to dag: ("add"|"del"|"rev", u, v) for edge u->v."""
    parents = [set(p) for p in dag.parents]
    children = [set(dag.children(i)) for i in range(dag.n)]
    skel = skeleton.skeleton() if isinstance(skeleton, Pdag) else skeleton
    return _enumerate_moves(parents, children, max_parents, skel)


def apply_move(dag: Dag, move: Move) -> Dag:
    """The DAG one move away; raises on anything inapplicable."""
    op, u, v = move
    parents = [set(p) for p in dag.parents]
    if op == "add":
        if u in parents[v] or v in parents[u]:
            raise ValueError(f"cannot add existing edge {u}->{v}")
        parents[v].add(u)
    elif op == "del":
        if u not in parents[v]:
            raise ValueError(f"cannot delete missing edge {u}->{v}")
        parents[v].remove(u)
    elif op == "rev":
        if u not in parents[v]:
            raise ValueError(f"cannot reverse missing edge {u}->{v}")
        parents[v].remove(u)
        parents[u].add(v)
    else:
        raise ValueError(f"unknown move {op!r}")
    return Dag(dag.n, parents)


@dataclass(frozen=True)
class McmcConfig:
    """Knobs for structure_mcmc; defaults match the CLI."""

    iters: int = 200_000
    burnin: int = 20_000
    thin: int = 100
    max_parents: int = 5
    chains: int = 1
    seed: int | tuple[int, ...] = 0
    skeleton: Pdag | None = None

    def __post_init__(self):
        if self.burnin < 0 or self.iters <= self.burnin:
            raise ValueError("need iters > burnin >= 0")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.chains < 1:
            raise ValueError("need at least one chain")
        if self.max_parents < 0:
            raise ValueError("max_parents must be >= 0")


class _UniformStream:
    """Buffered uniforms; one Generator draw per block instead of per call."""

    __slots__ = ("rng", "buf", "pos")

    def __init__(self, rng: np.random.Generator, block: int = 8192):
        self.rng = rng
        self.buf = rng.random(block)
        self.pos = 0

    def next(self) -> float:
        if self.pos == len(self.buf):
            self.buf = self.rng.random(len(self.buf))
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u


def _run_chain(
    cache: ScoreCache,
    n: int,
    config: McmcConfig,
    chain_index: int,
    interned: dict[tuple[tuple[int, ...], ...], Dag],
) -> list[Dag]:
    skel = config.skeleton.skeleton() if config.skeleton is not None else None
    base = config.seed if isinstance(config.seed, tuple) else (config.seed,)
    uniforms = _UniformStream(np.random.default_rng([*base, chain_index]))

    parents: list[set[int]] = [set() for _ in range(n)]
    children: list[set[int]] = [set() for _ in range(n)]
    fam = [cache.family(i, ()) for i in range(n)]
    moves = _enumerate_moves(parents, children, config.max_parents, skel)

    def family_score(child: int) -> float:
        return cache.family(child, tuple(sorted(parents[child])))

    out: list[Dag] = []
    for t in range(1, config.iters + 1):
        if moves:
            op, u, v = moves[int(uniforms.next() * len(moves))]
            # apply the move in place, undo on rejection
            if op == "add":
                parents[v].add(u)
                children[u].add(v)
                touched = (v,)
            elif op == "del":
                parents[v].remove(u)
                children[u].remove(v)
                touched = (v,)
            else:
                parents[v].remove(u)
                children[u].remove(v)
                parents[u].add(v)
                children[v].add(u)
                touched = (u, v)
            delta = sum(family_score(i) - fam[i] for i in touched)
            proposed_moves = _enumerate_moves(parents, children, config.max_parents, skel)
            log_accept = delta + math.log(len(moves)) - math.log(len(proposed_moves))
            if log_accept >= 0.0 or uniforms.next() < math.exp(log_accept):
                for i in touched:
                    fam[i] = family_score(i)
                moves = proposed_moves
            else:
                if op == "add":
                    parents[v].remove(u)
                    children[u].remove(v)
                elif op == "del":
                    parents[v].add(u)
                    children[u].add(v)
                else:
                    parents[u].remove(v)
                    children[v].remove(u)
                    parents[v].add(u)
                    children[u].add(v)
        if t > config.burnin and (t - config.burnin) % config.thin == 0:
            key = tuple(tuple(sorted(p)) for p in parents)
            dag = interned.get(key)
            if dag is None:
                dag = Dag(n, key)
                interned[key] = dag
            out.append(dag)
    return out


def structure_mcmc(data: Dataset, ess: float, config: McmcConfig = McmcConfig()) -> DagSample:
    """Metropolis-Hastings over DAGs with add/delete/reverse edge moves.

    Proposals are uniform over the currently valid moves, so the acceptance
    ratio carries the valid-move-count correction |M(G)| / |M(G')| needed
    for detailed balance. Chains start at the empty DAG; the thinned
    post-burnin states of all chains are concatenated.
    """
    if config.skeleton is not None and config.skeleton.n != data.n_vars:
        raise ValueError("skeleton node count does not match the data")
    cache = ScoreCache(data, ess)
    interned: dict[tuple[tuple[int, ...], ...], Dag] = {}
    dags: list[Dag] = []
    for c in range(config.chains):
        dags.extend(_run_chain(cache, data.n_vars, config, c, interned))
    return DagSample(tuple(dags), "mcmc")


def _stable_skeleton(
    data: Dataset, alpha: float, max_cond_size: int | None
) -> tuple[list[set[int]], dict[tuple[int, int], frozenset[int]]]:
    n = data.n_vars
    adj: list[set[int]] = [set(range(n)) - {i} for i in range(n)]
    sepsets: dict[tuple[int, int], frozenset[int]] = {}
    level = 0
    while True:
        if max_cond_size is not None and level > max_cond_size:
            break
        if not any(len(adj[x] - {y}) >= level for x in range(n) for y in adj[x]):
            break
        # neighbor sets frozen for the whole level: removal decisions at
        # level l depend only on the level-(l-1) graph, not on visit order
        frozen = [set(a) for a in adj]
        for x in range(n):
            for y in sorted(frozen[x]):
                if y not in adj[x]:
                    continue
                candidates = sorted(frozen[x] - {y})
                if len(candidates) < level:
                    continue
                for s in combinations(candidates, level):
                    if g2_ci_test(data, x, y, s, alpha).independent:
                        adj[x].discard(y)
                        adj[y].discard(x)
                        sepsets[(x, y)] = sepsets[(y, x)] = frozenset(s)
                        break
        level += 1
    return adj, sepsets


def _orient_v_structures(
    n: int,
    adj: Sequence[set[int]],
    sepsets: dict[tuple[int, int], frozenset[int]],
) -> set[tuple[int, int]]:
    arcs: set[tuple[int, int]] = set()
    for a in range(n):
        for b in range(a + 1, n):
            if b in adj[a]:
                continue
            sep = sepsets.get((a, b), frozenset())
            for c in sorted(adj[a] & adj[b]):
                if c in sep:
                    continue
                # keep-first on conflict: a later collider never flips an arc
                if (c, a) not in arcs:
                    arcs.add((a, c))
                if (c, b) not in arcs:
                    arcs.add((b, c))
    return arcs


def _meek_pass(n: int, adjacent, arcs: set[tuple[int, int]], undirected) -> bool:
    """One sweep of Meek rules 1-4; returns whether anything was oriented."""
    changed = False
    for a in range(n):
        for b in range(n):
            if not undirected(a, b):
                continue
            orient = False
            for c in range(n):
                if c in (a, b):
                    continue
                # R1: c->a, c and b nonadjacent
                if (c, a) in arcs and not adjacent(c, b):
                    orient = True
                    break
                # R2: directed chain a->c->b
                if (a, c) in arcs and (c, b) in arcs:
                    orient = True
                    break
            if not orient:
                for c, d in combinations(range(n), 2):
                    if {c, d} & {a, b}:
                        continue
                    # R3: a-c, a-d, c->b, d->b, c and d nonadjacent
                    if (
                        undirected(a, c)
                        and undirected(a, d)
                        and (c, b) in arcs
                        and (d, b) in arcs
                        and not adjacent(c, d)
                    ):
                        orient = True
                        break
                    # R4: a adjacent to c (any mark), chain c->d->b, c and b
                    # nonadjacent; either orientation of b->a is contradictory
                    for e, f in ((c, d), (d, c)):
                        if (
                            adjacent(a, e)
                            and (e, f) in arcs
                            and (f, b) in arcs
                            and not adjacent(e, b)
                        ):
                            orient = True
                            break
                    if orient:
                        break
            if orient:
                arcs.add((a, b))
                changed = True
    return changed


def _close_under_meek(
    n: int, skeleton: frozenset[tuple[int, int]], arcs: set[tuple[int, int]]
) -> Pdag:
    def adjacent(u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in skeleton

    def undirected(u: int, v: int) -> bool:
        return adjacent(u, v) and (u, v) not in arcs and (v, u) not in arcs

    while _meek_pass(n, adjacent, arcs, undirected):
        pass
    undirected_edges = [e for e in skeleton if e not in arcs and (e[1], e[0]) not in arcs]
    return Pdag(n, directed=arcs, undirected=undirected_edges)


def meek_closure(pdag: Pdag) -> Pdag:
    """Propagate Meek rules 1-4 until no undirected edge can be oriented."""
    return _close_under_meek(pdag.n, pdag.skeleton(), set(pdag.directed))


def pc_cpdag(data: Dataset, alpha: float = 0.05, max_cond_size: int | None = None) -> Pdag:
    """Stable PC: order-independent skeleton, collider orientation, Meek closure.

    The output is whatever PDAG the tests support; on finite data it need
    not be a perfect CPDAG.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    n = data.n_vars
    adj, sepsets = _stable_skeleton(data, alpha, max_cond_size)
    arcs = _orient_v_structures(n, adj, sepsets)
    skeleton = frozenset(
        (min(x, y), max(x, y)) for x in range(n) for y in adj[x]
    )
    return _close_under_meek(n, skeleton, arcs)


def v_structures(dag: Dag) -> frozenset[tuple[int, int, int]]:
    """Colliders a->c<-b with a<b and a,b nonadjacent, as (a, c, b) triples."""
    out = set()
    for c in range(dag.n):
        for a, b in combinations(dag.parents[c], 2):
            if not dag.adjacent(a, b):
                out.add((a, c, b))
    return frozenset(out)


def dag_to_cpdag(dag: Dag) -> Pdag:
    """The completed PDAG of dag's Markov equivalence class."""
    skeleton = frozenset((min(u, v), max(u, v)) for u, v in dag.edges())
    arcs: set[tuple[int, int]] = set()
    for a, c, b in sorted(v_structures(dag)):
        arcs.add((a, c))
        arcs.add((b, c))
    return _close_under_meek(dag.n, skeleton, arcs)


@dataclass(frozen=True)
class AdjustmentPosterior:
    """Posterior over adjustment sets for one ordered pair."""

    pair: tuple[int, int]
    components: tuple[tuple[AdjustmentSet, float], ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("empty adjustment posterior")
        sets = [a for a, _ in self.components]
        if len(set(sets)) != len(sets):
            raise ValueError("duplicate adjustment sets")
        probs = np.array([p for _, p in self.components])
        if (probs <= 0).any() or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("component probabilities must be positive and sum to 1")

    def probability_of(self, aset: AdjustmentSet) -> float:
        for a, p in self.components:
            if a == aset:
                return p
        return 0.0

    def sentinel_mass(self) -> float:
        return sum(p for a, p in self.components if a.contains_effect)


def adjustment_posterior(
    sample: DagSample, i: int, j: int, kind: SetKind | str
) -> AdjustmentPosterior:
    """Tally adjustment_set over the graph sample into set probabilities."""
    tally: dict[AdjustmentSet, float] = {}
    for dag, prob in sample.dag_probabilities().items():
        aset = adjustment_set(dag, i, j, kind)
        tally[aset] = tally.get(aset, 0.0) + prob
    components = sorted(
        tally.items(), key=lambda kv: (-kv[1], kv[0].nodes, kv[0].contains_effect)
    )
    total = sum(p for _, p in components)
    components = tuple((a, p / total) for a, p in components)
    return AdjustmentPosterior((i, j), components)
