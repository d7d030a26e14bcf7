"""Independent oracles and shared fixtures for the test suite.

Everything here is deliberately written from first principles (path
enumeration, brute-force joint tables, subset enumeration) rather than
reusing library internals, so that agreement between the two is evidence
and not tautology.
"""

from __future__ import annotations

import itertools

import numpy as np

from catbida import CptNetwork, Dag, Dataset


# ---------------------------------------------------------------------------
# d-separation by exhaustive trail enumeration


def _trails(dag: Dag, x: int, y: int):
    """Yield every simple trail from x to y as a node sequence."""
    adj = [set(dag.parents[v]) | set(dag.children(v)) for v in range(dag.n)]
    stack = [(x, (x,))]
    while stack:
        node, path = stack.pop()
        for nxt in adj[node]:
            if nxt == y:
                yield path + (y,)
            elif nxt not in path:
                stack.append((nxt, path + (nxt,)))


def _descendants_incl(dag: Dag, v: int) -> set[int]:
    out = {v}
    frontier = [v]
    while frontier:
        u = frontier.pop()
        for c in dag.children(u):
            if c not in out:
                out.add(c)
                frontier.append(c)
    return out


def d_separated_oracle(dag: Dag, x: int, y: int, z=()) -> bool:
    """Textbook definition: every trail between x and y is blocked by z."""
    zset = set(z)
    for trail in _trails(dag, x, y):
        blocked = False
        for k in range(1, len(trail) - 1):
            prev, node, nxt = trail[k - 1], trail[k], trail[k + 1]
            collider = dag.has_edge(prev, node) and dag.has_edge(nxt, node)
            if collider:
                if not (_descendants_incl(dag, node) & zset):
                    blocked = True
                    break
            elif node in zset:
                blocked = True
                break
        if not blocked:
            return False
    return True


def has_causal_path(dag: Dag, i: int, j: int) -> bool:
    return j in _descendants_incl(dag, i)


def backdoor_valid_oracle(dag: Dag, i: int, j: int, z) -> bool:
    """Pearl's criterion checked from scratch: no descendants of i in z,
    j not in z, and z blocks i-j in the graph with i's out-edges removed."""
    zset = set(z)
    if j in zset or i in zset:
        return False
    if (_descendants_incl(dag, i) - {i}) & zset:
        return False
    trimmed = [list(ps) for ps in dag.parents]
    for c in dag.children(i):
        trimmed[c] = [p for p in trimmed[c] if p != i]
    return d_separated_oracle(Dag(dag.n, trimmed), i, j, zset)


def all_valid_adjustments(dag: Dag, i: int, j: int):
    """Brute force: every subset of V \\ {i, j} passing the oracle."""
    rest = [v for v in range(dag.n) if v not in (i, j)]
    found = []
    for k in range(len(rest) + 1):
        for sub in itertools.combinations(rest, k):
            if backdoor_valid_oracle(dag, i, j, sub):
                found.append(frozenset(sub))
    return found


def random_dag(rng: np.random.Generator, n: int, p: float) -> Dag:
    order = rng.permutation(n)
    parents: list[list[int]] = [[] for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                parents[order[b]].append(int(order[a]))
    return Dag(n, [sorted(ps) for ps in parents])


# ---------------------------------------------------------------------------
# Exact joint distribution and backdoor estimand, computed the slow way


def parent_row(config: tuple[int, ...], parents, cards) -> int:
    """Mixed-radix rank of the parent values, lowest-indexed parent fastest."""
    row = 0
    stride = 1
    for p in parents:
        row += config[p] * stride
        stride *= cards[p]
    return row


def joint_table(bn: CptNetwork) -> dict[tuple[int, ...], float]:
    cards = list(bn.cards)
    joint = {}
    for config in itertools.product(*(range(r) for r in cards)):
        prob = 1.0
        for v in range(bn.dag.n):
            row = parent_row(config, bn.dag.parents[v], cards)
            prob *= bn.cpts[v][row, config[v]]
        joint[config] = prob
    return joint


def backdoor_from_joint(bn: CptNetwork, i: int, j: int, z) -> np.ndarray:
    """Eq-by-hand backdoor estimand sum_z P(x_j | x_i, x_z) P(x_z) from the
    exact joint table. Requires positive support on every (x_i, x_z) cell."""
    joint = joint_table(bn)
    cards = list(bn.cards)
    znodes = sorted(z)
    ipt = np.zeros((cards[i], cards[j]))
    for zvals in itertools.product(*(range(cards[k]) for k in znodes)):
        pz = sum(
            p
            for cfg, p in joint.items()
            if all(cfg[k] == v for k, v in zip(znodes, zvals))
        )
        for xi in range(cards[i]):
            sel = {
                cfg: p
                for cfg, p in joint.items()
                if cfg[i] == xi and all(cfg[k] == v for k, v in zip(znodes, zvals))
            }
            denom = sum(sel.values())
            if denom <= 0:
                raise ValueError("zero-support cell; pick smoother CPTs")
            for xj in range(cards[j]):
                num = sum(p for cfg, p in sel.items() if cfg[j] == xj)
                ipt[xi, xj] += (num / denom) * pz
    return ipt


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


# ---------------------------------------------------------------------------
# Shared fixture networks


def confounder_network() -> CptNetwork:
    """Z confounds X -> Y (edges Z->X, Z->Y, X->Y). Nodes x=0, y=1, z=2."""
    dag = Dag(3, [[2], [0, 2], []])
    cpts = [
        np.array([[0.8, 0.2], [0.2, 0.8]]),  # P(x | z)
        # P(y | x, z), rows ordered x fastest: (x0z0, x1z0, x0z1, x1z1)
        np.array([[0.9, 0.1], [0.5, 0.5], [0.6, 0.4], [0.1, 0.9]]),
        np.array([[0.5, 0.5]]),  # P(z)
    ]
    return CptNetwork(dag, (2, 2, 2), cpts)


CONFOUNDER_IPT = np.array([[0.75, 0.25], [0.3, 0.7]])  # exact P(y | do(x))


def ambiguous_pair_dag() -> Dag:
    """Four-node fixture: 0 -> 1, 1 -> 2, 0 -> 2, 3 -> 2."""
    return Dag(4, [[], [0], [0, 1, 3], []])


def ambiguous_pair_network() -> CptNetwork:
    """Fixture DAG with strong, hand-picked binary CPTs."""
    p2 = np.empty((8, 2))
    for row in range(8):
        x0, x1, x3 = row & 1, (row >> 1) & 1, (row >> 2) & 1
        q = 0.1 + 0.25 * x0 + 0.5 * x1 + 0.1 * x3
        p2[row] = (1.0 - q, q)
    cpts = [
        np.array([[0.5, 0.5]]),
        np.array([[0.85, 0.15], [0.15, 0.85]]),
        p2,
        np.array([[0.6, 0.4]]),
    ]
    return CptNetwork(ambiguous_pair_dag(), (2, 2, 2, 2), cpts)
