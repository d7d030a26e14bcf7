"""Evaluation metrics: squared-error aggregates and ranking quality."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np


def offdiag_pairs(n: int) -> list[tuple[int, int]]:
    """Ordered (cause, effect) pairs in row-major order, diagonal skipped."""
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def offdiag_values(matrix: np.ndarray) -> np.ndarray:
    """Matrix entries in offdiag_pairs order."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("need a square matrix")
    return m[~np.eye(m.shape[0], dtype=bool)]


def mse(est, truth, target: str = "tau") -> float:
    """Mean squared error over off-diagonal pairs.

    tau target: est and truth are square effect matrices, diagonal entries
    ignored. pi target: est and truth map each ordered pair to an IPT; the
    squared error is averaged over cells within a pair, then over pairs.
    """
    if target == "tau":
        e = np.asarray(est, dtype=float)
        t = np.asarray(truth, dtype=float)
        if e.shape != t.shape:
            raise ValueError("effect matrices differ in shape")
        return float(np.mean((offdiag_values(e) - offdiag_values(t)) ** 2))
    if target == "pi":
        if set(est) != set(truth):
            raise ValueError("pair keys differ between estimate and truth")
        if not est:
            raise ValueError("no pairs to score")
        per_pair = []
        for pair in sorted(est):
            e = np.asarray(est[pair], dtype=float)
            t = np.asarray(truth[pair], dtype=float)
            if e.shape != t.shape:
                raise ValueError(f"IPT shapes differ for pair {pair}")
            per_pair.append(np.mean((e - t) ** 2))
        return float(np.mean(per_pair))
    raise ValueError(f"unknown target {target!r}")


def auc_pr(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """Area under the precision-recall curve of the score-descending ranking.

    Average-precision form; a run of tied scores is processed as one block
    using the precision at the block's end, so the all-tied ranking scores
    exactly the positive rate.
    """
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels, dtype=bool).ravel()
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    total_pos = int(y.sum())
    if total_pos == 0:
        raise ValueError("need at least one positive label")
    order = np.argsort(-s, kind="stable")
    s = s[order]
    y = y[order]
    area = 0.0
    tp = 0
    seen = 0
    k = 0
    while k < len(s):
        m = k + 1
        while m < len(s) and s[m] == s[k]:
            m += 1
        block_tp = int(y[k:m].sum())
        tp += block_tp
        seen += m - k
        area += block_tp * (tp / seen)
        k = m
    return area / total_pos


def positive_labels(
    truth: np.ndarray, definition: str = "nonzero", tol: float = 1e-9
) -> np.ndarray:
    """Boolean labels per off-diagonal pair of a true effect matrix.

    "nonzero": |effect| > tol. "top20": the 20 percent largest magnitudes
    among the nonzero effects, ties at the cutoff included. A 1-D input is
    treated as already-extracted off-diagonal values.
    """
    truth = np.asarray(truth, dtype=float)
    values = np.abs(truth) if truth.ndim == 1 else np.abs(offdiag_values(truth))
    nonzero = values > tol
    if definition == "nonzero":
        return nonzero
    if definition == "top20":
        selected = np.sort(values[nonzero])[::-1]
        if len(selected) == 0:
            return nonzero
        k = max(1, int(np.ceil(0.2 * len(selected))))
        return nonzero & (values >= selected[k - 1])
    raise ValueError(f"unknown label definition {definition!r}")


def scores_and_labels(
    est: np.ndarray | Mapping[tuple[int, int], float],
    truth: np.ndarray,
    definition: str = "nonzero",
) -> tuple[np.ndarray, np.ndarray]:
    """Magnitude scores aligned with truth-derived labels, offdiag_pairs order."""
    t = np.asarray(truth, dtype=float)
    if isinstance(est, Mapping):
        scores = np.array([est[p] for p in offdiag_pairs(t.shape[0])], dtype=float)
    else:
        scores = offdiag_values(est)
    return np.abs(scores), positive_labels(t, definition)
