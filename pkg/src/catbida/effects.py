"""Causal-effect contrasts of IPTs and posterior effect summaries.

The JSD effect is the uniform-weight Jensen-Shannon divergence of the
intervention distributions, in nats:

    tau = (1/r_i) sum_x sum_y pi_{y|x} log(pi_{y|x} / m_y),
    m_y = (1/r_i) sum_x pi_{y|x},

with 0 log 0 := 0. It equals the mutual information between a uniformly
random intervention on the cause and the effect variable, and satisfies
0 <= tau <= log r_i. The ATE contrast is pi_{1|1} - pi_{1|0} for binary
tables. Tables whose rows are all identical map to exactly 0.0, so "zero
effect" is a bitwise event rather than a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .posterior import BidaMixture, ipt_mean, sample_ipt_mixture

KINDS = ("jsd", "ate")


def _check_kind(kind: str) -> str:
    kind = str(kind).lower()
    if kind not in KINDS:
        raise ValueError(f"unknown effect kind {kind!r}; expected one of {KINDS}")
    return kind


def effect_stack(ipts: np.ndarray, kind: str = "jsd") -> np.ndarray:
    """Vectorized contrast over a (draws, r_i, r_j) stack of IPTs."""
    kind = _check_kind(kind)
    p = np.asarray(ipts, dtype=float)
    if p.ndim != 3:
        raise ValueError("expected a stacked array of IPTs")
    if kind == "ate":
        if p.shape[1:] != (2, 2):
            raise ValueError("ATE needs binary cause and effect")
        return p[:, 1, 1] - p[:, 0, 1]
    m = p.mean(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(p / m[:, None, :]), 0.0)
    out = terms.sum(axis=(1, 2)) / p.shape[1]
    out = np.maximum(out, 0.0)
    # identical rows mean a flat mixture: zero effect, exactly
    flat = (p == p[:, :1, :]).all(axis=(1, 2))
    out[flat] = 0.0
    return out


def effect_of_ipt(ipt: np.ndarray, kind: str = "jsd") -> float:
    """JSD (uniform weights, nats) or ATE of a single IPT."""
    ipt = np.asarray(ipt, dtype=float)
    if ipt.ndim != 2:
        raise ValueError("an IPT is a 2-D table, rows indexed by cause level")
    return float(effect_stack(ipt[None], kind)[0])


@dataclass
class EffectDraws:
    """Aligned posterior effect draws: values[p, m] is pair p, draw m."""

    pairs: tuple[tuple[int, int], ...]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != len(self.pairs):
            raise ValueError("values must be a (n_pairs, n_draws) matrix")
        if not np.isfinite(self.values).all():
            raise ValueError("effect draws must be finite")

    @property
    def n_draws(self) -> int:
        return self.values.shape[1]

    def for_pair(self, i: int, j: int) -> np.ndarray:
        return self.values[self.pairs.index((i, j))]


@dataclass
class EffectSummary:
    """Posterior summary for one ordered pair."""

    pair: tuple[int, int]
    effect_mean: float
    prob_zero: float
    ipt_mean: np.ndarray
    mean_rank: float | None = None


def posterior_effect_summary(
    mixtures: Mapping[tuple[int, int], BidaMixture],
    draws: int,
    kind: str = "jsd",
    seed: int | tuple[int, ...] = 0,
) -> tuple[EffectDraws, dict[tuple[int, int], EffectSummary]]:
    """Monte Carlo effect posteriors for every pair.

    Each pair gets an independent RNG stream keyed (seed, i, j); draws with
    the same index m across pairs share nothing except the index, which is
    all the rank statistic needs. IPT means come from the closed form, not
    from the draws.
    """
    kind = _check_kind(kind)
    base = tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)
    pairs = tuple(sorted(mixtures))
    values = np.empty((len(pairs), draws))
    summaries: dict[tuple[int, int], EffectSummary] = {}
    for p, pair in enumerate(pairs):
        mix = mixtures[pair]
        ipts = sample_ipt_mixture(mix, draws, [*base, pair[0], pair[1]])
        vals = effect_stack(ipts, kind)
        values[p] = vals
        summaries[pair] = EffectSummary(
            pair=pair,
            effect_mean=float(vals.mean()),
            prob_zero=float(np.mean(vals == 0.0)),
            ipt_mean=ipt_mean(mix),
        )
    effect_draws = EffectDraws(pairs, values)
    for pair, rank in posterior_mean_rank(effect_draws).items():
        summaries[pair].mean_rank = rank
    return effect_draws, summaries


def posterior_mean_rank(draws: EffectDraws) -> dict[tuple[int, int], float]:
    """Average tie-aware rank of each pair across draws.

    Within one draw, rank(pair) counts pairs (itself included) whose value
    does not exceed this pair's value, so ties share a rank and every zero
    gets rank = number of zeros in that draw.
    """
    vals = draws.values
    ranks = np.empty_like(vals)
    for m in range(vals.shape[1]):
        col = vals[:, m]
        ranks[:, m] = np.searchsorted(np.sort(col), col, side="right")
    return {pair: float(r) for pair, r in zip(draws.pairs, ranks.mean(axis=1))}
