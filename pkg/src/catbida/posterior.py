"""Dirichlet posteriors over intervention probability tables.

For a pair (i, j) with adjustment set Z, the intervention distribution row
pi_{Y|x} = sum_z theta_{Y|x,z} theta_z is a stochastic linear combination of
independent Dirichlet vectors. Conjugate updating keeps the hyperparameter
layout: conditional cells a_{y|x,z} (prior ess / (r_j r_i r_Z) plus counts)
and marginal cells a_z (prior ess / r_Z plus counts), tied together by the
aggregation constraint a_z = sum_{x,y} a_{y|x,z}. Sentinel sets carry a
plain Dirichlet over the effect's marginal instead. Exact first and second
moments of the combination are available in closed form; draws are exact via
per-cell Gamma sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .data import Dataset, config_count, config_index
from .graphs import AdjustmentSet

DEFAULT_CELL_CAP = 10_000_000
_SAMPLE_BLOCK_CELLS = 1 << 24


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass
class BackdoorParams:
    """Posterior hyperparameters for one pair under a non-sentinel set Z.

    cond[x, z, y] = prior + N(x_i=x, x_Z=z, x_j=y); z_marg[z] = prior + N_z.
    z-configurations use the shared mixed-radix order over sorted Z.
    """

    pair: tuple[int, int]
    z: tuple[int, ...]
    cond: np.ndarray
    z_marg: np.ndarray

    def __post_init__(self):
        self.cond = np.asarray(self.cond, dtype=float)
        self.z_marg = np.asarray(self.z_marg, dtype=float)
        if self.cond.ndim != 3:
            raise ValueError("cond must have shape (r_i, r_z, r_j)")
        if self.z_marg.shape != (self.cond.shape[1],):
            raise ValueError("z_marg length must match the z axis of cond")
        if (self.cond <= 0).any() or (self.z_marg <= 0).any():
            raise ValueError("hyperparameters must be positive")
        if not np.allclose(self.cond.sum(axis=(0, 2)), self.z_marg, rtol=0, atol=1e-9):
            raise ValueError("aggregation constraint a_z = sum_xy a_{y|x,z} violated")

    @property
    def cause_card(self) -> int:
        return self.cond.shape[0]

    @property
    def effect_card(self) -> int:
        return self.cond.shape[2]

    def mean(self) -> np.ndarray:
        """E[pi_{y|x}] = sum_z abar_{y|x,z} zbar_z, the normalized-parameter
        mixture (conditionals and z-marginal are independent Dirichlets)."""
        abar = self.cond / self.cond.sum(axis=2, keepdims=True)
        zbar = self.z_marg / self.z_marg.sum()
        return np.einsum("xzy,z->xy", abar, zbar)


@dataclass
class MarginalParams:
    """Posterior over the effect's marginal; used for sentinel sets."""

    pair: tuple[int, int]
    cause_card: int
    a: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        if self.a.ndim != 1 or (self.a <= 0).any():
            raise ValueError("hyperparameters must be a positive vector")

    @property
    def effect_card(self) -> int:
        return self.a.shape[0]

    def mean(self) -> np.ndarray:
        row = self.a / self.a.sum()
        return np.tile(row, (self.cause_card, 1))


PosteriorParams = Union[BackdoorParams, MarginalParams]


@dataclass
class BidaMixture:
    """Mixture over adjustment sets for one ordered pair (Eq.-(10) style)."""

    pair: tuple[int, int]
    components: tuple[tuple[float, PosteriorParams], ...]

    def __post_init__(self):
        self.components = tuple((float(w), p) for w, p in self.components)
        if not self.components:
            raise ValueError("mixture needs at least one component")
        total = sum(w for w, _ in self.components)
        if any(w <= 0 for w, _ in self.components) or abs(total - 1.0) > 1e-9:
            raise ValueError("weights must be positive and sum to 1")
        shapes = {(p.cause_card, p.effect_card) for _, p in self.components}
        if len(shapes) != 1:
            raise ValueError("components disagree on table shape")
        if any(p.pair != self.pair for _, p in self.components):
            raise ValueError("component pair mismatch")

    @property
    def cause_card(self) -> int:
        return self.components[0][1].cause_card

    @property
    def effect_card(self) -> int:
        return self.components[0][1].effect_card

    def sentinel_mass(self) -> float:
        return sum(w for w, p in self.components if isinstance(p, MarginalParams))


def backdoor_posterior_params(
    data: Dataset,
    i: int,
    j: int,
    adj: AdjustmentSet,
    ess: float,
    cell_cap: int = DEFAULT_CELL_CAP,
) -> PosteriorParams:
    """Conjugate posterior hyperparameters for pair (i, j) under one set."""
    if ess <= 0:
        raise ValueError("ess must be positive")
    r_i, r_j = data.cards[i], data.cards[j]
    if adj.contains_effect:
        counts = np.bincount(data.column(j), minlength=r_j)
        return MarginalParams((i, j), r_i, ess / r_j + counts)

    z = adj.nodes
    if i in z or j in z:
        raise ValueError("non-sentinel adjustment set must not contain i or j")
    z_cards = [data.cards[v] for v in z]
    r_z = config_count(z_cards)
    if r_i * r_j * r_z > cell_cap:
        raise ValueError(
            f"backdoor table needs {r_i * r_j * r_z} cells, over the cap {cell_cap}"
        )
    zi = config_index(data.codes[:, list(z)], z_cards)
    flat = (zi * r_i + data.column(i)) * r_j + data.column(j)
    counts = np.bincount(flat, minlength=r_z * r_i * r_j).reshape(r_z, r_i, r_j)
    cond = ess / (r_i * r_j * r_z) + counts.transpose(1, 0, 2)
    z_marg = ess / r_z + np.bincount(zi, minlength=r_z)
    return BackdoorParams((i, j), z, cond, z_marg)


def ipt_mean(mix: BidaMixture) -> np.ndarray:
    """Posterior mean IPT of the mixture: weighted component means."""
    out = np.zeros((mix.cause_card, mix.effect_card))
    for w, params in mix.components:
        out += w * params.mean()
    return out


def ipt_cov(params: BackdoorParams, x: int, y: int, x2: int, y2: int) -> float:
    """Cov(pi_{y|x}, pi_{y2|x2}) of the linear combination, closed form.

    Same-x pairs follow the grouped-Dirichlet case with the
    delta_{yy'}(1 + a_z) and (a_{x,z} - a_z) terms; different-x pairs only
    couple through the shared theta_Z. Everything is divided by alpha + 1,
    with alpha the total z-marginal mass.
    """
    a = params.cond
    az = params.z_marg
    alpha = float(az.sum())
    axz = a.sum(axis=2)
    abar = a / axz[:, :, None]
    zbar = az / alpha
    mean = np.einsum("xzy,z->xy", abar, zbar)
    if x == x2:
        delta = 1.0 if y == y2 else 0.0
        inner = (
            abar[x, :, y]
            * zbar
            / (axz[x] + 1.0)
            * (delta * (1.0 + az) + abar[x, :, y2] * (axz[x] - az))
        ).sum()
        return float((inner - mean[x, y] * mean[x, y2]) / (alpha + 1.0))
    inner = (abar[x, :, y] * abar[x2, :, y2] * zbar).sum()
    return float((inner - mean[x, y] * mean[x2, y2]) / (alpha + 1.0))


def _dirichlet_rows(rng: np.random.Generator, alphas: np.ndarray, draws: int) -> np.ndarray:
    """draws x alphas.shape tensor of Dirichlet draws, normalized over the last axis."""
    g = rng.gamma(alphas, size=(draws,) + alphas.shape)
    return g / g.sum(axis=-1, keepdims=True)


def sample_ipt(params: PosteriorParams, draws: int, seed) -> np.ndarray:
    """Exact posterior draws, stacked as an array of shape (draws, r_i, r_j).

    BackdoorParams: every theta_{Y|x,z} and theta_Z drawn independently, rows
    formed as sum_z theta_{Y|x,z} theta_z. MarginalParams: one Dirichlet draw
    replicated across rows, so each drawn table has exactly zero effect.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    rng = _rng(seed)
    if isinstance(params, MarginalParams):
        rows = _dirichlet_rows(rng, params.a, draws)
        return np.repeat(rows[:, None, :], params.cause_card, axis=1)

    cells = params.cond.size
    block = max(1, _SAMPLE_BLOCK_CELLS // max(cells, 1))
    out = np.empty((draws, params.cause_card, params.effect_card))
    done = 0
    while done < draws:
        m = min(block, draws - done)
        theta = _dirichlet_rows(rng, params.cond, m)
        theta_z = _dirichlet_rows(rng, params.z_marg, m)
        out[done : done + m] = np.einsum("dxzy,dz->dxy", theta, theta_z)
        done += m
    return out


def sample_ipt_mixture(mix: BidaMixture, draws: int, seed) -> np.ndarray:
    """Two-stage mixture draws: component by weight, then sample_ipt.

    Component choice and all component-level sampling consume one seeded
    stream, so results are reproducible from (mixture, draws, seed) alone.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    rng = _rng(seed)
    weights = np.array([w for w, _ in mix.components])
    choice = rng.choice(len(mix.components), size=draws, p=weights / weights.sum())
    out = np.empty((draws, mix.cause_card, mix.effect_card))
    for c, (_, params) in enumerate(mix.components):
        sel = np.nonzero(choice == c)[0]
        if sel.size:
            out[sel] = sample_ipt(params, sel.size, rng)
    return out


def bida_mixture(data: Dataset, adjp, ess: float, cell_cap: int = DEFAULT_CELL_CAP) -> BidaMixture:
    """Map an adjustment-set posterior through the conjugate update.

    ``adjp`` is an AdjustmentPosterior (structure module): its components'
    probabilities are carried over unchanged as mixture weights.
    """
    i, j = adjp.pair
    components = [
        (prob, backdoor_posterior_params(data, i, j, aset, ess, cell_cap))
        for aset, prob in adjp.components
    ]
    return BidaMixture((i, j), tuple(components))
