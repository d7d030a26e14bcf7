"""Simulation harness: truth -> sampled data -> estimators -> metric report.

A config (JSON or TOML file, or the dataclass directly) names the generating
networks, sample sizes, methods, and seeds. Every run derives its RNG streams
from (seed, stage tag, replicate, N, method tag), so a repeated experiment is
byte-identical; wall-clock rows are opt-in for that reason.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as tomllib

from .data import Dataset
from .effects import effect_of_ipt, posterior_effect_summary
from .ida import ida_estimate, naive_estimate
from .metrics import auc_pr, mse, offdiag_pairs, offdiag_values, positive_labels
from .networks import CptNetwork, exact_ipts, forward_sample, random_network, true_effects
from .posterior import bida_mixture
from .structure import McmcConfig, adjustment_posterior, exact_dag_posterior, pc_cpdag, structure_mcmc

BIDA_ADJUSTMENTS = {
    "bida-pa": "pa",
    "bida-pa-min": "pa-min",
    "bida-o": "o",
    "bida-o-min": "o-min",
}
KNOWN_METHODS = tuple(BIDA_ADJUSTMENTS) + (
    "ida-parent",
    "ida-optimal",
    "naive-conditional",
    "naive-marginal",
)
# fixed per-method tags keep RNG streams stable under method-list reordering
_METHOD_TAG = {name: k for k, name in enumerate(KNOWN_METHODS)}

_TAG_NETWORK = 1
_TAG_DATA = 2
_TAG_STRUCTURE = 3
_TAG_DRAWS = 4

METRICS = ("mse_tau", "mse_pi", "aucpr_nonzero", "aucpr_top20")


@dataclass(frozen=True)
class ExperimentConfig:
    methods: tuple[str, ...]
    sample_sizes: tuple[int, ...]
    replicates: int = 1
    nodes: int = 10
    expected_neighbors: float = 4.0
    cards: int = 2
    network_file: str | None = None
    ess: float = 1.0
    effect_kind: str = "jsd"
    draws: int = 1000
    seed: int = 0
    pc_alpha: float = 0.05
    structure: str = "mcmc"
    mcmc_iters: int = 30_000
    mcmc_burnin: int = 3_000
    mcmc_thin: int = 30
    mcmc_chains: int = 1
    max_parents: int = 5

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "sample_sizes", tuple(int(x) for x in self.sample_sizes))
        if not self.methods:
            raise ValueError("need at least one method")
        unknown = [m for m in self.methods if m not in KNOWN_METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; known: {sorted(KNOWN_METHODS)}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("duplicate methods")
        if not self.sample_sizes or any(x < 0 for x in self.sample_sizes):
            raise ValueError("sample sizes must be nonnegative and nonempty")
        if self.replicates < 1 or self.draws < 1 or self.nodes < 1:
            raise ValueError("replicates, draws and nodes must be positive")
        if self.effect_kind not in ("jsd", "ate"):
            raise ValueError(f"unknown effect kind {self.effect_kind!r}")
        if self.effect_kind == "ate" and self.network_file is None and self.cards != 2:
            raise ValueError("ATE effects need binary networks")
        if self.structure not in ("mcmc", "exact"):
            raise ValueError(f"unknown structure learner {self.structure!r}")

    @classmethod
    def from_dict(cls, obj: Mapping) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ValueError(f"unknown config keys {unknown}")
        return cls(**dict(obj))

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        if path.suffix.lower() == ".toml":
            with open(path, "rb") as fh:
                obj = tomllib.load(fh)
        else:
            obj = json.loads(path.read_text())
        return cls.from_dict(obj)


@dataclass(frozen=True)
class ReportRow:
    network: str
    sample_size: int
    replicate: int
    method: str
    metric: str
    value: float
    message: str = ""


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[ReportRow, ...]

    def select(
        self,
        method: str | None = None,
        metric: str | None = None,
        sample_size: int | None = None,
    ) -> list[float]:
        return [
            r.value
            for r in self.rows
            if (method is None or r.method == method)
            and (metric is None or r.metric == metric)
            and (sample_size is None or r.sample_size == sample_size)
        ]

    def errors(self) -> list[ReportRow]:
        return [r for r in self.rows if r.metric == "error"]

    def write_csv(self, fh) -> None:
        ordered = sorted(
            self.rows,
            key=lambda r: (r.network, r.sample_size, r.replicate, r.method, r.metric),
        )
        writer = csv.writer(fh)
        writer.writerow(
            ["network", "sample_size", "replicate", "method", "metric", "value", "message"]
        )
        for r in ordered:
            writer.writerow(
                [r.network, r.sample_size, r.replicate, r.method, r.metric,
                 repr(float(r.value)), r.message]
            )

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)


def write_effects_csv(
    path: str | Path, records: Mapping[tuple[int, int], Mapping]
) -> None:
    """Per-pair effect estimates: i, j, effect_mean, mean_rank, prob_zero,
    then the row-major IPT cells as ipt_0.. (rows padded to the widest pair).
    mean_rank and prob_zero are blank for point estimators."""
    pairs = sorted(records)
    width = max((len(np.ravel(records[p]["ipt"])) for p in pairs), default=0)

    def cell(value) -> str:
        return "" if value is None else repr(float(value))

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["i", "j", "effect_mean", "mean_rank", "prob_zero"]
            + [f"ipt_{k}" for k in range(width)]
        )
        for i, j in pairs:
            rec = records[(i, j)]
            flat = [cell(v) for v in np.ravel(rec["ipt"])]
            flat += [""] * (width - len(flat))
            writer.writerow(
                [i, j, cell(rec["effect"]), cell(rec.get("mean_rank")),
                 cell(rec.get("prob_zero"))] + flat
            )


def read_effects_csv(path: str | Path) -> dict[tuple[int, int], dict]:
    out: dict[tuple[int, int], dict] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:5] != ["i", "j", "effect_mean", "mean_rank", "prob_zero"]:
            raise ValueError(f"unrecognized effects CSV header in {path}")
        for row in reader:
            pair = (int(row[0]), int(row[1]))
            ipt = np.array([float(x) for x in row[5:] if x != ""])
            out[pair] = {
                "effect": float(row[2]),
                "mean_rank": float(row[3]) if row[3] else None,
                "prob_zero": float(row[4]) if row[4] else None,
                "ipt": ipt,
            }
    return out


def effect_matrix_from_records(records: Mapping[tuple[int, int], Mapping]) -> np.ndarray:
    n = 1 + max(max(i, j) for i, j in records)
    out = np.full((n, n), np.nan)
    for (i, j), rec in records.items():
        out[i, j] = rec["effect"]
    return out


def evaluate_effect_csvs(est_path: str | Path, truth_path: str | Path) -> dict[str, float]:
    """Score one estimate CSV against a truth CSV over the shared pairs."""
    est = read_effects_csv(est_path)
    truth = read_effects_csv(truth_path)
    if set(est) != set(truth):
        raise ValueError("estimate and truth cover different pairs")
    est_tau = effect_matrix_from_records(est)
    truth_tau = effect_matrix_from_records(truth)
    return _score_estimates(
        est_tau,
        {p: est[p]["ipt"] for p in est},
        truth_tau,
        {p: truth[p]["ipt"] for p in truth},
    )


def _score_estimates(est_tau, est_pi, truth_tau, truth_pi) -> dict[str, float]:
    scores = np.abs(offdiag_values(est_tau))
    out = {
        "mse_tau": mse(est_tau, truth_tau, "tau"),
        "mse_pi": mse(est_pi, truth_pi, "pi"),
    }
    for definition in ("nonzero", "top20"):
        labels = positive_labels(truth_tau, definition)
        out[f"aucpr_{definition}"] = auc_pr(scores, labels)
    return out


def _bida_estimates(data: Dataset, adjustment: str, config: ExperimentConfig, rep: int,
                    n_samples: int, tag: int):
    if config.structure == "exact":
        sample = exact_dag_posterior(data, config.ess, config.max_parents)
    else:
        mcmc = McmcConfig(
            iters=config.mcmc_iters,
            burnin=config.mcmc_burnin,
            thin=config.mcmc_thin,
            max_parents=config.max_parents,
            chains=config.mcmc_chains,
            seed=(config.seed, _TAG_STRUCTURE, rep, n_samples, tag),
        )
        sample = structure_mcmc(data, config.ess, mcmc)
    mixtures = {}
    for i, j in offdiag_pairs(data.n_vars):
        adjp = adjustment_posterior(sample, i, j, adjustment)
        mixtures[(i, j)] = bida_mixture(data, adjp, config.ess)
    _, summaries = posterior_effect_summary(
        mixtures,
        config.draws,
        config.effect_kind,
        seed=(config.seed, _TAG_DRAWS, rep, n_samples, tag),
    )
    n = data.n_vars
    tau = np.full((n, n), np.nan)
    pi = {}
    records = {}
    for pair, s in summaries.items():
        tau[pair] = s.effect_mean
        pi[pair] = s.ipt_mean
        records[pair] = {
            "effect": s.effect_mean,
            "mean_rank": s.mean_rank,
            "prob_zero": s.prob_zero,
            "ipt": s.ipt_mean,
        }
    return tau, pi, records


def _point_records(tau: np.ndarray, pi: Mapping) -> dict:
    return {pair: {"effect": tau[pair], "ipt": pi[pair]} for pair in pi}


def _run_method(method: str, data: Dataset, config: ExperimentConfig, rep: int,
                n_samples: int):
    if method in BIDA_ADJUSTMENTS:
        return _bida_estimates(
            data, BIDA_ADJUSTMENTS[method], config, rep, n_samples, _METHOD_TAG[method]
        )
    if method.startswith("ida-"):
        pdag = pc_cpdag(data, config.pc_alpha)
        tau, pi = ida_estimate(
            data, pdag, method.removeprefix("ida-"), config.ess, config.effect_kind
        )
        return tau, pi, _point_records(tau, pi)
    kind = method.removeprefix("naive-")
    pi = naive_estimate(data, kind, config.ess)
    n = data.n_vars
    tau = np.full((n, n), np.nan)
    for pair, table in pi.items():
        tau[pair] = effect_of_ipt(table, config.effect_kind)
    return tau, pi, _point_records(tau, pi)


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    include_timing: bool = False,
) -> EvalReport:
    """Run every (replicate, sample size, method) cell and score it.

    A failing cell contributes a single metric="error" row carrying the
    message instead of aborting the experiment. With out_dir set, each cell
    also writes its per-pair effect estimates as CSV, and the report itself
    lands there as report.csv.
    """
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
    rows: list[ReportRow] = []
    for rep in range(config.replicates):
        if config.network_file is not None:
            bn = CptNetwork.load(config.network_file)
            label = Path(config.network_file).stem
        else:
            bn = random_network(
                config.nodes,
                config.expected_neighbors,
                config.cards,
                seed=(config.seed, _TAG_NETWORK, rep),
            )
            label = f"net{rep}"
        truth_tau = true_effects(bn, config.effect_kind)
        truth_pi = exact_ipts(bn)
        for n_samples in config.sample_sizes:
            data = forward_sample(bn, n_samples, seed=(config.seed, _TAG_DATA, rep, n_samples))
            for method in config.methods:
                started = time.perf_counter()
                try:
                    tau, pi, records = _run_method(method, data, config, rep, n_samples)
                    metrics = _score_estimates(tau, pi, truth_tau, truth_pi)
                except ValueError as exc:
                    rows.append(
                        ReportRow(label, n_samples, rep, method, "error", 1.0, str(exc))
                    )
                    continue
                elapsed = time.perf_counter() - started
                for metric in METRICS:
                    rows.append(
                        ReportRow(label, n_samples, rep, method, metric, metrics[metric])
                    )
                if include_timing:
                    rows.append(
                        ReportRow(label, n_samples, rep, method, "seconds", elapsed)
                    )
                if out_dir is not None:
                    write_effects_csv(
                        out_dir / f"{label}_N{n_samples}_rep{rep}_{method}.csv", records
                    )
    report = EvalReport(tuple(rows))
    if out_dir is not None:
        report.to_csv(out_dir / "report.csv")
    return report
