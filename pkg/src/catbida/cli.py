"""Command-line front end.

Subcommands mirror the pipeline stages: simulate data, compute exact truth,
learn structure (constraint-based, exact posterior, or MCMC), form posterior
or plug-in effect estimates, and score estimate files against truth files.
Setting the CATBIDA_SEED environment variable overrides every --seed flag
and the experiment config seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from .data import Dataset
from .effects import effect_of_ipt, posterior_effect_summary
from .experiment import (
    ExperimentConfig,
    evaluate_effect_csvs,
    run_experiment,
    write_effects_csv,
)
from .graphs import Pdag, SetKind
from .ida import ida_estimate, naive_estimate
from .metrics import offdiag_pairs
from .networks import CptNetwork, exact_ipts, forward_sample, random_network, true_effects
from .posterior import bida_mixture
from .structure import (
    DagSample,
    McmcConfig,
    adjustment_posterior,
    exact_dag_posterior,
    pc_cpdag,
    structure_mcmc,
)

SEED_ENV = "CATBIDA_SEED"


def _seed(flag_value: int) -> int:
    env = os.environ.get(SEED_ENV)
    return int(env) if env else flag_value


def _load_data(args) -> Dataset:
    return Dataset.from_csv(args.data)


def _cmd_sample_data(args) -> int:
    if args.network:
        bn = CptNetwork.load(args.network)
    else:
        if args.nodes is None:
            raise SystemExit("sample-data needs --network or --nodes")
        bn = random_network(
            args.nodes, args.expected_neighbors, args.cards, seed=_seed(args.network_seed)
        )
        if args.save_network:
            bn.save(args.save_network)
    data = forward_sample(bn, args.n, seed=_seed(args.seed))
    data.to_csv(args.out)
    return 0


def _cmd_true_effects(args) -> int:
    bn = CptNetwork.load(args.network)
    tau = true_effects(bn, args.kind)
    ipts = exact_ipts(bn)
    records = {
        pair: {"effect": tau[pair], "ipt": table} for pair, table in ipts.items()
    }
    write_effects_csv(args.out, records)
    return 0


def _cmd_pc(args) -> int:
    data = _load_data(args)
    pdag = pc_cpdag(data, args.alpha, args.max_cond_size)
    text = pdag.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def _cmd_learn(args) -> int:
    data = _load_data(args)
    ess = args.ess if args.ess_alias is None else args.ess_alias
    if args.learner == "exact":
        sample = exact_dag_posterior(data, ess, args.max_parents)
    else:
        skeleton = None
        if args.skeleton:
            skeleton = Pdag.from_json(Path(args.skeleton).read_text())
        config = McmcConfig(
            iters=args.iters,
            burnin=args.burnin,
            thin=args.thin,
            max_parents=args.max_parents,
            chains=args.chains,
            seed=_seed(args.seed),
            skeleton=skeleton,
        )
        sample = structure_mcmc(data, ess, config)
    sample.save(args.out)
    return 0


def _cmd_bida(args) -> int:
    data = _load_data(args)
    sample = DagSample.load(args.sample)
    mixtures = {}
    for i, j in offdiag_pairs(data.n_vars):
        adjp = adjustment_posterior(sample, i, j, args.adjustment)
        mixtures[(i, j)] = bida_mixture(data, adjp, args.ess)
    _, summaries = posterior_effect_summary(
        mixtures, args.draws, args.kind, seed=_seed(args.seed)
    )
    records = {
        pair: {
            "effect": s.effect_mean,
            "mean_rank": s.mean_rank,
            "prob_zero": s.prob_zero,
            "ipt": s.ipt_mean,
        }
        for pair, s in summaries.items()
    }
    write_effects_csv(args.out, records)
    return 0


def _cmd_ida(args) -> int:
    data = _load_data(args)
    if args.pdag:
        pdag = Pdag.from_json(Path(args.pdag).read_text())
    else:
        pdag = pc_cpdag(data, args.alpha)
    tau, ipts = ida_estimate(data, pdag, args.variant, args.ess, args.kind)
    records = {pair: {"effect": tau[pair], "ipt": t} for pair, t in ipts.items()}
    write_effects_csv(args.out, records)
    return 0


def _cmd_naive(args) -> int:
    data = _load_data(args)
    ipts = naive_estimate(data, args.estimator, args.ess)
    records = {
        pair: {"effect": effect_of_ipt(t, args.kind), "ipt": t}
        for pair, t in ipts.items()
    }
    write_effects_csv(args.out, records)
    return 0


def _cmd_eval(args) -> int:
    metrics = evaluate_effect_csvs(args.estimate, args.truth)
    lines = [f"{name},{value!r}" for name, value in sorted(metrics.items())]
    text = "metric,value\n" + "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    env = os.environ.get(SEED_ENV)
    if env:
        config = dataclasses.replace(config, seed=int(env))
    report = run_experiment(config, args.out_dir, include_timing=args.include_timing)
    failures = report.errors()
    for row in failures:
        print(
            f"error: {row.network} N={row.sample_size} rep={row.replicate} "
            f"{row.method}: {row.message}",
            file=sys.stderr,
        )
    if args.out_dir is None:
        report.write_csv(sys.stdout)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catbida",
        description="Bayesian pairwise intervention estimates for categorical data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample-data", help="forward-sample a dataset from a network")
    p.add_argument("--network", help="network JSON file")
    p.add_argument("--nodes", type=int, help="generate a random network of this size")
    p.add_argument("--expected-neighbors", type=float, default=4.0)
    p.add_argument("--cards", type=int, default=2)
    p.add_argument("--network-seed", type=int, default=0)
    p.add_argument("--save-network", help="where to write a generated network")
    p.add_argument("--n", type=int, required=True, help="sample count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="dataset CSV path")
    p.set_defaults(func=_cmd_sample_data)

    p = sub.add_parser("true-effects", help="exact effects of a known network")
    p.add_argument("--network", required=True)
    p.add_argument("--kind", choices=("jsd", "ate"), default="jsd")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_true_effects)

    p = sub.add_parser("pc", help="stable PC: estimate a PDAG from data")
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--max-cond-size", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_pc)

    p = sub.add_parser("learn", help="posterior sample over DAGs")
    p.add_argument("learner", choices=("exact", "mcmc"))
    p.add_argument("--data", required=True)
    p.add_argument("--ess", type=float, default=1.0, dest="ess")
    p.add_argument("--alpha", type=float, dest="ess_alias", default=None,
                   help="alias for --ess (BDeu equivalent sample size)")
    p.add_argument("--max-parents", type=int, default=5)
    p.add_argument("--iters", type=int, default=200_000)
    p.add_argument("--burnin", type=int, default=20_000)
    p.add_argument("--thin", type=int, default=100)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--skeleton", help="PDAG JSON restricting addable edges")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="DAG sample file (one JSON per line)")
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("bida", help="posterior effect estimates from a DAG sample")
    p.add_argument("--data", required=True)
    p.add_argument("--sample", required=True, help="DAG sample file from learn")
    p.add_argument(
        "--adjustment", choices=tuple(k.value for k in SetKind), default="pa-min"
    )
    p.add_argument("--ess", type=float, default=1.0)
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--kind", choices=("jsd", "ate"), default="jsd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bida)

    p = sub.add_parser("ida", help="plug-in effect estimates from a PDAG")
    p.add_argument("--data", required=True)
    p.add_argument("--pdag", help="PDAG JSON; omitted -> run PC first")
    p.add_argument("--alpha", type=float, default=0.05, help="PC significance level")
    p.add_argument("--variant", choices=("parent", "optimal"), default="parent")
    p.add_argument("--ess", type=float, default=1.0)
    p.add_argument("--kind", choices=("jsd", "ate"), default="jsd")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ida)

    p = sub.add_parser("naive", help="unadjusted reference estimates")
    p.add_argument("--data", required=True)
    p.add_argument("--estimator", choices=("conditional", "marginal"), default="conditional")
    p.add_argument("--ess", type=float, default=1.0)
    p.add_argument("--kind", choices=("jsd", "ate"), default="jsd")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_naive)

    p = sub.add_parser("eval", help="score an estimate CSV against a truth CSV")
    p.add_argument("--estimate", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("experiment", help="run a full simulation study")
    p.add_argument("--config", required=True, help="JSON or TOML config file")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--include-timing", action="store_true")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
