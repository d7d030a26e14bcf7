"""Bayesian pairwise causal-effect estimation for categorical data.

Given observational data over categorical variables with an unknown causal
DAG, the pipeline estimates, for every ordered pair (i, j), the posterior of
the intervention probability table P(x_j | do(x_i)) by mixing Dirichlet
backdoor posteriors over a structure posterior, and summarizes each pair by
effect means, exact-zero mass, and posterior mean ranks.
"""

from .data import Dataset, config_count, config_index, config_strides, unrank_config
from .effects import (
    EffectDraws,
    EffectSummary,
    effect_of_ipt,
    effect_stack,
    posterior_effect_summary,
    posterior_mean_rank,
)
from .experiment import (
    EvalReport,
    ExperimentConfig,
    ReportRow,
    evaluate_effect_csvs,
    read_effects_csv,
    run_experiment,
    write_effects_csv,
)
from .graphs import (
    AdjustmentSet,
    CycleError,
    Dag,
    Pdag,
    SetKind,
    adjustment_set,
    ancestors_and_descendants,
    backdoor_graph,
    d_separated,
    is_valid_adjustment,
)
from .ida import consistent_extensions, ida_estimate, local_parent_sets, naive_estimate
from .metrics import auc_pr, mse, offdiag_pairs, offdiag_values, positive_labels
from .networks import (
    CptNetwork,
    exact_intervention,
    exact_ipts,
    forward_sample,
    random_network,
    true_effects,
)
from .posterior import (
    BackdoorParams,
    BidaMixture,
    MarginalParams,
    backdoor_posterior_params,
    bida_mixture,
    ipt_cov,
    ipt_mean,
    sample_ipt,
    sample_ipt_mixture,
)
from .scoring import (
    CiResult,
    FamilyCounts,
    bdeu_family_score,
    bdeu_log_score,
    family_counts,
    g2_ci_test,
    log_marginal_likelihood,
)
from .structure import (
    AdjustmentPosterior,
    DagSample,
    McmcConfig,
    adjustment_posterior,
    all_dags,
    apply_move,
    dag_to_cpdag,
    exact_dag_posterior,
    meek_closure,
    pc_cpdag,
    structure_mcmc,
    v_structures,
    valid_moves,
)

__version__ = "0.1.0"

__all__ = [
    "AdjustmentPosterior",
    "AdjustmentSet",
    "BackdoorParams",
    "BidaMixture",
    "CiResult",
    "CptNetwork",
    "CycleError",
    "Dag",
    "DagSample",
    "Dataset",
    "EffectDraws",
    "EffectSummary",
    "EvalReport",
    "ExperimentConfig",
    "FamilyCounts",
    "MarginalParams",
    "McmcConfig",
    "Pdag",
    "ReportRow",
    "SetKind",
    "adjustment_posterior",
    "adjustment_set",
    "all_dags",
    "ancestors_and_descendants",
    "apply_move",
    "auc_pr",
    "backdoor_graph",
    "backdoor_posterior_params",
    "bdeu_family_score",
    "bdeu_log_score",
    "bida_mixture",
    "config_count",
    "config_index",
    "config_strides",
    "consistent_extensions",
    "d_separated",
    "dag_to_cpdag",
    "effect_of_ipt",
    "effect_stack",
    "evaluate_effect_csvs",
    "exact_dag_posterior",
    "exact_intervention",
    "exact_ipts",
    "family_counts",
    "forward_sample",
    "g2_ci_test",
    "ida_estimate",
    "ipt_cov",
    "ipt_mean",
    "is_valid_adjustment",
    "local_parent_sets",
    "log_marginal_likelihood",
    "meek_closure",
    "mse",
    "naive_estimate",
    "offdiag_pairs",
    "offdiag_values",
    "pc_cpdag",
    "positive_labels",
    "posterior_effect_summary",
    "posterior_mean_rank",
    "random_network",
    "read_effects_csv",
    "run_experiment",
    "sample_ipt",
    "sample_ipt_mixture",
    "structure_mcmc",
    "true_effects",
    "unrank_config",
    "v_structures",
    "valid_moves",
    "write_effects_csv",
]
