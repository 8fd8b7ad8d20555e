"""Fixed-budget best-arm identification with generalized Neyman allocation."""

from .allocation import (
    VarianceEstimates,
    bruteforce_maxmin_weights,
    floor_variance,
    gj_oracle_weights,
    gna_estimated_weights,
    gna_target_weights,
    uniform_weights,
)
from .bounds import (
    BernoulliFamily,
    GaussianFamily,
    ThetaGrid,
    bernoulli_closed_forms,
    binary_relative_entropy,
    fisher_information,
    kkt_verify,
    kl_bernoulli,
    kl_gaussian,
    pairwise_rate,
    rate_V,
    small_gap_ratio,
    v_star,
)
from .engine import AlgorithmSpec, History, RunOutcome, a2ipw_estimates, recommend, run, sample_means
from .harness import ExperimentConfig, fit_decay, read_config, run_experiment, write_results
from .model import (
    BanditInstance,
    make_bernoulli_instance,
    make_gaussian_instance,
    paper_instance_generator,
    rng_stream,
    sample_outcome,
)

__version__ = "0.1.0"
