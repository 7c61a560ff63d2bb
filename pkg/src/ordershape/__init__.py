"""FDR control for hypotheses carrying a prior ordering.

An EM algorithm with isotonic M-steps estimates per-hypothesis null
probabilities (nondecreasing in the prior order) together with a decreasing
alternative p-value density; the resulting local-fdr scores feed a step-up
rejection rule. Classical and order-aware baselines plus a simulation bench
are included for comparison.
"""

from ._backend import BACKEND
from .baselines import (
    AccumulationKind,
    accumulation_test,
    adaptive_seqstep,
    bh,
    sabha_ordered,
    storey_bh,
)
from .bench import fdp_and_power, run_grid
from .isotonic import IsotonicFit, grouped_pava, maxmin_oracle, pava, pava_decreasing
from .lfdr import (
    DecisionResult,
    asymptotic_power_gaussian,
    estimated_fdr_curve,
    lfdr_values,
    step_up,
    threshold_lambda,
)
from .mixture import (
    MixtureFit,
    StepDensity,
    TestData,
    calibrate_pi0,
    e_step,
    em_fit,
    em_fit_binned,
    em_fit_known_f1,
    log_likelihood,
    m_step_f1,
    m_step_pi,
    storey_pi0,
)
from .simulate import (
    ScenarioConfig,
    SimulatedData,
    apply_variant,
    gen_pi0,
    gen_truth_and_pvalues,
    shuffle_covariate,
    simulate_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AccumulationKind",
    "DecisionResult",
    "IsotonicFit",
    "MixtureFit",
    "ScenarioConfig",
    "SimulatedData",
    "StepDensity",
    "TestData",
    "accumulation_test",
    "adaptive_seqstep",
    "apply_variant",
    "asymptotic_power_gaussian",
    "bh",
    "calibrate_pi0",
    "e_step",
    "em_fit",
    "em_fit_binned",
    "em_fit_known_f1",
    "estimated_fdr_curve",
    "fdp_and_power",
    "gen_pi0",
    "gen_truth_and_pvalues",
    "grouped_pava",
    "lfdr_values",
    "log_likelihood",
    "m_step_f1",
    "m_step_pi",
    "maxmin_oracle",
    "pava",
    "pava_decreasing",
    "run_grid",
    "sabha_ordered",
    "shuffle_covariate",
    "simulate_scenario",
    "step_up",
    "storey_bh",
    "storey_pi0",
    "threshold_lambda",
]
