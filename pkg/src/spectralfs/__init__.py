"""Feature selection for linear-kernel RLSC and ridge regression.

Deterministic spectral sparsification (BSS), leverage-score sampling and
baseline selectors, closed-form solvers, fixed-design risk, and a
cross-validation harness.
"""

from .bss import BssConfig, bss_select, certify_spectral_bound, empirical_bound
from .datagen import SyntheticSpec, synth_classification, synth_regression
from .harness import (
    ExperimentConfig,
    ResultRow,
    cross_validate_rlsc,
    emit_results,
    run_experiment,
    run_risk_experiment,
    run_rlsc_experiment,
    select_features,
)
from .ingest import Corpus, filter_short_terms, load_corpus, load_demo_corpus
from .linalg import (
    FeatureMatrix,
    SamplingScheme,
    SvdFactors,
    apply_scheme,
    read_matrix,
    spectral_norm,
    thin_svd,
    write_matrix,
)
from .risk import RiskReport, monte_carlo_risk, risk, risk_inflation_factor, sandwich_certificate
from .samplers import (
    LEVERAGE_CONSTANT,
    info_gain_select,
    leverage_sample,
    leverage_scores,
    random_select,
    rrqr_select,
)
from .solvers import (
    ridge_predict,
    ridge_train_dual,
    rlsc_predict,
    rlsc_train,
)

__version__ = "0.1.0"

__all__ = [
    "BssConfig", "bss_select", "certify_spectral_bound", "empirical_bound",
    "SyntheticSpec", "synth_classification", "synth_regression",
    "ExperimentConfig", "ResultRow", "cross_validate_rlsc", "emit_results",
    "run_experiment", "run_risk_experiment", "run_rlsc_experiment", "select_features",
    "Corpus", "filter_short_terms", "load_corpus", "load_demo_corpus",
    "FeatureMatrix", "SamplingScheme", "SvdFactors", "apply_scheme", "read_matrix",
    "spectral_norm", "thin_svd", "write_matrix",
    "RiskReport", "monte_carlo_risk", "risk", "risk_inflation_factor", "sandwich_certificate",
    "LEVERAGE_CONSTANT", "info_gain_select", "leverage_sample", "leverage_scores",
    "random_select", "rrqr_select",
    "ridge_predict", "ridge_train_dual", "rlsc_predict", "rlsc_train",
]
