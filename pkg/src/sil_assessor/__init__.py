"""Certify statistical classifiers for safety use.

The pipeline: estimate class distributions from teach-in samples, push the
estimates to their one-sided confidence envelopes, certify a worst-case
dangerous-error probability (worst-case error plus the miscoverage
surcharge), and compare it against the share of a SIL failure budget that
the classifier is allowed to consume.  Monte Carlo replays validate the
certificate's coverage; a single-hidden-layer network with an exact
held-out binomial bound feeds the same verdict for problems without an
analytic error model; regression diagnostics demonstrate what a summary
statistic alone cannot see.
"""

from .budget import (SilBudget, SilLevel, UnspecifiedThresholdError, Verdict,
                     allocate, pfd_threshold, proven_in_use_hours, verdict)
from .classifier import (CertifiedError, DegenerateSampleError, ErrorKind,
                         ErrorProbabilities, GaussianClassParams, Label,
                         LabeledSample, ThresholdPolicy, WorstCaseEnvelope,
                         certify, classify, error_probabilities, fit_class,
                         select_threshold, split_samples, worst_case_envelope)
from .montecarlo import (Contamination, SimulationConfig, SimulationResult,
                         coverage_criterion, empirical_error, run, true_alpha)
from .ann import (AnnModel, CostKind, Decision, GateRule, Hyperparameters,
                  PointSet2D, StopReason, TrainReport, approximation_check,
                  clopper_pearson_upper, decide, forward, gated_decide,
                  gradient_check, heldout_error_bound, model_from_json,
                  model_to_json, train)
from .diagnostics import (PointFlags, RegressionFit, XYDataset, detect_anomalies,
                          fit_line, load_anscombe)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # budget
    "SilBudget", "SilLevel", "UnspecifiedThresholdError", "Verdict",
    "allocate", "pfd_threshold", "proven_in_use_hours", "verdict",
    # classifier
    "CertifiedError", "DegenerateSampleError", "ErrorKind", "ErrorProbabilities",
    "GaussianClassParams", "Label", "LabeledSample", "ThresholdPolicy",
    "WorstCaseEnvelope", "certify", "classify", "error_probabilities",
    "fit_class", "select_threshold", "split_samples", "worst_case_envelope",
    # montecarlo
    "Contamination", "SimulationConfig", "SimulationResult",
    "coverage_criterion", "empirical_error", "run", "true_alpha",
    # ann
    "AnnModel", "CostKind", "Decision", "GateRule", "Hyperparameters",
    "PointSet2D", "StopReason", "TrainReport", "approximation_check",
    "clopper_pearson_upper", "decide", "forward", "gated_decide",
    "gradient_check", "heldout_error_bound", "model_from_json",
    "model_to_json", "train",
    # diagnostics
    "PointFlags", "RegressionFit", "XYDataset", "detect_anomalies",
    "fit_line", "load_anscombe",
]
