"""Simulation laboratory for the Inference Headroom Ratio, IHR = C / (U + K)."""

from .controller import ControllerConfig, control_step
from .core import (
    DegradationParams,
    LogisticModel,
    SystemState,
    clip_environment,
    compute_ihr,
    critical_threshold,
    degraded_accuracy,
    is_collapse,
    logistic_prob,
)
from .drift import DriftConfig, RegimeStats, Trajectory, run_noise_sweep, simulate_run, summarize_regime
from .experiment1 import Exp1Config, TrialRecord, quantile_bins, run_experiment1, sample_trial
from .logistic import FitResult, fit_logistic, log_likelihood
from .regulator import ComparisonReport, run_comparison

__version__ = "0.1.0"
