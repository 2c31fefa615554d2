"""Controlled vs. uncontrolled Monte Carlo comparison on paired noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controller import ControllerConfig, control_step
from .drift import DriftConfig, TrajectoryBatch, exp3_drift_config, simulate_batch

__all__ = [
    "ComparisonReport",
    "ControllerConfig",
    "control_step",
    "exp3_drift_config",
    "report_from_arms",
    "run_comparison",
]


@dataclass(frozen=True)
class ComparisonReport:
    mean_ihr_uncontrolled: float
    mean_ihr_controlled: float
    ihr_sd_uncontrolled: float
    ihr_sd_controlled: float
    mean_collapse_prob_uncontrolled: float
    mean_collapse_prob_controlled: float
    observed_collapse_rate_uncontrolled: float
    observed_collapse_rate_controlled: float
    n_runs: int

    def rows(self) -> list[tuple[str, float, float, float]]:
        """Table rows ``(metric, uncontrolled, controlled, relative change)``."""
        pairs = [
            ("Mean IHR", self.mean_ihr_uncontrolled, self.mean_ihr_controlled),
            ("IHR Std", self.ihr_sd_uncontrolled, self.ihr_sd_controlled),
            ("Mean collapse prob.", self.mean_collapse_prob_uncontrolled, self.mean_collapse_prob_controlled),
            ("Observed collapse rate", self.observed_collapse_rate_uncontrolled,
             self.observed_collapse_rate_controlled),
        ]
        return [(name, a, b, (b - a) / a if a else float("nan")) for name, a, b in pairs]


def _arm_stats(batch: TrajectoryBatch) -> tuple[float, float, float, float]:
    return (
        float(np.mean(batch.ihr)),
        float(np.std(batch.ihr)),
        float(np.mean(batch.collapse_prob)),
        float(np.mean(batch.collapse_event)),
    )


def simulate_arms(drift: DriftConfig, ctrl: ControllerConfig, n_runs: int | None = None,
                  workers: int = 1) -> tuple[TrajectoryBatch, TrajectoryBatch]:
    """Uncontrolled and controlled batches sharing every random draw per run."""
    runs = np.arange(drift.n_runs if n_runs is None else n_runs)
    plain = simulate_batch(drift, None, runs, workers=workers)
    controlled = simulate_batch(drift, ctrl, runs, workers=workers)
    return plain, controlled


def report_from_arms(plain: TrajectoryBatch, controlled: TrajectoryBatch) -> ComparisonReport:
    m0, s0, p0, o0 = _arm_stats(plain)
    m1, s1, p1, o1 = _arm_stats(controlled)
    return ComparisonReport(m0, m1, s0, s1, p0, p1, o0, o1, n_runs=len(plain))


def run_comparison(drift: DriftConfig, ctrl: ControllerConfig, n_runs: int | None = None,
                   workers: int = 1) -> ComparisonReport:
    return report_from_arms(*simulate_arms(drift, ctrl, n_runs, workers))
