"""Experiment 1: random stress configurations, collapse evaluation and
equal-count quantile binning by IHR."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import stochastics as st
from .core import DegradationParams, SystemState, compute_ihr, degraded_accuracy, is_collapse


@dataclass(frozen=True)
class Exp1Config:
    n_trials: int = 400
    u_lo: float = 0.10
    u_hi: float = 1.80
    k_lo: float = 0.05
    k_hi: float = 0.90
    capacity_c: float = 1.0
    degradation: DegradationParams = field(default_factory=DegradationParams)
    n_bins: int = 8
    master_seed: int = st.DEFAULT_MASTER_SEED

    def __post_init__(self) -> None:
        if self.n_trials < 0:
            raise ValueError("n_trials >= 0 violated")
        if not self.u_lo < self.u_hi:
            raise ValueError("u_lo < u_hi violated")
        if not self.k_lo < self.k_hi:
            raise ValueError("k_lo < k_hi violated")
        if not self.capacity_c > 0:
            raise ValueError("capacity_c > 0 violated")
        if self.n_bins < 1:
            raise ValueError("n_bins >= 1 violated")
        if self.n_trials and self.n_bins > self.n_trials:
            raise ValueError("n_bins <= n_trials violated")


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    u: float
    k: float
    ihr: float
    accuracy: float
    collapsed: bool


@dataclass(frozen=True)
class BinSummary:
    lower: float
    upper: float
    mean_ihr: float
    collapse_prob: float
    count: int


def evaluate_trial(config: Exp1Config, trial_index: int, u: float, k: float, eps: float) -> TrialRecord:
    state = SystemState(config.capacity_c, u, k)
    acc = degraded_accuracy(state, config.degradation, eps)
    return TrialRecord(
        trial_index=trial_index,
        u=u,
        k=k,
        ihr=compute_ihr(state),
        accuracy=acc,
        collapsed=is_collapse(acc, config.degradation),
    )


def sample_trial(config: Exp1Config, trial_index: int) -> TrialRecord:
    if not 0 <= trial_index < config.n_trials:
        raise IndexError(f"trial_index {trial_index} outside [0, {config.n_trials})")

    def source(var):
        return st.derive_substream(config.master_seed, st.StreamId(st.EXP1, trial_index, var))

    u = source(st.VAR_U).next_uniform(config.u_lo, config.u_hi)
    k = source(st.VAR_K).next_uniform(config.k_lo, config.k_hi)
    eps = source(st.VAR_EPS).next_normal(0.0, config.degradation.accuracy_noise_sd)
    return evaluate_trial(config, trial_index, u, k, eps)


def _sample_block(config: Exp1Config, indices: np.ndarray) -> list[TrialRecord]:
    # one draw (counter 0) per substream, same values as sample_trial
    def draw(var):
        states = st.substream_states(config.master_seed, st.EXP1, indices, var)
        return st.raw_block(states, 1)[:, 0]

    u = st.uniform_from_raw(draw(st.VAR_U), config.u_lo, config.u_hi)
    k = st.uniform_from_raw(draw(st.VAR_K), config.k_lo, config.k_hi)
    eps = st.normal_from_raw(draw(st.VAR_EPS), 0.0, config.degradation.accuracy_noise_sd)
    return [
        evaluate_trial(config, int(i), float(a), float(b), float(e))
        for i, a, b, e in zip(indices, u, k, eps)
    ]


def run_experiment1(config: Exp1Config, workers: int = 1) -> list[TrialRecord]:
    """All ``n_trials`` records in trial_index order.

    ``workers`` only changes scheduling; every trial reads its own
    substreams, so the output is identical for any worker count.
    """
    indices = np.arange(config.n_trials, dtype=np.int64)
    if config.n_trials == 0:
        return []
    chunks = np.array_split(indices, max(1, min(workers, config.n_trials)))
    if len(chunks) == 1:
        return _sample_block(config, chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = pool.map(lambda c: _sample_block(config, c), chunks)
        return [rec for part in parts for rec in part]


def collapse_fraction(trials: list[TrialRecord]) -> float:
    if not trials:
        return 0.0
    return sum(t.collapsed for t in trials) / len(trials)


def bin_sizes(n_trials: int, n_bins: int) -> list[int]:
    """Equal-count group sizes; the first ``n_trials % n_bins`` groups get one extra."""
    q, r = divmod(n_trials, n_bins)
    return [q + 1 if i < r else q for i in range(n_bins)]


def quantile_bins(trials: list[TrialRecord], n_bins: int) -> list[BinSummary]:
    """Sort by IHR (ties by trial_index) and cut into contiguous equal-count bins.

    Each bin covers ``(lower, upper]`` where ``upper`` is the largest IHR in
    the bin and ``lower`` the previous bin's upper.  The first bin's lower
    edge is its smallest IHR and is inclusive.
    """
    if not trials:
        raise ValueError("quantile_bins needs at least one trial")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if n_bins > len(trials):
        raise ValueError(f"n_bins={n_bins} exceeds the {len(trials)} trials")
    ordered = sorted(trials, key=lambda t: (t.ihr, t.trial_index))
    bins = []
    start = 0
    lower = ordered[0].ihr
    for size in bin_sizes(len(ordered), n_bins):
        group = ordered[start : start + size]
        start += size
        ihrs = [t.ihr for t in group]
        upper = ihrs[-1]
        bins.append(
            BinSummary(
                lower=lower,
                upper=upper,
                mean_ihr=float(np.mean(ihrs)),
                collapse_prob=sum(t.collapsed for t in group) / size,
                count=size,
            )
        )
        lower = upper
    return bins
