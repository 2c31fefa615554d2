"""Time-stepped drift of uncertainty and constraint load (Experiments 2 and 3).

Each run reads three substreams keyed by its run index: U-noise, K-noise and
the uniforms that realize per-step collapse events.  Draw ``t`` of a stream
belongs to step ``t``, so a run is the same whichever worker computes it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import stochastics as st
from .controller import ControllerConfig, control_step
from .core import DEFAULT_CLIP_FLOOR, REFERENCE_COLLAPSE_MODEL, REFERENCE_IHR_STAR, LogisticModel, logistic_prob

DEFAULT_SIGMAS = tuple(round(0.025 * i, 3) for i in range(13))


@dataclass(frozen=True)
class DriftConfig:
    u0: float = 0.55
    k0: float = 0.35
    delta_u: float = 0.0025
    delta_k: float = 0.0015
    noise_sd: float = 0.0
    horizon_t: int = 120
    initial_c: float = 1.2
    clip_floor: float = DEFAULT_CLIP_FLOOR
    n_runs: int = 400
    master_seed: int = st.DEFAULT_MASTER_SEED
    collapse_model: LogisticModel = field(default_factory=lambda: REFERENCE_COLLAPSE_MODEL)
    experiment_tag: int = st.EXP2

    def __post_init__(self) -> None:
        if not self.u0 + self.k0 > 0:
            raise ValueError("u0 + k0 > 0 violated")
        if self.horizon_t < 1:
            raise ValueError("horizon_t >= 1 violated")
        if not self.noise_sd >= 0:
            raise ValueError("noise_sd >= 0 violated")
        if not self.initial_c > 0:
            raise ValueError("initial_c > 0 violated")
        if not self.clip_floor > 0:
            raise ValueError("clip_floor > 0 violated")
        if self.n_runs < 1:
            raise ValueError("n_runs >= 1 violated")


def exp3_drift_config(**overrides) -> DriftConfig:
    """Drift parameters of the controlled-vs-uncontrolled comparison."""
    params = dict(
        delta_u=0.0030,
        delta_k=0.0020,
        noise_sd=0.03,
        horizon_t=150,
        initial_c=1.15,
        n_runs=300,
        experiment_tag=st.EXP3,
    )
    params.update(overrides)
    return DriftConfig(**params)


@dataclass(frozen=True)
class Trajectory:
    run_index: int
    u: np.ndarray
    k: np.ndarray
    c: np.ndarray
    ihr: np.ndarray
    collapse_prob: np.ndarray
    collapse_event: np.ndarray


@dataclass(frozen=True)
class TrajectoryBatch:
    """Many runs stored as ``(n_runs, horizon_t)`` arrays."""

    run_indices: np.ndarray
    u: np.ndarray
    k: np.ndarray
    c: np.ndarray
    ihr: np.ndarray
    collapse_prob: np.ndarray
    collapse_event: np.ndarray

    def __len__(self) -> int:
        return len(self.run_indices)

    def run(self, i: int) -> Trajectory:
        return Trajectory(
            int(self.run_indices[i]),
            self.u[i], self.k[i], self.c[i], self.ihr[i],
            self.collapse_prob[i], self.collapse_event[i],
        )

    def runs(self) -> list[Trajectory]:
        return [self.run(i) for i in range(len(self))]

    @classmethod
    def concat(cls, parts: Sequence["TrajectoryBatch"]) -> "TrajectoryBatch":
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in cls.__dataclass_fields__))


@dataclass(frozen=True)
class RegimeStats:
    mean_ihr: float
    ihr_sd: float
    collapse_rate: float
    frac_below_star: float


def _stream_normals(config: DriftConfig, keys: np.ndarray, var: int) -> np.ndarray:
    states = st.substream_states(config.master_seed, config.experiment_tag, keys, var)
    return st.normal_from_raw(st.raw_block(states, config.horizon_t), 0.0, 1.0)


def _stream_uniforms(config: DriftConfig, keys: np.ndarray, var: int) -> np.ndarray:
    states = st.substream_states(config.master_seed, config.experiment_tag, keys, var)
    return st.raw_to_unit(st.raw_block(states, config.horizon_t))


def environment(config: DriftConfig, keys) -> tuple[np.ndarray, np.ndarray]:
    """Clipped ``(u, k)`` arrays of shape ``(len(keys), horizon_t)``.

    Noise is added to the linear trend, not accumulated.  U and K noise are
    independent draws.
    """
    keys = np.asarray(keys, dtype=np.int64)
    t = np.arange(config.horizon_t, dtype=float)
    sd = config.noise_sd
    u = (config.u0 + config.delta_u * t) + sd * _stream_normals(config, keys, st.VAR_U)
    k = (config.k0 + config.delta_k * t) + sd * _stream_normals(config, keys, st.VAR_K)
    return np.maximum(u, config.clip_floor), np.maximum(k, config.clip_floor)


def _simulate_block(config: DriftConfig, controller: ControllerConfig | None, run_indices: np.ndarray,
                    keys: np.ndarray) -> TrajectoryBatch:
    u, k = environment(config, keys)
    demand = u + k
    if controller is None:
        c = np.full_like(u, config.initial_c)
        ihr = c / demand
    else:
        c = np.empty_like(u)
        ihr = np.empty_like(u)
        c[:, 0] = config.initial_c
        ihr[:, 0] = c[:, 0] / demand[:, 0]
        for t in range(1, config.horizon_t):
            # observe the previous step's IHR, adjust C, then the environment advances
            c[:, t] = control_step(controller, ihr[:, t - 1], c[:, t - 1])
            ihr[:, t] = c[:, t] / demand[:, t]
    prob = logistic_prob(config.collapse_model, ihr)
    events = (_stream_uniforms(config, keys, st.VAR_EVENT) < prob).astype(np.int8)
    return TrajectoryBatch(run_indices, u, k, c, ihr, prob, events)


def simulate_batch(config: DriftConfig, controller: ControllerConfig | None = None, run_indices=None,
                   keys=None, workers: int = 1) -> TrajectoryBatch:
    """Simulate many runs at once.

    ``keys`` are the substream trial indices; they default to the run
    indices.  Splitting across ``workers`` threads never changes results.
    """
    if run_indices is None:
        run_indices = np.arange(config.n_runs)
    run_indices = np.asarray(run_indices, dtype=np.int64)
    keys = run_indices if keys is None else np.asarray(keys, dtype=np.int64)
    if controller is not None and not controller.c_min <= config.initial_c <= controller.c_max:
        raise ValueError("initial_c must lie in [c_min, c_max] for a controlled run")
    n_chunks = max(1, min(workers, len(run_indices)))
    if n_chunks == 1:
        return _simulate_block(config, controller, run_indices, keys)
    chunks = np.array_split(np.arange(len(run_indices)), n_chunks)
    with ThreadPoolExecutor(max_workers=n_chunks) as pool:
        parts = list(pool.map(lambda ix: _simulate_block(config, controller, run_indices[ix], keys[ix]), chunks))
    return TrajectoryBatch.concat(parts)


def simulate_run(config: DriftConfig, controller: ControllerConfig | None = None, run_index: int = 0) -> Trajectory:
    return simulate_batch(config, controller, [run_index]).run(0)


def summarize_regime(trajectories, ihr_star: float = REFERENCE_IHR_STAR) -> RegimeStats:
    """Pool every (run, step) pair; the IHR sd is the population sd."""
    if isinstance(trajectories, TrajectoryBatch):
        ihr, prob = trajectories.ihr, trajectories.collapse_prob
    else:
        trajectories = list(trajectories)
        if not trajectories:
            raise ValueError("summarize_regime needs at least one trajectory")
        ihr = np.concatenate([tr.ihr for tr in trajectories])
        prob = np.concatenate([tr.collapse_prob for tr in trajectories])
    if ihr.size == 0:
        raise ValueError("summarize_regime needs at least one trajectory")
    return RegimeStats(
        mean_ihr=float(np.mean(ihr)),
        ihr_sd=float(np.std(ihr)),
        collapse_rate=float(np.mean(prob)),
        frac_below_star=float(np.mean(ihr < ihr_star)),
    )


def run_noise_sweep(base: DriftConfig, sigmas: Sequence[float] = DEFAULT_SIGMAS,
                    ihr_star: float = REFERENCE_IHR_STAR, workers: int = 1,
                    common_noise: bool = True) -> list[tuple[float, RegimeStats]]:
    """Summaries of ``base.n_runs`` runs at each noise level.

    With ``common_noise`` every level reuses the same standard-normal draws
    per run index, scaled by its sigma, so differences between levels are
    not masked by sampling noise.  Otherwise level ``j`` keys its substreams
    by ``(j, run_index)``.
    """
    sigmas = list(sigmas)
    if not sigmas:
        raise ValueError("sigmas must be non-empty")
    runs = np.arange(base.n_runs, dtype=np.int64)

    def level(j: int) -> tuple[float, RegimeStats]:
        cfg = replace(base, noise_sd=float(sigmas[j]))
        keys = runs if common_noise else (np.int64(j) << 24) | runs
        return float(sigmas[j]), summarize_regime(simulate_batch(cfg, None, runs, keys), ihr_star)

    if workers <= 1:
        return [level(j) for j in range(len(sigmas))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(level, range(len(sigmas))))

