"""Value-level IHR quantities: the ratio itself, the stylized accuracy model,
the collapse predicate and the logistic collapse curve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_CLIP_FLOOR = 0.001


class IHRError(ValueError):
    """Base class for invalid inputs to IHR computations."""


class DegenerateDenominatorError(IHRError):
    pass


class InvalidModelError(IHRError):
    pass


@dataclass(frozen=True)
class SystemState:
    capacity_c: float
    uncertainty_u: float
    constraint_k: float

    def __post_init__(self) -> None:
        if not self.capacity_c > 0:
            raise IHRError(f"capacity_c must be > 0, got {self.capacity_c}")


@dataclass(frozen=True)
class DegradationParams:
    base_accuracy: float = 0.96
    coef_u: float = 0.22
    coef_k: float = 0.18
    coef_interaction: float = 0.28
    accuracy_noise_sd: float = 0.015
    collapse_threshold: float = 0.74

    def __post_init__(self) -> None:
        if not self.accuracy_noise_sd >= 0:
            raise IHRError("accuracy_noise_sd >= 0 violated")
        if not 0 < self.collapse_threshold < self.base_accuracy:
            raise IHRError("collapse_threshold in (0, base_accuracy) violated")


@dataclass(frozen=True)
class LogisticModel:
    """P(collapse | ihr) = sigmoid(beta0 + beta1 * ihr); beta1 must be negative."""

    beta0: float
    beta1: float

    def __post_init__(self) -> None:
        if not self.beta1 < 0:
            raise InvalidModelError(f"beta1 must be < 0 for a collapse curve, got {self.beta1}")


# Coefficients reported for the 400-trial experiment; used as the default
# collapse curve of the drift experiments.
REFERENCE_COLLAPSE_MODEL = LogisticModel(beta0=7.527, beta1=-6.303)
REFERENCE_IHR_STAR = 1.194


def compute_ihr(state: SystemState) -> float:
    demand = state.uncertainty_u + state.constraint_k
    if not demand > 0:
        raise DegenerateDenominatorError(
            f"U + K = {demand} <= 0; state bypassed environment clipping"
        )
    return state.capacity_c / demand


def degraded_accuracy(state: SystemState, params: DegradationParams, noise_draw: float) -> float:
    """Stylized accuracy ``acc0 - a*U - b*K - g*U*K + eps``.

    Deliberately unclamped: at extreme stress the value goes negative, which
    only matters through the comparison with the collapse threshold.
    """
    u, k = state.uncertainty_u, state.constraint_k
    return (
        params.base_accuracy
        - params.coef_u * u
        - params.coef_k * k
        - params.coef_interaction * (u * k)
        + noise_draw
    )


def is_collapse(accuracy: float, params: DegradationParams) -> bool:
    # strict: accuracy exactly at the threshold is not a collapse
    return accuracy < params.collapse_threshold


# smallest normal double and largest double below 1
_P_MIN = np.finfo(float).tiny
_P_MAX = 1.0 - 2.0**-53


def sigmoid(x):
    """Numerically stable logistic function for scalars or arrays.

    Never exponentiates a large positive argument, so IHR spikes far above
    100 cannot overflow.  Results are kept inside the open interval (0, 1):
    where the exact value is closer to 0 or 1 than a double can resolve it
    is pinned to the nearest representable interior value.
    """
    if np.ndim(x) == 0:
        return float(sigmoid(np.array([x], dtype=float))[0])
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    z = np.exp(x[~pos])
    out[~pos] = z / (1.0 + z)
    return np.clip(out, _P_MIN, _P_MAX)


def logistic_prob(model: LogisticModel, ihr):
    return sigmoid(model.beta0 + model.beta1 * ihr)


def critical_threshold(model: LogisticModel) -> float:
    if not model.beta1 < 0:
        raise InvalidModelError(f"beta1 must be < 0, got {model.beta1}")
    return -model.beta0 / model.beta1


def clip_environment(u: float, k: float, clip_floor: float = DEFAULT_CLIP_FLOOR) -> tuple[float, float]:
    if not clip_floor > 0:
        raise IHRError("clip_floor must be > 0")
    return max(u, clip_floor), max(k, clip_floor)
