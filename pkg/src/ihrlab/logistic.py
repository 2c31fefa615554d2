"""Maximum-likelihood fit of the two-parameter logistic collapse curve."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import LogisticModel, critical_threshold, sigmoid

MAX_ITER = 100
MAX_HALVINGS = 30
STEP_TOL = 1e-10
GRAD_TOL = 1e-12
MAX_ABS_SLOPE = 1e3
MIN_CURVATURE = 1e-8


class FitError(ArithmeticError):
    pass


class DegenerateOutcomesError(FitError):
    pass


class SeparationError(FitError):
    pass


class ConvergenceError(FitError):
    pass


@dataclass(frozen=True)
class FitResult:
    model: LogisticModel
    ihr_star: float
    log_likelihood: float
    iterations: int
    converged: bool
    gradient_norm: float

    def to_dict(self) -> dict:
        return {
            "beta0": self.model.beta0,
            "beta1": self.model.beta1,
            "ihr_star": self.ihr_star,
            "log_likelihood": self.log_likelihood,
            "iterations": self.iterations,
            "converged": self.converged,
            "gradient_norm": self.gradient_norm,
        }


def _as_arrays(outcomes) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(outcomes, tuple) and len(outcomes) == 2 and isinstance(outcomes[0], np.ndarray):
        x, y = outcomes
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    pairs = list(outcomes)
    if not pairs:
        return np.empty(0), np.empty(0)
    x, y = zip(*pairs)
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def _loglik(b0: float, b1: float, x: np.ndarray, y: np.ndarray) -> float:
    eta = b0 + b1 * x
    # y log p + (1-y) log(1-p), with log p = -log(1+e^-eta)
    return float(-np.sum(y * np.logaddexp(0.0, -eta) + (1.0 - y) * np.logaddexp(0.0, eta)))


def log_likelihood(model: LogisticModel, outcomes) -> float:
    """Bernoulli log-likelihood of ``(ihr, collapsed)`` pairs; 0 for no data."""
    x, y = _as_arrays(outcomes)
    if x.size == 0:
        return 0.0
    return _loglik(model.beta0, model.beta1, x, y)


def gradient(b0: float, b1: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    r = y - sigmoid(b0 + b1 * x)
    return np.array([r.sum(), (r * x).sum()])


def fit_logistic(outcomes: Iterable) -> FitResult:
    """Damped Newton-Raphson from (0, 0).

    ``outcomes`` is an iterable of ``(ihr, collapsed)`` pairs or an
    ``(x, y)`` tuple of arrays.  The data are sorted internally, so the
    result does not depend on input order.
    """
    x, y = _as_arrays(outcomes)
    if x.size == 0 or y.min() == y.max():
        raise DegenerateOutcomesError("need at least one collapsed and one non-collapsed outcome")
    if np.unique(x).size < 2:
        raise DegenerateOutcomesError("need at least two distinct ihr values")
    order = np.lexsort((y, x))
    x, y = x[order], y[order]

    beta = np.zeros(2)
    ll = _loglik(beta[0], beta[1], x, y)
    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        p = sigmoid(beta[0] + beta[1] * x)
        r = y - p
        g = np.array([r.sum(), (r * x).sum()])
        w = p * (1.0 - p)
        h00, h01, h11 = w.sum(), (w * x).sum(), (w * x * x).sum()
        if h00 < MIN_CURVATURE:
            # every fitted probability saturated at 0 or 1: the labels are separated
            raise SeparationError("Hessian vanished; outcomes are separated and the MLE diverges")
        if np.hypot(*g) < GRAD_TOL:
            converged = True
            it -= 1
            break
        det = h00 * h11 - h01 * h01
        if not det > 1e-14 * max(h00 * h11, np.finfo(float).tiny):
            raise SeparationError("Hessian numerically singular; outcomes are (quasi-)separated")
        # Newton step solves (X^T W X) step = gradient
        step = np.array([h11 * g[0] - h01 * g[1], h00 * g[1] - h01 * g[0]]) / det

        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = beta + scale * step
            ll_cand = _loglik(cand[0], cand[1], x, y)
            if ll_cand >= ll - 1e-13 * (1.0 + abs(ll)):
                break
            scale *= 0.5
        else:
            # no ascent direction left at working precision
            if np.hypot(*g) < 1e-6:
                converged = True
                break
            raise ConvergenceError("step halving exhausted without likelihood increase")
        delta = cand - beta
        beta, ll = cand, ll_cand
        if abs(beta[1]) > MAX_ABS_SLOPE:
            raise SeparationError(f"|beta1| = {abs(beta[1]):.3g} exceeds {MAX_ABS_SLOPE:g}; MLE diverges")
        if np.hypot(*delta) < STEP_TOL:
            converged = True
            break

    if not converged:
        raise ConvergenceError(f"no convergence after {MAX_ITER} iterations")
    if not beta[1] < 0:
        raise FitError(f"fitted slope {beta[1]:.4g} is not negative; not a collapse curve")
    model = LogisticModel(float(beta[0]), float(beta[1]))
    gnorm = float(np.hypot(*gradient(model.beta0, model.beta1, x, y)))
    return FitResult(
        model=model,
        ihr_star=critical_threshold(model),
        log_likelihood=_loglik(model.beta0, model.beta1, x, y),
        iterations=it,
        converged=converged,
        gradient_norm=gnorm,
    )
