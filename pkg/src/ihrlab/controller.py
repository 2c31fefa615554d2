"""Proportional capacity controller with per-step and absolute bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ControllerConfig:
    gain_kappa: float = 0.08
    target_ihr: float = 1.20
    max_step: float = 0.04
    c_min: float = 0.70
    c_max: float = 1.80

    def __post_init__(self) -> None:
        if not self.gain_kappa > 0:
            raise ValueError("gain_kappa > 0 violated")
        if not self.max_step > 0:
            raise ValueError("max_step > 0 violated")
        if not self.c_min < self.c_max:
            raise ValueError("c_min < c_max violated")
        if not self.target_ihr > 0:
            raise ValueError("target_ihr > 0 violated")


def control_step(ctrl: ControllerConfig, current_ihr, current_c):
    """Next capacity after one proportional update.

    The raw adjustment is clipped to ``+/- max_step`` first, then the new
    capacity is clipped to ``[c_min, c_max]``.  Works elementwise on arrays.
    """
    raw = ctrl.gain_kappa * (ctrl.target_ihr - current_ihr)
    delta = np.clip(raw, -ctrl.max_step, ctrl.max_step)
    new_c = np.clip(current_c + delta, ctrl.c_min, ctrl.c_max)
    if np.ndim(new_c) == 0:
        return float(new_c)
    return new_c
