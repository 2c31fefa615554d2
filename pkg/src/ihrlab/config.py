"""JSON configuration for the experiment suite.

Every omitted field falls back to the published parameterization; unknown
keys are rejected.  Run ``python -m ihrlab config`` to print the full default
document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from . import stochastics as st
from .controller import ControllerConfig
from .core import REFERENCE_IHR_STAR, DegradationParams, LogisticModel
from .drift import DEFAULT_SIGMAS, DriftConfig, exp3_drift_config
from .experiment1 import Exp1Config

FORMATS = ("csv", "json", "both")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Exp2Settings:
    drift: DriftConfig = field(default_factory=DriftConfig)
    sigmas: tuple[float, ...] = DEFAULT_SIGMAS
    ihr_star: float = REFERENCE_IHR_STAR
    common_noise: bool = True


@dataclass(frozen=True)
class Exp3Settings:
    drift: DriftConfig = field(default_factory=exp3_drift_config)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    trajectory_run: int | None = None


@dataclass(frozen=True)
class ExperimentSuiteConfig:
    master_seed: int = st.DEFAULT_MASTER_SEED
    exp1: Exp1Config = field(default_factory=Exp1Config)
    exp2: Exp2Settings = field(default_factory=Exp2Settings)
    exp3: Exp3Settings = field(default_factory=Exp3Settings)
    output_dir: str = "results"
    format: str = "both"

    def with_seed(self, seed: int) -> "ExperimentSuiteConfig":
        """Copy with ``seed`` pushed into every nested experiment config."""
        return replace(
            self,
            master_seed=seed,
            exp1=replace(self.exp1, master_seed=seed),
            exp2=replace(self.exp2, drift=replace(self.exp2.drift, master_seed=seed)),
            exp3=replace(self.exp3, drift=replace(self.exp3.drift, master_seed=seed)),
        )


# schema: key -> type tag; nested sections map to dicts
_MODEL = {"beta0": "float", "beta1": "float"}
_DEGRADATION = {
    "base_accuracy": "float", "coef_u": "float", "coef_k": "float",
    "coef_interaction": "float", "accuracy_noise_sd": "float", "collapse_threshold": "float",
}
_EXP1 = {
    "n_trials": "int", "u_lo": "float", "u_hi": "float", "k_lo": "float", "k_hi": "float",
    "capacity_c": "float", "n_bins": "int", "degradation": _DEGRADATION,
}
_DRIFT = {
    "u0": "float", "k0": "float", "delta_u": "float", "delta_k": "float", "noise_sd": "float",
    "horizon_t": "int", "initial_c": "float", "clip_floor": "float", "n_runs": "int",
    "collapse_model": _MODEL,
}
_EXP2 = {k: v for k, v in _DRIFT.items() if k != "noise_sd"}
_EXP2.update({"sigmas": "float_list", "ihr_star": "float", "common_noise": "bool"})
_CONTROLLER = {
    "gain_kappa": "float", "target_ihr": "float", "max_step": "float", "c_min": "float", "c_max": "float",
}
_EXP3 = dict(_DRIFT, controller=_CONTROLLER, trajectory_run="int_or_null")
_SUITE = {
    "master_seed": "int", "output_dir": "str", "format": "str",
    "exp1": _EXP1, "exp2": _EXP2, "exp3": _EXP3,
}


def _check(value, tag, path):
    if isinstance(tag, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object")
        for key in value:
            if key not in tag:
                where = f"{path}.{key}" if path else key
                raise ConfigError(f"unknown configuration key {where!r}")
        for key, sub in value.items():
            _check(sub, tag[key], f"{path}.{key}" if path else key)
        return
    ok = {
        "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
        "float": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        "bool": lambda v: isinstance(v, bool),
        "str": lambda v: isinstance(v, str),
        "float_list": lambda v: isinstance(v, list) and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v),
        "int_or_null": lambda v: v is None or (isinstance(v, int) and not isinstance(v, bool)),
    }[tag](value)
    if not ok:
        raise ConfigError(f"{path}: expected {tag.replace('_', ' ')}, got {json.dumps(value)}")


def _drift(section: dict, base: DriftConfig, seed: int) -> DriftConfig:
    kw = {k: v for k, v in section.items() if k in _DRIFT and k != "collapse_model"}
    kw = {k: float(v) if _DRIFT[k] == "float" else v for k, v in kw.items()}
    if "collapse_model" in section:
        model = {"beta0": base.collapse_model.beta0, "beta1": base.collapse_model.beta1}
        model.update({k: float(v) for k, v in section["collapse_model"].items()})
        kw["collapse_model"] = LogisticModel(**model)
    return replace(base, master_seed=seed, **kw)


def from_dict(doc: dict) -> ExperimentSuiteConfig:
    _check(doc, _SUITE, "")
    seed = doc.get("master_seed", st.DEFAULT_MASTER_SEED)
    if not 0 <= seed < 1 << 64:
        raise ConfigError("master_seed must be an unsigned 64-bit integer")
    section = ""
    try:
        section = "exp1"
        e1 = dict(doc.get("exp1", {}))
        deg = DegradationParams(**{k: float(v) for k, v in e1.pop("degradation", {}).items()})
        e1 = {k: float(v) if _EXP1[k] == "float" else v for k, v in e1.items()}
        exp1 = Exp1Config(degradation=deg, master_seed=seed, **e1)

        section = "exp2"
        e2 = doc.get("exp2", {})
        exp2 = Exp2Settings(
            drift=_drift(e2, DriftConfig(), seed),
            sigmas=tuple(float(s) for s in e2.get("sigmas", DEFAULT_SIGMAS)),
            ihr_star=float(e2.get("ihr_star", REFERENCE_IHR_STAR)),
            common_noise=e2.get("common_noise", True),
        )
        if not exp2.sigmas:
            raise ValueError("sigmas must be non-empty")
        if any(s < 0 for s in exp2.sigmas):
            raise ValueError("sigmas >= 0 violated")

        section = "exp3"
        e3 = doc.get("exp3", {})
        ctrl = ControllerConfig(**{k: float(v) for k, v in e3.get("controller", {}).items()})
        drift3 = _drift(e3, exp3_drift_config(), seed)
        if not ctrl.c_min <= drift3.initial_c <= ctrl.c_max:
            raise ValueError("c_min <= initial_c <= c_max violated")
        run = e3.get("trajectory_run")
        if run is not None and not 0 <= run < drift3.n_runs:
            raise ValueError("0 <= trajectory_run < n_runs violated")
        exp3 = Exp3Settings(drift=drift3, controller=ctrl, trajectory_run=run)
    except ValueError as exc:
        raise ConfigError(f"{section}: {exc}") from exc

    fmt = doc.get("format", "both")
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got {fmt!r}")
    return ExperimentSuiteConfig(
        master_seed=seed, exp1=exp1, exp2=exp2, exp3=exp3,
        output_dir=doc.get("output_dir", "results"), format=fmt,
    )


def parse_config(source: str) -> ExperimentSuiteConfig:
    """Parse and validate a JSON config document."""
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("parse error: top level must be a JSON object")
    return from_dict(doc)


def _drift_dict(d: DriftConfig, keys) -> dict:
    out = {k: getattr(d, k) for k in keys if k != "collapse_model"}
    out["collapse_model"] = {"beta0": d.collapse_model.beta0, "beta1": d.collapse_model.beta1}
    return out


def to_dict(cfg: ExperimentSuiteConfig) -> dict:
    e1 = cfg.exp1
    deg = e1.degradation
    return {
        "master_seed": cfg.master_seed,
        "output_dir": cfg.output_dir,
        "format": cfg.format,
        "exp1": {
            **{k: getattr(e1, k) for k in _EXP1 if k != "degradation"},
            "degradation": {k: getattr(deg, k) for k in _DEGRADATION},
        },
        "exp2": {
            **_drift_dict(cfg.exp2.drift, [k for k in _DRIFT if k != "noise_sd"]),
            "sigmas": list(cfg.exp2.sigmas),
            "ihr_star": cfg.exp2.ihr_star,
            "common_noise": cfg.exp2.common_noise,
        },
        "exp3": {
            **_drift_dict(cfg.exp3.drift, _DRIFT),
            "controller": {k: getattr(cfg.exp3.controller, k) for k in _CONTROLLER},
            "trajectory_run": cfg.exp3.trajectory_run,
        },
    }


def dump_config(cfg: ExperimentSuiteConfig) -> str:
    return json.dumps(to_dict(cfg), indent=2) + "\n"
