"""Flat YAML experiment configs with ``--set key=value`` overrides."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import yaml

from .params import ModelParams

KINDS = ("spectrum", "peres", "tc-gaps", "poincare", "lyapunov-map", "dos", "adscan", "vmap")

COMMON = {
    "model": "dicke",
    "omega": 1.0,
    "omega0": 1.0,
    "gamma": None,
    "gamma_over_gc": None,
    "j": 10.0,
    "n_max": 40,
    "parity": "plus",
    "seed": 0,
    "cache_dir": None,
    "gnuplot": True,
}

SPECTRUM_OPTS = {
    "scheme": "coherent_parity",
    "check_convergence": True,
    "tolerance": 1e-6,
    "cutoff_step": None,
    "max_dim": 20000,
    "lam_max": 60,
}

KIND_OPTS = {
    "spectrum": dict(SPECTRUM_OPTS),
    "peres": dict(SPECTRUM_OPTS),
    "tc-gaps": {"lam_max": 60},
    "poincare": {"energies": [-0.5], "n_seeds": 24, "T": 1000.0, "max_points": None},
    "lyapunov-map": {
        "energies": [-0.5],
        "n_seeds": 24,
        "T": 1000.0,
        "renorm_interval": 1.0,
        "chaotic_threshold": 20.0,
        "regular_threshold": 10.0,
    },
    "dos": {"eps_min": None, "eps_max": 2.0, "eps_step": 0.01, "resolution": 3000},
    "adscan": dict(SPECTRUM_OPTS, window=301, step=25, with_observables=True),
    "vmap": {
        "gamma_ratios": [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.2, 1.5, 2.0, 2.5, 3.0],
        "energies": None,
        "eps_step": 0.25,
        "eps_max": 2.0,
        "n_points": 10000,
    },
}


class ConfigError(ValueError):
    def __init__(self, key, msg):
        super().__init__(f"config key {key!r}: {msg}")
        self.key = key


def _parse_value(text: str):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(text, f"unparseable value ({exc})") from None


def parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v)
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    values: dict  # fully resolved, includes common and kind-specific keys

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    @property
    def params(self) -> ModelParams:
        v = self.values
        delta = 1 if v["model"] == "dicke" else 0
        base = ModelParams(omega=v["omega"], omega0=v["omega0"], delta=delta, j=v["j"], n_max=v["n_max"])
        if v["gamma"] is not None:
            return base.with_(gamma=float(v["gamma"]))
        return ModelParams.from_ratio(float(v["gamma_over_gc"]), omega=v["omega"], omega0=v["omega0"],
                                      delta=delta, j=v["j"], n_max=v["n_max"])

    def canonical_json(self) -> str:
        return json.dumps({"kind": self.kind, **self.values}, sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def _check_number(key, value, positive=False, integer=False, allow_none=False):
    if value is None and allow_none:
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite")
    if positive and value <= 0:
        raise ConfigError(key, "must be positive")
    if integer and int(value) != value:
        raise ConfigError(key, "must be an integer")
    return int(value) if integer else float(value)


def resolve(kind: str, raw: dict) -> ExperimentConfig:
    """Merge ``raw`` with defaults and validate."""
    if kind not in KINDS:
        raise ConfigError("kind", f"unknown experiment kind {kind!r}; choose from {', '.join(KINDS)}")
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a flat mapping")
    raw = dict(raw)
    raw.pop("kind", None)
    allowed = {**COMMON, **KIND_OPTS[kind]}
    for key, val in raw.items():
        if key not in allowed:
            raise ConfigError(key, f"not a recognised option for kind {kind!r}")
        if isinstance(val, dict):
            raise ConfigError(key, "nested mappings are not allowed (flat config)")
    v = {**allowed, **raw}
    if v["model"] not in ("dicke", "tc"):
        raise ConfigError("model", "must be 'dicke' or 'tc'")
    if (v["gamma"] is None) == (v["gamma_over_gc"] is None):
        raise ConfigError("gamma", "give exactly one of gamma / gamma_over_gc")
    for key in ("omega", "omega0", "j"):
        v[key] = _check_number(key, v[key], positive=True)
    v["gamma"] = _check_number("gamma", v["gamma"], allow_none=True)
    v["gamma_over_gc"] = _check_number("gamma_over_gc", v["gamma_over_gc"], allow_none=True)
    v["n_max"] = _check_number("n_max", v["n_max"], integer=True)
    v["seed"] = _check_number("seed", v["seed"], integer=True)
    if v["parity"] not in ("plus", "minus", "both"):
        raise ConfigError("parity", "must be plus, minus or both")
    for key in ("n_seeds", "window", "step", "lam_max", "n_points", "resolution", "max_dim"):
        if key in v:
            v[key] = _check_number(key, v[key], positive=True, integer=True)
    for key in ("T", "renorm_interval", "eps_step", "tolerance"):
        if key in v:
            v[key] = _check_number(key, v[key], positive=True)
    if "energies" in v and v["energies"] is not None:
        if not isinstance(v["energies"], list) or not v["energies"]:
            raise ConfigError("energies", "must be a non-empty list of scaled energies")
        v["energies"] = [_check_number("energies", e) for e in v["energies"]]
    if "gamma_ratios" in v:
        if not isinstance(v["gamma_ratios"], list) or not v["gamma_ratios"]:
            raise ConfigError("gamma_ratios", "must be a non-empty list")
        v["gamma_ratios"] = [_check_number("gamma_ratios", g) for g in v["gamma_ratios"]]
    cfg = ExperimentConfig(kind, v)
    try:
        cfg.params
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from None
    return cfg


def load(kind: str, path: str | Path | None, overrides=None) -> ExperimentConfig:
    raw = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {path}: {exc}") from None
        try:
            raw = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError("--config", f"invalid YAML: {exc}") from None
    if isinstance(overrides, dict):
        raw.update(overrides)
    else:
        raw.update(parse_overrides(overrides))
    return resolve(kind, raw)
