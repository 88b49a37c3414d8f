"""Tool configuration: one validated JSON document for every subcommand.

Everything is optional; omitted blocks fall back to the defaults below
(SIL1, hardware 0.05, equal-error threshold, first-kind dangerous error).
Validation happens at load time so a bad document fails before any
computation runs, with the offending key named.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .ann import CostKind, GateRule, Decision, Hyperparameters
from .budget import SilLevel
from .classifier import ErrorKind, GaussianClassParams, ThresholdPolicy
from .montecarlo import Contamination, SimulationConfig

ENV_CONFIG = "SIL_ASSESSOR_CONFIG"


class ConfigError(ValueError):
    """Malformed or inconsistent configuration document."""


@dataclass(frozen=True)
class MonteCarloSettings:
    m_left: float = 0.0
    sigma_left: float = 1.0
    m_right: float = 2.0
    sigma_right: float = 1.0
    n_left: int = 100
    n_right: int = 100
    gamma: float = 0.05
    replications: int = 2000
    contamination: Contamination | None = None
    empirical_draws: int = 0

    def simulation_config(self, z_policy: ThresholdPolicy, seed: int) -> SimulationConfig:
        return SimulationConfig(
            true_left=GaussianClassParams(m=self.m_left, sigma=self.sigma_left),
            true_right=GaussianClassParams(m=self.m_right, sigma=self.sigma_right),
            n_left=self.n_left,
            n_right=self.n_right,
            gamma=self.gamma,
            z_policy=z_policy,
            replications=self.replications,
            seed=seed,
            contamination=self.contamination,
            empirical_draws=self.empirical_draws,
        )


@dataclass(frozen=True)
class AnnSettings:
    n_nodes: int = 8
    cost: CostKind = CostKind.CROSS_ENTROPY
    learning_rate: float = 0.05
    max_epochs: int = 4000
    patience: int = 500
    tol: float = 1e-10
    lr_final_fraction: float | None = 0.01
    init_scale: float = 1.0

    def hyperparameters(self, seed: int) -> Hyperparameters:
        return Hyperparameters(
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            patience=self.patience,
            tol=self.tol,
            lr_final_fraction=self.lr_final_fraction,
            init_scale=self.init_scale,
            seed=seed,
        )


@dataclass(frozen=True)
class ToolConfig:
    level: SilLevel = SilLevel.SIL1
    hardware_share: float = 0.05
    threshold_overrides: dict[SilLevel, float] = field(default_factory=dict)
    alpha_max: float | None = None  # explicit split needs gamma too
    gamma: float | None = None
    z_policy: ThresholdPolicy = ThresholdPolicy.equal_error()
    dangerous: ErrorKind = ErrorKind.FIRST_KIND
    montecarlo: MonteCarloSettings = MonteCarloSettings()
    ann: AnnSettings = AnnSettings()
    gate: GateRule | None = None


def _require(condition: bool, message: str):
    if not condition:
        raise ConfigError(message)


def _get_number(doc: dict, key: str, default):
    value = doc.get(key, default)
    if value is None:
        return None
    _require(isinstance(value, (int, float)) and not isinstance(value, bool)
             and math.isfinite(value), f"config key {key!r} must be a finite number")
    return float(value)


def _get_int(doc: dict, key: str, default):
    value = doc.get(key, default)
    _require(isinstance(value, int) and not isinstance(value, bool),
             f"config key {key!r} must be an integer")
    return value


def _parse_z_policy(doc) -> ThresholdPolicy:
    _require(isinstance(doc, dict) and "kind" in doc,
             "z_policy must be an object with a 'kind' key")
    kind = doc["kind"]
    try:
        if kind == "fixed":
            return ThresholdPolicy.fixed(_get_number(doc, "z", None))
        if kind == "equal_error":
            return ThresholdPolicy.equal_error()
        if kind == "alpha_target":
            return ThresholdPolicy.alpha_target(_get_number(doc, "alpha", None))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid z_policy: {exc}") from exc
    raise ConfigError(f"unknown z_policy kind {kind!r}")


def _parse_contamination(doc) -> Contamination | None:
    if doc is None:
        return None
    _require(isinstance(doc, dict), "contamination must be an object")
    try:
        return Contamination(fraction=_get_number(doc, "fraction", 0.0),
                             shift=_get_number(doc, "shift", 0.0))
    except ValueError as exc:
        raise ConfigError(f"invalid contamination: {exc}") from exc


def _parse_montecarlo(doc) -> MonteCarloSettings:
    _require(isinstance(doc, dict), "montecarlo must be an object")
    defaults = MonteCarloSettings()
    try:
        return MonteCarloSettings(
            m_left=_get_number(doc, "m_left", defaults.m_left),
            sigma_left=_get_number(doc, "sigma_left", defaults.sigma_left),
            m_right=_get_number(doc, "m_right", defaults.m_right),
            sigma_right=_get_number(doc, "sigma_right", defaults.sigma_right),
            n_left=_get_int(doc, "n_left", defaults.n_left),
            n_right=_get_int(doc, "n_right", defaults.n_right),
            gamma=_get_number(doc, "gamma", defaults.gamma),
            replications=_get_int(doc, "replications", defaults.replications),
            contamination=_parse_contamination(doc.get("contamination")),
            empirical_draws=_get_int(doc, "empirical_draws", defaults.empirical_draws),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid montecarlo settings: {exc}") from exc


def _parse_ann(doc) -> AnnSettings:
    _require(isinstance(doc, dict), "ann must be an object")
    defaults = AnnSettings()
    cost_name = doc.get("cost", defaults.cost.value)
    try:
        cost = CostKind(cost_name)
    except ValueError:
        raise ConfigError(f"unknown ann cost {cost_name!r}") from None
    fraction = doc.get("lr_final_fraction", defaults.lr_final_fraction)
    try:
        return AnnSettings(
            n_nodes=_get_int(doc, "n_nodes", defaults.n_nodes),
            cost=cost,
            learning_rate=_get_number(doc, "learning_rate", defaults.learning_rate),
            max_epochs=_get_int(doc, "max_epochs", defaults.max_epochs),
            patience=_get_int(doc, "patience", defaults.patience),
            tol=_get_number(doc, "tol", defaults.tol),
            lr_final_fraction=None if fraction is None
            else _get_number(doc, "lr_final_fraction", fraction),
            init_scale=_get_number(doc, "init_scale", defaults.init_scale),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid ann settings: {exc}") from exc


def _parse_gate(doc) -> GateRule | None:
    if doc is None:
        return None
    _require(isinstance(doc, dict), "gate must be an object")
    boxes = doc.get("boxes", [])
    _require(isinstance(boxes, list), "gate.boxes must be a list")
    fallback_name = doc.get("fallback", Decision.REJECT.value)
    try:
        fallback = Decision(fallback_name)
    except ValueError:
        raise ConfigError(f"unknown gate fallback {fallback_name!r}") from None
    try:
        parsed = tuple(tuple((float(lo), float(hi)) for lo, hi in box) for box in boxes)
        return GateRule(boxes=parsed, fallback=fallback)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid gate boxes: {exc}") from exc


def _parse_level(name) -> SilLevel:
    try:
        return SilLevel(str(name).upper())
    except ValueError:
        raise ConfigError(f"unknown SIL level {name!r}") from None


def parse_config(doc: dict) -> ToolConfig:
    _require(isinstance(doc, dict), "configuration root must be an object")
    known = {"level", "hardware_share", "threshold_overrides", "alpha_max",
             "gamma", "z_policy", "dangerous", "montecarlo", "ann", "gate"}
    unknown = set(doc) - known
    _require(not unknown, f"unknown config key(s): {sorted(unknown)}")

    defaults = ToolConfig()
    overrides = {}
    raw_overrides = doc.get("threshold_overrides", {})
    _require(isinstance(raw_overrides, dict), "threshold_overrides must be an object")
    for name, value in raw_overrides.items():
        parsed = _get_number({"v": value}, "v", None)
        _require(parsed is not None, f"threshold override for {name!r} must be a number")
        overrides[_parse_level(name)] = parsed

    dangerous_name = doc.get("dangerous", defaults.dangerous.value)
    try:
        dangerous = ErrorKind(dangerous_name)
    except ValueError:
        raise ConfigError(f"unknown dangerous direction {dangerous_name!r}") from None

    alpha_max = _get_number(doc, "alpha_max", None)
    gamma = _get_number(doc, "gamma", None)
    _require((alpha_max is None) == (gamma is None),
             "alpha_max and gamma must be given together or not at all")

    return ToolConfig(
        level=_parse_level(doc.get("level", defaults.level.value)),
        hardware_share=_get_number(doc, "hardware_share", defaults.hardware_share),
        threshold_overrides=overrides,
        alpha_max=alpha_max,
        gamma=gamma,
        z_policy=_parse_z_policy(doc.get("z_policy", {"kind": "equal_error"})),
        dangerous=dangerous,
        montecarlo=_parse_montecarlo(doc.get("montecarlo", {})),
        ann=_parse_ann(doc.get("ann", {})),
        gate=_parse_gate(doc.get("gate")),
    )


def load_config(path: str | None) -> ToolConfig:
    """Load from ``path``, the environment fallback, or pure defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG)
    if path is None:
        return ToolConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    return parse_config(doc)
