"""Run and sweep configuration files.

Configs are flat JSON objects mirroring ScenarioSpec plus the adaptive-law
gains.  Unknown keys are rejected, every violation names the offending key
path, and loading a saved config reproduces the exact same spec.  Named
planner variants (AVOCADO_1..4, ORCA) preset the gains; explicit keys win
over the variant preset.

Units: positions/radii/tolerances in m, speeds in m/s, times (T, timeout,
vo_horizon, kappa) in s, d in 1/s, sigma in m/s; a, b, c, delta, epsilon
and p are dimensionless.
"""

from __future__ import annotations

import json
from dataclasses import asdict, replace
from typing import Any

from .opinion import ATTENTION_MODES, PROJECTION_MODES, OpinionParams
from .simulator import (
    FAMILIES,
    VARIANT_OVERRIDES,
    VARIANTS,
    CustomAgent,
    ScenarioSpec,
    StaticDisc,
)

SCHEMA_VERSION = 1

OPINION_KEYS = ("a", "b", "c", "d", "delta", "kappa", "epsilon", "sigma")
SWEEPABLE_PARAMETERS = ("a", "c", "d", "kappa", "epsilon", "delta", "b")

_SCENARIO_KEYS = (
    "schema_version", "family", "n", "p", "variant", "seed", "T", "timeout",
    "goal_tolerance", "vo_horizon", "perception_radius", "radius",
    "robot_max_speed", "agent_max_speed", "obstacles", "counterpart",
    "orca_noise", "headon_half_gap", "agents",
    "attention_mode", "projection_mode",
) + OPINION_KEYS


class ConfigError(ValueError):
    """Schema or range violation; carries the offending key path."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key '{key}': {message}")


def _expect(cond: bool, key: str, message: str) -> None:
    if not cond:
        raise ConfigError(key, message)


def _number(data: dict, key: str, default: float) -> float:
    value = data.get(key, default)
    _expect(isinstance(value, (int, float)) and not isinstance(value, bool),
            key, f"expected a number, got {value!r}")
    return float(value)


def _integer(data: dict, key: str, default: int) -> int:
    value = data.get(key, default)
    _expect(isinstance(value, int) and not isinstance(value, bool),
            key, f"expected an integer, got {value!r}")
    return value


def _string(data: dict, key: str, default: str, allowed: tuple[str, ...]) -> str:
    value = data.get(key, default)
    _expect(isinstance(value, str), key, f"expected a string, got {value!r}")
    _expect(value in allowed, key, f"must be one of {allowed}, got {value!r}")
    return value


def _check_unknown(data: dict, allowed, path: str = "") -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{path}{key}", "unknown key")


def scenario_from_dict(data: dict[str, Any]) -> ScenarioSpec:
    """Validate a flat config object and build the scenario spec."""
    _expect(isinstance(data, dict), "<root>", "config must be a JSON object")
    _check_unknown(data, _SCENARIO_KEYS)

    version = _integer(data, "schema_version", SCHEMA_VERSION)
    _expect(version == SCHEMA_VERSION, "schema_version",
            f"unsupported version {version}, expected {SCHEMA_VERSION}")

    family = _string(data, "family", "headon", FAMILIES)
    variant = _string(data, "variant", "AVOCADO_1", VARIANTS)

    n = _integer(data, "n", 2)
    _expect(n >= 2, "n", f"must be >= 2, got {n}")
    p = _number(data, "p", 1.0)
    _expect(0.0 < p <= 1.0, "p", f"must be in (0, 1], got {p}")
    seed = _integer(data, "seed", 0)
    _expect(seed >= 0, "seed", f"must be >= 0, got {seed}")

    positive = {
        "T": 0.05, "timeout": 100.0, "goal_tolerance": 0.1, "vo_horizon": 5.0,
        "perception_radius": 2.5, "radius": 0.2,
        "robot_max_speed": 1.0, "agent_max_speed": 0.75, "headon_half_gap": 2.5,
    }
    physical: dict[str, float] = {}
    for key, default in positive.items():
        value = _number(data, key, default)
        _expect(value > 0.0, key, f"must be > 0, got {value}")
        physical[key] = value

    opinion_kwargs: dict[str, Any] = dict(VARIANT_OVERRIDES[variant])
    for key in OPINION_KEYS:
        if key in data:
            opinion_kwargs[key] = _number(data, key, 0.0)
    opinion_kwargs["T"] = physical["T"]
    opinion_kwargs["attention_mode"] = _string(
        data, "attention_mode", "smoothing", ATTENTION_MODES)
    opinion_kwargs["projection_mode"] = _string(
        data, "projection_mode", "signed", PROJECTION_MODES)
    try:
        opinion = OpinionParams(**opinion_kwargs)
    except ValueError as exc:
        # OpinionParams names the parameter in its message.
        key = str(exc).split(" ")[1] if "parameter" in str(exc) else "opinion"
        raise ConfigError(key, str(exc)) from None

    obstacles_raw = data.get("obstacles", [])
    _expect(isinstance(obstacles_raw, list), "obstacles", "expected a list")
    obstacles = []
    for i, entry in enumerate(obstacles_raw):
        path = f"obstacles[{i}]."
        _expect(isinstance(entry, dict), f"obstacles[{i}]", "expected an object")
        _check_unknown(entry, ("x", "y", "radius"), path)
        for key in ("x", "y", "radius"):
            _expect(key in entry, f"{path}{key}", "missing")
        r = _number(entry, "radius", 0.0)
        _expect(r > 0.0, f"{path}radius", f"must be > 0, got {r}")
        obstacles.append(StaticDisc(_number(entry, "x", 0.0),
                                    _number(entry, "y", 0.0), r))

    agents_raw = data.get("agents", [])
    _expect(isinstance(agents_raw, list), "agents", "expected a list")
    custom_agents = []
    for i, entry in enumerate(agents_raw):
        path = f"agents[{i}]."
        _expect(isinstance(entry, dict), f"agents[{i}]", "expected an object")
        _check_unknown(entry, ("kind", "x", "y", "goal_x", "goal_y"), path)
        kind = entry.get("kind", "robot")
        _expect(kind in ("robot", "agent"), f"{path}kind",
                f"must be 'robot' or 'agent', got {kind!r}")
        for key in ("x", "y", "goal_x", "goal_y"):
            _expect(key in entry, f"{path}{key}", "missing")
        custom_agents.append(CustomAgent(
            kind, _number(entry, "x", 0.0), _number(entry, "y", 0.0),
            _number(entry, "goal_x", 0.0), _number(entry, "goal_y", 0.0)))
    if family == "custom":
        _expect(len(custom_agents) >= 2, "agents",
                "custom scenarios need at least 2 agents")

    counterpart = _string(data, "counterpart", "agent", ("agent", "robot"))
    orca_noise = data.get("orca_noise", False)
    _expect(isinstance(orca_noise, bool), "orca_noise", "expected a boolean")

    return ScenarioSpec(
        family=family, n=n, p=p, variant=variant, seed=seed,
        T=physical["T"], timeout=physical["timeout"],
        goal_tolerance=physical["goal_tolerance"],
        vo_horizon=physical["vo_horizon"],
        perception_radius=physical["perception_radius"],
        radius=physical["radius"],
        robot_max_speed=physical["robot_max_speed"],
        agent_max_speed=physical["agent_max_speed"],
        opinion=opinion, obstacles=tuple(obstacles), counterpart=counterpart,
        orca_noise=orca_noise, headon_half_gap=physical["headon_half_gap"],
        custom_agents=tuple(custom_agents),
    )


def scenario_to_dict(spec: ScenarioSpec) -> dict[str, Any]:
    """Normalized, fully explicit form; loading it reproduces `spec`."""
    out: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "family": spec.family,
        "n": spec.n,
        "p": spec.p,
        "variant": spec.variant,
        "seed": spec.seed,
        "T": spec.T,
        "timeout": spec.timeout,
        "goal_tolerance": spec.goal_tolerance,
        "vo_horizon": spec.vo_horizon,
        "perception_radius": spec.perception_radius,
        "radius": spec.radius,
        "robot_max_speed": spec.robot_max_speed,
        "agent_max_speed": spec.agent_max_speed,
        "counterpart": spec.counterpart,
        "orca_noise": spec.orca_noise,
        "headon_half_gap": spec.headon_half_gap,
        "attention_mode": spec.opinion.attention_mode,
        "projection_mode": spec.opinion.projection_mode,
    }
    for key in OPINION_KEYS:
        out[key] = getattr(spec.opinion, key)
    out["obstacles"] = [asdict(o) for o in spec.obstacles]
    out["agents"] = [asdict(a) for a in spec.custom_agents]
    return out


def load_config(path: str) -> ScenarioSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from None
    return scenario_from_dict(data)


def save_config(spec: ScenarioSpec, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(scenario_to_dict(spec), fh, indent=2)
        fh.write("\n")


_SWEEP_KEYS = (
    "schema_version", "mode", "families", "variants", "n_values", "p_values",
    "runs", "seed", "parameter", "values", "base",
)


class SweepConfig:
    """Validated sweep description: a scenario grid or a parameter study."""

    def __init__(self, mode: str, seed: int, runs: int,
                 families: list[str], variants: list[str],
                 n_values: list[int], p_values: list[float],
                 parameter: str | None, values: list[float],
                 base: dict[str, Any]):
        self.mode = mode
        self.seed = seed
        self.runs = runs
        self.families = families
        self.variants = variants
        self.n_values = n_values
        self.p_values = p_values
        self.parameter = parameter
        self.values = values
        self.base = base


def sweep_from_dict(data: dict[str, Any]) -> SweepConfig:
    _expect(isinstance(data, dict), "<root>", "sweep config must be a JSON object")
    _check_unknown(data, _SWEEP_KEYS)
    version = _integer(data, "schema_version", SCHEMA_VERSION)
    _expect(version == SCHEMA_VERSION, "schema_version",
            f"unsupported version {version}, expected {SCHEMA_VERSION}")
    mode = _string(data, "mode", "grid", ("grid", "param_study"))
    seed = _integer(data, "seed", 0)
    runs = _integer(data, "runs", 1)
    _expect(runs >= 1, "runs", f"must be >= 1, got {runs}")
    base = data.get("base", {})
    _expect(isinstance(base, dict), "base", "expected an object")
    for key in ("family", "n", "p", "variant", "seed"):
        _expect(key not in base, f"base.{key}", "set by the sweep grid, not the base")

    families = data.get("families", ["circle"])
    variants = data.get("variants", ["AVOCADO_1"])
    n_values = data.get("n_values", [10])
    p_values = data.get("p_values", [1.0])
    parameter = data.get("parameter")
    values = data.get("values", [])

    if mode == "grid":
        _expect(isinstance(families, list) and families, "families", "non-empty list required")
        for f in families:
            _expect(f in FAMILIES and f != "custom", "families",
                    f"each entry must be a generator family, got {f!r}")
        _expect(isinstance(variants, list) and variants, "variants", "non-empty list required")
        for v in variants:
            _expect(v in VARIANTS, "variants", f"unknown variant {v!r}")
        _expect(isinstance(n_values, list) and n_values, "n_values", "non-empty list required")
        for n in n_values:
            _expect(isinstance(n, int) and n >= 2, "n_values", f"entries must be ints >= 2, got {n!r}")
        _expect(isinstance(p_values, list) and p_values, "p_values", "non-empty list required")
        for p in p_values:
            _expect(isinstance(p, (int, float)) and 0.0 < p <= 1.0, "p_values",
                    f"entries must be in (0, 1], got {p!r}")
    else:
        _expect(parameter in SWEEPABLE_PARAMETERS, "parameter",
                f"must be one of {SWEEPABLE_PARAMETERS}, got {parameter!r}")
        _expect(isinstance(values, list) and values, "values", "non-empty list required")
        for v in values:
            _expect(isinstance(v, (int, float)), "values", f"entries must be numbers, got {v!r}")

    return SweepConfig(mode=mode, seed=seed, runs=runs, families=families,
                       variants=variants, n_values=n_values, p_values=p_values,
                       parameter=parameter, values=[float(v) for v in values],
                       base=base)


def load_sweep_config(path: str) -> SweepConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from None
    return sweep_from_dict(data)


def cell_spec(sweep: SweepConfig, family: str, variant: str, n: int, p: float,
              overrides: dict[str, Any] | None = None) -> ScenarioSpec:
    """Scenario spec for one sweep cell, derived from the sweep base."""
    data = dict(sweep.base)
    data["family"] = family
    data["variant"] = variant
    data["n"] = n
    data["p"] = p
    data["seed"] = sweep.seed
    if overrides:
        data.update(overrides)
    return scenario_from_dict(data)


def apply_parameter(spec: ScenarioSpec, parameter: str, value: float) -> ScenarioSpec:
    if parameter not in SWEEPABLE_PARAMETERS:
        raise ConfigError("parameter", f"cannot sweep {parameter!r}")
    return replace(spec, opinion=replace(spec.opinion, **{parameter: value}))


__all__ = [
    "SCHEMA_VERSION",
    "OPINION_KEYS",
    "SWEEPABLE_PARAMETERS",
    "ConfigError",
    "scenario_from_dict",
    "scenario_to_dict",
    "load_config",
    "save_config",
    "SweepConfig",
    "sweep_from_dict",
    "load_sweep_config",
    "cell_spec",
    "apply_parameter",
]
