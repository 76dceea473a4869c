"""JSON config schemas for the command-line tool.

Parsing is strict: unknown keys are a hard error (to keep a misspelled
"threshold" from silently using a default), every number is type-checked,
and errors carry the path of the offending field. Serializers emit the fully
resolved form, and parse(serialize(x)) == x for every config type, which is
what makes manifest config echoes re-runnable.
"""
from __future__ import annotations

from typing import Any, Mapping

from .integrate import IntegratorConfig, Method
from .model import Parameters, State
from .montecarlo import (
    AsymptoticR,
    ExperimentConfig,
    FiniteTime,
    InitialConditionGrid,
    PersistenceCriterion,
)
from .sampling import (
    Constant,
    Distribution,
    LambdaRule,
    Scenario,
    Triangular,
    TruncatedNormal,
    Uniform,
    truncated_normal_scenario,
    uniform_triangular_scenario,
)

__all__ = [
    "ConfigError",
    "parse_params",
    "params_to_json",
    "parse_state",
    "state_to_json",
    "parse_integrator",
    "integrator_to_json",
    "parse_scenario",
    "scenario_to_json",
    "parse_criterion",
    "criterion_to_json",
    "parse_experiment",
    "experiment_to_json",
    "parse_simulation",
    "simulation_to_json",
]

_BUILTIN_SCENARIOS = {
    "truncated_normal": truncated_normal_scenario,
    "uniform_triangular": uniform_triangular_scenario,
}

_PARAM_KEYS = ("lambda", "mu", "k", "delta", "p", "c")
_STATE_KEYS = ("t_cells", "infected", "virions")


class ConfigError(ValueError):
    """A config document failed to parse or validate."""


def _mapping(value: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise ConfigError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _check_keys(doc: Mapping[str, Any], allowed: tuple[str, ...], path: str) -> None:
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {unknown}; allowed: {list(allowed)}")


def _number(doc: Mapping[str, Any], key: str, path: str, default: Any = ...) -> float:
    if key not in doc:
        if default is ...:
            raise ConfigError(f"{path}: missing required key '{key}'")
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {value!r}")
    return float(value)


def _integer(doc: Mapping[str, Any], key: str, path: str, default: Any = ...) -> int:
    if key not in doc:
        if default is ...:
            raise ConfigError(f"{path}: missing required key '{key}'")
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {value!r}")
    return value


def _string(doc: Mapping[str, Any], key: str, path: str) -> str:
    value = doc.get(key)
    if not isinstance(value, str):
        raise ConfigError(f"{path}.{key}: expected a string, got {value!r}")
    return value


def _wrap(path: str, build):
    try:
        return build()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# -- parameters and states --------------------------------------------------


def parse_params(doc: Any, path: str = "params") -> Parameters:
    doc = _mapping(doc, path)
    _check_keys(doc, _PARAM_KEYS, path)
    values = {key: _number(doc, key, path) for key in _PARAM_KEYS}
    return _wrap(
        path,
        lambda: Parameters(
            lam=values["lambda"], mu=values["mu"], k=values["k"],
            delta=values["delta"], p=values["p"], c=values["c"],
        ),
    )


def params_to_json(params: Parameters) -> dict[str, float]:
    return {
        "lambda": params.lam, "mu": params.mu, "k": params.k,
        "delta": params.delta, "p": params.p, "c": params.c,
    }


def parse_state(doc: Any, path: str = "init") -> State:
    doc = _mapping(doc, path)
    _check_keys(doc, _STATE_KEYS, path)
    values = {key: _number(doc, key, path) for key in _STATE_KEYS}
    return _wrap(path, lambda: State(**values))


def state_to_json(state: State) -> dict[str, float]:
    return {
        "t_cells": state.t_cells,
        "infected": state.infected,
        "virions": state.virions,
    }


# -- integrator -------------------------------------------------------------


def parse_integrator(doc: Any, path: str = "integrator") -> IntegratorConfig:
    if doc is None:
        return IntegratorConfig()
    doc = _mapping(doc, path)
    _check_keys(
        doc,
        ("method", "dt", "rel_tol", "abs_tol", "max_steps", "record_stride"),
        path,
    )
    defaults = IntegratorConfig()
    method = defaults.method
    if "method" in doc:
        name = _string(doc, "method", path)
        try:
            method = Method(name)
        except ValueError:
            choices = [m.value for m in Method]
            raise ConfigError(f"{path}.method: {name!r} is not one of {choices}") from None
    return _wrap(
        path,
        lambda: IntegratorConfig(
            method=method,
            dt=_number(doc, "dt", path, defaults.dt),
            rel_tol=_number(doc, "rel_tol", path, defaults.rel_tol),
            abs_tol=_number(doc, "abs_tol", path, defaults.abs_tol),
            max_steps=_integer(doc, "max_steps", path, defaults.max_steps),
            record_stride=_integer(doc, "record_stride", path, defaults.record_stride),
        ),
    )


def integrator_to_json(config: IntegratorConfig) -> dict[str, Any]:
    return {
        "method": config.method.value,
        "dt": config.dt,
        "rel_tol": config.rel_tol,
        "abs_tol": config.abs_tol,
        "max_steps": config.max_steps,
        "record_stride": config.record_stride,
    }


# -- distributions and scenarios --------------------------------------------


def parse_distribution(doc: Any, path: str) -> Distribution:
    doc = _mapping(doc, path)
    kind = _string(doc, "type", path)
    if kind == "constant":
        _check_keys(doc, ("type", "value"), path)
        return _wrap(path, lambda: Constant(value=_number(doc, "value", path)))
    if kind == "uniform":
        _check_keys(doc, ("type", "lo", "hi"), path)
        return _wrap(
            path, lambda: Uniform(lo=_number(doc, "lo", path), hi=_number(doc, "hi", path))
        )
    if kind == "triangular":
        _check_keys(doc, ("type", "lo", "mode", "hi"), path)
        return _wrap(
            path,
            lambda: Triangular(
                lo=_number(doc, "lo", path),
                mode=_number(doc, "mode", path),
                hi=_number(doc, "hi", path),
            ),
        )
    if kind == "truncated_normal":
        _check_keys(doc, ("type", "mean", "sd", "lo", "hi"), path)
        return _wrap(
            path,
            lambda: TruncatedNormal(
                mean=_number(doc, "mean", path),
                sd=_number(doc, "sd", path),
                lo=_number(doc, "lo", path),
                hi=_number(doc, "hi", path),
            ),
        )
    raise ConfigError(
        f"{path}.type: {kind!r} is not one of "
        "['constant', 'uniform', 'triangular', 'truncated_normal']"
    )


def distribution_to_json(dist: Distribution) -> dict[str, Any]:
    if isinstance(dist, Constant):
        return {"type": "constant", "value": dist.value}
    if isinstance(dist, Uniform):
        return {"type": "uniform", "lo": dist.lo, "hi": dist.hi}
    if isinstance(dist, Triangular):
        return {"type": "triangular", "lo": dist.lo, "mode": dist.mode, "hi": dist.hi}
    if isinstance(dist, TruncatedNormal):
        return {
            "type": "truncated_normal",
            "mean": dist.mean, "sd": dist.sd, "lo": dist.lo, "hi": dist.hi,
        }
    raise TypeError(f"unknown distribution type: {type(dist).__name__}")


def parse_scenario(doc: Any, path: str = "scenario") -> Scenario:
    """A builtin name, or an object; objects may start from a builtin 'base'.

    Object keys: base (builtin name), name, k, p, mu, delta, c, lambda,
    lambda_rule. With a base, every other key is an override; without one,
    all distributions and the rule are required.
    """
    if isinstance(doc, str):
        if doc not in _BUILTIN_SCENARIOS:
            raise ConfigError(
                f"{path}: unknown scenario {doc!r}; "
                f"builtins: {sorted(_BUILTIN_SCENARIOS)}"
            )
        return _BUILTIN_SCENARIOS[doc]()
    doc = _mapping(doc, path)
    allowed = ("base", "name", "k", "p", "mu", "delta", "c", "lambda", "lambda_rule")
    _check_keys(doc, allowed, path)

    base: Scenario | None = None
    if "base" in doc:
        base_name = _string(doc, "base", path)
        if base_name not in _BUILTIN_SCENARIOS:
            raise ConfigError(
                f"{path}.base: unknown scenario {base_name!r}; "
                f"builtins: {sorted(_BUILTIN_SCENARIOS)}"
            )
        base = _BUILTIN_SCENARIOS[base_name]()

    def dist_field(key: str, fallback: Distribution | None) -> Distribution:
        if key in doc:
            return parse_distribution(doc[key], f"{path}.{key}")
        if fallback is None:
            raise ConfigError(f"{path}: missing required key '{key}' (no base given)")
        return fallback

    rule = base.lambda_rule if base is not None else None
    if "lambda_rule" in doc:
        rule_name = _string(doc, "lambda_rule", path)
        try:
            rule = LambdaRule(rule_name)
        except ValueError:
            choices = [r.value for r in LambdaRule]
            raise ConfigError(
                f"{path}.lambda_rule: {rule_name!r} is not one of {choices}"
            ) from None
    if rule is None:
        raise ConfigError(f"{path}: missing required key 'lambda_rule' (no base given)")

    lam: Distribution | None
    if "lambda" in doc:
        lam = (
            None
            if doc["lambda"] is None
            else parse_distribution(doc["lambda"], f"{path}.lambda")
        )
    elif base is not None and rule is base.lambda_rule:
        lam = base.lam
    elif rule is LambdaRule.TEN_TIMES_MU:
        lam = None
    else:
        raise ConfigError(f"{path}: independent lambda rule requires a 'lambda' entry")

    if "name" in doc:
        name = _string(doc, "name", path)
    elif base is not None:
        name = base.name if len(doc) == 1 else f"{base.name}_custom"
    else:
        raise ConfigError(f"{path}: missing required key 'name' (no base given)")

    return _wrap(
        path,
        lambda: Scenario(
            name=name,
            k=dist_field("k", base.k if base else None),
            p=dist_field("p", base.p if base else None),
            mu=dist_field("mu", base.mu if base else None),
            delta=dist_field("delta", base.delta if base else None),
            c=dist_field("c", base.c if base else None),
            lambda_rule=rule,
            lam=lam,
        ),
    )


def scenario_to_json(scenario: Scenario) -> dict[str, Any]:
    return {
        "name": scenario.name,
        "k": distribution_to_json(scenario.k),
        "p": distribution_to_json(scenario.p),
        "mu": distribution_to_json(scenario.mu),
        "delta": distribution_to_json(scenario.delta),
        "c": distribution_to_json(scenario.c),
        "lambda_rule": scenario.lambda_rule.value,
        "lambda": (
            None if scenario.lam is None else distribution_to_json(scenario.lam)
        ),
    }


# -- criteria ----------------------------------------------------------------


def parse_criterion(doc: Any, path: str = "criterion") -> PersistenceCriterion:
    doc = _mapping(doc, path)
    kind = _string(doc, "type", path)
    if kind == "asymptotic_r":
        _check_keys(doc, ("type", "horizon_days", "threshold"), path)
        for key in ("horizon_days", "threshold"):
            if doc.get(key) is not None:
                raise ConfigError(f"{path}.{key}: must be null for asymptotic_r")
        return AsymptoticR()
    if kind == "finite_time":
        _check_keys(doc, ("type", "horizon_days", "threshold"), path)
        defaults = FiniteTime()
        return _wrap(
            path,
            lambda: FiniteTime(
                horizon=_number(doc, "horizon_days", path, defaults.horizon),
                threshold=_number(doc, "threshold", path, defaults.threshold),
            ),
        )
    raise ConfigError(
        f"{path}.type: {kind!r} is not one of ['asymptotic_r', 'finite_time']"
    )


def criterion_to_json(criterion: PersistenceCriterion) -> dict[str, Any]:
    if isinstance(criterion, AsymptoticR):
        return {"type": "asymptotic_r", "horizon_days": None, "threshold": None}
    return {
        "type": "finite_time",
        "horizon_days": criterion.horizon,
        "threshold": criterion.threshold,
    }


# -- initial conditions ------------------------------------------------------


def _parse_grid(doc: Any, path: str) -> InitialConditionGrid:
    if doc == "default":
        return InitialConditionGrid.default()
    doc = _mapping(doc, path)
    _check_keys(doc, ("t0_values", "v0_values", "i0"), path)

    def axis(key: str) -> tuple[float, ...]:
        values = doc.get(key)
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{path}.{key}: expected a non-empty array")
        out = []
        for index, value in enumerate(values):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{path}.{key}[{index}]: expected a number, got {value!r}")
            out.append(float(value))
        return tuple(out)

    return _wrap(
        path,
        lambda: InitialConditionGrid(
            t0_values=axis("t0_values"),
            v0_values=axis("v0_values"),
            i0=_number(doc, "i0", path, 0.0),
        ),
    )


def parse_init(doc: Any, path: str = "init") -> State | InitialConditionGrid | None:
    if doc is None:
        return None
    if isinstance(doc, Mapping) and "grid" in doc:
        _check_keys(doc, ("grid",), path)
        return _parse_grid(doc["grid"], f"{path}.grid")
    return parse_state(doc, path)


def init_to_json(init: State | InitialConditionGrid | None) -> Any:
    if init is None:
        return None
    if isinstance(init, InitialConditionGrid):
        return {
            "grid": {
                "t0_values": list(init.t0_values),
                "v0_values": list(init.v0_values),
                "i0": init.i0,
            }
        }
    return state_to_json(init)


# -- top-level documents -----------------------------------------------------


def parse_experiment(doc: Any, path: str = "config") -> ExperimentConfig:
    """Experiment config document for montecarlo/disagreement runs."""
    doc = _mapping(doc, path)
    _check_keys(
        doc,
        ("scenario", "criterion", "trials", "master_seed", "init", "integrator"),
        path,
    )
    for key in ("scenario", "criterion", "trials", "master_seed"):
        if key not in doc:
            raise ConfigError(f"{path}: missing required key '{key}'")
    return _wrap(
        path,
        lambda: ExperimentConfig(
            scenario=parse_scenario(doc["scenario"], f"{path}.scenario"),
            criterion=parse_criterion(doc["criterion"], f"{path}.criterion"),
            trials=_integer(doc, "trials", path),
            master_seed=_integer(doc, "master_seed", path),
            init=parse_init(doc.get("init"), f"{path}.init"),
            integrator=parse_integrator(doc.get("integrator"), f"{path}.integrator"),
        ),
    )


def experiment_to_json(config: ExperimentConfig) -> dict[str, Any]:
    return {
        "scenario": scenario_to_json(config.scenario),
        "criterion": criterion_to_json(config.criterion),
        "trials": config.trials,
        "master_seed": config.master_seed,
        "init": init_to_json(config.init),
        "integrator": integrator_to_json(config.integrator),
    }


def parse_simulation(
    doc: Any, path: str = "config"
) -> tuple[Parameters, State, float, IntegratorConfig]:
    """Simulation config document: params, init, t_end, integrator."""
    doc = _mapping(doc, path)
    _check_keys(doc, ("params", "init", "t_end", "integrator"), path)
    for key in ("params", "init", "t_end"):
        if key not in doc:
            raise ConfigError(f"{path}: missing required key '{key}'")
    return (
        parse_params(doc["params"], f"{path}.params"),
        parse_state(doc["init"], f"{path}.init"),
        _number(doc, "t_end", path),
        parse_integrator(doc.get("integrator"), f"{path}.integrator"),
    )


def simulation_to_json(
    params: Parameters, init: State, t_end: float, integrator: IntegratorConfig
) -> dict[str, Any]:
    return {
        "params": params_to_json(params),
        "init": state_to_json(init),
        "t_end": t_end,
        "integrator": integrator_to_json(integrator),
    }
