"""Command-line interface.

Subcommands: analyze (equilibria + stability), simulate (trajectory CSV),
montecarlo (extinction-probability estimate), disagreement (criterion
comparison). Every command writes its data files plus a run_manifest.json
with the tool version, the fully resolved config echo, and per-output
checksums; data files are deterministic (timestamps live only in the
manifest).

Exit codes: 0 success, 2 config/validation error, 3 integration failure,
4 trial failures present.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time
from pathlib import Path
from typing import Any

from . import __version__
from .backend import BACKEND_NAME
from .config import (
    ConfigError,
    criterion_to_json,
    experiment_to_json,
    integrator_to_json,
    params_to_json,
    parse_experiment,
    parse_integrator,
    parse_params,
    parse_simulation,
    simulation_to_json,
    state_to_json,
)
from .integrate import IntegrationError, IntegratorConfig, Method, integrate
from .model import (
    Parameters,
    State,
    characteristic_coefficients_persistence,
    classify,
)
from .montecarlo import criterion_disagreement, estimate
from .sampling import PARAMETER_RANGES, PRNG_IDENTITY, RejectionBudgetExceeded

_PARAM_KEYS = ("lambda", "mu", "k", "delta", "p", "c")

# Presets bake in reference parameter values so standard runs need no
# hand-typed constants.
PRESETS: dict[str, dict[str, float]] = {
    "table1-means": {name: PARAMETER_RANGES[name][1] for name in _PARAM_KEYS},
}


def _load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None


def _write_json(path: Path, doc: Any) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _fmt(value: float) -> str:
    """Full round-trip float formatting for CSV fields."""
    return repr(float(value))


class _Run:
    """Collects output files for one command and writes the manifest last."""

    def __init__(self, args: argparse.Namespace, command: str):
        self.out_dir = Path(args.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.start = time.perf_counter()
        self.outputs: list[Path] = []

    def path(self, name: str) -> Path:
        # Absolute paths (e.g. --per-trial /tmp/x.csv) are honored as-is.
        candidate = Path(name)
        return candidate if candidate.is_absolute() else self.out_dir / name

    def write_json(self, name: str, doc: Any) -> Path:
        target = self.path(name)
        _write_json(target, doc)
        self.outputs.append(target)
        return target

    def write_text(self, name: str, text: str) -> Path:
        target = self.path(name)
        target.write_text(text, encoding="utf-8")
        self.outputs.append(target)
        return target

    def finish(
        self,
        config_echo: Any,
        master_seed: int | None,
        options: dict[str, Any] | None = None,
    ) -> None:
        manifest = {
            "tool": "virosim",
            "version": __version__,
            "backend": BACKEND_NAME,
            "command": self.command,
            "config": config_echo,
            "options": options or {},
            "master_seed": master_seed,
            "prng": PRNG_IDENTITY,
            "duration_seconds": time.perf_counter() - self.start,
            "outputs": {str(p.name): _sha256(p) for p in self.outputs},
        }
        _write_json(self.out_dir / "run_manifest.json", manifest)
        for target in self.outputs:
            print(f"wrote {target}")
        print(f"wrote {self.out_dir / 'run_manifest.json'}")


# -- parameter/flag resolution ----------------------------------------------


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, metavar="RATE",
                        help="target-cell production rate, cells/(uL day)")
    parser.add_argument("--mu", type=float, metavar="RATE",
                        help="target-cell death rate, 1/day")
    parser.add_argument("--k", type=float, metavar="RATE",
                        help="infection rate constant, uL/(copies day)")
    parser.add_argument("--delta", type=float, metavar="RATE",
                        help="infected-cell death rate, 1/day")
    parser.add_argument("--p", type=float, metavar="RATE",
                        help="virion production rate, 1/day")
    parser.add_argument("--c", type=float, metavar="RATE",
                        help="virion clearance rate, 1/day")


def _flag_overrides(args: argparse.Namespace) -> dict[str, float]:
    pairs = (
        ("lambda", args.lam), ("mu", args.mu), ("k", args.k),
        ("delta", args.delta), ("p", args.p), ("c", args.c),
    )
    return {name: value for name, value in pairs if value is not None}


def _params_from(base: dict[str, float], args: argparse.Namespace) -> Parameters:
    merged = {**base, **_flag_overrides(args)}
    missing = [name for name in _PARAM_KEYS if name not in merged]
    if missing:
        raise ConfigError(
            f"missing parameter(s) {missing}; pass flags, --preset, or --config"
        )
    return Parameters(
        lam=merged["lambda"], mu=merged["mu"], k=merged["k"],
        delta=merged["delta"], p=merged["p"], c=merged["c"],
    )


def _preset_values(args: argparse.Namespace) -> dict[str, float]:
    if args.preset is None:
        return {}
    return dict(PRESETS[args.preset])


def _override_integrator(
    base: IntegratorConfig, args: argparse.Namespace
) -> IntegratorConfig:
    changes: dict[str, Any] = {}
    if args.method is not None:
        changes["method"] = Method(args.method)
    for field in ("dt", "rel_tol", "abs_tol", "max_steps", "record_stride"):
        value = getattr(args, field)
        if value is not None:
            changes[field] = value
    return dataclasses.replace(base, **changes) if changes else base


# -- subcommands -------------------------------------------------------------


def _complex_json(values: tuple[complex, ...]) -> list[dict[str, float]]:
    return [{"real": z.real, "imag": z.imag} for z in values]


def cmd_analyze(args: argparse.Namespace) -> int:
    if args.config and args.preset:
        raise ConfigError("use either --config or --preset, not both")
    base: dict[str, float] = _preset_values(args)
    if args.config:
        doc = _load_json(args.config)
        if not isinstance(doc, dict) or set(doc) != {"params"}:
            raise ConfigError("analyze config must be an object with exactly 'params'")
        base = params_to_json(parse_params(doc["params"]))
    params = _params_from(base, args)

    run = _Run(args, "analyze")
    report = classify(params)
    cubic = characteristic_coefficients_persistence(params)
    document = {
        "params": params_to_json(params),
        "r": report.r,
        "stable_equilibrium": report.stable_equilibrium.value,
        "extinction_equilibrium": state_to_json(report.extinction_eq),
        "persistence_equilibrium": state_to_json(report.persistence_eq),
        "persistence_equilibrium_admissible": report.persistence_eq_admissible,
        "eigenvalues_at_extinction": _complex_json(report.eigenvalues_at_extinction),
        "eigenvalues_at_persistence": _complex_json(report.eigenvalues_at_persistence),
        "characteristic_coefficients_persistence": {
            "a1": cubic.a1, "a2": cubic.a2, "a3": cubic.a3,
        },
    }
    run.write_json("analysis.json", document)
    run.finish(config_echo={"params": params_to_json(params)}, master_seed=None)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.config and args.preset:
        raise ConfigError("use either --config or --preset, not both")
    integrator = IntegratorConfig()
    if args.config:
        params, init, t_end, integrator = parse_simulation(_load_json(args.config))
        base = params_to_json(params)
        init_values = state_to_json(init)
    else:
        base = _preset_values(args)
        init_values = {"infected": 0.0}
        t_end = None
    params = _params_from(base, args)

    if args.t0 is not None:
        init_values["t_cells"] = args.t0
    if args.i0 is not None:
        init_values["infected"] = args.i0
    if args.v0 is not None:
        init_values["virions"] = args.v0
    missing = [k for k in ("t_cells", "virions") if k not in init_values]
    if missing:
        flags = {"t_cells": "--t0", "virions": "--v0"}
        raise ConfigError(
            f"missing initial condition(s): {[flags[m] for m in missing]}"
        )
    init = State(**init_values)

    if args.t_end is not None:
        t_end = args.t_end
    if t_end is None:
        raise ConfigError("missing --t-end")
    integrator = _override_integrator(integrator, args)

    run = _Run(args, "simulate")
    trajectory = integrate(params, init, t_end, integrator)
    lines = ["t,T,I,V"]
    for index in range(len(trajectory)):
        t = trajectory.times[index]
        row = trajectory.states[index]
        lines.append(f"{_fmt(t)},{_fmt(row[0])},{_fmt(row[1])},{_fmt(row[2])}")
    run.write_text("trajectory.csv", "\n".join(lines) + "\n")
    run.finish(
        config_echo=simulation_to_json(params, init, t_end, integrator),
        master_seed=None,
    )
    return 0


def _estimate_document(est) -> dict[str, Any]:
    return {
        "scenario": est.scenario,
        "criterion": criterion_to_json(est.criterion),
        "trials": est.n_trials,
        "failed": est.n_failed,
        "extinct": est.n_extinct,
        "persist": est.n_persist,
        "p_extinct": est.p_extinct,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "master_seed": est.master_seed,
        "prng": est.prng,
    }


def _experiment_from_args(args: argparse.Namespace):
    config = parse_experiment(_load_json(args.config))
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError(f"--seed must be a uint64, got {args.seed}")
        config = dataclasses.replace(config, master_seed=args.seed)
    return config


def cmd_montecarlo(args: argparse.Namespace) -> int:
    config = _experiment_from_args(args)
    run = _Run(args, "montecarlo")
    est = estimate(
        config, workers=args.workers, keep_outcomes=args.per_trial is not None
    )
    run.write_json("estimate.json", _estimate_document(est))

    if args.per_cell:
        if est.per_cell is None:
            raise ConfigError("--per-cell requires a grid init in the config")
        lines = ["T0,V0,trials,extinct,p_extinct,ci_low,ci_high"]
        for cell in est.per_cell:
            lines.append(
                f"{_fmt(cell.t0)},{_fmt(cell.v0)},{cell.n_trials},{cell.n_extinct},"
                f"{_fmt(cell.p_extinct)},{_fmt(cell.ci_low)},{_fmt(cell.ci_high)}"
            )
        run.write_text("sweep.csv", "\n".join(lines) + "\n")

    if args.per_trial is not None:
        lines = ["trial_index,R,v_at_horizon,persisted"]
        assert est.outcomes is not None
        for outcome in est.outcomes:
            v = "" if outcome.v_at_horizon is None else _fmt(outcome.v_at_horizon)
            flag = "true" if outcome.persisted else "false"
            lines.append(f"{outcome.trial_index},{_fmt(outcome.r)},{v},{flag}")
        run.write_text(args.per_trial, "\n".join(lines) + "\n")

    run.finish(
        config_echo=experiment_to_json(config),
        master_seed=config.master_seed,
        options={
            "workers": args.workers,
            "per_cell": args.per_cell,
            "per_trial": args.per_trial,
            "dropped_trials": est.dropped_trials,
        },
    )
    if est.n_failed > 0:
        print(f"{est.n_failed} trial(s) failed", file=sys.stderr)
        return 4
    return 0


def _outcome_json(outcome) -> dict[str, Any]:
    return {
        "trial_index": outcome.trial_index,
        "r": outcome.r,
        "v_at_horizon": outcome.v_at_horizon,
        "params": params_to_json(outcome.params),
    }


def cmd_disagreement(args: argparse.Namespace) -> int:
    config = _experiment_from_args(args)
    run = _Run(args, "disagreement")
    summary = criterion_disagreement(config, workers=args.workers)
    document = {
        "scenario": summary.scenario,
        "criterion": criterion_to_json(summary.criterion),
        "trials": summary.n_trials,
        "failed": summary.n_failed,
        "both_persist": summary.n_both_persist,
        "both_extinct": summary.n_both_extinct,
        "asymptotic_only": {
            "count": summary.n_asymptotic_only,
            "exemplars": [_outcome_json(o) for o in summary.exemplars_asymptotic_only],
        },
        "finite_only": {
            "count": summary.n_finite_only,
            "exemplars": [_outcome_json(o) for o in summary.exemplars_finite_only],
        },
        "p_extinct_asymptotic": summary.p_extinct_asymptotic,
        "p_extinct_finite": summary.p_extinct_finite,
        "master_seed": summary.master_seed,
        "prng": summary.prng,
    }
    run.write_json("disagreement.json", document)
    run.finish(
        config_echo=experiment_to_json(config),
        master_seed=config.master_seed,
        options={"workers": args.workers, "dropped_trials": summary.dropped_trials},
    )
    if summary.n_failed > 0:
        print(f"{summary.n_failed} trial(s) failed", file=sys.stderr)
        return 4
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="virosim",
        description=(
            "Three-compartment in-host viral dynamics: stability analysis, "
            "trajectory integration, and Monte-Carlo persistence estimation."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master seed override (randomized commands)")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: machine parallelism)")
    common.add_argument("--out-dir", default=".",
                        help="directory for output files (default: current)")

    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser(
        "analyze", parents=[common],
        help="equilibria, eigenvalues, and stability classification",
    )
    analyze.add_argument("--config", help="JSON file: {\"params\": {...}}")
    analyze.add_argument("--preset", choices=sorted(PRESETS),
                         help="named parameter set")
    _add_param_flags(analyze)
    analyze.set_defaults(func=cmd_analyze)

    simulate = sub.add_parser(
        "simulate", parents=[common], help="integrate one trajectory to CSV"
    )
    simulate.add_argument("--config",
                          help="JSON file: {params, init, t_end, integrator}")
    simulate.add_argument("--preset", choices=sorted(PRESETS),
                          help="named parameter set")
    _add_param_flags(simulate)
    simulate.add_argument("--t0", type=float, help="initial T, cells/uL")
    simulate.add_argument("--i0", type=float, help="initial I, cells/uL (default 0)")
    simulate.add_argument("--v0", type=float, help="initial V, copies/uL")
    simulate.add_argument("--t-end", dest="t_end", type=float,
                          help="end time, days")
    simulate.add_argument("--method", choices=[m.value for m in Method])
    simulate.add_argument("--dt", type=float, help="fixed step size, days")
    simulate.add_argument("--rel-tol", dest="rel_tol", type=float)
    simulate.add_argument("--abs-tol", dest="abs_tol", type=float)
    simulate.add_argument("--max-steps", dest="max_steps", type=int)
    simulate.add_argument("--record-stride", dest="record_stride", type=int)
    simulate.set_defaults(func=cmd_simulate)

    montecarlo = sub.add_parser(
        "montecarlo", parents=[common],
        help="randomized extinction-probability estimate",
    )
    montecarlo.add_argument("--config", required=True,
                            help="experiment config JSON file")
    montecarlo.add_argument("--per-cell", action="store_true",
                            help="also write per-initial-condition sweep.csv")
    montecarlo.add_argument("--per-trial", metavar="CSV",
                            help="also write a per-trial log to this file")
    montecarlo.set_defaults(func=cmd_montecarlo)

    disagreement = sub.add_parser(
        "disagreement", parents=[common],
        help="trials where the asymptotic and finite-time criteria disagree",
    )
    disagreement.add_argument("--config", required=True,
                              help="experiment config JSON file")
    disagreement.set_defaults(func=cmd_disagreement)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IntegrationError as exc:
        print(f"integration failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except RejectionBudgetExceeded as exc:
        print(f"error: degenerate sampling window: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
