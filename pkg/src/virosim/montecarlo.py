"""Randomized persistence/extinction experiments.

Each trial draws a parameter set from a Scenario and classifies the infection
as persisting or going extinct under one of two criteria: the sign of R - 1
(asymptotic, no ODE solve) or the viral load at a finite horizon versus a
threshold. Trials are aggregated into extinction-probability estimates with
Wilson 95% confidence intervals, optionally broken down over a grid of
initial conditions.

Determinism contract: trial i of a run uses SeedSpec(master_seed, i), and all
reduction is over integer counts keyed by cell index, so results are
identical for any worker count.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Union

from .integrate import IntegrationError, IntegratorConfig, state_at
from .model import Parameters, State, reproduction_number
from .sampling import PRNG_IDENTITY, Scenario, SeedSpec, sample_parameters

__all__ = [
    "AsymptoticR",
    "FiniteTime",
    "PersistenceCriterion",
    "InitialConditionGrid",
    "ExperimentConfig",
    "TrialOutcome",
    "FailureRecord",
    "IntegrationFailed",
    "CellEstimate",
    "AxisMarginal",
    "PersistenceEstimate",
    "DisagreementSummary",
    "wilson_interval",
    "run_trial",
    "estimate",
    "ic_sweep",
    "criterion_disagreement",
]

# z for a two-sided 95% interval.
_WILSON_Z = 1.959963984540054

# At most this many failed-trial records are kept verbatim (counts are exact).
_MAX_FAILURE_EXEMPLARS = 10


@dataclass(frozen=True)
class AsymptoticR:
    """Persistence criterion: persist iff R > 1. Never reads the initial state."""


@dataclass(frozen=True)
class FiniteTime:
    """Persistence criterion: persist iff V(horizon) >= threshold (inclusive)."""

    horizon: float = 100.0
    threshold: float = 50.0

    def __post_init__(self) -> None:
        if not (self.horizon > 0.0 and math.isfinite(self.horizon)):
            raise ValueError(f"horizon must be finite and positive, got {self.horizon!r}")
        if not (self.threshold > 0.0 and math.isfinite(self.threshold)):
            raise ValueError(
                f"threshold must be finite and positive, got {self.threshold!r}"
            )


PersistenceCriterion = Union[AsymptoticR, FiniteTime]


@dataclass(frozen=True)
class InitialConditionGrid:
    """Cross product of initial T and V values, with a shared initial I.

    Cells are ordered t0-major: cell j covers t0_values[j // len(v0_values)]
    and v0_values[j % len(v0_values)].
    """

    t0_values: tuple[float, ...]
    v0_values: tuple[float, ...]
    i0: float = 0.0

    def __post_init__(self) -> None:
        if not self.t0_values or not self.v0_values:
            raise ValueError("grid axes must be non-empty")
        for name, values in (("t0_values", self.t0_values), ("v0_values", self.v0_values)):
            for value in values:
                if not (value > 0.0 and math.isfinite(value)):
                    raise ValueError(
                        f"grid {name} entries must be finite and positive, got {value!r}"
                    )
        if not (self.i0 >= 0.0 and math.isfinite(self.i0)):
            raise ValueError(f"grid i0 must be finite and >= 0, got {self.i0!r}")

    @property
    def n_cells(self) -> int:
        return len(self.t0_values) * len(self.v0_values)

    def cell_values(self, cell: int) -> tuple[float, float]:
        """(t0, v0) of the given cell index."""
        return (
            self.t0_values[cell // len(self.v0_values)],
            self.v0_values[cell % len(self.v0_values)],
        )

    def cell_init(self, cell: int) -> State:
        t0, v0 = self.cell_values(cell)
        return State(t_cells=t0, infected=self.i0, virions=v0)

    @staticmethod
    def default() -> InitialConditionGrid:
        """10 T0 values x 5 V0 values, I0 = 0: the standard 50-cell sweep."""
        return InitialConditionGrid(
            t0_values=tuple(float(v) for v in range(100, 1001, 100)),
            v0_values=tuple(float(v) for v in range(100, 501, 100)),
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """One randomized experiment: scenario, criterion, trial count, seed, ICs."""

    scenario: Scenario
    criterion: PersistenceCriterion
    trials: int
    master_seed: int
    init: State | InitialConditionGrid | None = None
    integrator: IntegratorConfig = IntegratorConfig()

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials!r}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must be a uint64, got {self.master_seed!r}")
        if isinstance(self.criterion, FiniteTime) and self.init is None:
            raise ValueError("finite-time criterion requires an initial state or grid")


@dataclass(frozen=True)
class TrialOutcome:
    """Classification of a single trial."""

    trial_index: int
    params: Parameters
    r: float
    v_at_horizon: float | None
    persisted: bool


@dataclass(frozen=True)
class FailureRecord:
    """A trial whose integration failed; counted, never silently dropped."""

    trial_index: int
    kind: str
    message: str
    params: Parameters


class IntegrationFailed(Exception):
    """A trial's ODE solve failed. Wraps the integrator error with context."""

    def __init__(self, trial_index: int, params: Parameters, cause: IntegrationError):
        super().__init__(f"trial {trial_index}: {type(cause).__name__}: {cause}")
        self.trial_index = trial_index
        self.params = params
        self.cause = cause


@dataclass(frozen=True)
class CellEstimate:
    """Extinction estimate restricted to one initial-condition cell."""

    t0: float
    v0: float
    n_trials: int
    n_extinct: int
    n_persist: int
    n_failed: int
    p_extinct: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class AxisMarginal:
    """Average over all cells sharing one axis value.

    ``p_extinct`` is the unweighted mean of the per-cell probabilities;
    the counts are pooled across the same cells for reference.
    """

    value: float
    n_trials: int
    n_extinct: int
    p_extinct: float


@dataclass(frozen=True)
class PersistenceEstimate:
    """Aggregated experiment result.

    ``n_trials`` counts completed (classified) trials, so
    n_extinct + n_persist == n_trials and p_extinct == n_extinct / n_trials;
    failures are reported separately and dropped-remainder trials (grid runs
    whose trial count is not divisible by the cell count) in
    ``dropped_trials``.
    """

    scenario: str
    criterion: PersistenceCriterion
    n_trials: int
    n_failed: int
    n_extinct: int
    n_persist: int
    p_extinct: float
    ci_low: float
    ci_high: float
    master_seed: int
    prng: str
    dropped_trials: int = 0
    per_cell: tuple[CellEstimate, ...] | None = None
    by_t0: tuple[AxisMarginal, ...] | None = None
    by_v0: tuple[AxisMarginal, ...] | None = None
    failures: tuple[FailureRecord, ...] = ()
    outcomes: tuple[TrialOutcome, ...] | None = field(default=None, repr=False)


@dataclass(frozen=True)
class DisagreementSummary:
    """Trials where the asymptotic and finite-time criteria disagree.

    ``n_asymptotic_only`` counts trials persisting only under R > 1 (viral
    load already below threshold at the horizon); ``n_finite_only`` counts
    the reverse direction.
    """

    scenario: str
    criterion: FiniteTime
    n_trials: int
    n_failed: int
    n_both_persist: int
    n_both_extinct: int
    n_asymptotic_only: int
    n_finite_only: int
    exemplars_asymptotic_only: tuple[TrialOutcome, ...]
    exemplars_finite_only: tuple[TrialOutcome, ...]
    master_seed: int
    prng: str
    dropped_trials: int = 0
    failures: tuple[FailureRecord, ...] = ()

    @property
    def p_extinct_asymptotic(self) -> float:
        return (self.n_both_extinct + self.n_finite_only) / self.n_trials

    @property
    def p_extinct_finite(self) -> float:
        return (self.n_both_extinct + self.n_asymptotic_only) / self.n_trials


def wilson_interval(
    successes: int, trials: int, z: float = _WILSON_Z
) -> tuple[float, float]:
    """Wilson score 95% interval for a binomial proportion.

    Clamped to [0, 1]; zero successes give a lower bound of exactly 0.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials!r}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes!r} outside [0, {trials!r}]")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2.0 * trials)) / denom
    half = (
        z
        * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials))
        / denom
    )
    # At the boundary counts the score bound is exactly 0 (or 1); rounding in
    # center - half can leave a ~1e-18 residue, so pin those cases.
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return (low, high)


def run_trial(
    params: Parameters,
    init: State | None,
    criterion: PersistenceCriterion,
    integrator_config: IntegratorConfig = IntegratorConfig(),
    trial_index: int = 0,
) -> TrialOutcome:
    """Classify one parameter draw.

    AsymptoticR computes only R; FiniteTime integrates to the horizon and
    compares V(horizon) >= threshold inclusively.

    Raises:
        IntegrationFailed: the ODE solve failed (FiniteTime only).
    """
    r = reproduction_number(params)
    if isinstance(criterion, AsymptoticR):
        return TrialOutcome(
            trial_index=trial_index, params=params, r=r, v_at_horizon=None,
            persisted=r > 1.0,
        )
    if init is None:
        raise ValueError("finite-time criterion requires an initial state")
    try:
        end = state_at(params, init, criterion.horizon, integrator_config)
    except IntegrationError as exc:
        raise IntegrationFailed(trial_index, params, exc) from exc
    return TrialOutcome(
        trial_index=trial_index, params=params, r=r, v_at_horizon=end.virions,
        persisted=end.virions >= criterion.threshold,
    )


# ---------------------------------------------------------------------------
# Worker plumbing. Blocks are contiguous trial-index ranges; reduction is by
# integer counts per cell plus ordered concatenation of any collected rows,
# so the merged result does not depend on how the range was partitioned.


@dataclass
class _BlockResult:
    extinct: list[int]
    persist: list[int]
    failed: list[int]
    outcomes: list[TrialOutcome]
    asymptotic_only: list[TrialOutcome]
    finite_only: list[TrialOutcome]
    n_both_persist: int
    n_both_extinct: int
    n_asymptotic_only: int
    n_finite_only: int
    failures: list[FailureRecord]


def _run_block(payload) -> _BlockResult:
    config, start, stop, per_cell, mode, exemplar_cap = payload
    grid = config.init if isinstance(config.init, InitialConditionGrid) else None
    n_cells = grid.n_cells if grid is not None else 1
    result = _BlockResult(
        extinct=[0] * n_cells,
        persist=[0] * n_cells,
        failed=[0] * n_cells,
        outcomes=[],
        asymptotic_only=[],
        finite_only=[],
        n_both_persist=0,
        n_both_extinct=0,
        n_asymptotic_only=0,
        n_finite_only=0,
        failures=[],
    )
    for i in range(start, stop):
        cell = i // per_cell if grid is not None else 0
        init = grid.cell_init(cell) if grid is not None else config.init
        params = sample_parameters(config.scenario, SeedSpec(config.master_seed, i))
        try:
            outcome = run_trial(
                params, init, config.criterion, config.integrator, trial_index=i
            )
        except IntegrationFailed as exc:
            result.failed[cell] += 1
            if len(result.failures) < _MAX_FAILURE_EXEMPLARS:
                result.failures.append(
                    FailureRecord(
                        trial_index=i,
                        kind=type(exc.cause).__name__,
                        message=str(exc.cause),
                        params=params,
                    )
                )
            continue
        if outcome.persisted:
            result.persist[cell] += 1
        else:
            result.extinct[cell] += 1
        if mode == "outcomes":
            result.outcomes.append(outcome)
        elif mode == "disagreement":
            asymptotic = outcome.r > 1.0
            if asymptotic and outcome.persisted:
                result.n_both_persist += 1
            elif not asymptotic and not outcome.persisted:
                result.n_both_extinct += 1
            elif asymptotic:
                result.n_asymptotic_only += 1
                if len(result.asymptotic_only) < exemplar_cap:
                    result.asymptotic_only.append(outcome)
            else:
                result.n_finite_only += 1
                if len(result.finite_only) < exemplar_cap:
                    result.finite_only.append(outcome)
    return result


def _resolve_layout(config: ExperimentConfig) -> tuple[int, int, int, int]:
    """(used_trials, trials_per_cell, n_cells, dropped)."""
    if isinstance(config.init, InitialConditionGrid):
        n_cells = config.init.n_cells
        per_cell = config.trials // n_cells
        if per_cell == 0:
            raise ValueError(
                f"trials={config.trials} is fewer than the {n_cells}-cell grid"
            )
        used = per_cell * n_cells
        return used, per_cell, n_cells, config.trials - used
    return config.trials, config.trials, 1, 0


def _run_blocks(
    config: ExperimentConfig,
    used: int,
    per_cell: int,
    workers: int | None,
    mode: str,
    exemplar_cap: int = 0,
) -> list[_BlockResult]:
    if workers is None:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers!r}")

    def payload(a: int, b: int):
        return (config, a, b, per_cell, mode, exemplar_cap)

    if workers == 1:
        return [_run_block(payload(0, used))]
    chunk = max(1, -(-used // (workers * 4)))
    payloads = [payload(a, min(a + chunk, used)) for a in range(0, used, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_block, payloads))


def _merge_counts(blocks: list[_BlockResult], n_cells: int):
    extinct = [0] * n_cells
    persist = [0] * n_cells
    failed = [0] * n_cells
    for block in blocks:
        for j in range(n_cells):
            extinct[j] += block.extinct[j]
            persist[j] += block.persist[j]
            failed[j] += block.failed[j]
    failures: list[FailureRecord] = []
    for block in blocks:
        failures.extend(block.failures)
    failures.sort(key=lambda f: f.trial_index)
    return extinct, persist, failed, tuple(failures[:_MAX_FAILURE_EXEMPLARS])


def _cell_estimate(grid: InitialConditionGrid, cell: int, e: int, p: int, f: int) -> CellEstimate:
    t0, v0 = grid.cell_values(cell)
    completed = e + p
    if completed > 0:
        prob = e / completed
        low, high = wilson_interval(e, completed)
    else:
        prob, low, high = math.nan, 0.0, 1.0
    return CellEstimate(
        t0=t0, v0=v0, n_trials=completed, n_extinct=e, n_persist=p, n_failed=f,
        p_extinct=prob, ci_low=low, ci_high=high,
    )


def _axis_marginals(
    cells: tuple[CellEstimate, ...], axis: str
) -> tuple[AxisMarginal, ...]:
    order: list[float] = []
    groups: dict[float, list[CellEstimate]] = {}
    for cell in cells:
        value = getattr(cell, axis)
        if value not in groups:
            groups[value] = []
            order.append(value)
        groups[value].append(cell)
    marginals = []
    for value in order:
        members = [c for c in groups[value] if c.n_trials > 0]
        n = sum(c.n_trials for c in members)
        e = sum(c.n_extinct for c in members)
        mean_p = (
            sum(c.p_extinct for c in members) / len(members) if members else math.nan
        )
        marginals.append(AxisMarginal(value=value, n_trials=n, n_extinct=e, p_extinct=mean_p))
    return tuple(marginals)


def estimate(
    config: ExperimentConfig,
    workers: int | None = 1,
    keep_outcomes: bool = False,
) -> PersistenceEstimate:
    """Run the experiment and aggregate extinction counts.

    With a grid init, trials are split evenly across cells (trials // cells
    each); a non-divisible remainder is dropped with a warning and reported
    in ``dropped_trials``. Per-cell estimates and axis marginals are filled
    in whenever a grid is used.

    Args:
        config: experiment description.
        workers: process count; None means machine parallelism. The result
            is identical for any value.
        keep_outcomes: also return every TrialOutcome (memory-heavy at
            500k trials; needed for per-trial logs).
    """
    used, per_cell, n_cells, dropped = _resolve_layout(config)
    if dropped:
        warnings.warn(
            f"trial count {config.trials} is not divisible by the {n_cells}-cell "
            f"grid; dropping {dropped} trials",
            stacklevel=2,
        )
    mode = "outcomes" if keep_outcomes else "counts"
    blocks = _run_blocks(config, used, per_cell, workers, mode)
    extinct, persist, failed, failures = _merge_counts(blocks, n_cells)
    n_extinct = sum(extinct)
    n_persist = sum(persist)
    n_failed = sum(failed)
    completed = n_extinct + n_persist
    if completed > 0:
        p_extinct = n_extinct / completed
        ci_low, ci_high = wilson_interval(n_extinct, completed)
    else:
        p_extinct, ci_low, ci_high = math.nan, 0.0, 1.0

    per_cell_out = None
    by_t0 = None
    by_v0 = None
    if isinstance(config.init, InitialConditionGrid):
        grid = config.init
        per_cell_out = tuple(
            _cell_estimate(grid, j, extinct[j], persist[j], failed[j])
            for j in range(n_cells)
        )
        by_t0 = _axis_marginals(per_cell_out, "t0")
        by_v0 = _axis_marginals(per_cell_out, "v0")

    outcomes = None
    if keep_outcomes:
        rows: list[TrialOutcome] = []
        for block in blocks:
            rows.extend(block.outcomes)
        outcomes = tuple(rows)

    return PersistenceEstimate(
        scenario=config.scenario.name,
        criterion=config.criterion,
        n_trials=completed,
        n_failed=n_failed,
        n_extinct=n_extinct,
        n_persist=n_persist,
        p_extinct=p_extinct,
        ci_low=ci_low,
        ci_high=ci_high,
        master_seed=config.master_seed,
        prng=PRNG_IDENTITY,
        dropped_trials=dropped,
        per_cell=per_cell_out,
        by_t0=by_t0,
        by_v0=by_v0,
        failures=failures,
        outcomes=outcomes,
    )


def ic_sweep(config: ExperimentConfig, workers: int | None = 1) -> PersistenceEstimate:
    """Estimate with per-cell breakdown; requires a grid init."""
    if not isinstance(config.init, InitialConditionGrid):
        raise ValueError("ic_sweep requires an initial-condition grid")
    return estimate(config, workers=workers)


def criterion_disagreement(
    config: ExperimentConfig,
    workers: int | None = 1,
    max_exemplars: int = 10,
) -> DisagreementSummary:
    """Compare the two criteria trial by trial; requires FiniteTime config.

    R is computed alongside each finite-time classification. Exemplars are
    the lowest-index disagreeing trials in each direction, at most
    ``max_exemplars`` each.
    """
    if not isinstance(config.criterion, FiniteTime):
        raise ValueError("criterion_disagreement requires a finite-time criterion")
    used, per_cell, n_cells, dropped = _resolve_layout(config)
    if dropped:
        warnings.warn(
            f"trial count {config.trials} is not divisible by the {n_cells}-cell "
            f"grid; dropping {dropped} trials",
            stacklevel=2,
        )
    blocks = _run_blocks(
        config, used, per_cell, workers, "disagreement", exemplar_cap=max_exemplars
    )
    extinct, persist, failed, failures = _merge_counts(blocks, n_cells)
    completed = sum(extinct) + sum(persist)

    def _merged(attr: str) -> tuple[TrialOutcome, ...]:
        rows: list[TrialOutcome] = []
        for block in blocks:
            rows.extend(getattr(block, attr))
        rows.sort(key=lambda o: o.trial_index)
        return tuple(rows[:max_exemplars])

    return DisagreementSummary(
        scenario=config.scenario.name,
        criterion=config.criterion,
        n_trials=completed,
        n_failed=sum(failed),
        n_both_persist=sum(b.n_both_persist for b in blocks),
        n_both_extinct=sum(b.n_both_extinct for b in blocks),
        n_asymptotic_only=sum(b.n_asymptotic_only for b in blocks),
        n_finite_only=sum(b.n_finite_only for b in blocks),
        exemplars_asymptotic_only=_merged("asymptotic_only"),
        exemplars_finite_only=_merged("finite_only"),
        master_seed=config.master_seed,
        prng=PRNG_IDENTITY,
        dropped_trials=dropped,
        failures=failures,
    )
