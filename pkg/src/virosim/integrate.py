"""Trajectory integration for the three-compartment model.

Two methods are exposed through one interface: classical fixed-step RK4 and
an adaptive embedded Fehlberg 4(5) pair. The hot loops live in a backend
kernel (compiled extension when available, pure Python otherwise); both
backends are arithmetically identical, so results do not depend on which one
is loaded.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .backend import BACKEND_NAME, kernel
from .model import Parameters, State

__all__ = [
    "Method",
    "IntegratorConfig",
    "Trajectory",
    "IntegrationError",
    "StepBudgetExceeded",
    "NonFiniteState",
    "integrate",
    "state_at",
    "BACKEND_NAME",
]

# Step budgets beyond this are not countable in the kernels' 64-bit loop
# indices; no feasible run gets anywhere near it.
_MAX_COUNTABLE_STEPS = 2**61


class IntegrationError(Exception):
    """Base class for integration failures. Carries the time reached."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(message)
        self.t_reached = t_reached


class StepBudgetExceeded(IntegrationError):
    """The step budget ran out before reaching t_end."""


class NonFiniteState(IntegrationError):
    """The state left the finite range and the step size could not shrink."""


class Method(Enum):
    FIXED_RK4 = "fixed_rk4"
    ADAPTIVE_RK45 = "adaptive_rk45"


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    Attributes:
        method: stepping scheme.
        dt: step size for FIXED_RK4 (ignored by the adaptive method).
        rel_tol: relative tolerance for ADAPTIVE_RK45.
        abs_tol: absolute tolerance for ADAPTIVE_RK45.
        max_steps: budget of step attempts (rejected adaptive steps count).
        record_stride: keep every Nth accepted step in the trajectory; the
            initial and final states are always kept.
    """

    method: Method = Method.ADAPTIVE_RK45
    dt: float = 0.01
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_steps: int = 10_000_000
    record_stride: int = 10

    def __post_init__(self) -> None:
        if not isinstance(self.method, Method):
            raise ValueError(f"method must be a Method, got {self.method!r}")
        if not (self.dt > 0.0 and np.isfinite(self.dt)):
            raise ValueError(f"dt must be finite and positive, got {self.dt!r}")
        if not (self.rel_tol > 0.0 and np.isfinite(self.rel_tol)):
            raise ValueError(f"rel_tol must be finite and positive, got {self.rel_tol!r}")
        if not (self.abs_tol > 0.0 and np.isfinite(self.abs_tol)):
            raise ValueError(f"abs_tol must be finite and positive, got {self.abs_tol!r}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps!r}")
        if self.record_stride < 1:
            raise ValueError(f"record_stride must be >= 1, got {self.record_stride!r}")


@dataclass(frozen=True)
class Trajectory:
    """Recorded samples of one integration run.

    ``times`` has shape (n,), ``states`` shape (n, 3) with columns
    (t_cells, infected, virions). The first row is the initial state and the
    last row is exactly at the requested end time.
    """

    times: np.ndarray
    states: np.ndarray
    params: Parameters
    config: IntegratorConfig = field(repr=False)

    def __len__(self) -> int:
        return int(self.times.shape[0])

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> State:
        row = self.states[-1]
        return State(float(row[0]), float(row[1]), float(row[2]))

    def sample(self, index: int) -> tuple[float, State]:
        row = self.states[index]
        return float(self.times[index]), State(float(row[0]), float(row[1]), float(row[2]))


def _check_initial(init: State) -> None:
    for name, value in (
        ("t_cells", init.t_cells),
        ("infected", init.infected),
        ("virions", init.virions),
    ):
        if value < 0.0:
            raise ValueError(f"initial {name} must be non-negative, got {value!r}")


def _run_kernel(
    params: Parameters,
    init: State,
    t_end: float,
    config: IntegratorConfig,
    record_stride: int,
):
    max_steps = min(config.max_steps, _MAX_COUNTABLE_STEPS)
    if config.method is Method.FIXED_RK4:
        return kernel.integrate_fixed(
            params.lam, params.mu, params.k, params.delta, params.p, params.c,
            init.t_cells, init.infected, init.virions,
            t_end, config.dt, max_steps, record_stride,
        )
    return kernel.integrate_adaptive(
        params.lam, params.mu, params.k, params.delta, params.p, params.c,
        init.t_cells, init.infected, init.virions,
        t_end, config.rel_tol, config.abs_tol, max_steps, record_stride,
    )


def _raise_for_status(status: int, t_reached: float, t_end: float) -> None:
    if status == kernel.STATUS_STEP_BUDGET:
        raise StepBudgetExceeded(
            f"step budget exhausted at t={t_reached!r} before t_end={t_end!r}",
            t_reached,
        )
    if status == kernel.STATUS_NON_FINITE:
        raise NonFiniteState(
            f"state became non-finite near t={t_reached!r}", t_reached
        )


def integrate(
    params: Parameters,
    init: State,
    t_end: float,
    config: IntegratorConfig = IntegratorConfig(),
) -> Trajectory:
    """Integrate from ``init`` at t=0 to ``t_end`` and record samples.

    Args:
        params: model rates.
        init: initial state; every component must be non-negative.
        t_end: end time in days, strictly positive.
        config: stepping scheme and settings.

    Returns:
        Trajectory whose first sample is (0, init) and whose last sample is
        exactly at t_end.

    Raises:
        ValueError: on invalid init or t_end.
        StepBudgetExceeded: max_steps attempts were spent before t_end.
        NonFiniteState: the state overflowed and could not be recovered.
    """
    _check_initial(init)
    if not (t_end > 0.0 and np.isfinite(t_end)):
        raise ValueError(f"t_end must be finite and positive, got {t_end!r}")
    status, t_reached, _, _, _, rec_t, rec_y = _run_kernel(
        params, init, t_end, config, config.record_stride
    )
    _raise_for_status(status, t_reached, t_end)
    times = np.asarray(rec_t, dtype=np.float64)
    states = np.asarray(rec_y, dtype=np.float64).reshape(len(rec_t), 3)
    return Trajectory(times=times, states=states, params=params, config=config)


def state_at(
    params: Parameters,
    init: State,
    t_query: float,
    config: IntegratorConfig = IntegratorConfig(),
) -> State:
    """State at a single query time, without recording a trajectory.

    Takes the same stepping path as ``integrate`` with t_end=t_query, so the
    result equals that trajectory's final sample exactly. t_query == 0
    returns the (validated) initial state.
    """
    _check_initial(init)
    if not (t_query >= 0.0 and np.isfinite(t_query)):
        raise ValueError(f"t_query must be finite and non-negative, got {t_query!r}")
    if t_query == 0.0:
        return init
    status, t_reached, yT, yI, yV, _, _ = _run_kernel(
        params, init, t_query, config, 0
    )
    _raise_for_status(status, t_reached, t_query)
    return State(yT, yI, yV)
