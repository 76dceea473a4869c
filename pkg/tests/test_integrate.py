"""Integrator tests: stepping semantics, recording, errors, backend parity."""
from __future__ import annotations

import numpy as np
import pytest

from virosim import _kernel_py
from virosim.integrate import (
    IntegratorConfig,
    Method,
    NonFiniteState,
    StepBudgetExceeded,
    integrate,
    state_at,
)
from virosim.model import Parameters, State, extinction_equilibrium, persistence_equilibrium

MEANS = Parameters(lam=0.1089, mu=0.01089, k=1.179e-3, delta=0.3660, p=1427.0, c=3.0)
EXTINCT = Parameters(lam=0.043, mu=0.0043, k=1.9e-4, delta=0.8, p=98.0, c=3.0)

FIXED = IntegratorConfig(method=Method.FIXED_RK4, dt=0.001)
ADAPTIVE = IntegratorConfig(method=Method.ADAPTIVE_RK45)


class TestConfigValidation:
    def test_defaults(self):
        config = IntegratorConfig()
        assert config.method is Method.ADAPTIVE_RK45
        assert config.rel_tol == 1e-8
        assert config.abs_tol == 1e-10
        assert config.max_steps == 10_000_000
        assert config.record_stride == 10

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dt": 0.0},
            {"dt": -1.0},
            {"rel_tol": 0.0},
            {"abs_tol": -1e-9},
            {"max_steps": 0},
            {"record_stride": 0},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            IntegratorConfig(**kwargs)

    def test_rejects_bad_method(self):
        with pytest.raises(ValueError, match="method"):
            IntegratorConfig(method="rk4")  # type: ignore[arg-type]


class TestInputValidation:
    def test_negative_initial_component(self):
        with pytest.raises(ValueError, match="virions"):
            integrate(MEANS, State(1.0, 0.0, -0.1), 1.0)

    def test_nonpositive_t_end(self):
        with pytest.raises(ValueError, match="t_end"):
            integrate(MEANS, State(1.0, 0.0, 0.0), 0.0)
        with pytest.raises(ValueError, match="t_end"):
            integrate(MEANS, State(1.0, 0.0, 0.0), -5.0)

    def test_negative_t_query(self):
        with pytest.raises(ValueError, match="t_query"):
            state_at(MEANS, State(1.0, 0.0, 0.0), -1.0)


class TestTrajectoryShape:
    @pytest.mark.parametrize("config", [FIXED, ADAPTIVE], ids=["fixed", "adaptive"])
    def test_invariants(self, config):
        init = State(500.0, 0.0, 300.0)
        trajectory = integrate(MEANS, init, 25.0, config)
        times = trajectory.times
        assert times[0] == 0.0
        assert times[-1] == 25.0
        assert np.all(np.diff(times) > 0.0)
        assert np.all(np.isfinite(trajectory.states))
        # first sample is the initial state, exactly
        assert tuple(trajectory.states[0]) == init.as_tuple()
        assert trajectory.final_time == 25.0

    def test_fixed_record_stride_counts(self):
        config = IntegratorConfig(method=Method.FIXED_RK4, dt=0.001, record_stride=10)
        trajectory = integrate(EXTINCT, State(10.0, 0.0, 1.0), 1.0, config)
        # 1000 steps: initial sample + one per 10 steps (the last lands on t_end)
        assert len(trajectory) == 1 + 100

    def test_fixed_stride_not_dividing_step_count(self):
        config = IntegratorConfig(method=Method.FIXED_RK4, dt=0.01, record_stride=7)
        trajectory = integrate(EXTINCT, State(10.0, 0.0, 1.0), 1.0, config)
        # 100 steps: initial + floor(100/7) interior + the off-stride final
        assert len(trajectory) == 1 + 14 + 1
        assert trajectory.times[-1] == 1.0

    def test_final_step_shortened_to_t_end(self):
        config = IntegratorConfig(method=Method.FIXED_RK4, dt=0.3, record_stride=1)
        trajectory = integrate(EXTINCT, State(10.0, 0.0, 1.0), 1.0, config)
        np.testing.assert_allclose(trajectory.times, [0.0, 0.3, 0.6, 0.9, 1.0])
        assert trajectory.times[-1] == 1.0

    def test_sample_accessor(self):
        trajectory = integrate(MEANS, State(10.0, 0.0, 1.0), 5.0, ADAPTIVE)
        t, state = trajectory.sample(0)
        assert t == 0.0
        assert state == State(10.0, 0.0, 1.0)
        t_last, state_last = trajectory.sample(len(trajectory) - 1)
        assert t_last == 5.0
        assert state_last == trajectory.final_state


class TestEquilibriumFixedPoints:
    @pytest.mark.parametrize("config", [FIXED, ADAPTIVE], ids=["fixed", "adaptive"])
    @pytest.mark.parametrize("params", [MEANS, EXTINCT], ids=["means", "extinct"])
    def test_extinction_equilibrium_is_stationary(self, params, config):
        eq = extinction_equilibrium(params)
        trajectory = integrate(params, eq, 50.0, config)
        drift = np.abs(trajectory.states - np.array(eq.as_tuple()))
        assert drift.max() < 1e-10

    def test_persistence_equilibrium_is_stationary(self):
        # The fixed point is computed in floating point, so rhs carries a
        # ~1e-13 relative residual that integrates to a small secular drift.
        eq, admissible = persistence_equilibrium(MEANS)
        assert admissible
        trajectory = integrate(MEANS, eq, 50.0, ADAPTIVE)
        scale = np.maximum(1.0, np.abs(np.array(eq.as_tuple())))
        drift = np.abs(trajectory.states - np.array(eq.as_tuple())) / scale
        assert drift.max() < 1e-7


class TestStateAt:
    def test_zero_query_returns_init(self):
        init = State(7.0, 1.0, 2.0)
        assert state_at(MEANS, init, 0.0) == init

    @pytest.mark.parametrize("config", [FIXED, ADAPTIVE], ids=["fixed", "adaptive"])
    def test_agrees_with_trajectory_final_sample_exactly(self, config):
        init = State(500.0, 0.0, 300.0)
        trajectory = integrate(MEANS, init, 13.7, config)
        probe = state_at(MEANS, init, 13.7, config)
        assert probe.as_tuple() == tuple(trajectory.states[-1])

    def test_cross_method_agreement_near_equilibrium(self):
        # From a tame start the fixed and adaptive methods agree tightly.
        # (Hot starts with a viral spike need dt well below 0.01 for RK4.)
        eq, _ = persistence_equilibrium(MEANS)
        init = State(eq.t_cells * 1.5, eq.infected * 0.5, eq.virions * 1.2)
        fixed = state_at(
            MEANS, init, 60.0, IntegratorConfig(method=Method.FIXED_RK4, dt=0.01)
        )
        adaptive = state_at(
            MEANS, init, 60.0, IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
        )
        for a, b in zip(fixed.as_tuple(), adaptive.as_tuple()):
            assert a == pytest.approx(b, rel=1e-4)


class TestConvergenceOrder:
    def test_rk4_error_ratio_under_step_halving(self):
        init = State(1000.0, 0.0, 0.001)
        reference = state_at(
            MEANS, init, 10.0, IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)
        )
        ref = np.array(reference.as_tuple())

        def max_rel_error(dt: float) -> float:
            config = IntegratorConfig(method=Method.FIXED_RK4, dt=dt)
            result = np.array(state_at(MEANS, init, 10.0, config).as_tuple())
            return float(np.max(np.abs(result - ref) / np.maximum(np.abs(ref), 1e-6)))

        coarse = max_rel_error(0.002)
        fine = max_rel_error(0.001)
        ratio = coarse / fine
        assert 12.0 <= ratio <= 20.0


class TestPhysicalBounds:
    def test_t_bounded_by_linear_growth(self):
        # T(t) <= T(0) + lambda*t along any solution.
        config = IntegratorConfig(record_stride=1)
        for init in (State(1000.0, 0.0, 0.001), State(100.0, 5.0, 500.0)):
            trajectory = integrate(MEANS, init, 60.0, config)
            bound = init.t_cells + MEANS.lam * trajectory.times + 1e-6
            assert np.all(trajectory.states[:, 0] <= bound)

    def test_spike_trajectory_stays_positive(self):
        config = IntegratorConfig(record_stride=1)
        trajectory = integrate(MEANS, State(1000.0, 0.0, 0.001), 60.0, config)
        assert trajectory.states.min() > -1e-9


class TestErrors:
    def test_step_budget_fixed(self):
        config = IntegratorConfig(method=Method.FIXED_RK4, dt=0.001, max_steps=10)
        with pytest.raises(StepBudgetExceeded):
            integrate(MEANS, State(10.0, 0.0, 1.0), 1.0, config)

    def test_step_budget_adaptive(self):
        config = IntegratorConfig(max_steps=3)
        with pytest.raises(StepBudgetExceeded) as info:
            integrate(MEANS, State(1000.0, 0.0, 0.001), 100.0, config)
        assert info.value.t_reached < 100.0

    def test_nonfinite_fixed_step_blowup(self):
        # dt = 0.01 is linearly unstable through this trajectory's viral
        # spike (local rates of hundreds per day), so RK4 overflows.
        config = IntegratorConfig(method=Method.FIXED_RK4, dt=0.01)
        with pytest.raises(NonFiniteState) as info:
            integrate(MEANS, State(1000.0, 0.0, 0.001), 100.0, config)
        assert 0.0 < info.value.t_reached < 100.0

    def test_error_carries_partial_progress_time(self):
        config = IntegratorConfig(method=Method.FIXED_RK4, dt=0.001, max_steps=10)
        with pytest.raises(StepBudgetExceeded) as info:
            integrate(MEANS, State(10.0, 0.0, 1.0), 1.0, config)
        assert info.value.t_reached == 0.0  # budget checked before stepping


class TestDeterminism:
    def test_repeat_runs_bit_identical(self):
        init = State(500.0, 0.0, 300.0)
        first = integrate(MEANS, init, 30.0, ADAPTIVE)
        second = integrate(MEANS, init, 30.0, ADAPTIVE)
        assert np.array_equal(first.times, second.times)
        assert np.array_equal(first.states, second.states)


class TestBackendParity:
    """The compiled and pure-Python kernels must agree bit for bit."""

    @pytest.fixture()
    def compiled(self):
        return pytest.importorskip("virosim._kernel_c")

    ARGS = (0.1089, 0.01089, 1.179e-3, 0.3660, 1427.0, 3.0)

    @pytest.mark.parametrize(
        "init", [(1000.0, 0.0, 0.001), (500.0, 0.0, 300.0), (10.0, 0.0, 0.0)]
    )
    def test_adaptive_identical(self, compiled, init):
        call = self.ARGS + init + (60.0, 1e-8, 1e-10, 10_000_000, 1)
        assert _kernel_py.integrate_adaptive(*call) == compiled.integrate_adaptive(*call)

    @pytest.mark.parametrize("dt", [0.001, 0.0005])
    def test_fixed_identical(self, compiled, dt):
        call = self.ARGS + (500.0, 0.0, 300.0) + (10.0, dt, 10_000_000, 10)
        assert _kernel_py.integrate_fixed(*call) == compiled.integrate_fixed(*call)

    def test_blowup_identical(self, compiled):
        # Even failure paths must match: same status, same reached time.
        call = self.ARGS + (1000.0, 0.0, 0.001) + (100.0, 0.01, 10_000_000, 10)
        assert _kernel_py.integrate_fixed(*call) == compiled.integrate_fixed(*call)
