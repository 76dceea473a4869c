"""Release acceptance gate: one test per criterion, run at full scale.

Every test is seeded and deterministic. The statistical targets use
hundreds of thousands to millions of trials, so this module takes several
minutes; run it with -v to get one pass/fail line per criterion.
"""
from __future__ import annotations

import hashlib
import json

import numpy as np
import pytest

from virosim.cli import main
from virosim.integrate import IntegratorConfig, Method, integrate, state_at
from virosim.model import (
    Parameters,
    StabilityKind,
    State,
    characteristic_coefficients_persistence,
    classify,
    reproduction_number,
    routh_hurwitz_stable,
)
from virosim.montecarlo import (
    AsymptoticR,
    ExperimentConfig,
    FiniteTime,
    InitialConditionGrid,
    estimate,
)
from virosim.sampling import (
    SeedSpec,
    sample_parameters,
    truncated_normal_scenario,
    uniform_triangular_scenario,
)

MEANS = Parameters(lam=0.1089, mu=0.01089, k=1.179e-3, delta=0.3660, p=1427.0, c=3.0)
MASTER_SEED = 20260825
TN_SEED = 20260825

# Log-uniform sampling ranges, widened past the clinical bounds so the
# stability sweep reaches both deep-extinction and strong-persistence draws.
WIDE_RANGES = {
    "lam": (0.02, 0.4), "mu": (0.002, 0.04), "k": (1e-4, 1e-2),
    "delta": (0.06, 1.6), "p": (50.0, 14000.0), "c": (1.5, 6.0),
}


@pytest.fixture(scope="module")
def tn_finite_time_grid():
    """Truncated-normal scenario on the default 50-cell grid, 30k trials/cell.

    2,000 trials/cell leaves ~5% shot noise per cell, which the <5%
    deviation bound cannot clear; 30,000/cell brings it to ~1.3%. Shared by
    the ratio and insensitivity criteria. This is the expensive fixture
    (several minutes).
    """
    config = ExperimentConfig(
        scenario=truncated_normal_scenario(),
        criterion=FiniteTime(horizon=60.0, threshold=50.0),
        trials=1_500_000,
        master_seed=TN_SEED,
        init=InitialConditionGrid.default(),
    )
    return estimate(config, workers=1)


@pytest.fixture(scope="module")
def tn_asymptotic():
    config = ExperimentConfig(
        scenario=truncated_normal_scenario(),
        criterion=AsymptoticR(),
        trials=200_000,
        master_seed=TN_SEED,
    )
    return estimate(config, workers=1)


def test_reproduction_number_at_reference_means():
    assert reproduction_number(MEANS) == pytest.approx(15.32, abs=0.01)


def test_asymptotic_extinction_probability_uniform_triangular():
    config = ExperimentConfig(
        scenario=uniform_triangular_scenario(),
        criterion=AsymptoticR(),
        trials=500_000,
        master_seed=MASTER_SEED,
    )
    result = estimate(config, workers=1)
    assert result.n_failed == 0
    assert result.p_extinct == pytest.approx(0.0046, abs=0.002)

    # Independent brute-force oracle: numpy's own distribution transforms on
    # a fresh generator; lambda = 10*mu cancels out of R = 10 k p / (3 delta).
    rng = np.random.default_rng(618033988)
    n = 2_000_000
    k = rng.uniform(1.9e-4, 4.8e-3, n)
    prod = rng.uniform(98.0, 7100.0, n)
    delta = rng.triangular(0.13, 0.366, 0.8, n)
    oracle = float(np.mean(10.0 * k * prod / (3.0 * delta) <= 1.0))
    assert oracle == pytest.approx(0.0046, abs=0.002)
    assert result.p_extinct == pytest.approx(oracle, abs=0.001)


def test_finite_time_extinction_probability_uniform_triangular():
    config = ExperimentConfig(
        scenario=uniform_triangular_scenario(),
        criterion=FiniteTime(horizon=60.0, threshold=50.0),
        trials=50_000,
        master_seed=MASTER_SEED,
        init=InitialConditionGrid.default(),
    )
    result = estimate(config, workers=1)
    assert result.n_failed == 0
    assert result.dropped_trials == 0
    assert result.p_extinct == pytest.approx(0.0859, abs=0.015)


def test_finite_time_vs_asymptotic_ratio_truncated_normal(
    tn_finite_time_grid, tn_asymptotic
):
    assert tn_finite_time_grid.n_failed == 0
    assert tn_asymptotic.n_failed == 0
    ratio = tn_finite_time_grid.p_extinct / tn_asymptotic.p_extinct
    assert 5.0 <= ratio <= 25.0


def test_initial_condition_insensitivity(tn_finite_time_grid):
    cells = tn_finite_time_grid.per_cell
    assert cells is not None and len(cells) == 50
    assert all(cell.n_trials >= 2_000 for cell in cells)
    grand = tn_finite_time_grid.p_extinct
    worst = max(abs(cell.p_extinct - grand) / grand for cell in cells)
    assert worst < 0.05


def test_stability_classification_cross_validated():
    rng = np.random.default_rng(MASTER_SEED)
    kept = 0
    n_extinct_regime = 0
    while kept < 10_000:
        values = {
            name: float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
            for name, (lo, hi) in WIDE_RANGES.items()
        }
        params = Parameters(**values)
        r = reproduction_number(params)
        if not 0.01 < r < 100.0:
            continue
        kept += 1
        n_extinct_regime += r < 1.0
        report = classify(params)

        # three equivalent persistence-stability predicates must agree
        hurwitz = routh_hurwitz_stable(characteristic_coefficients_persistence(params))
        spectral = max(z.real for z in report.eigenvalues_at_persistence) < 0.0
        assert (r > 1.0) == hurwitz == spectral

        # extinction equilibrium: stable iff R < 1, and -mu is an eigenvalue
        eigs = report.eigenvalues_at_extinction
        assert (max(z.real for z in eigs) < 0.0) == (r < 1.0)
        assert min(abs(z + params.mu) for z in eigs) <= 1e-12 * max(1.0, params.mu)
    assert n_extinct_regime > 1_000  # both regimes well represented


def test_rk4_fourth_order_convergence():
    init = State(1000.0, 0.0, 0.001)
    reference = np.array(
        state_at(MEANS, init, 10.0,
                 IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)).as_tuple()
    )

    def max_rel_error(dt: float) -> float:
        config = IntegratorConfig(method=Method.FIXED_RK4, dt=dt)
        result = np.array(state_at(MEANS, init, 10.0, config).as_tuple())
        return float(np.max(np.abs(result - reference)
                            / np.maximum(np.abs(reference), 1e-6)))

    ratio = max_rel_error(0.002) / max_rel_error(0.001)
    assert 12.0 <= ratio <= 20.0


def test_positivity_and_bounded_growth():
    scenario = uniform_triangular_scenario()
    rng = np.random.default_rng(31415)
    config = IntegratorConfig(record_stride=1)
    for i in range(1_000):
        params = sample_parameters(scenario, SeedSpec(31415, i))
        init = State(
            t_cells=float(rng.uniform(100.0, 1000.0)),
            infected=float(rng.uniform(0.0, 10.0)),
            virions=float(rng.uniform(100.0, 500.0)),
        )
        traj = integrate(params, init, 100.0, config)
        assert float(traj.states.min()) > -1e-9
        growth_bound = init.t_cells + params.lam * traj.times + 1e-6
        assert np.all(traj.states[:, 0] <= growth_bound)


def test_local_attraction_of_stable_equilibria():
    scenario = uniform_triangular_scenario()
    rng = np.random.default_rng(271828)
    quotas = {"persist": 100, "extinct": 100}
    index = 0
    while any(quotas.values()):
        assert index < 200_000, "draw scan failed to fill both regimes"
        params = sample_parameters(scenario, SeedSpec(271828, index))
        index += 1
        r = reproduction_number(params)
        if r > 1.1 and quotas["persist"]:
            quotas["persist"] -= 1
        elif r < 0.9 and quotas["extinct"]:
            quotas["extinct"] -= 1
        else:
            continue
        report = classify(params)
        eq = (
            report.persistence_eq
            if report.stable_equilibrium is StabilityKind.PERSISTENCE
            else report.extinction_eq
        )
        vec = np.array(eq.as_tuple())
        scale = float(np.abs(vec).max())
        signs = rng.choice([-1.0, 1.0], size=3)
        # relative 1% kicks; zero components get 1% of the dominant one,
        # since scaling zero would leave them unperturbed
        start = np.where(vec > 0.0, vec * (1.0 + 0.01 * signs), 0.01 * scale)
        end = np.array(
            state_at(params, State(*map(float, start)), 2000.0).as_tuple()
        )
        assert float(np.abs(end - vec).max()) <= 0.001 * scale


def test_worker_count_determinism(tmp_path):
    config_path = tmp_path / "experiment.json"
    config_path.write_text(json.dumps({
        "scenario": "uniform_triangular",
        "criterion": {"type": "asymptotic_r"},
        "trials": 20_000,
        "master_seed": MASTER_SEED,
    }), encoding="utf-8")

    digests = []
    counts = []
    for label, workers in (("one", "1"), ("many", "4")):
        out = tmp_path / label
        code = main(["montecarlo", "--config", str(config_path),
                     "--workers", workers, "--out-dir", str(out)])
        assert code == 0
        payload = (out / "estimate.json").read_bytes()
        digests.append(hashlib.sha256(payload).hexdigest())
        doc = json.loads(payload)
        counts.append((doc["extinct"], doc["persist"]))
    assert digests[0] == digests[1]
    assert counts[0] == counts[1]
