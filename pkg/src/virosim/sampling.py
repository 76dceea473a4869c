"""Parameter distributions and counter-based seeded sampling.

Randomized experiments draw each trial's rates from per-parameter
distributions. Reproducibility contract: trial i of a run with master seed s
uses a Philox4x64-10 generator keyed by s with its counter advanced to block
i, so any subset of trials can be recomputed independently and in any order.
The distributions are inverted/rejected from raw uniforms by hand so a draw
consumes a well-defined number of generator outputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .model import Parameters

__all__ = [
    "Constant",
    "Uniform",
    "Triangular",
    "TruncatedNormal",
    "Distribution",
    "RejectionBudgetExceeded",
    "LambdaRule",
    "Scenario",
    "SeedSpec",
    "PRNG_IDENTITY",
    "sample",
    "sample_parameters",
    "PARAMETER_RANGES",
    "truncated_normal_scenario",
    "uniform_triangular_scenario",
    "builtin_scenarios",
]

# Recorded in every result document; bump if the generator contract changes.
PRNG_IDENTITY = "philox4x64-10(key=master_seed, counter=trial_index*2^64)"

# Rejection draws allowed per truncated-normal sample before giving up.
_MAX_REJECTIONS = 10_000


class RejectionBudgetExceeded(Exception):
    """Truncated-normal rejection sampling found no in-window draw.

    Signals a degenerate truncation window far from the mean rather than bad
    luck; the budget is generous enough that healthy windows never trip it.
    """


@dataclass(frozen=True)
class Constant:
    """Degenerate distribution; consumes no generator draws."""

    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError(f"constant value must be finite, got {self.value!r}")


@dataclass(frozen=True)
class Uniform:
    """Uniform on [lo, hi)."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("uniform bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"uniform requires lo < hi, got [{self.lo!r}, {self.hi!r})")


@dataclass(frozen=True)
class Triangular:
    """Triangular on [lo, hi] with the given mode."""

    lo: float
    mode: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.mode) and math.isfinite(self.hi)):
            raise ValueError("triangular bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"triangular requires lo < hi, got [{self.lo!r}, {self.hi!r}]")
        if not self.lo <= self.mode <= self.hi:
            raise ValueError(
                f"triangular mode {self.mode!r} outside [{self.lo!r}, {self.hi!r}]"
            )


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal(mean, sd) conditioned on [lo, hi], sampled by rejection."""

    mean: float
    sd: float
    lo: float
    hi: float

    def __post_init__(self) -> None:
        for name, value in (
            ("mean", self.mean), ("sd", self.sd), ("lo", self.lo), ("hi", self.hi)
        ):
            if not math.isfinite(value):
                raise ValueError(f"truncated normal {name} must be finite, got {value!r}")
        if self.sd <= 0.0:
            raise ValueError(f"truncated normal sd must be positive, got {self.sd!r}")
        if not self.lo < self.hi:
            raise ValueError(
                f"truncated normal requires lo < hi, got [{self.lo!r}, {self.hi!r}]"
            )


Distribution = Union[Constant, Uniform, Triangular, TruncatedNormal]


def _standard_normal(rng: np.random.Generator) -> float:
    # Box-Muller from two raw uniforms; 1-u keeps the log argument in (0, 1].
    u1 = rng.random()
    u2 = rng.random()
    return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)


def sample(dist: Distribution, rng: np.random.Generator) -> float:
    """Draw one value from ``dist`` using raw uniforms from ``rng``."""
    if isinstance(dist, Constant):
        return dist.value
    if isinstance(dist, Uniform):
        u = rng.random()
        return dist.lo + u * (dist.hi - dist.lo)
    if isinstance(dist, Triangular):
        u = rng.random()
        span = dist.hi - dist.lo
        cut = (dist.mode - dist.lo) / span
        if u <= cut:
            return dist.lo + math.sqrt(u * span * (dist.mode - dist.lo))
        return dist.hi - math.sqrt((1.0 - u) * span * (dist.hi - dist.mode))
    if isinstance(dist, TruncatedNormal):
        for _ in range(_MAX_REJECTIONS):
            value = dist.mean + dist.sd * _standard_normal(rng)
            if dist.lo <= value <= dist.hi:
                return value
        raise RejectionBudgetExceeded(
            f"no draw landed in [{dist.lo!r}, {dist.hi!r}] after "
            f"{_MAX_REJECTIONS} attempts (mean={dist.mean!r}, sd={dist.sd!r})"
        )
    raise TypeError(f"unknown distribution type: {type(dist).__name__}")


class LambdaRule(Enum):
    """How the production rate lambda is obtained per trial."""

    INDEPENDENT = "independent"
    TEN_TIMES_MU = "ten_times_mu"


@dataclass(frozen=True)
class Scenario:
    """Per-parameter distributions for one randomized experiment.

    Draw order within a trial is fixed: k, p, mu, delta, then lambda when it
    is independent, then c. With the TEN_TIMES_MU rule lambda is derived as
    10*mu and ``lam`` must be None.
    """

    name: str
    k: Distribution
    p: Distribution
    mu: Distribution
    delta: Distribution
    c: Distribution
    lambda_rule: LambdaRule = LambdaRule.INDEPENDENT
    lam: Distribution | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("scenario name must be non-empty")
        if self.lambda_rule is LambdaRule.INDEPENDENT and self.lam is None:
            raise ValueError("independent lambda rule requires a lam distribution")
        if self.lambda_rule is LambdaRule.TEN_TIMES_MU and self.lam is not None:
            raise ValueError("ten_times_mu rule derives lambda; lam must be None")


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one trial's stream: (master_seed, trial_index)."""

    master_seed: int
    trial_index: int

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must be a uint64, got {self.master_seed!r}")
        if self.trial_index < 0:
            raise ValueError(f"trial_index must be >= 0, got {self.trial_index!r}")

    def generator(self) -> np.random.Generator:
        # One counter block (2^64 outputs) per trial: disjoint by construction.
        bit_gen = np.random.Philox(
            key=self.master_seed, counter=self.trial_index << 64
        )
        return np.random.Generator(bit_gen)


def sample_parameters(scenario: Scenario, seed: SeedSpec) -> Parameters:
    """Draw one full parameter set for the given trial."""
    rng = seed.generator()
    k = sample(scenario.k, rng)
    p = sample(scenario.p, rng)
    mu = sample(scenario.mu, rng)
    delta = sample(scenario.delta, rng)
    if scenario.lambda_rule is LambdaRule.TEN_TIMES_MU:
        lam = 10.0 * mu
    else:
        assert scenario.lam is not None
        lam = sample(scenario.lam, rng)
    c = sample(scenario.c, rng)
    return Parameters(lam=lam, mu=mu, k=k, delta=delta, p=p, c=c)


# Clinical (min, mean, max) ranges per rate, same units as Parameters.
PARAMETER_RANGES: dict[str, tuple[float, float, float]] = {
    "lambda": (0.043, 0.1089, 0.2),
    "mu": (0.0043, 0.01089, 0.02),
    "k": (1.9e-4, 1.179e-3, 4.8e-3),
    "delta": (0.13, 0.3660, 0.8),
    "p": (98.0, 1427.0, 7100.0),
    "c": (3.0, 3.0, 3.0),
}


def _range_truncated_normal(name: str) -> TruncatedNormal:
    lo, mean, hi = PARAMETER_RANGES[name]
    # Plausible spread for a range-truncated bell: quarter of the full range.
    return TruncatedNormal(mean=mean, sd=(hi - lo) / 4.0, lo=lo, hi=hi)


def truncated_normal_scenario() -> Scenario:
    """All varying rates as range-truncated normals; c constant, lambda free."""
    return Scenario(
        name="truncated_normal",
        k=_range_truncated_normal("k"),
        p=_range_truncated_normal("p"),
        mu=_range_truncated_normal("mu"),
        delta=_range_truncated_normal("delta"),
        c=Constant(PARAMETER_RANGES["c"][1]),
        lambda_rule=LambdaRule.INDEPENDENT,
        lam=_range_truncated_normal("lambda"),
    )


def uniform_triangular_scenario() -> Scenario:
    """Wide uniforms for k and p, range-peaked triangulars for mu and delta.

    Lambda is tied to cell turnover as 10*mu instead of drawn on its own.
    """
    k_lo, _, k_hi = PARAMETER_RANGES["k"]
    p_lo, _, p_hi = PARAMETER_RANGES["p"]
    mu_lo, mu_mode, mu_hi = PARAMETER_RANGES["mu"]
    d_lo, d_mode, d_hi = PARAMETER_RANGES["delta"]
    return Scenario(
        name="uniform_triangular",
        k=Uniform(k_lo, k_hi),
        p=Uniform(p_lo, p_hi),
        mu=Triangular(mu_lo, mu_mode, mu_hi),
        delta=Triangular(d_lo, d_mode, d_hi),
        c=Constant(PARAMETER_RANGES["c"][1]),
        lambda_rule=LambdaRule.TEN_TIMES_MU,
    )


def builtin_scenarios() -> tuple[Scenario, Scenario]:
    return (truncated_normal_scenario(), uniform_triangular_scenario())
