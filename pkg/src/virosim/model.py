"""Three-compartment in-host viral dynamics model.

State variables are uninfected target cells T (cells/uL), productively
infected cells I (cells/uL) and free virions V (copies/uL); time is in days.
The dynamics are

    dT/dt = lambda - mu*T - k*T*V
    dI/dt = k*T*V - delta*I
    dV/dt = p*I - c*V

This module holds the deterministic layer: parameter/state containers, the
vector field and its Jacobian, the basic reproduction number, both equilibria,
and closed-form linear stability classification.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Parameters",
    "State",
    "CubicCoefficients",
    "StabilityKind",
    "StabilityReport",
    "BOUNDARY_TOLERANCE",
    "rhs",
    "jacobian",
    "reproduction_number",
    "extinction_equilibrium",
    "persistence_equilibrium",
    "characteristic_coefficients_persistence",
    "cubic_roots",
    "routh_hurwitz_stable",
    "classify",
]

# |R - 1| at or below this is reported as a boundary case rather than forced
# into either stability regime.
BOUNDARY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Parameters:
    """Model rates. All six must be finite and strictly positive.

    Attributes:
        lam: target-cell production rate, cells/(uL day).
        mu: natural target-cell death rate, 1/day.
        k: infection rate constant, uL/(copies day).
        delta: infected-cell death rate, 1/day.
        p: virion production rate per infected cell, 1/day.
        c: virion clearance rate, 1/day.
    """

    lam: float
    mu: float
    k: float
    delta: float
    p: float
    c: float

    def __post_init__(self) -> None:
        for name, value in (
            ("lambda", self.lam),
            ("mu", self.mu),
            ("k", self.k),
            ("delta", self.delta),
            ("p", self.p),
            ("c", self.c),
        ):
            if not math.isfinite(value):
                raise ValueError(f"parameter {name} must be finite, got {value!r}")
            if value <= 0.0:
                raise ValueError(f"parameter {name} must be positive, got {value!r}")


@dataclass(frozen=True)
class State:
    """A point (T, I, V) in phase space; also used for derivatives.

    Components must be finite. Negative values are representable (derivatives
    are states too); the integrator enforces non-negativity of initial data.
    """

    t_cells: float
    infected: float
    virions: float

    def __post_init__(self) -> None:
        for name, value in (
            ("t_cells", self.t_cells),
            ("infected", self.infected),
            ("virions", self.virions),
        ):
            if not math.isfinite(value):
                raise ValueError(f"state component {name} must be finite, got {value!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.t_cells, self.infected, self.virions)


@dataclass(frozen=True)
class CubicCoefficients:
    """Coefficients of a monic cubic x^3 + a1*x^2 + a2*x + a3."""

    a1: float
    a2: float
    a3: float

    def __post_init__(self) -> None:
        for name, value in (("a1", self.a1), ("a2", self.a2), ("a3", self.a3)):
            if not math.isfinite(value):
                raise ValueError(f"coefficient {name} must be finite, got {value!r}")


class StabilityKind(Enum):
    """Which equilibrium is locally asymptotically stable."""

    EXTINCTION = "extinction"
    PERSISTENCE = "persistence"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class StabilityReport:
    """Full linear stability analysis at both equilibria."""

    r: float
    extinction_eq: State
    persistence_eq: State
    persistence_eq_admissible: bool
    eigenvalues_at_extinction: tuple[complex, complex, complex]
    eigenvalues_at_persistence: tuple[complex, complex, complex]
    stable_equilibrium: StabilityKind


def rhs(params: Parameters, state: State) -> State:
    """Evaluate the vector field at ``state``.

    Returns:
        The time derivative (dT/dt, dI/dt, dV/dt) packaged as a State.
    """
    t, i, v = state.t_cells, state.infected, state.virions
    infection = params.k * t * v
    return State(
        t_cells=params.lam - params.mu * t - infection,
        infected=infection - params.delta * i,
        virions=params.p * i - params.c * v,
    )


def jacobian(params: Parameters, state: State) -> np.ndarray:
    """Jacobian of the vector field at ``state`` as a (3, 3) float array.

    Row/column order matches State: (t_cells, infected, virions).
    """
    t, v = state.t_cells, state.virions
    return np.array(
        [
            [-params.mu - params.k * v, 0.0, -params.k * t],
            [params.k * v, -params.delta, params.k * t],
            [0.0, params.p, -params.c],
        ]
    )


def reproduction_number(params: Parameters) -> float:
    """Basic reproduction number R = k*p*lambda / (c*delta*mu)."""
    return params.k * params.p * params.lam / (params.c * params.delta * params.mu)


def extinction_equilibrium(params: Parameters) -> State:
    """Infection-free equilibrium (lambda/mu, 0, 0)."""
    return State(params.lam / params.mu, 0.0, 0.0)


def persistence_equilibrium(params: Parameters) -> tuple[State, bool]:
    """Chronic-infection equilibrium and whether it is biologically admissible.

    The fixed point is

        T* = c*delta / (p*k)
        I* = lambda/delta - mu*c / (k*p)
        V* = p*lambda / (c*delta) - mu/k

    which has I*, V* > 0 exactly when R > 1. The point is returned regardless;
    the flag reports whether every component is strictly positive.
    """
    t = params.c * params.delta / (params.p * params.k)
    i = params.lam / params.delta - params.mu * params.c / (params.k * params.p)
    v = params.p * params.lam / (params.c * params.delta) - params.mu / params.k
    state = State(t, i, v)
    admissible = t > 0.0 and i > 0.0 and v > 0.0
    return state, admissible


def characteristic_coefficients_persistence(params: Parameters) -> CubicCoefficients:
    """Characteristic polynomial of the Jacobian at the persistence equilibrium.

    Expanding det(xI - J) at (T*, I*, V*) and simplifying with the fixed-point
    relations gives the monic cubic x^3 + a1*x^2 + a2*x + a3 with

        a1 = c + delta + k*lambda*p / (c*delta)
        a2 = k*lambda*p/delta + k*lambda*p/c
        a3 = k*lambda*p - c*delta*mu
    """
    klp = params.k * params.lam * params.p
    a1 = params.c + params.delta + klp / (params.c * params.delta)
    a2 = klp / params.delta + klp / params.c
    a3 = klp - params.c * params.delta * params.mu
    return CubicCoefficients(a1, a2, a3)


def _sorted_roots(
    roots: tuple[complex, complex, complex],
) -> tuple[complex, complex, complex]:
    ordered = sorted(roots, key=lambda z: (z.real, z.imag))
    return (ordered[0], ordered[1], ordered[2])


def cubic_roots(coeffs: CubicCoefficients) -> tuple[complex, complex, complex]:
    """All three roots of x^3 + a1*x^2 + a2*x + a3, in closed form.

    Uses the trigonometric method when all roots are real and Cardano's
    formula otherwise, on the depressed cubic y^3 + q*y + r with x = y - a1/3.
    Real roots come back with exact zero imaginary part; complex roots come
    back as an exact conjugate pair. Roots are sorted by (real, imag).
    """
    a1, a2, a3 = coeffs.a1, coeffs.a2, coeffs.a3
    shift = a1 / 3.0
    q = a2 - a1 * a1 / 3.0
    r = 2.0 * a1 * a1 * a1 / 27.0 - a1 * a2 / 3.0 + a3
    disc = (r / 2.0) ** 2 + (q / 3.0) ** 3

    if q == 0.0 and r == 0.0:
        y = (0.0, 0.0, 0.0)
        roots = tuple(complex(v - shift, 0.0) for v in y)
    elif disc > 0.0:
        # One real root, one conjugate pair. Pick the cube root with the
        # larger magnitude first to avoid cancellation.
        s = -r / 2.0
        t = math.sqrt(disc)
        big = s + t if s >= 0.0 else s - t
        u = math.copysign(abs(big) ** (1.0 / 3.0), big)
        v = 0.0 if u == 0.0 else -q / (3.0 * u)
        real_root = u + v - shift
        re = -(u + v) / 2.0 - shift
        im = math.sqrt(3.0) * (u - v) / 2.0
        roots = (
            complex(real_root, 0.0),
            complex(re, im),
            complex(re, -im),
        )
    else:
        # Three real roots (disc <= 0 requires q <= 0).
        m = math.sqrt(-q / 3.0)
        if m == 0.0:
            y = (0.0, 0.0, 0.0)
        else:
            cos_phi = -r / 2.0 / (m * m * m)
            cos_phi = min(1.0, max(-1.0, cos_phi))
            phi = math.acos(cos_phi)
            y = tuple(
                2.0 * m * math.cos((phi - 2.0 * math.pi * j) / 3.0) for j in range(3)
            )
        roots = tuple(complex(v - shift, 0.0) for v in y)

    return _sorted_roots(roots)  # type: ignore[arg-type]


def routh_hurwitz_stable(coeffs: CubicCoefficients) -> bool:
    """Routh-Hurwitz test: all roots in the open left half-plane.

    For a monic cubic this is a1 > 0, a2 > 0, a3 > 0 and a1*a2 > a3.
    """
    a1, a2, a3 = coeffs.a1, coeffs.a2, coeffs.a3
    return a1 > 0.0 and a2 > 0.0 and a3 > 0.0 and a1 * a2 > a3


def _eigenvalues_at_extinction(params: Parameters) -> tuple[complex, complex, complex]:
    # The characteristic polynomial at (lambda/mu, 0, 0) factors as
    # (x + mu) * (x^2 + (c + delta)*x + c*delta - k*p*lambda/mu),
    # so -mu is always an eigenvalue.
    b = params.c + params.delta
    q = params.c * params.delta - params.k * params.p * params.lam / params.mu
    disc = b * b - 4.0 * q
    if disc >= 0.0:
        # b > 0, so -b - sqrt(disc) never cancels; recover the second root
        # from the product to stay accurate when q is tiny.
        low = (-b - math.sqrt(disc)) / 2.0
        high = q / low
        pair = (complex(low, 0.0), complex(high, 0.0))
    else:
        im = math.sqrt(-disc) / 2.0
        pair = (complex(-b / 2.0, im), complex(-b / 2.0, -im))
    return _sorted_roots((complex(-params.mu, 0.0), pair[0], pair[1]))


def classify(params: Parameters) -> StabilityReport:
    """Classify linear stability of both equilibria.

    The stable equilibrium is Extinction for R < 1, Persistence for R > 1,
    and Boundary when |R - 1| <= BOUNDARY_TOLERANCE (linearization is
    inconclusive there).
    """
    r = reproduction_number(params)
    p_ext = extinction_equilibrium(params)
    p_per, admissible = persistence_equilibrium(params)
    eig_ext = _eigenvalues_at_extinction(params)
    eig_per = cubic_roots(characteristic_coefficients_persistence(params))
    if abs(r - 1.0) <= BOUNDARY_TOLERANCE:
        kind = StabilityKind.BOUNDARY
    elif r < 1.0:
        kind = StabilityKind.EXTINCTION
    else:
        kind = StabilityKind.PERSISTENCE
    return StabilityReport(
        r=r,
        extinction_eq=p_ext,
        persistence_eq=p_per,
        persistence_eq_admissible=admissible,
        eigenvalues_at_extinction=eig_ext,
        eigenvalues_at_persistence=eig_per,
        stable_equilibrium=kind,
    )
