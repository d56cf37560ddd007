#!/usr/bin/env python3
"""
Physical parameters, quantum numbers and the closed-form energies of the
charged three-dimensional oscillator in a homogeneous magnetic field.

Two sets of first-order corrections live here side by side:
  - paper_corrections: the published closed forms, taken as printed.
  - derived_corrections: closed forms re-derived from the grouped first-order
    operators with <L_z> = hbar*mu signed; these are the ones the numeric
    perturbation theory in fock_module reproduces.
"""

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq

CHANNELS = ("eta", "theta")
SOURCES = ("paper", "derived")


class InvalidParameter(ValueError):
    """Raised when a physical parameter is outside its admissible range."""


class ValidityRatioUndefined(ZeroDivisionError):
    """Raised when r_eta is requested at zero cyclotron frequency."""


@dataclass(frozen=True)
class PhysicalParams:
    """
    Parameters of the non-commutative oscillator.

    Attributes:
        hbar (float): Reduced Planck constant, > 0.
        m (float): Mass, > 0.
        omega (float): Trap angular frequency, > 0.
        omega_c (float): Signed cyclotron frequency qB/(mc).
        alpha (float): Bopp-shift scale, in (0, 1].
        theta (float): Position non-commutativity.
        eta (float): Momentum non-commutativity.
    """

    hbar: float = 1.0
    m: float = 1.0
    omega: float = 1.0
    omega_c: float = 0.7
    alpha: float = 1.0
    theta: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidParameter(f"{field.name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise InvalidParameter(f"{field.name} must be finite, got {value}")
            object.__setattr__(self, field.name, float(value))
        for name in ("hbar", "m", "omega"):
            if getattr(self, name) <= 0:
                raise InvalidParameter(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 < self.alpha <= 1:
            raise InvalidParameter(f"alpha must lie in (0, 1], got {self.alpha}")

    @classmethod
    def from_field(cls, charge: float, field: float, light_speed: float, **params) -> "PhysicalParams":
        """
        Build parameters with omega_c = qB/(mc).

        Args:
            charge (float): Particle charge q.
            field (float): Magnetic field strength B.
            light_speed (float): Speed of light c in the chosen unit system.
            **params: Remaining PhysicalParams fields except omega_c.

        Returns:
            PhysicalParams: The validated parameter set.

        Raises:
            InvalidParameter: If omega_c is also given, or m or c is zero.
        """
        if "omega_c" in params:
            raise InvalidParameter("omega_c cannot be combined with charge, field and light_speed")
        m = params.get("m", cls.m)
        if m == 0 or light_speed == 0:
            raise InvalidParameter("Mass and light speed must be nonzero to derive omega_c")
        return cls(omega_c=charge * field / (m * light_speed), **params)

    @property
    def omega_tilde(self) -> float:
        return omega_tilde(self)

    def replace(self, **changes) -> "PhysicalParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        values = dataclasses.asdict(self)
        values["omega_tilde"] = self.omega_tilde
        return values


@dataclass(frozen=True)
class QuantumNumbers:
    """Cylindrical labels (n_rho, mu, n_z) of a stationary state."""

    n_rho: int
    mu: int
    n_z: int

    def __post_init__(self):
        for name in ("n_rho", "mu", "n_z"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidParameter(f"{name} must be an integer, got {value!r}")
        if self.n_rho < 0 or self.n_z < 0:
            raise InvalidParameter(f"n_rho and n_z must be nonnegative, got {self}")

    @property
    def radial_quanta(self) -> int:
        """2 n_rho + |mu| + 1, the factor multiplying hbar*omega~."""
        return 2 * self.n_rho + abs(self.mu) + 1


class Corrections(NamedTuple):
    """First-order energy corrections per channel."""

    eta: float
    theta: float

    @property
    def total(self) -> float:
        return self.eta + self.theta

    def channel(self, name: str) -> float:
        if name not in CHANNELS:
            raise ValueError(f"Unknown channel {name!r}; expected one of {CHANNELS}")
        return getattr(self, name)


def omega_tilde(params: PhysicalParams) -> float:
    """sqrt(omega^2 + omega_c^2 / 4)."""
    return math.sqrt(params.omega ** 2 + params.omega_c ** 2 / 4)


def unperturbed_energy(qn: QuantumNumbers, params: PhysicalParams, zeeman_sign: int = 1) -> float:
    """
    alpha^2 [hbar w~ (2 n_rho + |mu| + 1) + s/2 hbar w_c mu + hbar w (n_z + 1/2)].

    Args:
        qn (QuantumNumbers): State labels.
        params (PhysicalParams): Physical parameters.
        zeeman_sign (int): s = +1 reproduces the published formula; s = -1 is the
            value of the operator -omega_c L_z / 2 on a state with <L_z> = hbar mu.

    Returns:
        float: The unperturbed energy.
    """
    if zeeman_sign not in (1, -1):
        raise ValueError(f"zeeman_sign must be +1 or -1, got {zeeman_sign}")
    w_tilde = omega_tilde(params)
    energy = (
        params.hbar * w_tilde * qn.radial_quanta
        + zeeman_sign * 0.5 * params.hbar * params.omega_c * qn.mu
        + params.hbar * params.omega * (qn.n_z + 0.5)
    )
    return params.alpha ** 2 * energy


def generalized_binomial(n: int, k: int) -> Fraction:
    """n(n-1)...(n-k+1)/k! for k >= 0, any integer n; zero for k < 0."""
    if k < 0:
        return Fraction(0)
    numerator = 1
    for i in range(k):
        numerator *= n - i
    return Fraction(numerator, math.factorial(k))


def paper_f(n_rho: int, mu_abs: int) -> Fraction:
    """The five-binomial function f(n_rho, |mu|) entering the published theta correction."""
    if n_rho < 0 or mu_abs < 0:
        raise InvalidParameter(f"f is defined for nonnegative arguments, got ({n_rho}, {mu_abs})")
    n, mu = n_rho, mu_abs
    binom = generalized_binomial
    bracket = (
        2 * binom(mu + n, n)
        + 4 * binom(mu + n - 2, n)
        + binom(mu + n + 1, n)
        - binom(mu + n + 2, n - 1)
    )
    return 2 * binom(n + mu, mu) - 4 * mu * binom(mu + n + 2, n - 1) - mu * (1 + mu) * bracket


def paper_corrections(qn: QuantumNumbers, params: PhysicalParams) -> Corrections:
    """Published first-order corrections, with |mu| and f(n_rho, |mu|) as printed."""
    w_tilde = omega_tilde(params)
    mu_abs = abs(qn.mu)
    delta_eta = (
        -params.eta * mu_abs / (2 * params.m)
        - params.eta * params.omega_c * qn.radial_quanta / (4 * params.m * w_tilde)
    )
    delta_theta = (
        -0.5 * params.theta * params.m * w_tilde
        * (w_tilde - 0.5 * params.omega_c * float(paper_f(qn.n_rho, mu_abs)))
    )
    return Corrections(eta=delta_eta, theta=delta_theta)


def derived_corrections(qn: QuantumNumbers, params: PhysicalParams) -> Corrections:
    """
    First-order corrections (eta/hbar)<H_eta> and (theta/hbar)<H_theta> on |n_rho, mu, n_z>.

    Uses <L_z> = hbar mu, <x^2 + y^2> = hbar (2 n_rho + |mu| + 1) / (m w~) and
    <p_x^2 + p_y^2> = m hbar w~ (2 n_rho + |mu| + 1); every other term of the
    grouped operators has a vanishing diagonal.
    """
    w_tilde = omega_tilde(params)
    delta_eta = params.eta * (
        -qn.mu / (2 * params.m)
        + params.omega_c * qn.radial_quanta / (4 * params.m * w_tilde)
    )
    delta_theta = params.theta * params.m * (
        params.omega_c * w_tilde * qn.radial_quanta / 4
        - w_tilde ** 2 * qn.mu / 2
    )
    return Corrections(eta=delta_eta, theta=delta_theta)


def corrections(qn: QuantumNumbers, params: PhysicalParams, source: str = "derived") -> Corrections:
    if source == "paper":
        return paper_corrections(qn, params)
    if source == "derived":
        return derived_corrections(qn, params)
    raise ValueError(f"Unknown source {source!r}; expected one of {SOURCES}")


def first_order_energy(qn: QuantumNumbers, params: PhysicalParams, source: str = "derived") -> float:
    """
    E0 + dE_eta + dE_theta.

    The published source pairs with the published +omega_c mu sign of E0; the
    derived source uses the operator sign.
    """
    zeeman_sign = 1 if source == "paper" else -1
    return unperturbed_energy(qn, params, zeeman_sign=zeeman_sign) + corrections(qn, params, source).total


def validity_ratios(params: PhysicalParams) -> tuple:
    """
    r_eta = eta / (hbar m |omega_c|) and r_theta = theta m w~ / hbar.

    Raises:
        ValidityRatioUndefined: If omega_c is zero.
    """
    if params.omega_c == 0:
        raise ValidityRatioUndefined("r_eta is undefined at omega_c = 0")
    r_eta = params.eta / (params.hbar * params.m * abs(params.omega_c))
    r_theta = params.theta * params.m * omega_tilde(params) / params.hbar
    return r_eta, r_theta


def correction_sign_crossover(
    qn: QuantumNumbers,
    params: PhysicalParams,
    channel: str,
    source: str = "derived",
    omega_c_max: float = 10.0,
    samples: int = 400,
) -> Optional[float]:
    """
    Smallest positive cyclotron frequency at which a first-order correction changes sign.

    The correction is evaluated at unit strength of the chosen channel, so the
    result does not depend on the magnitude of theta or eta.

    Args:
        qn (QuantumNumbers): State labels.
        params (PhysicalParams): Parameters; omega_c, theta and eta are overridden.
        channel (str): "eta" or "theta".
        source (str): "paper" or "derived".
        omega_c_max (float): Upper end of the scanned interval (0, omega_c_max].
        samples (int): Number of grid points used to bracket the root.

    Returns:
        Optional[float]: The crossover omega_c, or None if the sign is constant on the interval.
    """
    if channel not in CHANNELS:
        raise ValueError(f"Unknown channel {channel!r}; expected one of {CHANNELS}")
    if omega_c_max <= 0 or samples < 2:
        raise InvalidParameter("omega_c_max must be positive and samples at least 2")
    unit = params.replace(theta=float(channel == "theta"), eta=float(channel == "eta"))

    def signed_correction(w_c: float) -> float:
        return corrections(qn, unit.replace(omega_c=w_c), source).channel(channel)

    grid = np.linspace(omega_c_max / samples, omega_c_max, samples)
    values = [signed_correction(w_c) for w_c in grid]
    for i, value in enumerate(values):
        if value == 0:
            return float(grid[i])
        if i and values[i - 1] * value < 0:
            return float(brentq(signed_correction, grid[i - 1], grid[i], xtol=1e-14))
    return None
