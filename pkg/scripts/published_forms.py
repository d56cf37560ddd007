#!/usr/bin/env python3
"""
Published right-hand sides, hard-coded once in symbolic form.

Every function returns an OperatorPolynomial built directly from the printed
expression, quoted above it. Nothing here is derived by the engine; the
verify module compares these against what opalg_module computes.
"""

from fractions import Fraction

from opalg_module import (
    I_UNIT,
    OperatorPolynomial,
    angular_momentum,
    antisymmetric_tensor,
    constant,
    generators,
    omega_tilde_squared,
)


def _sum_of_angular_momenta() -> OperatorPolynomial:
    return angular_momentum("x") + angular_momentum("y") + angular_momentum("z")


def noncommutative_lz() -> OperatorPolynomial:
    # L^_z = a^2 L_z + (theta/2hbar)(-p_x^2 - p_y^2 + p_x p_z + p_y p_z)
    #        + (eta/2hbar)(-x^2 - y^2 + xz + yz)
    #        + (theta eta / 4 a^2 hbar^2)(L_x + L_y + L_z)
    x, y, z, p_x, p_y, p_z = generators()
    return (
        angular_momentum("z").scale(alpha=2)
        + (-p_x * p_x - p_y * p_y + p_x * p_z + p_y * p_z).scale(Fraction(1, 2), theta=1, hbar=-1)
        + (-x * x - y * y + x * z + y * z).scale(Fraction(1, 2), eta=1, hbar=-1)
        + _sum_of_angular_momenta().scale(Fraction(1, 4), theta=1, eta=1, alpha=-2, hbar=-2)
    )


def noncommutative_momentum_square() -> OperatorPolynomial:
    # p^2 = a^2 p^2 - (eta/hbar)(L_x + L_y + L_z)
    #       + (eta^2 / 2 a^2 hbar^2)(x^2 - xy + y^2 - xz - yz + z^2)
    x, y, z, p_x, p_y, p_z = generators()
    return (
        (p_x * p_x + p_y * p_y + p_z * p_z).scale(alpha=2)
        - _sum_of_angular_momenta().scale(eta=1, hbar=-1)
        + (x * x - x * y + y * y - x * z - y * z + z * z).scale(Fraction(1, 2), eta=2, alpha=-2, hbar=-2)
    )


def noncommutative_radius_square() -> OperatorPolynomial:
    # x^2 + y^2 = a^2 (x^2 + y^2) + (theta/hbar)(-L_z + (x - y) p_z)
    #             + (theta^2 / 4 a^2 hbar^2)(p_x^2 + p_y^2 + 2 p_z^2 - 2 p_x p_z - 2 p_y p_z)
    x, y, z, p_x, p_y, p_z = generators()
    return (
        (x * x + y * y).scale(alpha=2)
        + (-angular_momentum("z") + (x - y) * p_z).scale(theta=1, hbar=-1)
        + (p_x * p_x + p_y * p_y + (p_z * p_z).scale(2) - (p_x * p_z).scale(2) - (p_y * p_z).scale(2)).scale(
            Fraction(1, 4), theta=2, alpha=-2, hbar=-2
        )
    )


def noncommutative_axial_square() -> OperatorPolynomial:
    # z^2 = a^2 z^2 + (theta/hbar) z (p_y - p_x) + (theta^2 / 4 a^2 hbar^2)(p_x - p_y)^2
    _, _, z, p_x, p_y, _ = generators()
    return (
        (z * z).scale(alpha=2)
        + (z * (p_y - p_x)).scale(theta=1, hbar=-1)
        + ((p_x - p_y) * (p_x - p_y)).scale(Fraction(1, 4), theta=2, alpha=-2, hbar=-2)
    )


def h_eta() -> OperatorPolynomial:
    # H_eta = -(1/2m)(L_x + L_y + L_z) - (1/4) omega_c (-x^2 - y^2 + xz + yz)
    x, y, z, *_ = generators()
    return (
        _sum_of_angular_momenta().scale(Fraction(-1, 2), m=-1)
        + (-x * x - y * y + x * z + y * z).scale(Fraction(-1, 4), omega_c=1)
    )


def h_theta() -> OperatorPolynomial:
    # H_theta = -(1/4) omega_c (-p_x^2 - p_y^2 + p_x p_z + p_y p_z)
    #           + (1/2) m omega~^2 (-L_z + (x - y) p_z) + (1/2) m omega^2 z (p_y - p_x)
    x, y, z, p_x, p_y, p_z = generators()
    return (
        (-p_x * p_x - p_y * p_y + p_x * p_z + p_y * p_z).scale(Fraction(-1, 4), omega_c=1)
        + omega_tilde_squared() * (-angular_momentum("z") + (x - y) * p_z).scale(Fraction(1, 2), m=1)
        + (z * (p_y - p_x)).scale(Fraction(1, 2), m=1, omega=2)
    )


def h_eta_theta() -> OperatorPolynomial:
    # H_eta_theta = (omega_c / 8 a^2)(L_x + L_y + L_z)
    return _sum_of_angular_momenta().scale(Fraction(1, 8), omega_c=1, alpha=-2)


def h_eta_squared() -> OperatorPolynomial:
    # H_eta^2 = (1 / 4 m a^2)(x^2 - xy + y^2 - xz - yz + z^2)
    x, y, z, *_ = generators()
    return (x * x - x * y + y * y - x * z - y * z + z * z).scale(Fraction(1, 4), m=-1, alpha=-2)


def h_theta_squared() -> OperatorPolynomial:
    # H_theta^2 = (1 / 4 a^2)[(1/2) m omega~^2 (p_x^2 + p_y^2 + 2 p_z^2 - 2 p_x p_z - 2 p_y p_z)
    #                         + (1/2) m omega^2 (p_x - p_y)^2]
    _, _, _, p_x, p_y, p_z = generators()
    radial = p_x * p_x + p_y * p_y + (p_z * p_z).scale(2) - (p_x * p_z).scale(2) - (p_y * p_z).scale(2)
    return (
        omega_tilde_squared() * radial.scale(Fraction(1, 8), m=1, alpha=-2)
        + ((p_x - p_y) * (p_x - p_y)).scale(Fraction(1, 8), m=1, omega=2, alpha=-2)
    )


def coulomb_gauge_hamiltonian() -> OperatorPolynomial:
    # H = (1/2m)[(p_x + m omega_c y / 2)^2 + (p_y - m omega_c x / 2)^2 + p_z^2]
    #     + (1/2) m omega^2 (x^2 + y^2 + z^2)
    x, y, z, p_x, p_y, p_z = generators()
    pi_x = p_x + y.scale(Fraction(1, 2), m=1, omega_c=1)
    pi_y = p_y - x.scale(Fraction(1, 2), m=1, omega_c=1)
    return (
        (pi_x * pi_x + pi_y * pi_y + p_z * p_z).scale(Fraction(1, 2), m=-1)
        + (x * x + y * y + z * z).scale(Fraction(1, 2), m=1, omega=2)
    )


def position_commutator(i: int, j: int) -> OperatorPolynomial:
    # [x^_i, x^_j] = i theta_ij
    return constant(I_UNIT * antisymmetric_tensor(i, j), theta=1)


def momentum_commutator(i: int, j: int) -> OperatorPolynomial:
    # [p^_i, p^_j] = i eta_ij
    return constant(I_UNIT * antisymmetric_tensor(i, j), eta=1)


def mixed_commutator() -> OperatorPolynomial:
    # [x^_i, p^_i] = i hbar_eff, hbar_eff = a^2 hbar + theta eta / (2 a^2 hbar)
    return constant(I_UNIT, alpha=2, hbar=1) + constant(I_UNIT * Fraction(1, 2), theta=1, eta=1, alpha=-2, hbar=-1)


EXPANSIONS = {
    "L_z": noncommutative_lz,
    "p^2": noncommutative_momentum_square,
    "x^2+y^2": noncommutative_radius_square,
    "z^2": noncommutative_axial_square,
}

GROUPS = {
    (0, 1): ("H_eta", h_eta),
    (1, 0): ("H_theta", h_theta),
    (1, 1): ("H_eta_theta", h_eta_theta),
    (0, 2): ("H_eta^2", h_eta_squared),
    (2, 0): ("H_theta^2", h_theta_squared),
}

