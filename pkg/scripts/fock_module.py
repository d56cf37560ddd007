#!/usr/bin/env python3
"""
Numerical engine on a truncated circular oscillator basis.

States are |n_plus, n_minus, n_z> with mu = n_plus - n_minus, so that
L_z = hbar (N_plus - N_minus) and the commutative Hamiltonian is diagonal.
Operator polynomials from opalg_module are assembled into dense matrices by
multiplying ladder matrices on a basis enlarged by the polynomial degree and
projecting back, which makes every matrix element of a polynomial exact.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy import linalg
from scipy.sparse import coo_matrix, csr_matrix, identity

from model_module import PhysicalParams, QuantumNumbers
from opalg_module import (
    OPERATORS,
    NumericOperatorPolynomial,
    OperatorPolynomial,
    collect_orders,
    evaluate_coefficients,
    expanded_hamiltonian,
    reassemble,
)

MAX_STATES = 20000
HERMITICITY_TOL = 1e-12
DIAGONAL_TOL = 1e-10
TRACKING_OVERLAP = 0.9
CHANNEL_ORDERS = {"eta": (0, 1), "theta": (1, 0)}


class CapacityExceeded(RuntimeError):
    """Raised when a (possibly padded) basis would exceed the configured state limit."""


class NonHermitianInput(ValueError):
    """Raised when a matrix handed to the Hermitian eigensolver is not Hermitian."""


class ConvergenceFailure(RuntimeError):
    """Raised when LAPACK fails to diagonalize a matrix."""


class StateOutOfBasis(LookupError):
    """Raised when a state is not part of the truncated basis."""


class DegenerateState(ValueError):
    """Raised when a finite-difference slope is requested for a degenerate state."""


class TrackingLost(RuntimeError):
    """Raised when no eigenvector overlaps the tracked basis state by at least 0.9."""


@dataclass(frozen=True)
class BasisState:
    """Chiral occupation numbers |n_plus, n_minus, n_z>."""

    n_plus: int
    n_minus: int
    n_z: int

    def __post_init__(self):
        if min(self.n_plus, self.n_minus, self.n_z) < 0:
            raise ValueError(f"Occupation numbers must be nonnegative, got {self}")

    @property
    def mu(self) -> int:
        return self.n_plus - self.n_minus

    @property
    def n_rho(self) -> int:
        return min(self.n_plus, self.n_minus)

    @property
    def planar_quanta(self) -> int:
        return self.n_plus + self.n_minus

    @classmethod
    def from_quantum_numbers(cls, qn: QuantumNumbers) -> "BasisState":
        return cls(qn.n_rho + max(qn.mu, 0), qn.n_rho + max(-qn.mu, 0), qn.n_z)

    def quantum_numbers(self) -> QuantumNumbers:
        return QuantumNumbers(self.n_rho, self.mu, self.n_z)


@dataclass(frozen=True)
class TruncatedBasis:
    """All states with n_plus + n_minus <= n_xy and n_z <= n_z, ordered by (n_plus + n_minus, n_z, mu)."""

    n_xy: int
    n_z: int
    states: tuple = field(default=(), compare=False, repr=False)
    index: Mapping = field(default_factory=dict, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __contains__(self, state) -> bool:
        return state in self.index

    def index_of(self, state: BasisState) -> int:
        try:
            return self.index[state]
        except KeyError as e:
            raise StateOutOfBasis(f"{state} is not in the basis ({self.n_xy}, {self.n_z})") from e


@dataclass(eq=False)
class HermitianMatrix:
    """Dense complex matrix in the ordering of its basis."""

    data: np.ndarray
    basis: Optional[TruncatedBasis] = None

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    @property
    def hermiticity_defect(self) -> float:
        if not self.data.size:
            return 0.0
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.data)).copy()

    def __add__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        return HermitianMatrix(self.data + other.data, self.basis)


@dataclass(eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    basis: Optional[TruncatedBasis] = None


@dataclass(eq=False)
class PTResult:
    """
    First-order corrections per basis state.

    Attributes:
        corrections (np.ndarray): One correction per basis state, in basis order.
        clusters (tuple): Index tuples of the degenerate clusters, singletons included.
        cluster_eigenvalues (tuple): Sorted eigenvalues of V restricted to each cluster.
        basis (TruncatedBasis): The basis the indices refer to.
    """

    corrections: np.ndarray
    clusters: tuple
    cluster_eigenvalues: tuple
    basis: Optional[TruncatedBasis] = None

    def _cluster_of(self, index: int) -> tuple:
        for cluster in self.clusters:
            if index in cluster:
                return cluster
        raise StateOutOfBasis(f"Index {index} is not covered by any cluster")

    def correction(self, state: BasisState) -> float:
        return float(self.corrections[self.basis.index_of(state)])

    def is_degenerate(self, state: BasisState) -> bool:
        return len(self._cluster_of(self.basis.index_of(state))) > 1


def basis_size(n_xy: int, n_z: int) -> int:
    return (n_xy + 1) * (n_xy + 2) // 2 * (n_z + 1)


@lru_cache(maxsize=32)
def _build_basis(n_xy: int, n_z: int) -> TruncatedBasis:
    states = tuple(
        BasisState(n_plus, planar - n_plus, axial)
        for planar in range(n_xy + 1)
        for axial in range(n_z + 1)
        for n_plus in range(planar + 1)
    )
    return TruncatedBasis(n_xy, n_z, states, {state: i for i, state in enumerate(states)})


def enumerate_basis(n_xy: int, n_z: int, logger: logging.Logger, max_states: int = MAX_STATES) -> TruncatedBasis:
    """
    Enumerate the truncated basis.

    Args:
        n_xy (int): Largest n_plus + n_minus.
        n_z (int): Largest n_z.
        logger (logging.Logger): Logger instance.
        max_states (int): Capacity limit.

    Returns:
        TruncatedBasis: The ordered basis.

    Raises:
        ValueError: If a cutoff is negative.
        CapacityExceeded: If the basis would hold more than max_states states.
    """
    if n_xy < 0 or n_z < 0:
        logger.error(f"Cutoffs must be nonnegative, got ({n_xy}, {n_z})")
        raise ValueError(f"Cutoffs must be nonnegative, got ({n_xy}, {n_z})")
    size = basis_size(n_xy, n_z)
    if size > max_states:
        logger.error(f"Basis ({n_xy}, {n_z}) has {size} states, limit is {max_states}")
        raise CapacityExceeded(f"Basis ({n_xy}, {n_z}) has {size} states, limit is {max_states}")
    logger.debug(f"Basis ({n_xy}, {n_z}) with {size} states")
    return _build_basis(n_xy, n_z)


@lru_cache(maxsize=32)
def _lowering_matrices(n_xy: int, n_z: int) -> tuple:
    basis = _build_basis(n_xy, n_z)
    size = len(basis)
    lowering = []
    for mode in range(3):
        rows, cols, values = [], [], []
        for col, state in enumerate(basis.states):
            quanta = [state.n_plus, state.n_minus, state.n_z]
            if quanta[mode]:
                values.append(math.sqrt(quanta[mode]))
                quanta[mode] -= 1
                rows.append(basis.index[BasisState(*quanta)])
                cols.append(col)
        lowering.append(coo_matrix((values, (rows, cols)), shape=(size, size), dtype=complex).tocsr())
    return tuple(lowering)


@lru_cache(maxsize=32)
def _elementary_matrices(n_xy: int, n_z: int, hbar: float, m: float, omega: float, omega_c: float) -> dict:
    a_plus, a_minus, a_z = _lowering_matrices(n_xy, n_z)
    w_tilde = math.sqrt(omega ** 2 + omega_c ** 2 / 4)
    a_x = (a_plus + a_minus) / math.sqrt(2)
    a_y = 1j * (a_plus - a_minus) / math.sqrt(2)

    def position(a, w):
        return (math.sqrt(hbar / (2 * m * w)) * (a + a.conj().T)).tocsr()

    def momentum(a, w):
        return (1j * math.sqrt(m * hbar * w / 2) * (a.conj().T - a)).tocsr()

    return {
        "x": position(a_x, w_tilde),
        "y": position(a_y, w_tilde),
        "z": position(a_z, omega),
        "p_x": momentum(a_x, w_tilde),
        "p_y": momentum(a_y, w_tilde),
        "p_z": momentum(a_z, omega),
    }


def _matrices_for(basis: TruncatedBasis, params: PhysicalParams) -> dict:
    return _elementary_matrices(basis.n_xy, basis.n_z, params.hbar, params.m, params.omega, params.omega_c)


def elementary_matrix(op: str, basis: TruncatedBasis, params: PhysicalParams) -> np.ndarray:
    """Dense matrix of one canonical operator; reference frequency w~ for x, y and w for z."""
    if op not in OPERATORS:
        raise KeyError(f"Unknown operator {op!r}; expected one of {', '.join(OPERATORS)}")
    return _matrices_for(basis, params)[op].toarray()


def _monomial_matrix(matrices: dict, size: int, exponents: tuple) -> csr_matrix:
    factors = [matrices[name] for name, power in zip(OPERATORS, exponents) for _ in range(power)]
    return reduce(lambda left, right: left @ right, factors, identity(size, dtype=complex, format="csr"))


def assemble(
    poly: Union[NumericOperatorPolynomial, OperatorPolynomial],
    basis: TruncatedBasis,
    params: PhysicalParams,
    logger: logging.Logger,
    max_states: int = MAX_STATES,
) -> HermitianMatrix:
    """
    Matrix of an operator polynomial on the truncated basis.

    Products are formed on the basis padded by the polynomial degree and then
    projected, so the result equals the exact matrix elements.

    Args:
        poly: Numeric polynomial, or an exact one to be evaluated at params.
        basis (TruncatedBasis): Target basis.
        params (PhysicalParams): Physical parameters.
        logger (logging.Logger): Logger instance.
        max_states (int): Capacity limit for the padded basis.

    Returns:
        HermitianMatrix: The assembled matrix.
    """
    if isinstance(poly, OperatorPolynomial):
        poly = evaluate_coefficients(poly, params)
    padding = poly.degree
    padded = enumerate_basis(basis.n_xy + padding, basis.n_z + padding, logger, max_states)
    matrices = _matrices_for(padded, params)
    size = len(padded)
    total = csr_matrix((size, size), dtype=complex)
    for exponents, coefficient in poly:
        total = total + coefficient * _monomial_matrix(matrices, size, exponents)
    keep = np.fromiter((padded.index[state] for state in basis.states), dtype=int, count=len(basis))
    logger.debug(f"Assembled {len(poly)} monomials of degree <= {padding} on {len(basis)} states")
    return HermitianMatrix(total[keep][:, keep].toarray(), basis)


def eigensolve(
    matrix: Union[HermitianMatrix, np.ndarray],
    logger: logging.Logger,
    vectors: bool = True,
    tol: float = HERMITICITY_TOL,
) -> SpectrumResult:
    """
    Full dense Hermitian eigendecomposition, eigenvalues ascending.

    Raises:
        NonHermitianInput: If max|A - A^H| exceeds tol * max|A|.
        ConvergenceFailure: If LAPACK does not converge.
    """
    if not isinstance(matrix, HermitianMatrix):
        matrix = HermitianMatrix(np.asarray(matrix, dtype=complex))
    defect = matrix.hermiticity_defect
    if defect > tol * matrix.norm:
        logger.error(f"Matrix is not Hermitian: defect {defect:.3e}, norm {matrix.norm:.3e}")
        raise NonHermitianInput(f"Hermiticity defect {defect:.3e} exceeds {tol:.1e} * {matrix.norm:.3e}")
    try:
        if vectors:
            eigenvalues, eigenvectors = linalg.eigh(matrix.data)
        else:
            eigenvalues, eigenvectors = linalg.eigh(matrix.data, eigvals_only=True), None
    except linalg.LinAlgError as e:
        logger.exception(f"Eigensolver did not converge: {e}")
        raise ConvergenceFailure(f"Eigensolver did not converge: {e}") from e
    logger.debug(f"Diagonalized {matrix.data.shape[0]} x {matrix.data.shape[0]} matrix")
    return SpectrumResult(eigenvalues, eigenvectors, matrix.basis)


def expectation(v: HermitianMatrix, state: BasisState, logger: logging.Logger) -> float:
    """Diagonal element <s|V|s>."""
    try:
        index = v.basis.index_of(state)
    except StateOutOfBasis:
        logger.error(f"{state} is not in the basis of the operator")
        raise
    return float(np.real(v.data[index, index]))


def degeneracy_clusters(energies: np.ndarray, tolerance: float) -> tuple:
    """Chain-cluster indices whose sorted energies differ by less than tolerance; members in index order."""
    order = np.argsort(energies, kind="stable")
    clusters = []
    current = [int(order[0])] if len(order) else []
    for previous, index in zip(order[:-1], order[1:]):
        if energies[index] - energies[previous] < tolerance:
            current.append(int(index))
        else:
            clusters.append(tuple(sorted(current)))
            current = [int(index)]
    if current:
        clusters.append(tuple(sorted(current)))
    return tuple(sorted(clusters))


def first_order_pt(
    h0: HermitianMatrix,
    v: HermitianMatrix,
    logger: logging.Logger,
    deg_tol: float = 1e-8,
    energy_scale: float = 1.0,
) -> PTResult:
    """
    Degenerate-aware first-order perturbation theory for a diagonal H0.

    States whose unperturbed energies differ by less than deg_tol * energy_scale
    form a cluster. A singleton gets the diagonal element of V; a larger cluster
    gets the sorted eigenvalues of V restricted to it, handed to its members in
    basis order.

    Args:
        h0 (HermitianMatrix): Unperturbed Hamiltonian, diagonal in the basis.
        v (HermitianMatrix): Hermitian perturbation on the same basis.
        logger (logging.Logger): Logger instance.
        deg_tol (float): Relative degeneracy tolerance.
        energy_scale (float): Energy unit of the tolerance, normally hbar * w~.

    Returns:
        PTResult: Corrections, clusters and block eigenvalues.
    """
    off_diagonal = h0.data - np.diag(np.diag(h0.data))
    if off_diagonal.size and np.max(np.abs(off_diagonal)) > DIAGONAL_TOL * h0.norm:
        logger.error("Unperturbed Hamiltonian is not diagonal in the basis")
        raise ValueError("Unperturbed Hamiltonian is not diagonal in the basis")
    if v.hermiticity_defect > HERMITICITY_TOL * v.norm:
        logger.error(f"Perturbation is not Hermitian: defect {v.hermiticity_defect:.3e}")
        raise NonHermitianInput(f"Perturbation hermiticity defect {v.hermiticity_defect:.3e}")

    energies = h0.diagonal()
    clusters = degeneracy_clusters(energies, deg_tol * energy_scale)
    corrections = np.zeros(len(energies))
    block_eigenvalues = []
    for cluster in clusters:
        members = list(cluster)
        if len(members) == 1:
            values = np.array([np.real(v.data[members[0], members[0]])])
        else:
            values = linalg.eigvalsh(v.data[np.ix_(members, members)])
        corrections[members] = values
        block_eigenvalues.append(values)
    degenerate = sum(1 for cluster in clusters if len(cluster) > 1)
    logger.info(f"First-order PT on {len(energies)} states, {degenerate} degenerate cluster(s)")
    return PTResult(corrections, clusters, tuple(block_eigenvalues), h0.basis)


def hamiltonian_parts(
    params: PhysicalParams,
    basis: TruncatedBasis,
    logger: logging.Logger,
    max_states: int = MAX_STATES,
) -> dict:
    """Matrices M_(j,k) with H0(x^, p^) = sum theta^j eta^k M_(j,k); theta and eta of params are not used."""
    parts = collect_orders(expanded_hamiltonian())
    logger.debug(f"Assembling {len(parts)} Hamiltonian orders on {len(basis)} states")
    return {order: assemble(part, basis, params, logger, max_states).data for order, part in parts.items()}


def compose(parts: Mapping, basis: TruncatedBasis, theta: float, eta: float) -> HermitianMatrix:
    size = len(basis)
    data = np.zeros((size, size), dtype=complex)
    for (theta_power, eta_power), matrix in parts.items():
        data = data + theta ** theta_power * eta ** eta_power * matrix
    return HermitianMatrix(data, basis)


def unperturbed_matrix(params: PhysicalParams, basis: TruncatedBasis, logger: logging.Logger, max_states: int = MAX_STATES) -> HermitianMatrix:
    """alpha^2 H0 on the basis."""
    return assemble(collect_orders(expanded_hamiltonian())[(0, 0)], basis, params, logger, max_states)


def perturbation_matrix(
    params: PhysicalParams,
    basis: TruncatedBasis,
    channel: str,
    logger: logging.Logger,
    max_states: int = MAX_STATES,
) -> HermitianMatrix:
    """(eta/hbar) H_eta or (theta/hbar) H_theta at the parameter values in params."""
    if channel not in CHANNEL_ORDERS:
        raise ValueError(f"Unknown channel {channel!r}; expected one of {tuple(CHANNEL_ORDERS)}")
    theta_power, eta_power = CHANNEL_ORDERS[channel]
    part = collect_orders(expanded_hamiltonian()).get(CHANNEL_ORDERS[channel], OperatorPolynomial())
    return assemble(part.scale(theta=theta_power, eta=eta_power), basis, params, logger, max_states)


def full_hamiltonian(params: PhysicalParams, basis: TruncatedBasis, logger: logging.Logger, max_states: int = MAX_STATES) -> HermitianMatrix:
    """Every order of H0(x^, p^), evaluated at the theta and eta of params."""
    return assemble(reassemble(collect_orders(expanded_hamiltonian())), basis, params, logger, max_states)


def full_spectrum(
    params: PhysicalParams,
    n_xy: int,
    n_z: int,
    logger: logging.Logger,
    vectors: bool = False,
    max_states: int = MAX_STATES,
) -> SpectrumResult:
    basis = enumerate_basis(n_xy, n_z, logger, max_states)
    logger.info(f"Full spectrum on basis ({n_xy}, {n_z}), theta={params.theta}, eta={params.eta}")
    return eigensolve(full_hamiltonian(params, basis, logger, max_states), logger, vectors=vectors)


def richardson_extrapolate(base_values: Sequence, p: int, r: float = 2.0):
    """Combine estimates taken at steps shrinking by r whose leading error is O(h^p)."""
    if len(base_values) < 2:
        raise ValueError("richardson_extrapolate requires at least two base values")
    values = [np.asarray(v, dtype=float) for v in base_values]
    for j in range(1, len(values)):
        factor = r ** (p * j)
        for k in range(len(values) - 1, j - 1, -1):
            values[k] = (factor * values[k] - values[k - 1]) / (factor - 1.0)
    return values[-1]


def _tracked_energies(matrix: HermitianMatrix, indices: Sequence[int], logger: logging.Logger) -> np.ndarray:
    spectrum = eigensolve(matrix, logger)
    weights = np.abs(spectrum.eigenvectors[list(indices), :]) ** 2
    best = np.argmax(weights, axis=1)
    overlap = weights[np.arange(len(indices)), best]
    if np.any(overlap < TRACKING_OVERLAP):
        lost = [matrix.basis.states[indices[i]] for i in np.flatnonzero(overlap < TRACKING_OVERLAP)]
        logger.error(f"Lost track of {lost}: max overlap {overlap.min():.3f}")
        raise TrackingLost(f"Max overlap {overlap.min():.3f} below {TRACKING_OVERLAP} for {lost}")
    return spectrum.eigenvalues[best]


def fd_slopes(
    params: PhysicalParams,
    channel: str,
    states: Sequence[BasisState],
    basis: TruncatedBasis,
    logger: logging.Logger,
    h: float = 1e-4,
    levels: int = 2,
    deg_tol: float = 1e-8,
    parts: Optional[Mapping] = None,
) -> np.ndarray:
    """
    dE/d(theta) or dE/d(eta) at zero, for several states at once.

    Central differences at steps h, h/2, ... are Richardson-extrapolated; the
    other channel is held at zero. Each state is followed by its largest
    overlap with the unperturbed basis vector.

    Raises:
        DegenerateState: If a state shares its unperturbed energy with another.
        TrackingLost: If the largest overlap drops below 0.9.
    """
    if channel not in CHANNEL_ORDERS:
        raise ValueError(f"Unknown channel {channel!r}; expected one of {tuple(CHANNEL_ORDERS)}")
    if levels < 1 or h <= 0:
        raise ValueError(f"Need h > 0 and levels >= 1, got h={h}, levels={levels}")
    if parts is None:
        parts = hamiltonian_parts(params, basis, logger)
    indices = [basis.index_of(state) for state in states]
    energies = np.real(np.diag(parts[(0, 0)]))
    tolerance = deg_tol * params.hbar * params.omega_tilde
    for state, index in zip(states, indices):
        if np.count_nonzero(np.abs(energies - energies[index]) < tolerance) > 1:
            logger.error(f"{state} is degenerate; slope tracking is undefined")
            raise DegenerateState(f"{state} is degenerate at zero {channel}")

    estimates = []
    for level in range(levels):
        step = h / 2 ** level
        shifted = {"theta": 0.0, "eta": 0.0}
        shifted[channel] = step
        upper = _tracked_energies(compose(parts, basis, **shifted), indices, logger)
        shifted[channel] = -step
        lower = _tracked_energies(compose(parts, basis, **shifted), indices, logger)
        estimates.append((upper - lower) / (2 * step))
    logger.debug(f"Finite-difference slopes in {channel} for {len(indices)} states, {levels} level(s)")
    if levels == 1:
        return estimates[0]
    return richardson_extrapolate(estimates, p=2)


def fd_slope(
    params: PhysicalParams,
    channel: str,
    state: BasisState,
    basis: TruncatedBasis,
    logger: logging.Logger,
    h: float = 1e-4,
    levels: int = 2,
    deg_tol: float = 1e-8,
) -> float:
    return float(fd_slopes(params, channel, [state], basis, logger, h, levels, deg_tol)[0])
