#!/usr/bin/env python3
"""
Comparison reports for the non-commutative oscillator.

Symbolic side: the engine's expansions against the published right-hand sides
in published_forms, plus engine-internal identities flagged as hard.
Numeric side: first-order corrections from perturbation theory, finite
differences, the published closed forms and the derived closed forms.
"""

import json
import logging
import math
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import jinja2  # type: ignore
import numpy as np
import pandas as pd  # type: ignore

import published_forms
from fock_module import (
    MAX_STATES,
    BasisState,
    HermitianMatrix,
    TruncatedBasis,
    compose,
    fd_slopes,
    first_order_pt,
    hamiltonian_parts,
)
from model_module import PhysicalParams, derived_corrections, paper_corrections
from opalg_module import (
    MOMENTA,
    POSITIONS,
    I_UNIT,
    OperatorPolynomial,
    adjoint,
    angular_momentum,
    bopp_rule,
    bopp_shift,
    collect_orders,
    commutative_hamiltonian,
    commutator,
    constant,
    expanded_hamiltonian,
    generator,
    hamiltonian_groups,
    reassemble,
)

REPORT_COLUMNS = [
    "n_rho", "mu", "n_z", "E0", "dE_pt", "dE_fd", "dE_paper", "dE_derived",
    "res_paper", "res_derived", "res_fd", "degenerate",
]
GRID_PLANAR = 4
GRID_AXIAL = 1
FD_RTOL = 1e-6
DERIVED_RTOL = 1e-8
SCALE_FLOOR = 1e-6

CONVENTIONS = {
    "binomial": "C(n,k) = n(n-1)...(n-k+1)/k! for k >= 0 and any integer n; C(n,k) = 0 for k < 0",
    "mu_sign": (
        "rows use <L_z> = hbar*mu with mu = n_plus - n_minus, so E0 carries -hbar*omega_c*mu/2; "
        "the published eigenvalue carries +hbar*omega_c*mu/2"
    ),
    "p_z_typo": "p_z -> alpha*p_z + (eta/2 alpha hbar)(x - y), the missing '+' restored by symmetry with p_x and p_y",
}


@dataclass
class IdentityCheck:
    """One symbolic comparison; hard checks are engine-internal and must always match."""

    name: str
    engine: OperatorPolynomial
    printed: OperatorPolynomial
    residual: OperatorPolynomial
    status: str
    hard: bool = False

    @property
    def residual_terms(self) -> List[str]:
        return [term.render() for term in self.residual]


@dataclass
class CorrectionRow:
    n_rho: int
    mu: int
    n_z: int
    E0: float
    dE_pt: float
    dE_fd: float
    dE_paper: float
    dE_derived: float
    res_paper: float
    res_derived: float
    res_fd: float
    degenerate: bool


def compare(name: str, engine: OperatorPolynomial, printed: OperatorPolynomial, hard: bool = False) -> IdentityCheck:
    residual = engine - printed
    return IdentityCheck(name, engine, printed, residual, "MISMATCH" if residual else "MATCH", hard)


def _expansion_checks() -> List[IdentityCheck]:
    x, y, z, p_x, p_y, p_z = (generator(name) for name in POSITIONS + MOMENTA)
    operators = {
        "L_z": angular_momentum("z"),
        "p^2": p_x * p_x + p_y * p_y + p_z * p_z,
        "x^2+y^2": x * x + y * y,
        "z^2": z * z,
    }
    return [
        compare(f"{name} expansion", bopp_shift(operators[name]), printed())
        for name, printed in published_forms.EXPANSIONS.items()
    ]


def _group_checks() -> List[IdentityCheck]:
    groups = hamiltonian_groups()
    checks = [compare("alpha^2 H0", groups.get((0, 0), OperatorPolynomial()), commutative_hamiltonian().scale(alpha=2))]
    for order, (name, printed) in published_forms.GROUPS.items():
        checks.append(compare(name, groups.get(order, OperatorPolynomial()), printed()))
    return checks


def _engine_checks() -> List[IdentityCheck]:
    whole = expanded_hamiltonian()
    parts = collect_orders(whole)
    checks = [compare("reassembly", reassemble(parts), whole, hard=True)]
    for (theta_power, eta_power), part in parts.items():
        checks.append(compare(f"hermitian H({theta_power},{eta_power})", adjoint(part), part, hard=True))
    for i, position in enumerate(POSITIONS):
        for j, momentum in enumerate(MOMENTA):
            expected = constant(I_UNIT, hbar=1) if i == j else OperatorPolynomial()
            checks.append(
                compare(f"[{position},{momentum}]", commutator(generator(position), generator(momentum)), expected, hard=True)
            )
    return checks


def _commutator_checks() -> List[IdentityCheck]:
    checks = []
    for i, j in ((0, 1), (1, 2), (2, 0)):
        checks.append(compare(
            f"[{POSITIONS[i]}^,{POSITIONS[j]}^]",
            commutator(bopp_rule(POSITIONS[i]), bopp_rule(POSITIONS[j])),
            published_forms.position_commutator(i, j),
        ))
        checks.append(compare(
            f"[{MOMENTA[i]}^,{MOMENTA[j]}^]",
            commutator(bopp_rule(MOMENTA[i]), bopp_rule(MOMENTA[j])),
            published_forms.momentum_commutator(i, j),
        ))
    for i in range(3):
        checks.append(compare(
            f"[{POSITIONS[i]}^,{MOMENTA[i]}^]",
            commutator(bopp_rule(POSITIONS[i]), bopp_rule(MOMENTA[i])),
            published_forms.mixed_commutator(),
        ))
    return checks


def verify_expansion() -> List[IdentityCheck]:
    """
    Run every symbolic comparison.

    Returns:
        List[IdentityCheck]: Expansions, Hamiltonian groups, the Coulomb-gauge form,
        the non-commutative commutator table, then the hard engine identities.
    """
    return (
        _expansion_checks()
        + _group_checks()
        + [compare("Coulomb gauge", published_forms.coulomb_gauge_hamiltonian(), commutative_hamiltonian())]
        + _commutator_checks()
        + _engine_checks()
    )


def acceptance_grid(basis: TruncatedBasis) -> List[BasisState]:
    """States with n_plus + n_minus <= 4 and n_z <= 1 that the basis holds, in basis order."""
    return [
        state for state in basis.states
        if state.planar_quanta <= GRID_PLANAR and state.n_z <= GRID_AXIAL
    ]


def verify_corrections(
    params: PhysicalParams,
    basis: TruncatedBasis,
    logger: logging.Logger,
    states: Optional[Sequence[BasisState]] = None,
    deg_tol: float = 1e-8,
    fd_step: float = 1e-4,
    fd_levels: int = 2,
    max_states: int = MAX_STATES,
) -> List[CorrectionRow]:
    """
    Tabulate first-order corrections for each state.

    PT uses V = (theta/hbar) H_theta + (eta/hbar) H_eta; the finite-difference
    value is eta * dE/d(eta) + theta * dE/d(theta). Degenerate states carry
    their cluster's block eigenvalue and no finite-difference value.

    Args:
        params (PhysicalParams): Physical parameters.
        basis (TruncatedBasis): Basis for PT and finite differences.
        logger (logging.Logger): Logger instance.
        states (Optional[Sequence[BasisState]]): States to tabulate; defaults to the acceptance grid.
        deg_tol (float): Relative degeneracy tolerance.
        fd_step (float): Largest finite-difference step.
        fd_levels (int): Number of Richardson levels.
        max_states (int): Capacity limit for the assembled operators.

    Returns:
        List[CorrectionRow]: One row per state, in the given order.
    """
    if states is None:
        states = acceptance_grid(basis)
    logger.info(f"Verifying first-order corrections for {len(states)} states on basis ({basis.n_xy}, {basis.n_z})")
    parts = hamiltonian_parts(params, basis, logger, max_states)
    h0 = HermitianMatrix(parts[(0, 0)], basis)
    first_order = {order: matrix for order, matrix in parts.items() if order in ((1, 0), (0, 1))}
    v = compose(first_order, basis, params.theta, params.eta)
    pt = first_order_pt(h0, v, logger, deg_tol, params.hbar * params.omega_tilde)

    tracked = [state for state in states if not pt.is_degenerate(state)]
    fd = np.zeros(len(tracked))
    for channel in ("eta", "theta"):
        strength = getattr(params, channel)
        if strength and tracked:
            fd = fd + strength * fd_slopes(params, channel, tracked, basis, logger, fd_step, fd_levels, deg_tol, parts)
    fd_by_state = dict(zip(tracked, fd))

    energies = h0.diagonal()
    rows = []
    for state in states:
        qn = state.quantum_numbers()
        dE_pt = pt.correction(state)
        dE_fd = float(fd_by_state.get(state, math.nan))
        dE_paper = paper_corrections(qn, params).total
        dE_derived = derived_corrections(qn, params).total
        rows.append(CorrectionRow(
            n_rho=qn.n_rho,
            mu=qn.mu,
            n_z=qn.n_z,
            E0=float(energies[basis.index_of(state)]),
            dE_pt=dE_pt,
            dE_fd=dE_fd,
            dE_paper=dE_paper,
            dE_derived=dE_derived,
            res_paper=dE_pt - dE_paper,
            res_derived=dE_pt - dE_derived,
            res_fd=dE_pt - dE_fd,
            degenerate=pt.is_degenerate(state),
        ))
    return rows


def correction_failures(rows: Iterable[CorrectionRow], params: PhysicalParams) -> List[str]:
    """Engine-vs-engine disagreements on non-degenerate rows; empty when PT, fd and derived agree."""
    floor = params.hbar * params.omega_tilde * SCALE_FLOOR
    failures = []
    for row in rows:
        if row.degenerate:
            continue
        scale = max(abs(row.dE_pt), floor)
        label = f"(n_rho={row.n_rho}, mu={row.mu}, n_z={row.n_z})"
        if not abs(row.res_fd) <= FD_RTOL * scale:
            failures.append(f"{label}: PT {row.dE_pt:.17g} vs finite difference {row.dE_fd:.17g}")
        if not abs(row.res_derived) <= DERIVED_RTOL * scale:
            failures.append(f"{label}: PT {row.dE_pt:.17g} vs derived {row.dE_derived:.17g}")
    return failures


def hard_failures(checks: Iterable[IdentityCheck]) -> List[IdentityCheck]:
    return [check for check in checks if check.hard and check.status != "MATCH"]


def _json_float(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def rows_to_frame(rows: Sequence[CorrectionRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(row) for row in rows], columns=REPORT_COLUMNS)


def emit_report(
    checks: Sequence[IdentityCheck],
    rows: Sequence[CorrectionRow],
    fmt: str,
    logger: logging.Logger,
) -> str:
    """
    Serialize a report.

    CSV holds the correction table only (floats with 17 significant digits, NaN as nan).
    JSON holds identities, corrections and the conventions block (NaN as null).

    Raises:
        ValueError: If fmt is neither csv nor json.
    """
    if fmt == "csv":
        return rows_to_frame(rows).to_csv(index=False, float_format="%.17g", na_rep="nan", lineterminator="\n")
    if fmt == "json":
        document = {
            "identities": [
                {"name": check.name, "status": check.status, "hard": check.hard, "residual_terms": check.residual_terms}
                for check in checks
            ],
            "corrections": [
                {key: _json_float(value) for key, value in asdict(row).items()} for row in rows
            ],
            "conventions": CONVENTIONS,
        }
        return json.dumps(document, indent=2, allow_nan=False) + "\n"
    logger.error(f"Unknown report format {fmt!r}")
    raise ValueError(f"Unknown report format {fmt!r}; expected csv or json")


def _current_umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def write_atomic(path: Path, content: str, logger: logging.Logger) -> None:
    """Write content to a temporary file next to path and rename it into place."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        descriptor, temporary = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(descriptor, "w", encoding="utf-8", newline="") as stream:
                stream.write(content)
            # mkstemp creates 0600; give the file the mode open() would
            os.chmod(temporary, 0o666 & ~_current_umask())
            os.replace(temporary, path)
        except BaseException:
            if os.path.exists(temporary):
                os.remove(temporary)
            raise
    except OSError as e:
        logger.exception(f"Could not write {path}: {e}")
        raise
    logger.info(f"Wrote {path}")


def template_environment() -> jinja2.Environment:
    script_dir = os.path.dirname(os.path.realpath(__file__))
    return jinja2.Environment(
        loader=jinja2.FileSystemLoader(os.path.join(script_dir, "templates/")),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )


def render_summary(
    checks: Sequence[IdentityCheck],
    rows: Sequence[CorrectionRow],
    params: PhysicalParams,
    failures: Sequence[str] = (),
) -> str:
    """Human-readable verification summary."""
    template = template_environment().get_template("verify_summary.txt")
    return template.render(
        params=params.as_dict(),
        checks=checks,
        matched=sum(1 for check in checks if check.status == "MATCH"),
        rows=rows,
        degenerate=sum(1 for row in rows if row.degenerate),
        failures=failures,
        hard_failures=hard_failures(checks),
        conventions=CONVENTIONS,
    )
