#!/usr/bin/env python3
"""
nco: command-line front end of the non-commutative oscillator toolkit.

Subcommands:
    expand    grouped expansion of H0(x^, p^) in the commutative algebra
    spectrum  exact diagonalization of the full expanded Hamiltonian
    pt        first-order corrections on the acceptance grid
    verify    symbolic identities plus the correction report; exit 2 on engine disagreement
    sweep     spectra along one parameter axis
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

import pandas as pd  # type: ignore

from config_module import KNOWN_KEYS, RUN_DEFAULTS, ConfigError, RunConfig, load_config
from fock_module import (
    CapacityExceeded,
    ConvergenceFailure,
    DegenerateState,
    NonHermitianInput,
    StateOutOfBasis,
    TrackingLost,
    enumerate_basis,
    full_spectrum,
)
from logging_handler import Logger
from model_module import PhysicalParams, ValidityRatioUndefined, validity_ratios
from opalg_module import NonFiniteCoefficient, hamiltonian_groups
from verify_module import (
    correction_failures,
    emit_report,
    hard_failures,
    render_summary,
    template_environment,
    verify_corrections,
    verify_expansion,
    write_atomic,
)

VERSION = "0.1.0"
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ENGINE = 2
VALIDITY_LIMIT = 1e-2
GROUP_LABELS = {
    (0, 0): "alpha^2 * H0",
    (0, 1): "eta/hbar * H_eta",
    (1, 0): "theta/hbar * H_theta",
    (1, 1): "theta*eta/hbar^2 * H_eta_theta",
    (0, 2): "eta^2/hbar^2 * H_eta^2",
    (2, 0): "theta^2/hbar^2 * H_theta^2",
}
ENGINE_ERRORS = (
    CapacityExceeded,
    ConvergenceFailure,
    DegenerateState,
    NonFiniteCoefficient,
    NonHermitianInput,
    StateOutOfBasis,
    TrackingLost,
)


class NcoArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 1; status 2 is reserved for verify."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", type=Path, default=None, help="Config file of 'key = value' lines. Default: the file named by NCO_CONFIG, if set.")
    common.add_argument("-V", "--verbose", action="store_true", help="increase logging verbosity")
    physics = common.add_argument_group("physical parameters")
    physics.add_argument("--hbar", type=float, help="Reduced Planck constant. Default: 1")
    physics.add_argument("--m", type=float, help="Mass. Default: 1")
    physics.add_argument("--omega", type=float, help="Trap frequency. Default: 1")
    physics.add_argument("--omega-c", type=float, help="Cyclotron frequency. Default: 0.7")
    physics.add_argument("--alpha", type=float, help="Bopp-shift scale in (0, 1]. Default: 1")
    physics.add_argument("--theta", type=float, help="Position non-commutativity. Default: 0")
    physics.add_argument("--eta", type=float, help="Momentum non-commutativity. Default: 0")
    physics.add_argument("--charge", type=float, help="Charge q; with --field and --light-speed sets omega_c = qB/(mc)")
    physics.add_argument("--field", type=float, help="Magnetic field B")
    physics.add_argument("--light-speed", type=float, help="Speed of light c")
    numerics = common.add_argument_group("numerics and output")
    numerics.add_argument("--cutoff-xy", type=int, help="Largest n_plus + n_minus. Default: 12")
    numerics.add_argument("--cutoff-z", type=int, help="Largest n_z. Default: 6")
    numerics.add_argument("--deg-tol", type=float, help="Degeneracy tolerance relative to hbar*omega~. Default: 1e-8")
    numerics.add_argument("--fd-step", type=float, help="Finite-difference step. Default: 1e-4")
    numerics.add_argument("--fd-levels", type=int, help="Richardson levels. Default: 2")
    numerics.add_argument("--max-states", type=int, help="Basis capacity limit. Default: 20000")
    numerics.add_argument("--sweep", type=str, help="Sweep axis param:start:stop:count")
    numerics.add_argument("--sweep-levels", type=int, help="Levels kept per sweep point. Default: 10")
    numerics.add_argument("--workers", type=int, help="Worker threads for sweeps. Default: 1")
    numerics.add_argument("-o", "--out", type=Path, help="Output file. Default: standard output")
    numerics.add_argument("-f", "--format", type=str, help="csv or json. Default: csv")
    numerics.add_argument("--log-dir", type=Path, help="Folder for application.log. Default: ./nco/logs")

    parser = NcoArgumentParser(
        prog="nco",
        description="Non-commutative phase-space corrections to a charged 3D oscillator in a magnetic field",
        epilog="Outputs are written atomically; identical configurations give byte-identical files.",
    )
    parser.add_argument("-v", "--version", action="version", version=f"%(prog)s {VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=NcoArgumentParser)
    subparsers.add_parser("expand", parents=[common], help="print the grouped symbolic expansion")
    subparsers.add_parser("spectrum", parents=[common], help="diagonalize the full Hamiltonian")
    subparsers.add_parser("pt", parents=[common], help="first-order corrections on the acceptance grid")
    subparsers.add_parser("verify", parents=[common], help="symbolic and numeric verification report")
    subparsers.add_parser("sweep", parents=[common], help="spectra along a parameter axis")
    return parser


def overrides_from_args(args: argparse.Namespace) -> dict:
    return {key: getattr(args, key) for key in KNOWN_KEYS if getattr(args, key, None) is not None}


def emit(text: str, config: RunConfig, logger) -> None:
    if config.out is None:
        sys.stdout.write(text)
    else:
        write_atomic(config.out, text, logger)


def check_validity(params: PhysicalParams, logger) -> None:
    """Warn when a first-order smallness ratio is not small."""
    try:
        r_eta, r_theta = validity_ratios(params)
    except ValidityRatioUndefined:
        logger.info("r_eta is undefined at omega_c = 0")
        r_eta, r_theta = None, params.theta * params.m * params.omega_tilde / params.hbar
    for name, ratio in (("r_eta", r_eta), ("r_theta", r_theta)):
        if ratio is not None and abs(ratio) >= VALIDITY_LIMIT:
            logger.warning(f"{name} = {ratio:.3g}; first-order results assume it is much smaller than 1")


def run_expand(config: RunConfig, logger) -> int:
    groups = hamiltonian_groups()
    listing = [
        {"order": list(order), "label": label, "terms": [term.render() for term in groups[order]]}
        for order, label in GROUP_LABELS.items()
        if order in groups
    ]
    if config.format == "json":
        text = json.dumps({"groups": listing}, indent=2) + "\n"
    else:
        text = template_environment().get_template("expand.txt").render(groups=listing)
    emit(text, config, logger)
    return EXIT_OK


def run_spectrum(config: RunConfig, logger) -> int:
    params = config.params
    spectrum = full_spectrum(params, config.cutoff_xy, config.cutoff_z, logger, max_states=config.max_states)
    if config.format == "json":
        document = {
            "omega_tilde": params.omega_tilde,
            "cutoffs": [config.cutoff_xy, config.cutoff_z],
            "eigenvalues": [float(value) for value in spectrum.eigenvalues],
        }
        text = json.dumps(document, indent=2) + "\n"
    else:
        frame = pd.DataFrame({"level": range(len(spectrum.eigenvalues)), "energy": spectrum.eigenvalues})
        text = f"# omega_tilde={params.omega_tilde:.17g}\n" + frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
    emit(text, config, logger)
    return EXIT_OK


def _correction_rows(config: RunConfig, logger):
    basis = enumerate_basis(config.cutoff_xy, config.cutoff_z, logger, config.max_states)
    check_validity(config.params, logger)
    return verify_corrections(
        config.params, basis, logger,
        deg_tol=config.deg_tol, fd_step=config.fd_step, fd_levels=config.fd_levels, max_states=config.max_states,
    )


def run_pt(config: RunConfig, logger) -> int:
    rows = _correction_rows(config, logger)
    emit(emit_report([], rows, config.format, logger), config, logger)
    return EXIT_OK


def run_verify(config: RunConfig, logger) -> int:
    checks = verify_expansion()
    rows = _correction_rows(config, logger)
    failures = correction_failures(rows, config.params)
    broken = hard_failures(checks)
    summary = render_summary(checks, rows, config.params, failures)
    emit(emit_report(checks, rows, config.format, logger), config, logger)
    if config.out is None:
        sys.stderr.write(summary)
    else:
        write_atomic(config.out.with_name(config.out.stem + ".summary.txt"), summary, logger)
    for check in broken:
        logger.error(f"Hard identity {check.name} does not hold: {check.residual_terms}")
    for failure in failures:
        logger.error(failure)
    return EXIT_ENGINE if broken or failures else EXIT_OK


def run_sweep(config: RunConfig, logger) -> int:
    axis = config.sweep
    if axis is None:
        logger.error("sweep needs a sweep axis (--sweep param:start:stop:count or 'sweep =' in the config)")
        return EXIT_ERROR
    points = [config.params.replace(**{axis.param: float(value)}) for value in axis.values()]
    logger.info(f"Sweeping {axis} with {config.workers} worker(s)")

    def lowest_levels(params: PhysicalParams):
        spectrum = full_spectrum(params, config.cutoff_xy, config.cutoff_z, logger, max_states=config.max_states)
        return spectrum.eigenvalues[: config.sweep_levels]

    with ThreadPoolExecutor(max_workers=config.workers) as executor:
        spectra = list(executor.map(lowest_levels, points))

    if config.format == "json":
        document = {
            "sweep": str(axis),
            "points": [
                {
                    "point": index,
                    "value": getattr(params, axis.param),
                    "omega_tilde": params.omega_tilde,
                    "energies": [float(value) for value in energies],
                }
                for index, (params, energies) in enumerate(zip(points, spectra))
            ],
        }
        text = json.dumps(document, indent=2) + "\n"
    else:
        records = [
            {
                "point": index,
                "param": axis.param,
                "value": getattr(params, axis.param),
                "omega_tilde": params.omega_tilde,
                "level": level,
                "energy": float(energy),
            }
            for index, (params, energies) in enumerate(zip(points, spectra))
            for level, energy in enumerate(energies)
        ]
        frame = pd.DataFrame(records, columns=["point", "param", "value", "omega_tilde", "level", "energy"])
        text = frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
    emit(text, config, logger)
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig, object], int]] = {
    "expand": run_expand,
    "spectrum": run_spectrum,
    "pt": run_pt,
    "verify": run_verify,
    "sweep": run_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, set up logging and configuration, and dispatch the subcommand."""
    args = build_parser().parse_args(argv)

    log_dir = args.log_dir or RUN_DEFAULTS["log_dir"]
    logger = Logger("nco", log_dir, args.verbose).get_logger()
    logger.info(f"Starting nco {args.command}")
    try:
        config = load_config(args.config, overrides_from_args(args), logger)
    except ConfigError as e:
        logger.error(f"Configuration rejected: {e}")
        return EXIT_ERROR
    if Path(config.log_dir) != Path(log_dir):
        logger = Logger("nco", config.log_dir, args.verbose).get_logger()

    try:
        return COMMANDS[args.command](config, logger)
    except ENGINE_ERRORS as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR
    except OSError as e:
        logger.error(f"{args.command} could not write its output: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
