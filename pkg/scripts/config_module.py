#!/usr/bin/env python3
"""
Run configuration: line-oriented `key = value` files, command-line overrides and defaults.

Precedence is flags > config file > defaults. The config file is named by
--config or, failing that, by the NCO_CONFIG environment variable.
"""

import dataclasses
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from model_module import InvalidParameter, PhysicalParams

CONFIG_ENV = "NCO_CONFIG"
FORMATS = ("csv", "json")
PARAM_KEYS = tuple(field.name for field in dataclasses.fields(PhysicalParams))
FIELD_KEYS = ("charge", "field", "light_speed")
RUN_DEFAULTS = {
    "cutoff_xy": 12,
    "cutoff_z": 6,
    "deg_tol": 1e-8,
    "fd_step": 1e-4,
    "fd_levels": 2,
    "out": None,
    "format": "csv",
    "sweep": None,
    "workers": 1,
    "max_states": 20000,
    "sweep_levels": 10,
    "log_dir": Path("./nco/logs"),
}
KNOWN_KEYS = PARAM_KEYS + FIELD_KEYS + tuple(RUN_DEFAULTS)


class ConfigError(ValueError):
    """Base class of configuration errors."""


class ConfigParseError(ConfigError):
    """A config line is not of the form `key = value`."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class UnknownConfigKey(ConfigError):
    """A key is not a known configuration key."""


class InvalidConfigValue(ConfigError):
    """A value cannot be converted or is out of range."""


@dataclass(frozen=True)
class SweepAxis:
    """One parameter varied over count evenly spaced values from start to stop."""

    param: str
    start: float
    stop: float
    count: int

    @classmethod
    def parse(cls, text: str) -> "SweepAxis":
        pieces = text.split(":")
        if len(pieces) != 4:
            raise InvalidConfigValue(f"sweep must look like param:start:stop:count, got {text!r}")
        param, start, stop, count = (piece.strip() for piece in pieces)
        if param not in PARAM_KEYS:
            raise InvalidConfigValue(f"sweep parameter must be one of {', '.join(PARAM_KEYS)}, got {param!r}")
        try:
            axis = cls(param, float(start), float(stop), int(count))
        except ValueError as e:
            raise InvalidConfigValue(f"sweep {text!r}: {e}") from e
        if axis.count < 1:
            raise InvalidConfigValue(f"sweep count must be at least 1, got {axis.count}")
        if not (math.isfinite(axis.start) and math.isfinite(axis.stop)):
            raise InvalidConfigValue(f"sweep bounds must be finite, got {text!r}")
        return axis

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def __str__(self) -> str:
        return f"{self.param}:{self.start!r}:{self.stop!r}:{self.count}"


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs."""

    params: PhysicalParams
    cutoff_xy: int = 12
    cutoff_z: int = 6
    deg_tol: float = 1e-8
    fd_step: float = 1e-4
    fd_levels: int = 2
    out: Optional[Path] = None
    format: str = "csv"
    sweep: Optional[SweepAxis] = None
    workers: int = 1
    max_states: int = 20000
    sweep_levels: int = 10
    log_dir: Path = Path("./nco/logs")


def text_to_dict(text: str, logger: logging.Logger) -> dict:
    """
    Split config text into a key -> raw value dictionary.

    Blank lines and everything after '#' are ignored.

    Raises:
        ConfigParseError: On a line without '=', an empty key, or a repeated key.
    """
    values = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            logger.error(f"Config line {line_number} has no '=': {line!r}")
            raise ConfigParseError(f"expected 'key = value', got {line.strip()!r}", line_number)
        key, value = (piece.strip() for piece in content.split("=", 1))
        if not key:
            logger.error(f"Config line {line_number} has an empty key")
            raise ConfigParseError("empty key", line_number)
        if key in values:
            logger.error(f"Config line {line_number} repeats key {key!r}")
            raise ConfigParseError(f"key {key!r} given twice", line_number)
        values[key] = value
    return values


def _convert(key: str, value, converter):
    if isinstance(value, bool):
        raise InvalidConfigValue(f"{key} must not be a boolean")
    try:
        return converter(value)
    except (TypeError, ValueError) as e:
        raise InvalidConfigValue(f"{key}: cannot use {value!r} ({e})") from e


def _bounded_int(key: str, value, minimum: int) -> int:
    number = _convert(key, value, int)
    if number < minimum:
        raise InvalidConfigValue(f"{key} must be at least {minimum}, got {number}")
    return number


def _positive_float(key: str, value) -> float:
    number = _convert(key, value, float)
    if not math.isfinite(number) or number <= 0:
        raise InvalidConfigValue(f"{key} must be positive, got {value!r}")
    return number


def remap_keys(values: Mapping, logger: logging.Logger) -> RunConfig:
    """
    Convert raw values into a validated RunConfig, filling defaults.

    Raises:
        UnknownConfigKey: If a key is not recognised.
        InvalidConfigValue: If a value is malformed or out of range.
    """
    unknown = sorted(set(values) - set(KNOWN_KEYS))
    if unknown:
        logger.error(f"Unknown configuration key(s): {', '.join(unknown)}")
        raise UnknownConfigKey(f"Unknown configuration key(s): {', '.join(unknown)}")
    try:
        physical = {key: _convert(key, values[key], float) for key in PARAM_KEYS if key in values}
        given_field = [key for key in FIELD_KEYS if key in values]
        try:
            if given_field:
                if len(given_field) != len(FIELD_KEYS):
                    raise InvalidConfigValue("charge, field and light_speed must be given together")
                charge, field, light_speed = (_convert(key, values[key], float) for key in FIELD_KEYS)
                params = PhysicalParams.from_field(charge, field, light_speed, **physical)
            else:
                params = PhysicalParams(**physical)
        except InvalidParameter as e:
            raise InvalidConfigValue(str(e)) from e

        fmt = str(values.get("format", RUN_DEFAULTS["format"])).strip().lower()
        if fmt not in FORMATS:
            raise InvalidConfigValue(f"format must be one of {', '.join(FORMATS)}, got {fmt!r}")

        sweep = values.get("sweep", RUN_DEFAULTS["sweep"])
        if isinstance(sweep, str):
            sweep = SweepAxis.parse(sweep)
        if sweep is not None:
            for end in (sweep.start, sweep.stop):
                try:
                    params.replace(**{sweep.param: end})
                except InvalidParameter as e:
                    raise InvalidConfigValue(f"sweep {sweep}: {e}") from e

        out = values.get("out", RUN_DEFAULTS["out"])
        config = RunConfig(
            params=params,
            cutoff_xy=_bounded_int("cutoff_xy", values.get("cutoff_xy", RUN_DEFAULTS["cutoff_xy"]), 0),
            cutoff_z=_bounded_int("cutoff_z", values.get("cutoff_z", RUN_DEFAULTS["cutoff_z"]), 0),
            deg_tol=_positive_float("deg_tol", values.get("deg_tol", RUN_DEFAULTS["deg_tol"])),
            fd_step=_positive_float("fd_step", values.get("fd_step", RUN_DEFAULTS["fd_step"])),
            fd_levels=_bounded_int("fd_levels", values.get("fd_levels", RUN_DEFAULTS["fd_levels"]), 1),
            out=Path(out) if out not in (None, "") else None,
            format=fmt,
            sweep=sweep,
            workers=_bounded_int("workers", values.get("workers", RUN_DEFAULTS["workers"]), 1),
            max_states=_bounded_int("max_states", values.get("max_states", RUN_DEFAULTS["max_states"]), 1),
            sweep_levels=_bounded_int("sweep_levels", values.get("sweep_levels", RUN_DEFAULTS["sweep_levels"]), 1),
            log_dir=Path(values.get("log_dir", RUN_DEFAULTS["log_dir"])),
        )
    except InvalidConfigValue as e:
        logger.error(f"Invalid configuration: {e}")
        raise
    logger.debug(f"Configuration: {config}")
    return config


def parse_config(text: str, overrides: Optional[Mapping], logger: logging.Logger) -> RunConfig:
    """
    Merge config file text with flag overrides and defaults.

    Args:
        text (str): Config file contents, possibly empty.
        overrides (Optional[Mapping]): Values from the command line; None values are ignored.
        logger (logging.Logger): Logger instance.

    Returns:
        RunConfig: The validated configuration.
    """
    values = text_to_dict(text, logger)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return remap_keys(values, logger)


def load_config(
    path: Optional[Path],
    overrides: Optional[Mapping],
    logger: logging.Logger,
    environ: Optional[Mapping] = None,
) -> RunConfig:
    """
    Read the config file named by path or NCO_CONFIG (if any) and parse it with overrides.

    Raises:
        ConfigError: If the file cannot be read or its contents are invalid.
    """
    environ = os.environ if environ is None else environ
    if path is None and environ.get(CONFIG_ENV):
        path = Path(environ[CONFIG_ENV])
        logger.info(f"Using config file {path} from {CONFIG_ENV}")
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            logger.exception(f"Could not read config file {path}: {e}")
            raise ConfigError(f"Could not read config file {path}: {e}") from e
    return parse_config(text, overrides, logger)
