"""Line-oriented ``key = value`` configuration files with one section per
experiment.

Keys under ``[common]`` apply to every experiment; a section named after an
experiment overrides them.  ``seed`` and ``draws`` are recognized wherever
they appear; every other key must match a parameter of the target experiment
(angles are given in degrees, matching how the parameter sets are quoted).

Example::

    [common]
    seed = 7
    draws = 500

    [scf-tx]
    tilt_deg = 96
    spread_tx_deg = 7
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .experiments import ConfigError


def load_config(path) -> dict:
    """Parse a config file into {section: {key: raw-string}}."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return {section: dict(parser.items(section)) for section in parser.sections()}


def overrides_for(config: dict, name: str) -> dict:
    """Merge [common] with the experiment's own section."""
    merged = dict(config.get("common", {}))
    merged.update(config.get(name, {}))
    return merged


def split_control_keys(overrides: dict):
    """Pull seed/draws out of an override map; both are optional."""
    overrides = dict(overrides)
    seed = overrides.pop("seed", None)
    draws = overrides.pop("draws", None)
    try:
        seed = int(seed) if seed is not None else None
        draws = int(draws) if draws is not None else None
    except ValueError as exc:
        raise ConfigError(f"seed/draws must be integers: {exc}") from exc
    return overrides, seed, draws
