#!/usr/bin/env python
"""CLI entrypoint for the interference alignment toolkit."""

from __future__ import annotations

import logging
import os
import sys
from typing import Any, Dict

import docopt

from p6_ia.errors import ConfigError, IaError
from p6_ia.runner import COMMANDS, build_run_config, load_config, run

USAGE = """p6-ia-dof-py - DoF bounds and interference alignment for K-user MIMO channels.

Usage:
    script.py bounds --K K --M M --N N [options]
    script.py simo-align --K K --R R [--n ORDER] [--numeric] [options]
    script.py mimo-align [--scheme NAME] [--R R] [--M M] [--K K] [--channels PATH] [--dump-channels PATH] [options]
    script.py dof-sweep [--scheme NAME] [--R R] [--M M] [--K K] [--n ORDER] [--grid GRID] [--channels PATH] [options]
    script.py verify-all [--sweep] [options]
    script.py (-h | --help)
    script.py --version

Options:
    --K K                   Number of users (served users for zf).
    --M M                   Transmit antennas per user.
    --N N                   Receive antennas per user.
    --R R                   Antenna ratio; constant-channel schemes use N = R*M.
    --n ORDER               SIMO extension order.
    --numeric               Also build and rank-check the SIMO precoders.
    --scheme NAME           theorem4, theorem5, example1, example2, zf (dof-sweep also: simo).
    --channels PATH         Load channels from a JSON dump instead of sampling.
    --dump-channels PATH    Write the sampled channels as a JSON dump.
    --grid GRID             SNR grid in dB as start:stop:step.
    --sweep                 Add DoF slope checks to verify-all.
    --seed SEED             Channel sampling seed.
    --out PATH              Write the report here instead of stdout.
    --format FMT            json or csv (csv for dof-sweep only).
    --mu-cap MU             Largest SIMO extension built numerically.
    --tolerance TOL         Relative singular value tolerance for rank decisions.
    --workers N             Worker threads for verify-all.
    --deterministic         Omit the timestamp so equal runs give equal bytes.
    --config PATH           Path to config file [default: config.json].
    --debug                 Enable debug logging.
    --verbose               Enable verbose logging.
    -h --help               Show this message.
    --version               Show version information.
"""

LOGGER = logging.getLogger(__name__)
DEFAULT_CONFIG_PATH = "config.json"
VERSION = "0.1.0"
EXIT_USAGE = 2

_PARAMS = {
    "bounds": ("--K", "--M", "--N"),
    "simo-align": ("--K", "--R", "--n", "--numeric"),
    "mimo-align": ("--scheme", "--R", "--M", "--K", "--channels", "--dump-channels"),
    "dof-sweep": ("--scheme", "--R", "--M", "--K", "--n", "--grid", "--channels"),
    "verify-all": ("--sweep",),
}
_FLAGS = ("--seed", "--out", "--format", "--mu-cap", "--tolerance", "--workers", "--deterministic")


def setup_logging(debug: bool, verbose: bool) -> None:
    """
    Set up logging based on the debug and verbose flags.

    Args:
        debug: Enable debug logging if True.
        verbose: Enable info logging if True.
    """
    if debug:
        logging.basicConfig(level=logging.DEBUG)
    elif verbose:
        logging.basicConfig(level=logging.INFO)
    else:
        logging.basicConfig(level=logging.WARNING)


def _option_key(option: str) -> str:
    """Map --dump-channels to dump_channels."""
    return option.lstrip("-").replace("-", "_")


def _collect(args: dict[str, Any], options: tuple[str, ...]) -> Dict[str, Any]:
    """Return given options by key; absent values and unset switches become None."""
    collected: Dict[str, Any] = {}
    for option in options:
        value = args.get(option)
        collected[_option_key(option)] = value if value not in (None, False) else None
    return collected


def main(args: dict[str, Any]) -> int:
    """Run one subcommand based on parsed CLI arguments."""
    debug = bool(args.get("--debug", False))
    verbose = bool(args.get("--verbose", False))

    setup_logging(debug=debug, verbose=verbose)

    command = next((name for name in COMMANDS if args.get(name)), None)
    if command is None:
        LOGGER.error("No subcommand given")
        return EXIT_USAGE
    config_path = str(args.get("--config") or DEFAULT_CONFIG_PATH)

    try:
        cfg = load_config(config_path)
        config = build_run_config(
            command,
            params=_collect(args, _PARAMS[command]),
            file_config=cfg,
            environ=os.environ,
            flags=_collect(args, _FLAGS),
        )
    except ConfigError as exc:
        LOGGER.error("Invalid configuration: %s", exc)
        return EXIT_USAGE
    LOGGER.info("Starting command", extra={"command": command, "config_path": config_path, "seed": config.seed})

    try:
        return run(config)
    except ConfigError as exc:
        LOGGER.error("Invalid arguments: %s", exc)
        return EXIT_USAGE
    except (IaError, ValueError) as exc:
        LOGGER.error("Run failed: %s", exc)
        return 1


if __name__ == "__main__":
    try:
        cli_arguments: dict[str, Any] = docopt.docopt(
            USAGE,
            options_first=False,
            version=VERSION,
        )
    except docopt.DocoptExit as usage_error:
        print(usage_error, file=sys.stderr)
        sys.exit(EXIT_USAGE)
    sys.exit(main(cli_arguments))
