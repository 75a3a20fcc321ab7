#!/usr/bin/env python3
# main.py
"""
Entry point script for rgflow.
Runs the quadratic solver, the homotopy flow, the verification suite,
parameter sweeps and oracle comparisons from a JSON run config.
"""

import argparse
import sys

from dotenv import load_dotenv

from src.config.run_config import load_run_config
from src.services.orchestrator import CommandType, create_orchestrator
from src.utils.errors import ConfigError
from src.utils.logging import logger, set_log_level


def parse_args(argv=None):
    """
    Parse command line arguments.
    """
    parser = argparse.ArgumentParser(
        description="Solve and certify discrete triangular RG flows."
    )

    parser.add_argument(
        "command",
        choices=[c.value for c in CommandType],
        help="Subcommand to run",
    )

    parser.add_argument(
        "--config",
        default=None,
        help="JSON run config (defaults are used when omitted)",
    )

    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Set the logging level",
    )

    parser.add_argument("--g0", type=float, help="Override g0")
    parser.add_argument("--omega", type=float, help="Override params.omega")
    parser.add_argument("--horizon", type=int, help="Override solver.horizon")
    parser.add_argument("--seed", type=int, help="Override seed")
    parser.add_argument("--output-dir", help="Override output.directory")
    parser.add_argument("--jobs", type=int, help="Worker threads for sweeps")

    parser.add_argument(
        "--check",
        action="append",
        help="Run only this verification check (repeatable)",
    )

    parser.add_argument(
        "--force",
        action="store_true",
        default=None,
        help="Continue when assumption reports fail",
    )

    return parser.parse_args(argv)


def overrides_from_args(args):
    """Map flags to dotted config keys; unset flags are None and ignored."""
    return {
        "g0": args.g0,
        "params.omega": args.omega,
        "solver.horizon": args.horizon,
        "seed": args.seed,
        "output.directory": args.output_dir,
        "jobs": args.jobs,
        "verify.checks": args.check,
        "force": args.force,
    }


def main(argv=None):
    """Main entry point for the application."""
    # Load environment variables from .env
    load_dotenv()

    args = parse_args(argv)
    set_log_level(args.log_level)

    try:
        config = load_run_config(args.config, overrides_from_args(args))
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return e.exit_code

    logger.info(f"Running '{args.command}' (seed {config.seed})")
    orchestrator = create_orchestrator(config)
    return orchestrator.run(args.command)


if __name__ == "__main__":
    sys.exit(main())
