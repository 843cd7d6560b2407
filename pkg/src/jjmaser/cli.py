"""`simulate` command-line entry point.

    simulate <subcommand> --config <path> [--out <dir>] [--workers N] [--seed-cutoff N]

Subcommands mirror the experiment names (sweep-phi, sweep-delta0, fidelity,
wigner, psd, g2, semiclassical).  Exit codes: 0 success, 2 configuration
error, 3 numerical failure (including sweeps with failed grid points; the
data files are still written with those rows marked).
"""

import argparse
import sys

from .sweeps import (
    EXPERIMENTS,
    ConfigError,
    load_config,
    resolve_out_dir,
    run_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Steady states, trapping, spectra and correlations of pumped-cavity models",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="TOML experiment configuration")
        p.add_argument("--out", default=None, help="output directory (overrides config/env)")
        p.add_argument("--workers", type=int, default=None, help="worker processes")
        p.add_argument("--seed-cutoff", type=int, default=None,
                       help="starting Fock cutoff for auto-convergence")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if config.experiment != args.subcommand:
            raise ConfigError(
                f"config declares experiment {config.experiment!r} but subcommand is "
                f"{args.subcommand!r}"
            )
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            config.workers = args.workers
        if args.seed_cutoff is not None:
            if args.seed_cutoff < 1:
                raise ConfigError("--seed-cutoff must be >= 1")
            config.solver["seed_cutoff"] = args.seed_cutoff
        out_dir = resolve_out_dir(config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = run_experiment(config, out_dir)
    except Exception as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in result.files:
        print(path)
    if result.failed_points:
        print(f"{result.failed_points} grid point(s) failed; see the manifest",
              file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
