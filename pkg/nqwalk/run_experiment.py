import logging
from argparse import ArgumentParser, BooleanOptionalAction, RawDescriptionHelpFormatter
from pathlib import Path

from nqwalk import scenarios
from nqwalk.exceptions import BoundaryViolation, ConfigError, NumericFailure
from nqwalk.experiment_config import load_config
from nqwalk.outputs import write_meta, write_result
from nqwalk.utils import SCENARIOS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BOUNDARY = 3
EXIT_NUMERIC = 4

OUTPUT_COLUMNS = """\
output files:
  stationary, collision  stats.csv (t, mean_x, sigma, speed),
                         density_t<k>.csv (x, density), meta.json
  collision              peaks.csv (t, rank, site, x)
  diffusion              linear/, scalar/, vector/ each with stats.csv and snapshots
  bloch-sweep            sweep.csv and sweep_sorted.csv
                         (theta_b, phi_b, speed_linear, speed_scalar, speed_vector)
  g-sweep                sweep.csv (coin_state, g, speed_linear, speed_scalar, speed_vector)
  theta-sweep            sweep.csv (coin_state, theta, speed_linear, speed_scalar, speed_vector)
  g-theta-surface        sweep.csv (coin_state, g, theta, speed_linear, speed_scalar, speed_vector)
  dispersion-check       dispersion.csv (theta, c, mc2, m, max_error,
                         scale_exact, scale_unit, scale_secant)

exit codes: 0 ok, 2 configuration error, 3 boundary guard violation, 4 numeric failure
"""


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="nqw",
        description="Run a nonlinear quantum walk scenario and write plot-ready CSV files",
        epilog=OUTPUT_COLUMNS,
        formatter_class=RawDescriptionHelpFormatter,
    )
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--out", help="Output directory (default: nqw-<scenario>)")
    parser.add_argument("--snapshots", type=int, help="Snapshot stride in steps")
    parser.add_argument("--workers", type=int, help="Worker processes for sweeps")
    parser.add_argument(
        "--seedless",
        action=BooleanOptionalAction,
        help="Accepted for scripts; every scenario is deterministic",
    )
    parser.add_argument("--netcdf", action=BooleanOptionalAction, help="Also write record.nc")
    parser.add_argument("--debug", action=BooleanOptionalAction)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        config = load_config(
            args.scenario,
            args.config,
            snapshot_stride=args.snapshots,
            workers=args.workers,
            output=args.out,
        )
    except (ConfigError, TypeError, ValueError) as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_CONFIG
    out = Path(config.output or f"nqw-{config.scenario}")

    try:
        result = scenarios.run(config)
    except BoundaryViolation as e:
        logger.error("%s", e)
        write_meta(out, config.export_config(), status="failed", guard=e.report.to_dict())
        return EXIT_BOUNDARY
    except NumericFailure as e:
        logger.error("%s", e)
        write_meta(out, config.export_config(), status="failed")
        return EXIT_NUMERIC
    except (ConfigError, TypeError, ValueError) as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_CONFIG

    write_result(result, config, out, netcdf=bool(args.netcdf))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
