import argparse
import logging
import os
import sys

from dotenv import load_dotenv

from functions.angle_units import to_radians
from functions.errors import (CatWvaError, DegenerateBernoulli, DivergentWeakValue, InlineCheckFailed,
                              InvalidParameter, NoPeak, ZeroPostselection)
from services import __version__
from services.phase_dist import DEFAULT_N_COARSE, DEFAULT_N_PHI
from services.report_writer import FORMATS
from services.reproduction import DEFAULT_OMEGA, WORKFLOWS, RunConfig, run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARAMETER = 2
EXIT_IO = 3
EXIT_CHECK = 4

# raised when the requested parameters leave the protocol without a defined answer
USER_RUNTIME_ERRORS = (ZeroPostselection, NoPeak, DivergentWeakValue, DegenerateBernoulli)


def env_settings():
    """Defaults from the environment (a .env file is loaded first)"""
    fmt = os.environ.get('CATWVA_FORMAT', 'csv').lower()
    if fmt not in FORMATS:
        raise ValueError(f"CATWVA_FORMAT must be one of {FORMATS}, got {fmt!r}")
    return {
        'log_level': os.environ.get('CATWVA_LOG_LEVEL', 'INFO').upper(),
        'out_dir': os.environ.get('CATWVA_OUT_DIR', 'output'),
        'fmt': fmt,
        'n_coarse': int(os.environ.get('CATWVA_N_COARSE', DEFAULT_N_COARSE)),
    }


def build_parser(settings):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--n', type=int, nargs='+', dest='n_atoms', help="atom count(s) N = 2j")
    common.add_argument('--omega', type=float, help="accumulated phase (default pi/100)")
    common.add_argument('--gamma', type=float, action='append', dest='gamma', help="post-selection angle (repeatable)")
    common.add_argument('--gamma-list', type=float, nargs='+', help="several post-selection angles")
    common.add_argument('--degrees', action='store_true', help="angles are given in degrees")
    common.add_argument('--out', default=settings['out_dir'], help="output directory")
    common.add_argument('--format', choices=FORMATS, default=settings['fmt'], dest='fmt')
    common.add_argument('--n-alpha', type=int, help="Gauss-Legendre nodes in cos(alpha)")
    common.add_argument('--n-beta', type=int, help="uniform nodes in beta")
    common.add_argument('--n-coarse', type=int, default=settings['n_coarse'], help="peak scan nodes")
    common.add_argument('--n-phi', type=int, default=DEFAULT_N_PHI, help="samples per P(phi) curve")
    common.add_argument('--gamma-points', type=int, help="size of the default gamma sweep")
    common.add_argument('--check', action='store_true', help="run the independent oracles inline")
    common.add_argument('--verbose', action='store_true', help="debug logging")

    parser = argparse.ArgumentParser(prog='catwva', description="Weak-value amplification of atomic cat states")
    parser.add_argument('--version', action='version', version=f"catwva {__version__}")
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name in WORKFLOWS:
        subparsers.add_parser(name, parents=[common], help=WORKFLOWS[name].__doc__.strip().splitlines()[0])
    return parser


def config_from_args(args):
    gammas = None
    if args.gamma or args.gamma_list:
        gammas = [to_radians(g, args.degrees) for g in (args.gamma or []) + (args.gamma_list or [])]
    omega = to_radians(args.omega, args.degrees) if args.omega is not None else DEFAULT_OMEGA
    for name in ('n_alpha', 'n_beta', 'n_coarse', 'n_phi', 'gamma_points'):
        value = getattr(args, name)
        if value is not None and value < 1:
            raise InvalidParameter(f"--{name.replace('_', '-')} must be positive, got {value}")
    return RunConfig(
        command=args.command,
        n_atoms=args.n_atoms,
        omega=omega,
        gammas=gammas,
        out_dir=args.out,
        fmt=args.fmt,
        n_alpha=args.n_alpha,
        n_beta=args.n_beta,
        check=args.check,
        n_coarse=args.n_coarse,
        n_phi=args.n_phi,
        gamma_points=args.gamma_points,
    )


def main(argv=None):
    """Command-line entry point; returns the process exit code"""
    load_dotenv()
    try:
        settings = env_settings()
    except ValueError as e:
        print(f"catwva: bad environment setting: {e}", file=sys.stderr)
        return EXIT_PARAMETER

    try:
        args = build_parser(settings).parse_args(argv)
    except SystemExit as e:
        return e.code

    # Set up logging
    level = logging.DEBUG if args.verbose else getattr(logging, settings['log_level'], logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        config = config_from_args(args)
        written = run(config)
        logger.info(f"{config.command}: wrote {len(written)} file(s)")
        return EXIT_OK
    except InlineCheckFailed as e:
        logger.error(f"Inline check failed: {e}")
        return EXIT_CHECK
    except (InvalidParameter, *USER_RUNTIME_ERRORS) as e:
        logger.error(f"Invalid parameters: {e}")
        return EXIT_PARAMETER
    except OSError as e:
        logger.error(f"Error writing output: {str(e)}", exc_info=True)
        return EXIT_IO
    except CatWvaError as e:
        logger.error(f"Error during computation: {str(e)}", exc_info=True)
        return EXIT_PARAMETER


if __name__ == '__main__':
    sys.exit(main())
