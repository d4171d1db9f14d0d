"""
Run reproducing-graph experiments from the command line or a config.yaml file.

    python run.py grow --alpha 0 --beta 1 --gamma 0.2 --steps 7 --g0 k1 --snapshot 7
    python run.py chain --alpha 0 --beta 1 --gamma 0.2 --stationary
    python run.py -file config.yaml

Exit codes: 0 success, 1 usage or config error, 2 resource cap, 3 failed acceptance check.
"""

# pylint: disable=import-error, unspecified-encoding, invalid-name, logging-fstring-interpolation
import argparse
import logging
import sys
import time
from typing import List, Optional

from acceptance import list_checks, run_acceptance
from collect_experiment_data import record_path, write_record
from experiment_utils import ARTIFACT_VERSION, ConvergenceError, timer
from experiments import Experiment, ExperimentConfig
from reprograph import ResourceLimitError

logger = logging.getLogger('run')

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RESOURCE = 2
EXIT_ACCEPTANCE = 3


class _ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as ValueError so they map to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValueError(message)


def _float_list(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _str_list(text: str) -> List[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _common_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parent.add_argument('-file', '--config', dest='file', help='.yaml file with configuration')
    parent.add_argument('--alpha', type=float, help='child-child edge probability')
    parent.add_argument('--beta', type=float, help='parent-child edge probability')
    parent.add_argument('--gamma', type=float, help="child to parent's neighbour edge probability")
    parent.add_argument('--steps', type=int, help='number of generations')
    parent.add_argument('--reps', type=int, help='number of replicates')
    parent.add_argument('--seed', type=int, help='master seed (default: $REPROGRAPH_SEED)')
    parent.add_argument('--g0', help='k1, k<n>, p<n>, c<n>, e<n> or an edge-list file')
    parent.add_argument('--out', help='output table path')
    parent.add_argument('--format', choices=['csv', 'jsonl'])
    parent.add_argument('--workers', type=int, help='worker processes for replicates')
    parent.add_argument('--max-vertices', dest='max_vertices', type=int)
    parent.add_argument('--max-edges', dest='max_edges', type=int)
    parent.add_argument('--progress', action='store_true', help='show progress bars')
    parent.add_argument('--verbose', action='store_true')
    parent.add_argument('--quiet', action='store_true')
    return parent


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _ArgumentParser(
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
        argument_default=argparse.SUPPRESS,
    )
    sub = parser.add_subparsers(dest='command', parser_class=_ArgumentParser)
    sub_kwargs = {"parents": [common], "argument_default": argparse.SUPPRESS}

    grow = sub.add_parser('grow', **sub_kwargs, help='grow G_0..G_steps and tabulate them')
    grow.add_argument('--snapshot', type=int, help='write DOT and edge list of G_n')

    chain = sub.add_parser('chain', **sub_kwargs, help='degree chain trajectory or stationary law')
    chain.add_argument('--stationary', action='store_true')
    chain.add_argument('--tail-only', dest='tail_only', action='store_true')
    chain.add_argument('--truncation', type=int)
    chain.add_argument('--max-truncation', dest='max_truncation', type=int)
    chain.add_argument('--trajectory-steps', dest='trajectory_steps', type=int)
    chain.add_argument('--burn-in', dest='burn_in', type=int)
    chain.add_argument('--moments', type=_float_list, help='comma-separated moment orders')
    chain.add_argument('--x0', type=int)

    phase = sub.add_parser('phase', **sub_kwargs, help='regime classification over an (alpha, gamma) grid')
    phase.add_argument('--grid-alpha', dest='grid_alpha', type=_float_list)
    phase.add_argument('--grid-gamma', dest='grid_gamma', type=_float_list)
    phase.add_argument('--empirical', action='store_true')

    sub.add_parser('spectral', **sub_kwargs, help='normalized Laplacian spectrum per generation')

    bpre = sub.add_parser('bpre', **sub_kwargs, help='beta = 0 isolation and extinction')
    bpre.add_argument('--horizon', type=int)
    bpre.add_argument('--x0', type=int)
    bpre.add_argument('--extinction-reps', dest='extinction_reps', type=int)

    check = sub.add_parser('check', **sub_kwargs, help='run the acceptance checks')
    check.add_argument('--only', type=_str_list, help='comma-separated check names')
    check.add_argument('--list', dest='list_checks', action='store_true')
    return parser


def _configure_logging(verbose: bool, quiet: bool):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level)
    logging.getLogger().setLevel(level)


def run_check(config: ExperimentConfig) -> int:
    if config.list_checks:
        for line in list_checks():
            print(line)
        return EXIT_OK
    since = time.time()
    results = run_acceptance(config.seed, only=config.only, workers=config.workers)
    for result in results:
        print(f"{'PASS' if result.passed else 'FAIL'}  {result.name:<14} {result.detail}")
    if config.out:
        write_record(
            record_path(config.out),
            {
                "config": config.as_dict(),
                "results": {r.name: {"passed": r.passed, "detail": r.detail} for r in results},
                "wall_time": timer(time.time() - since),
                "artifact_version": ARTIFACT_VERSION,
            },
        )
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"Failed checks: {', '.join(failed)}")
        return EXIT_ACCEPTANCE
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run the experiment and return the exit code."""
    try:
        args = vars(build_parser().parse_args(argv))
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    _configure_logging(args.pop('verbose', False), args.pop('quiet', False))
    file = args.pop('file', None)
    if args.get('command') is None:
        args.pop('command', None)

    try:
        config = ExperimentConfig.from_sources(file, overrides=args)
        if config.command == 'check':
            return run_check(config)
        Experiment(config).run()
    except (ValueError, FileNotFoundError, ConvergenceError) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except ResourceLimitError as e:
        logger.error(str(e))
        return EXIT_RESOURCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
