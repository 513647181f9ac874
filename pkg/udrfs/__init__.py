#!/usr/bin/env python3
import argparse
import json
import sys

import singer
from singer import utils

from udrfs.harness import FILTERS, compare, run
from udrfs.models import (DivergenceError, ImpossibleMeasurementError,
                          ModelError, ScenarioError, UsageError)
from udrfs.scenario import load_scenario
from udrfs.utilities import parse_float_list
from udrfs.verification import CASES, run_cases

logger = singer.get_logger().getChild('udrfs')

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2
EXIT_DIVERGENCE = 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog='udrfs',
        description="Detected/undetected RFS filters and their verification")
    commands = parser.add_subparsers(dest='command', required=True)

    verify = commands.add_parser('verify', help="run the identity checks")
    verify.add_argument('--case', help="run a single named case")
    verify.add_argument('--all', action='store_true',
                        help="run every case (the default)")
    verify.add_argument('--json', help="also write the report to this path")

    run_parser = commands.add_parser('run', help="simulate and filter")
    run_parser.add_argument('--scenario', required=True)
    run_parser.add_argument('--filter', required=True, choices=sorted(FILTERS))
    run_parser.add_argument('--out', required=True)
    run_parser.add_argument('--seed', type=int)
    run_parser.add_argument('--timing', action='store_true',
                            help="add wall-clock timing to report.json")
    run_parser.add_argument('--measurements',
                            help="filter this JSON-lines measurement stream "
                                 "instead of simulating one")

    compare_parser = commands.add_parser('compare',
                                         help="cardinality error table")
    compare_parser.add_argument('--scenario', required=True)
    compare_parser.add_argument('--filters', required=True,
                                help="comma-separated filter names")
    compare_parser.add_argument('--out', required=True)
    compare_parser.add_argument('--pd-sweep', type=parse_float_list,
                                help="comma-separated detection probabilities")
    compare_parser.add_argument('--seed', type=int)
    return parser


def do_verify(args):
    if args.case is not None and args.case not in CASES:
        logger.error("Unknown verification case %s; known cases: %s",
                     args.case, ", ".join(CASES))
        return EXIT_USAGE

    logger.info("Starting verification")
    report = run_cases(None if args.case is None else [args.case])
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write('\n')
    if args.json:
        with open(args.json, 'w') as f:
            json.dump(report, f, indent=2, sort_keys=True)
            f.write('\n')
    logger.info("Finished verification: %s passed, %s failed",
                report['passed'], report['failed'])
    return EXIT_OK if report['failed'] == 0 else EXIT_VERIFICATION_FAILED


def do_run(args):
    scenario = load_scenario(args.scenario)
    run(scenario, args.filter, args.out, seed=args.seed, timing=args.timing,
        measurements_path=args.measurements)
    return EXIT_OK


def do_compare(args):
    filters = [name.strip() for name in args.filters.split(',')
               if name.strip()]
    scenario = load_scenario(args.scenario)
    compare(scenario, filters, args.out, pd_sweep=args.pd_sweep,
            seed=args.seed)
    return EXIT_OK


COMMANDS = {
    'verify': do_verify,
    'run': do_run,
    'compare': do_compare,
}


def cli(argv=None):
    """
    Run one command and return its exit code: 0 pass, 1 verification
    failure, 2 usage or scenario error, 3 numerical divergence.
    """
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ScenarioError, UsageError, ModelError) as e:
        logger.error(str(e))
        return EXIT_USAGE
    except (DivergenceError, ImpossibleMeasurementError) as e:
        logger.error("Filter diverged: %s", e)
        return EXIT_DIVERGENCE


@utils.handle_top_exception(logger)
def main():
    sys.exit(cli())


if __name__ == "__main__":
    main()
