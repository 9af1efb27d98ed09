import argparse
import json
import logging
import sys
from pathlib import Path

from fairtune import __version__
from fairtune.errors import ConfigurationError, FairtuneError
from fairtune.harness.config import SWEEP_AXES, default_config, load_config
from fairtune.harness.runner import cmd_eval, cmd_gen_data, cmd_mask, cmd_run, cmd_sweep
from fairtune.masks.scores import Criterion


logger = logging.getLogger("fairtune")

EXIT_OK = 0
EXIT_CONFIGURATION = 1
EXIT_RUN_FAILURES = 2


def _values(text):
    return [float(item) if "." in item else int(item) for item in text.split(",") if item]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fairtune",
        description="Selective fine-tuning experiments on planted-bias data",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-data", help="write the dataset triplet and test set")
    gen.add_argument("--config", type=Path)
    gen.add_argument("--out", type=Path, help="defaults to <output_dir>/data")

    run = commands.add_parser("run", help="run every strategy and seed once")
    run.add_argument("--config", type=Path)
    run.add_argument("--data", type=Path, help="directory written by gen-data")

    sweep = commands.add_parser("sweep", help="run an ablation axis")
    sweep.add_argument("--config", type=Path)
    sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sweep.add_argument("--values", type=_values, help="comma separated axis values")

    ev = commands.add_parser("eval", help="score a saved model on a CSV dataset")
    ev.add_argument("--model", type=Path, required=True)
    ev.add_argument("--data", type=Path, required=True)
    ev.add_argument("--out", type=Path)

    mask = commands.add_parser("mask", help="selective mask from three CSV datasets")
    mask.add_argument("--model", type=Path, required=True)
    mask.add_argument("--d-r", type=Path, required=True)
    mask.add_argument("--d-s1", type=Path, required=True)
    mask.add_argument("--d-s2", type=Path, required=True)
    mask.add_argument("--k", type=int, required=True)
    mask.add_argument(
        "--criterion",
        type=Criterion,
        default=Criterion.ABSOLUTE_DIFFERENCE,
        choices=list(Criterion),
    )
    mask.add_argument("--out", type=Path)
    return parser


def _configure_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _config(args):
    return load_config(args.config) if args.config else default_config()


def _dispatch(args):
    if args.command == "gen-data":
        config = _config(args)
        cmd_gen_data(config, args.out or Path(config.output_dir) / "data")
        return EXIT_OK
    if args.command == "eval":
        report = cmd_eval(args.model, args.data, args.out)
        print(json.dumps(report.to_record(), sort_keys=True, indent=2))
        return EXIT_OK
    if args.command == "mask":
        mask = cmd_mask(args.model, args.d_r, args.d_s1, args.d_s2, args.k, args.criterion, args.out)
        print(mask)
        return EXIT_OK
    config = _config(args)
    if args.command == "run":
        report = cmd_run(config, args.data)
    else:
        report = cmd_sweep(config, args.axis, args.values)
    if report.has_failures:
        logger.error(f"{len(report.failures)} runs failed, see report.json")
        return EXIT_RUN_FAILURES
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        return _dispatch(args)
    except ConfigurationError as err:
        logger.error(f"configuration error: {err}")
        return EXIT_CONFIGURATION
    except FairtuneError as err:
        logger.error(f"{err}")
        return EXIT_CONFIGURATION


if __name__ == "__main__":
    sys.exit(main())
