"""Command-line entry point: ``specweak <subcommand> [--config FILE] ...``.

Exit status is 0 when every check passes, 1 when a check fails and 2 for
an unusable configuration.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys

from . import experiments as ex
from .errors import ConfigInvalid

COMMANDS = ("rates", "lemma", "noise-amp", "sampling-probe", "certify-filters", "geometry")


def default_config(command: str) -> ex.ExperimentConfig:
    """Built-in configuration used when no ``--config`` is given."""
    if command == "noise-amp":
        return ex.ExperimentConfig(trials=500)
    if command == "sampling-probe":
        return ex.ExperimentConfig(problem={"operator": "integration", "source_pair": "cosine"}, nu=0.0)
    if command == "geometry":
        return ex.ExperimentConfig(point_scheme="halton", n_schedule=[16, 64, 256])
    return ex.ExperimentConfig()


def _global_flags(default=None) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=default)
    p.add_argument("--config", help="JSON experiment config (schema 1)")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int, help="base seed, an unsigned 64-bit integer")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per level")
    p.add_argument("--quiet", action="store_true", default=default if default else False,
                   help="only report failures")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specweak", parents=[_global_flags()],
                                     description="Spectral regularization weak-error experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "rates": "Monte Carlo weak-error rate study with a fitted log-log slope",
        "lemma": "sweep the spectral sampling inequalities on random instances",
        "noise-amp": "noise amplification estimate against its bound",
        "sampling-probe": "noise-free sampling-inequality constants on a halving-h ladder",
        "certify-filters": "grid certificates of the filter constants",
        "geometry": "fill and separation distances of generated node sets",
    }
    for name in COMMANDS:
        # SUPPRESS keeps a flag given before the subcommand from being reset
        sp = sub.add_parser(name, help=helps[name], parents=[_global_flags(argparse.SUPPRESS)])
        sp.set_defaults(command=name)
    return parser


def resolve_config(args) -> ex.ExperimentConfig:
    cfg = ex.load_config(args.config) if args.config else default_config(args.command)
    changes = {}
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    return dataclasses.replace(cfg, **changes) if changes else cfg


def run(command: str, cfg: ex.ExperimentConfig) -> ex.Report:
    if command == "rates":
        return ex.run_rate_study(cfg).report
    if command == "certify-filters":
        rep = ex.run_filter_certification(cfg)
    elif command == "geometry":
        rep = ex.run_geometry(cfg)
    elif command == "lemma":
        rep = ex.run_lemma_bounds(cfg)
    elif command == "noise-amp":
        rep = ex.run_noise_amplification(cfg)
    else:
        rep = ex.run_sampling_probe(cfg)
    rep.write(cfg.output_dir)
    return rep


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        rep = run(args.command, cfg)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for c in rep.checks:
        if not (args.quiet and c.passed):
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f": {c.detail}" if c.detail else ""))
    if not args.quiet:
        if args.command == "rates":
            print(f"slope {rep.data['slope']:.4f} +/- {rep.data['stderr']:.4f} "
                  f"(theoretical -{rep.data['theoretical_exponent']:.4f})")
        for path in rep.files:
            print(f"wrote {path}")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
