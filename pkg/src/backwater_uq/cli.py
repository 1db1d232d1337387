"""Command-line entry point: ``backwater-uq {reference,fit,compare,report}``.

``reference`` builds the Monte Carlo ensemble, ``fit`` trains both surrogates
at every budget, ``compare`` evaluates them against the reference (fitting
first if needed) and ``report`` prints the resulting tables.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import experiment as ex


def _config(args) -> ex.ExperimentConfig:
    overrides = {"seed": args.seed, "workers": args.workers, "out": args.out}
    if args.config:
        return ex.ExperimentConfig.from_file(args.config, **overrides)
    return ex.ExperimentConfig.with_overrides(**overrides)


def _cmd_reference(args):
    cfg = _config(args)
    ref = ex.run_reference(cfg, with_sobol=not args.no_sobol)
    print(f"reference: {ref.H.shape[0]} solves, {ref.H.shape[1]} stations -> {cfg.out}")


def _cmd_fit(args):
    cfg = _config(args)
    for fb in ex.fit_surrogates(cfg):
        print(f"N = {fb.budget}: PC order {fb.order}, solves pc={fb.solves['pc']} pgp={fb.solves['pgp']}")


def _cmd_compare(args):
    cfg = _config(args)
    if not (cfg.out / "inputs.csv").exists():
        ex.run_reference(cfg)
    res = ex.run_comparison(cfg)
    print(ex.format_report(res["summary"]))


def _cmd_report(args):
    summary = ex.load_summary(args.out or ex.DEFAULT_CONFIG["out"])
    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        print(ex.format_report(summary))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment configuration")
    common.add_argument("--seed", type=int, metavar="U64", help="override the configured seed")
    common.add_argument("--workers", type=int, metavar="N", help="forward-solve worker processes")
    common.add_argument("--out", metavar="DIR", help="run directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="backwater-uq", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("reference", parents=[common], help="Monte Carlo reference ensemble")
    r.add_argument("--no-sobol", action="store_true", help="skip the reference Sobol' estimate")
    r.set_defaults(func=_cmd_reference)
    sub.add_parser("fit", parents=[common], help="fit PC and pGP at every budget").set_defaults(func=_cmd_fit)
    sub.add_parser("compare", parents=[common], help="compare surrogates with the reference").set_defaults(
        func=_cmd_compare
    )
    rp = sub.add_parser("report", parents=[common], help="print the tables of a finished comparison")
    rp.add_argument("--json", action="store_true", help="dump summary.json instead of tables")
    rp.set_defaults(func=_cmd_report)
    sub.add_parser("schema", help="print the configuration JSON schema").set_defaults(
        func=lambda a: print(json.dumps(ex.CONFIG_SCHEMA, indent=2))
    )
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except (ex.BudgetError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
