"""Command-line experiment driver.

    sbym run --config experiment.cfg [--seed N] [--out PATH] [--format csv|json]
             [--set key=value ...]
    sbym list

The config file is plain ``key = value`` text naming the experiment and any
parameter overrides; command-line flags win over the file.  Exit code is 0
iff every check in the report passed (2 for configuration errors).
"""

import argparse
import sys

from . import experiments
from .errors import ConfigError
from .report import emit


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sbym", description="run reproducible verification experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run one experiment from a config file")
    runp.add_argument("--config", required=True, help="key=value config file")
    runp.add_argument("--seed", type=int, default=None,
                      help="override the seed (u64)")
    runp.add_argument("--out", default=None, help="report output path")
    runp.add_argument("--format", dest="fmt", choices=("csv", "json"),
                      default=None, help="report format (default json)")
    runp.add_argument("--set", dest="overrides", action="append", default=[],
                      metavar="KEY=VALUE", help="override one parameter")
    sub.add_parser("list", help="list experiment names")
    return parser


def _config_from_args(args):
    raw = experiments.parse_config_file(args.config)
    experiment = raw.pop("experiment", None)
    if experiment is None:
        raise ConfigError("config file must set 'experiment'",
                          fields={"experiment": "missing"})
    seed = raw.pop("seed", 0)
    out = raw.pop("out", None)
    fmt = raw.pop("format", "json")
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}",
                              fields={"set": item})
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    if args.seed is not None:
        seed = args.seed
    if args.out is not None:
        out = args.out
    if args.fmt is not None:
        fmt = args.fmt
    return experiments.build_config(experiment, raw, seed=seed, out=out, fmt=fmt)


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "list":
        for name in experiments.list_experiments():
            print(name)
        return 0
    try:
        config = _config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        for field, msg in exc.fields.items():
            print(f"  {field}: {msg}", file=sys.stderr)
        return 2
    try:
        report = experiments.run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for row in report.checks:
        status = "PASS" if row.passed else "FAIL"
        print(f"[{status}] {report.experiment}: {row.name} "
              f"(residual/z = {row.z_or_resid:.3g})")
    print(f"{report.experiment}: {'PASS' if report.passed else 'FAIL'} "
          f"({sum(r.passed for r in report.checks)}/{len(report.checks)} checks, "
          f"{report.wall_clock_s:.2f}s, seed {report.seed})")
    if config.out:
        emit(report, config.out, config.fmt)
        print(f"report written to {config.out} ({config.fmt})")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
