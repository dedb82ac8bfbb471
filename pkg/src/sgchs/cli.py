"""Command-line entry point.

Subcommands ``ingest``, ``fit``, ``risk``, ``backtest`` and ``plotdata`` each
read a JSON run configuration (or the bundled fixture with ``--fixture``)
and write tab-separated reports into ``--out``. Exit status is 0 on
success, 1 on input errors and 2 on numerical failures.
"""

import argparse
import os
import sys
from dataclasses import replace
from importlib import resources

from .exceptions import InputError, NumericalError
from .pipeline import RunConfig, prepare, returns_table, run_backtest, run_fit, run_plotdata, run_risk, stats_table


def fixture_config_path():
    return str(resources.files("sgchs") / "data" / "fixture_config.json")


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _str_list(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (status 1); status 2 is reserved for numerical failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="sgchs", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="JSON run configuration")
    src.add_argument("--fixture", action="store_true", help="use the bundled synthetic fixture")
    common.add_argument("paths", nargs="*", help="price files (used when no config is given)")
    common.add_argument("--method", choices=("mom", "ifm"))
    common.add_argument("--family", type=_str_list, metavar="LIST",
                        help="comma-separated families (HS, Gaussian), one per asset or one for all")
    common.add_argument("--copula", choices=("on", "off"))
    common.add_argument("--alphas", type=_float_list, metavar="LIST")
    common.add_argument("--boot-r", type=int, metavar="INT", help="risk bootstrap replicates")
    common.add_argument("--boot-b", type=int, metavar="INT", help="backtest bootstrap replicates")
    common.add_argument("--gof-b", type=int, metavar="INT", help="KS/AD simulation replicates")
    common.add_argument("--block-len", type=int, metavar="INT")
    common.add_argument("--confidence", type=float, metavar="REAL")
    common.add_argument("--split-date", metavar="DATE")
    common.add_argument("--seed", type=int, metavar="INT")
    common.add_argument("--out", metavar="DIR")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("ingest", "align prices, write returns and summary statistics"),
        ("fit", "fit the configured models on period one"),
        ("risk", "model and empirical VaR/ES with bootstrap intervals"),
        ("backtest", "out-of-sample backtests and in-sample goodness of fit"),
        ("plotdata", "density grids and histogram bins"),
    ):
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def config_from_args(args):
    if args.fixture:
        config = RunConfig.load(fixture_config_path())
    elif args.config:
        config = RunConfig.load(args.config)
    elif args.paths:
        assets = [{"path": os.path.abspath(p)} for p in args.paths]
        config = RunConfig.from_dict({"assets": assets, "models": [{}]})
    else:
        raise InputError("give --config PATH, --fixture, or price files")
    config = config.with_overrides(
        method=args.method,
        families=None if args.family is None else (args.family[0] if len(args.family) == 1 else args.family),
        copula=None if args.copula is None else args.copula == "on",
    )
    overrides = {
        "alphas": args.alphas, "boot_r": args.boot_r, "boot_b": args.boot_b, "gof_b": args.gof_b,
        "block_len": args.block_len, "confidence": args.confidence,
        "split_date": args.split_date, "seed": args.seed, "out": args.out,
    }
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})


def _write(tables, out):
    os.makedirs(out, exist_ok=True)
    written = []
    for name, table in tables.items():
        path = os.path.join(out, f"{name}.tsv")
        table.write(path)
        written.append(path)
    return written


def execute(args):
    config = config_from_args(args)
    data = prepare(config)
    cmd = args.command
    if cmd == "ingest":
        tables = {"returns": returns_table(data), "stats": stats_table(config, data)}
    elif cmd == "fit":
        tables = {"fit": run_fit(config, data)[2]}
    else:
        fits, _, fit_tab = run_fit(config, data)
        tables = {"fit": fit_tab}
        if cmd == "risk":
            tables["risk"] = run_risk(config, data, fits)[1]
        elif cmd == "backtest":
            bt, gof = run_backtest(config, data, fits)[1]
            tables.update(backtest=bt, gof=gof)
        else:
            tables.update(run_plotdata(config, data, fits))
    return _write(tables, config.out)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        for path in execute(args):
            print(path)
    except InputError as exc:
        print(f"sgchs: input error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"sgchs: numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
