"""Command-line entry point ``echo-lab``."""

import argparse
import sys

from .errors import EchoLabError


def _window(text):
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like t1:t2, got {text!r}") from None


def cmd_run(args):
    from .config import load_config
    from .experiments import run_experiment
    cfg = load_config(args.config, args.set or ())
    plot = False if args.no_plot else None
    report = run_experiment(cfg, plot=plot)
    sys.stdout.write(report.to_text())
    sys.stdout.write(f"outputs in {cfg['output_dir']}\n")
    return 0 if report.passed else 1


def cmd_fit(args):
    from .io import read_csv
    from .metrics import fit_exp_rate
    header, data = read_csv(args.csv)
    if args.col not in data:
        raise EchoLabError(f"column {args.col!r} not found; columns are {', '.join(header)}")
    x = args.x or header[0]
    fit = fit_exp_rate(data[args.col], args.window, data[x], saturation=args.saturation)
    print(f"column = {args.col}")
    print(f"window = {fit.t_start:g}:{fit.t_end:g}")
    print(f"n_points = {fit.n_points}")
    print(f"rate = {fit.rate:.10g}")
    print(f"stderr = {fit.stderr:.10g}")
    print(f"r2 = {fit.r2:.10g}")
    return 0


def cmd_plot(args):
    import os
    from .plotting import plot_csv
    out = args.output or os.path.join(os.path.dirname(os.path.abspath(args.csv)), "plot.svg")
    plot_csv(args.csv, out, columns=args.col or None)
    print(out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="echo-lab", description="Echo decay experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a key = value config file")
    run.add_argument("config")
    run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    run.add_argument("--no-plot", action="store_true", help="skip plot.svg")
    run.set_defaults(func=cmd_run)

    fit = sub.add_parser("fit", help="fit an exponential rate to one CSV column")
    fit.add_argument("csv")
    fit.add_argument("--col", required=True)
    fit.add_argument("--window", type=_window, required=True, metavar="T1:T2")
    fit.add_argument("--x", help="abscissa column (default: first column)")
    fit.add_argument("--saturation", type=float, help="drop points below 3x this plateau")
    fit.set_defaults(func=cmd_fit)

    plot = sub.add_parser("plot", help="log-y SVG plot of a CSV file")
    plot.add_argument("csv")
    plot.add_argument("--col", action="append", help="column to draw (repeatable)")
    plot.add_argument("-o", "--output")
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EchoLabError, ValueError, KeyError, OSError) as exc:
        print(f"echo-lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
