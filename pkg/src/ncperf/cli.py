"""Command-line entry point: ``ncperf {synth,run,sweep,report}``.

Exit status is 0 on success, 1 for configuration errors and 2 for numerical
failures during a run.
"""

import argparse
import csv
import logging
import sys

from . import harness
from .exceptions import ConfigError, NumericalError
from .measures import MEASURE_NAMES

EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _floats(text):
    return [float(t) for t in text.split(",") if t]


def _ints(text):
    return [int(float(t)) for t in text.split(",") if t]


def _add_shared(p):
    p.add_argument("--measure", default="qmean", choices=MEASURE_NAMES + ("ratio",))
    p.add_argument("--algo", default="ncfw", choices=harness.ALGOS)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--noise-scheme", default="uniform", choices=harness.NOISE_SCHEMES)
    p.add_argument("--noise-matrix", help="headerless CSV file holding the true noise matrix")
    p.add_argument("--noise-matrix-estimate", help="CSV file with an estimated noise matrix used for correction")
    p.add_argument("--identity-noise", action="store_true", help="skip noise correction")
    p.add_argument("--steps", type=int, help="solver iterations (default 5000 for Frank-Wolfe, 200 for bisection)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, default=1000, help="training sample size for synthetic data")
    p.add_argument("--m-test", type=int, default=100_000, help="clean test sample size for synthetic data")
    p.add_argument("--spec", help="JSON synthetic-distribution spec (default: built-in)")
    p.add_argument("--train", help="training CSV; its label column holds noisy labels")
    p.add_argument("--test", help="test CSV with clean labels")
    p.add_argument("--ratio-a", help="CSV numerator matrix for --measure ratio")
    p.add_argument("--ratio-b", help="CSV denominator matrix for --measure ratio")
    p.add_argument("--l2-lambda", type=float, default=1e-4)
    p.add_argument("--cv-folds", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--grad-tol", type=float, default=1e-6)
    p.add_argument("--lr", type=float, default=1.0)


def _config(args, **overrides):
    keys = ("algo", "measure", "sigma", "noise_scheme", "noise_matrix", "noise_matrix_estimate",
            "identity_noise", "steps", "seed", "m", "m_test", "train", "test", "spec", "ratio_a",
            "ratio_b", "l2_lambda", "cv_folds", "max_iters", "grad_tol", "lr")
    values = {k: getattr(args, k) for k in keys}
    values.update(overrides)
    return harness.RunConfig(**values)


def build_parser():
    parser = _Parser(prog="ncperf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic train/test split with noisy training labels")
    _add_shared(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("run", help="train one algorithm and print a JSON result line")
    _add_shared(p)
    p.add_argument("--out", help="append the result line to this file as well")

    p = sub.add_parser("sweep", help="run a grid of synthetic experiments into a JSON-lines file")
    _add_shared(p)
    p.add_argument("--sigmas", type=_floats, default=[0.1, 0.2, 0.3, 0.4, 0.6])
    p.add_argument("--ms", type=_ints, default=[100, 1000, 10_000, 100_000])
    p.add_argument("--seeds", type=_ints, default=[1, 2, 3, 4, 5])
    p.add_argument("--pairs", default=None,
                   help="comma-separated algo:measure pairs (default: the --algo/--measure pair)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="summarise a results file as mean and standard error")
    p.add_argument("results")
    p.add_argument("--value", default="clean_test_loss", choices=("clean_test_loss", "noisy_test_loss"))
    p.add_argument("--out", help="write CSV here instead of standard output")
    return parser


def _cmd_synth(args):
    for path in harness.write_synthetic(_config(args), args.out):
        print(path)


def _cmd_run(args):
    line = harness.run_experiment(_config(args)).to_json()
    print(line)
    if args.out:
        with open(args.out, "a") as fh:
            fh.write(line + "\n")


def _cmd_sweep(args):
    if args.pairs:
        pairs = [tuple(p.split(":", 1)) for p in args.pairs.split(",") if p]
        if any(len(p) != 2 for p in pairs):
            raise ConfigError("--pairs entries must look like algo:measure")
    else:
        pairs = [(args.algo, args.measure)]
    configs = harness.sweep_configs(_config(args), pairs, args.sigmas, args.ms, args.seeds)
    added = harness.run_sweep(configs, args.out, jobs=args.jobs)
    print(f"{added} new records, {len(configs)} in grid", file=sys.stderr)


def _cmd_report(args):
    rows = harness.summarize(harness.read_records(args.results), value=args.value)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=["measure", "algo", "sigma", "m", "k", "mean", "sem"])
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            fh.close()


COMMANDS = {"synth": _cmd_synth, "run": _cmd_run, "sweep": _cmd_sweep, "report": _cmd_report}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"ncperf: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"ncperf: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
