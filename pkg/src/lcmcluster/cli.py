"""Command-line interface.

Exit codes: 0 on success, 1 on usage or I/O errors, 2 when a fit reports
a failure (for example an empty class).
"""

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench, io
from .core import generate_instance
from .exceptions import BenchConfigError, ConvergenceError, FormatError, ParseError
from .refine import DEFAULT_STEPS, cem, em_baseline, estimate_theta, sola, sola_plus, sola_split
from .linalg import all_singular_values
from .select import DEFAULT_CAP, THRESHOLD_FACTOR, diagnose, estimate_k, noise_threshold
from .spectral import spectral_clustering

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2
FIT_METHODS = ("spec", "sola", "sola_plus", "cem", "sola_split", "em")


class UsageError(Exception):
    pass


def _pair(text, cast=float):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}")
    return tuple(cast(p) for p in parts)


def _load_input(args):
    return io.ingest_csv(
        args.input,
        impute_seed=args.impute_seed,
        header=args.header,
        exclude_rows=args.exclude_rows,
        max_missing=args.max_missing,
    )


def _spectrum(R, cap):
    return all_singular_values(R, min(*R.shape, cap))


# ------------------------------------------------------------ subcommands


def cmd_fit(args):
    R = _load_input(args)
    summary = {"method": args.method, "n": R.shape[0], "j": R.shape[1]}
    if args.auto_k:
        values = _spectrum(R, DEFAULT_CAP)
        k = estimate_k(values, *R.shape, factor=args.threshold_factor)
        summary["k_hat"] = k
        summary["threshold"] = float(noise_threshold(*R.shape, args.threshold_factor))
        if k < 1:
            raise UsageError("estimated number of classes is 0; pass --k explicitly")
    elif args.k is not None:
        k = args.k
    else:
        raise UsageError("one of --k or --auto-k is required")
    summary["k"] = k

    start = time.perf_counter()
    if args.method == "spec":
        labels = spectral_clustering(R, k, random_state=args.seed).labels
        theta = None
        trace = []
        failure = "empty_class" if np.unique(labels).size < k else "none"
    else:
        if args.method == "sola":
            report = sola(R, k, random_state=args.seed)
        elif args.method == "sola_plus":
            report = sola_plus(R, k, steps=args.steps, random_state=args.seed)
        elif args.method == "cem":
            report = cem(R, k, steps=args.steps, random_state=args.seed)
        elif args.method == "sola_split":
            report = sola_split(R, k, random_state=args.seed)
        else:
            report = em_baseline(R, k, random_state=args.seed)
        labels, theta, trace = report.labels, report.theta_hat, report.loglik_trace
        failure = report.failure.value
    if theta is None and failure == "none":
        theta = estimate_theta(R, labels, k)
    summary["seconds"] = time.perf_counter() - start
    summary["loglik"] = trace[-1] if trace else None
    summary["loglik_trace"] = trace
    summary["failure"] = failure

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_labels(out / "labels.txt", labels)
    if theta is not None:
        io.write_matrix_csv(out / "theta_hat.csv", theta)
    io.write_key_values(out / "summary.txt", summary)
    return EXIT_OK if failure == "none" else EXIT_FAILED


def cmd_select_k(args):
    if args.values:
        if args.n is None or args.j is None:
            raise UsageError("--values needs --n and --j")
        values = np.array([float(v) for v in args.values.split(",")])
        n, j = args.n, args.j
    elif args.input:
        R = _load_input(args)
        n, j = R.shape
        values = _spectrum(R, args.cap)
    else:
        raise UsageError("one of --input or --values is required")
    result = {
        "k_hat": estimate_k(values, n, j, factor=args.threshold_factor),
        "threshold": float(noise_threshold(n, j, args.threshold_factor)),
        "n": n,
        "j": j,
        "singular_values": [float(v) for v in values[: args.show]],
    }
    _emit(result, args.out)
    return EXIT_OK


def cmd_diagnose(args):
    if args.theta:
        theta = io.read_matrix_csv(args.theta)
    elif args.beta:
        theta = np.random.default_rng(args.seed).beta(*args.beta, size=(args.j, args.k))
    else:
        raise UsageError("one of --theta or --beta is required")
    report = diagnose(theta, beta_params=args.beta)
    _emit(report.as_dict(), args.out)
    return EXIT_OK


def cmd_simulate(args):
    inst = generate_instance(args.n, args.j, args.k, *args.beta, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_matrix_csv(out / "responses.csv", inst.responses, fmt="%d")
    io.write_labels(out / "labels.txt", inst.labels)
    io.write_matrix_csv(out / "theta.csv", inst.theta)
    io.write_key_values(out / "instance.txt", {
        "n": args.n, "j": args.j, "k": args.k, "beta": inst.beta, "seed": args.seed,
    })
    return EXIT_OK


def cmd_bench(args):
    cfg = bench.load_bench_config(args.config)
    if args.replicates is not None:
        cfg = replace(cfg, replicates=args.replicates)
    rows = bench.run_bench(cfg, jobs=args.jobs)
    aggregates = bench.aggregate(rows)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bench.write_rows_csv(out / "rows.csv", rows)
    bench.write_timings_csv(out / "timings.csv", rows)
    bench.write_aggregate_csv(out / "aggregate.csv", aggregates)
    print(bench.format_table(aggregates))
    return EXIT_OK


def _emit(items, out):
    if out:
        io.write_key_values(out, items)
    else:
        for key, value in items.items():
            print(f"{key}={io._format_value(value)}")


# ------------------------------------------------------------ parser


def _add_input_options(p, required=True):
    p.add_argument("--input", required=required, help="CSV of 0/1/NA responses")
    p.add_argument("--header", action="store_true", help="skip the first line")
    p.add_argument("--impute-seed", type=int, default=0)
    p.add_argument("--exclude-rows", help="file of 1-based row numbers to drop")
    p.add_argument("--max-missing", type=float, help="drop rows with a larger missing fraction")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lcmcluster", description="Latent class clustering of binary responses."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="cluster a response matrix")
    _add_input_options(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--k", type=int)
    group.add_argument("--auto-k", action="store_true", help="estimate K by singular value thresholding")
    p.add_argument("--method", choices=FIT_METHODS, default="sola")
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS, help="steps for sola_plus/cem")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold-factor", type=float, default=THRESHOLD_FACTOR)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select-k", help="estimate the number of classes")
    _add_input_options(p, required=False)
    p.add_argument("--values", help="comma-separated singular values instead of --input")
    p.add_argument("--n", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--show", type=int, default=5, help="singular values to report")
    p.add_argument("--threshold-factor", type=float, default=THRESHOLD_FACTOR)
    p.add_argument("--out", help="write key=value report here instead of stdout")
    p.set_defaults(func=cmd_select_k)

    p = sub.add_parser("diagnose", help="separation and exponent diagnostics")
    p.add_argument("--theta", help="CSV of item parameters (J rows, K columns)")
    p.add_argument("--beta", type=_pair, help="draw theta from Beta(a,b)")
    p.add_argument("--j", type=int, default=100)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("simulate", help="write a generated instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--beta", type=_pair, default=(5.0, 5.0))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="run a benchmark config or preset")
    p.add_argument("config", help=f"config file or preset ({', '.join(bench.PRESETS)})")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--replicates", type=int, help="override the replicate count")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ParseError, FormatError, BenchConfigError, ConvergenceError,
            ValueError, OSError) as exc:
        print(f"lcmcluster {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
