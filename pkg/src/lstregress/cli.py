"""Command-line interface.

Subcommands: ``fit`` (estimate coefficients from a CSV), ``bench`` (the
Monte-Carlo replication harness), ``probe-breakdown`` (contamination
deviation curves), ``plot`` (p=2 scatter/fit SVG) and ``gen`` (write a
synthetic dataset).

Exit codes: 0 success, 2 malformed CSV, 3 rank-deficient or otherwise
unusable design, 4 invalid configuration, 5 plot requested for p != 2.
Requested artifacts go to stdout (or --out); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import bench, diagnostics, estimators, svgplot
from .core import (
    Dataset,
    DegenerateDesignError,
    NoValidPairsError,
    RankDeficientError,
    TooManySingularDrawsError,
)

EXIT_OK = 0
EXIT_CSV = 2
EXIT_RANK = 3
EXIT_CONFIG = 4
EXIT_PLOT_DIM = 5

METHODS = ("ls", "lst-aa1", "lst-aa2", "lst-oracle", "lts")


class CsvFormatError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; this tool reserves 2 for CSV
    # problems and uses 4 for configuration errors
    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def load_csv(path, y_col=None) -> Dataset:
    """Read a numeric CSV with a header row; last column is the response
    unless ``y_col`` names another one."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise CsvFormatError(f"{path}: empty file") from None
            header = [h.strip() for h in header]
            if any(not h for h in header):
                raise CsvFormatError(f"{path}: blank column name in header")
            rows = []
            for ln, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise CsvFormatError(
                        f"{path}:{ln}: expected {len(header)} fields, got {len(row)}"
                    )
                try:
                    rows.append([float(v) for v in row])
                except ValueError:
                    raise CsvFormatError(f"{path}:{ln}: non-numeric value") from None
    except OSError as e:
        raise CsvFormatError(f"{path}: {e}") from None
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=np.float64)
    if y_col is None:
        yi = len(header) - 1
    else:
        try:
            yi = header.index(y_col)
        except ValueError:
            raise CsvFormatError(f"{path}: no column named {y_col!r}") from None
    carriers = np.delete(arr, yi, axis=1)
    try:
        return Dataset(carriers, arr[:, yi])
    except ValueError as e:
        raise CsvFormatError(f"{path}: {e}") from None


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _config_for(method, alpha, h, seed):
    if method == "lst-aa1":
        return estimators.Aa1Config(alpha=alpha, seed=seed)
    if method == "lst-aa2":
        return estimators.Aa2Config(alpha=alpha, seed=seed)
    if method == "lts":
        return estimators.LtsConfig(h=h, seed=seed)
    if method == "lst-oracle":
        return alpha
    return None


def _cmd_fit(args) -> int:
    try:
        data = load_csv(args.input, args.y_col)
    except CsvFormatError as e:
        print(e, file=sys.stderr)
        return EXIT_CSV
    cfg = _config_for(args.method, args.alpha, args.h, args.seed)
    try:
        report = diagnostics.fit_by_tag(data, args.method, cfg)
    except (RankDeficientError, DegenerateDesignError, NoValidPairsError,
            TooManySingularDrawsError) as e:
        print(f"design not usable: {e}", file=sys.stderr)
        return EXIT_RANK
    except ValueError as e:
        print(f"invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    doc = {"schema": "lst-regress/1", "kind": "fit-report", "input": args.input,
           "alpha": args.alpha, "h": args.h}
    doc.update(report.to_dict())
    if args.format == "json":
        _write_text(args.out, json.dumps(doc, indent=2) + "\n")
    else:
        lines = [f"method  {report.method}",
                 f"beta    {' '.join(repr(float(b)) for b in report.beta)}",
                 f"q       {report.q!r}",
                 f"kept    {' '.join(str(int(i)) for i in report.kept)}"]
        _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_gen(args) -> int:
    try:
        if args.scenario == "clean-gaussian":
            data = bench.gen_clean_gaussian(args.n, args.p, args.seed)
        else:
            data = bench.gen_correlated(args.n, args.p, args.rho, args.seed)
        if args.eps > 0:
            data = bench.contaminate(data, args.eps, args.seed + 1)
    except ValueError as e:
        print(f"invalid parameters: {e}", file=sys.stderr)
        return EXIT_CONFIG
    header = [f"x{i + 1}" for i in range(data.p - 1)] + ["y"]
    lines = [",".join(header)]
    for i in range(data.n):
        vals = [repr(float(v)) for v in data.carriers[i]] + [repr(float(data.response[i]))]
        lines.append(",".join(vals))
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_bench(args) -> int:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    sc = bench.Scenario(
        kind=args.scenario, n=args.n, p=args.p, reps=args.reps,
        master_seed=args.seed, rho=args.rho, eps=args.eps,
        alpha=args.alpha, methods=methods,
    )
    workers = int(os.environ.get("LST_THREADS", "1") or "1")
    try:
        table = bench.run_benchmark(sc, workers=workers)
    except ValueError as e:
        print(f"invalid scenario: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table.to_json() + "\n")
    if args.format == "json":
        sys.stdout.write(table.to_json() + "\n")
    else:
        sys.stdout.write(table.render_text() + "\n")
    return EXIT_OK


def _cmd_probe(args) -> int:
    if args.input:
        try:
            data = load_csv(args.input, args.y_col)
        except CsvFormatError as e:
            print(e, file=sys.stderr)
            return EXIT_CSV
    else:
        try:
            data = bench.gen_clean_gaussian(args.n, args.p, args.seed)
        except ValueError as e:
            print(f"invalid parameters: {e}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        mags = [float(v) for v in args.magnitudes.split(",")]
        cfg = _config_for(args.method, args.alpha, args.h, args.seed)
        curve = diagnostics.breakdown_probe(
            data, args.method, args.m_contam, mags, config=cfg,
            leverage_carriers=not args.vertical,
        )
    except (RankDeficientError, DegenerateDesignError) as e:
        print(f"design not usable: {e}", file=sys.stderr)
        return EXIT_RANK
    except ValueError as e:
        print(f"invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    lines = ["magnitude,deviation"]
    lines += [f"{repr(m)},{repr(d)}" for m, d in curve]
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_plot(args) -> int:
    try:
        data = load_csv(args.input, args.y_col)
    except CsvFormatError as e:
        print(e, file=sys.stderr)
        return EXIT_CSV
    if data.p != 2:
        print(f"plot requires p = 2, data has p = {data.p}", file=sys.stderr)
        return EXIT_PLOT_DIM
    fits = []
    try:
        if args.fits:
            for k, spec in enumerate(s for s in args.fits.split(";") if s):
                beta = np.array([float(v) for v in spec.split(",")])
                if beta.shape != (2,):
                    raise ValueError(f"fit {k + 1}: expected 2 coefficients")
                fits.append((f"beta{k + 1}", beta))
        if args.methods:
            for method in (m.strip() for m in args.methods.split(",") if m.strip()):
                cfg = _config_for(method, args.alpha, args.h, args.seed)
                report = diagnostics.fit_by_tag(data, method, cfg)
                fits.append((method, report.beta))
    except (RankDeficientError, DegenerateDesignError) as e:
        print(f"design not usable: {e}", file=sys.stderr)
        return EXIT_RANK
    except ValueError as e:
        print(f"invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    _write_text(args.out, svgplot.scatter_svg(data, fits))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lst-regress",
                     description="Robust regression by least squares of depth-trimmed residuals.")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit one estimator to a CSV dataset", parents=[])
    fit.add_argument("input", help="CSV file (header row; last column is y unless --y-col)")
    fit.add_argument("--method", required=True, choices=METHODS)
    fit.add_argument("--alpha", type=float, default=1.0, help="trimming constant (>= 1)")
    fit.add_argument("--h", type=int, default=None, help="LTS subset size")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--y-col", default=None, help="response column name")
    fit.add_argument("--format", choices=("json", "table"), default="json")
    fit.add_argument("--out", default=None, help="output path (default stdout)")
    fit.set_defaults(func=_cmd_fit)

    gen = sub.add_parser("gen", help="generate a synthetic CSV dataset")
    gen.add_argument("--scenario", choices=("clean-gaussian", "correlated"),
                     default="clean-gaussian")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--p", type=int, required=True)
    gen.add_argument("--rho", type=float, default=0.9)
    gen.add_argument("--eps", type=float, default=0.0, help="contamination fraction")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default=None, help="output path (default stdout)")
    gen.set_defaults(func=_cmd_gen)

    bn = sub.add_parser(
        "bench", help="Monte-Carlo replication benchmark",
        epilog="example (clean-Gaussian accuracy/timing row): "
               "lst-regress bench --scenario clean-gaussian --n 100 --p 5 "
               "--reps 1000 --methods lst-aa1,lst-aa2 --alpha 1 --seed 1",
    )
    bn.add_argument("--scenario", choices=bench.KINDS, default="clean-gaussian")
    bn.add_argument("--n", type=int, required=True)
    bn.add_argument("--p", type=int, required=True)
    bn.add_argument("--rho", type=float, default=0.9)
    bn.add_argument("--eps", type=float, default=0.0)
    bn.add_argument("--reps", type=int, required=True)
    bn.add_argument("--seed", type=int, default=0)
    bn.add_argument("--alpha", type=float, default=None)
    bn.add_argument("--methods", default="ls,lst-aa1,lst-aa2,lts")
    bn.add_argument("--format", choices=("table", "json"), default="table")
    bn.add_argument("--out", default=None, help="also write the JSON table here")
    bn.set_defaults(func=_cmd_bench)

    probe = sub.add_parser("probe-breakdown", help="contamination deviation curve")
    src = probe.add_mutually_exclusive_group(required=True)
    src.add_argument("input", nargs="?", default=None, help="CSV dataset")
    src.add_argument("--gen", action="store_true", help="generate clean Gaussian data")
    probe.add_argument("--n", type=int, default=50)
    probe.add_argument("--p", type=int, default=3)
    probe.add_argument("--method", required=True, choices=METHODS)
    probe.add_argument("--m-contam", type=int, required=True)
    probe.add_argument("--magnitudes", default="1e2,1e3,1e4,1e5,1e6")
    probe.add_argument("--alpha", type=float, default=1.0)
    probe.add_argument("--h", type=int, default=None)
    probe.add_argument("--seed", type=int, default=0)
    probe.add_argument("--y-col", default=None)
    probe.add_argument("--vertical", action="store_true",
                       help="hold carriers fixed and grow only the response")
    probe.add_argument("--out", default=None)
    probe.set_defaults(func=_cmd_probe)

    plot = sub.add_parser("plot", help="scatter + fit lines SVG (p = 2 only)")
    plot.add_argument("input", help="CSV dataset")
    plot.add_argument("--fits", default=None,
                      help="semicolon-separated coefficient pairs, e.g. '0,1;1.2,-0.5'")
    plot.add_argument("--methods", default=None, help="comma-separated methods to fit")
    plot.add_argument("--alpha", type=float, default=1.0)
    plot.add_argument("--h", type=int, default=None)
    plot.add_argument("--seed", type=int, default=0)
    plot.add_argument("--y-col", default=None)
    plot.add_argument("--out", required=True, help="SVG output path")
    plot.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
