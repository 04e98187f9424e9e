"""``causal-ssl`` command line: ``generate`` and ``bench``.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import synth
from .baselines import LabelPropConfig
from .bench import METHODS, BenchReport, Protocol, ablate_swap_roles, render_report, run_protocol
from .data import PartitionConfig, write_csv
from .errors import ConfigError, DataError

log = logging.getLogger("causal_ssl")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causal-ssl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="draw a synthetic dataset from a preset")
    g.add_argument("--preset", required=True, choices=synth.PRESETS)
    g.add_argument("--n", type=int, default=210)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="CSV path; a .json sidecar is written next to it")

    b = sub.add_parser("bench", help="repeated-split transductive benchmark")
    b.add_argument("--dataset", default="s1",
                   help="s1, s2, s3, a comma list of presets, or csv")
    b.add_argument("--csv", dest="csv_path")
    b.add_argument("--config", dest="config_path", help="partition config JSON for --dataset csv")
    b.add_argument("--name", help="dataset label used in the report")
    b.add_argument("--methods", default=",".join(METHODS))
    b.add_argument("--n-labelled", type=int, default=10)
    b.add_argument("--n-unlabelled", type=int, default=200)
    b.add_argument("--runs", type=int, default=100)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--swap-roles", action="store_true", help="exchange cause and effect features")
    b.add_argument("--ablate", action="store_true",
                   help="paired normal/swapped run of the causal methods on shared splits")
    b.add_argument("--standardize", action="store_true")
    b.add_argument("--ridge-lambda", type=float, default=1.0)
    b.add_argument("--logistic-lambda", type=float, default=1.0)
    b.add_argument("--gamma", type=float, default=20.0, help="RBF width for label propagation")
    b.add_argument("--format", choices=("csv", "markdown"), default="csv")
    b.add_argument("--reference", action="store_true",
                   help="append published T-SVM rows to markdown output")
    b.add_argument("--out", help="output path (default: stdout)")
    return parser


def _generate(args) -> int:
    if args.n < 1:
        raise ConfigError("--n must be at least 1")
    cfg = synth.preset(args.preset)
    ds = synth.generate(cfg, args.n, np.random.default_rng(args.seed))
    out = Path(args.out)
    write_csv(ds, out)
    sidecar = out.with_suffix(".json") if out.suffix != ".json" else out.with_name(out.name + ".meta.json")
    synth.write_sidecar(sidecar, cfg, args.n, args.seed)
    log.info("wrote %s and %s", out, sidecar)
    return 0


def _protocols(args):
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    common = dict(
        n_labelled=args.n_labelled,
        n_unlabelled=args.n_unlabelled,
        runs=args.runs,
        seed=args.seed,
        methods=methods,
        swap_roles=args.swap_roles,
        standardize=args.standardize,
        ridge_lambda=args.ridge_lambda,
        logistic_lambda=args.logistic_lambda,
        labelprop=LabelPropConfig(gamma=args.gamma),
    )
    if args.dataset == "csv":
        if not args.csv_path or not args.config_path:
            raise ConfigError("--dataset csv requires --csv and --config")
        part = PartitionConfig.from_json(args.config_path)
        return [Protocol(dataset="csv", csv_path=args.csv_path, partition=part, name=args.name, **common)]
    names = [d.strip() for d in args.dataset.split(",") if d.strip()]
    return [Protocol(dataset=d, **common) for d in names]


def _bench(args) -> int:
    report = None
    for p in _protocols(args):
        if args.ablate:
            ab = ablate_swap_roles(p)
            part = ab.normal.merged(_relabel(ab.swapped, "-swapped"))
        else:
            part = run_protocol(p)
        report = part if report is None else report.merged(part)
    text = render_report(report, args.format, reference=args.reference)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _relabel(report, suffix):
    return BenchReport(
        [replace(c, dataset=c.dataset + suffix) for c in report.cells],
        {k + suffix: v for k, v in report.records.items()},
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "generate":
            return _generate(args)
        return _bench(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
