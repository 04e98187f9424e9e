"""Rerun the synthetic benchmark (S1-S3, all methods) and print a markdown table.

Usage:
    python3 scripts/reproduce_table.py --runs 100 --seed 0 [--csv-out results.csv]

Published T-SVM rows are shown next to the recomputed ones for reference.
"""

import argparse
import time

from causal_ssl.bench import Protocol, render_report, run_protocol


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--datasets", default="s1,s2,s3")
    parser.add_argument("--csv-out", help="also write the full-precision CSV here")
    args = parser.parse_args()

    report = None
    for name in args.datasets.split(","):
        t0 = time.perf_counter()
        part = run_protocol(Protocol(dataset=name, runs=args.runs, seed=args.seed))
        print(f"{name}: {args.runs} runs in {time.perf_counter() - t0:.1f}s")
        for c in part.cells:
            if c.failures or c.nonconverged:
                print(f"  {c.method}: {c.failures} failed, {c.nonconverged} not converged")
        report = part if report is None else report.merged(part)

    print()
    print(render_report(report, "markdown", reference=True))
    if args.csv_out:
        with open(args.csv_out, "w", encoding="utf-8") as fh:
            fh.write(render_report(report, "csv"))


if __name__ == "__main__":
    main()
