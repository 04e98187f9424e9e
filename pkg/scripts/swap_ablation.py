"""Paired swap-roles ablation of the causal methods over several master seeds.

Each seed runs the full protocol twice on shared splits: once with the true
cause/effect partition and once with the two feature blocks exchanged. This
is the pilot used to calibrate the acceptance threshold for the swap test.

    python3 scripts/swap_ablation.py --dataset s2 --seeds 0,1,2,3,4
"""

import argparse

import numpy as np

from causal_ssl.bench import CAUSAL_METHODS, Protocol, ablate_swap_roles


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dataset", default="s2")
    parser.add_argument("--seeds", default="0,1,2,3,4")
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--methods", default=",".join(CAUSAL_METHODS))
    args = parser.parse_args()

    methods = tuple(args.methods.split(","))
    drops = {m: [] for m in methods}
    for seed in (int(s) for s in args.seeds.split(",")):
        ab = ablate_swap_roles(Protocol(dataset=args.dataset, runs=args.runs, seed=seed, methods=methods))
        for m, (normal, swapped) in ab.paired_means(args.dataset).items():
            drops[m].append(normal - swapped)
            print(f"seed {seed:3d}  {m:12s} normal {normal:.4f}  swapped {swapped:.4f}  drop {normal - swapped:+.4f}")

    print()
    for m, d in drops.items():
        d = np.array(d)
        print(f"{m:12s} drop min {d.min():+.4f}  mean {d.mean():+.4f}  max {d.max():+.4f}  "
              f"strictly lower in {np.sum(d > 0)}/{d.size} seeds")


if __name__ == "__main__":
    main()
