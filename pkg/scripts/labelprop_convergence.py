"""How many label-propagation runs hit max_iter, per preset and RBF width.

    python3 scripts/labelprop_convergence.py --runs 100 --gammas 0.1,1,20
"""

import argparse

import numpy as np

from causal_ssl.baselines import LabelPropConfig, fit_label_propagation
from causal_ssl.bench import Protocol, draw_run
from causal_ssl.synth import PRESETS


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--gammas", default="0.1,1,20")
    args = parser.parse_args()

    for name in PRESETS:
        p = Protocol(dataset=name, runs=args.runs, seed=args.seed)
        for gamma in (float(g) for g in args.gammas.split(",")):
            cfg = LabelPropConfig(gamma=gamma)
            iters, nonconv = [], 0
            for r in range(args.runs):
                ds, split = draw_run(p, r)
                L, U = ds.subset(split.labelled_idx), ds.subset(split.unlabelled_idx)
                res = fit_label_propagation(L.joint, L.labels, U.joint, cfg)
                iters.append(res.n_iter)
                nonconv += not res.converged
            print(f"{name} gamma={gamma:<5g} non-converged {nonconv}/{args.runs}  "
                  f"iterations median {int(np.median(iters))} max {max(iters)}")


if __name__ == "__main__":
    main()
