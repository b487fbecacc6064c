#!/usr/bin/env python3
"""Coverage of the canonical experiment over a grid of lambda factors, at one or more p.

Shows where the coverage-optimal factor sits and whether it moves with p.

    python3 scripts/sweep_scale.py --p 1000 4000 --trials 20
"""
import argparse

from bos_uq.experiments import LambdaRule, default_config, run_synthetic


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=int, nargs="+", default=[1000])
    ap.add_argument("--ratio", type=float, default=0.4, help="n / p")
    ap.add_argument("--factors", type=float, nargs="+", default=[0.05, 0.1, 0.2, 0.5, 1, 3, 10])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print("p,n,factor,h,h_support,ks_real")
    for p in args.p:
        n = int(args.ratio * p)
        for f in args.factors:
            cfg = default_config("synthetic", p=p, n=n, trials=args.trials, seed=args.seed,
                                 lambda_rule=LambdaRule(factor=f))
            r = run_synthetic(cfg).results
            print(f"{p},{n},{f},{r['h']:.4f},{r['h_support']:.4f},{r['ks_real']:.4f}")


if __name__ == "__main__":
    main()
