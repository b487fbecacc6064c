#!/usr/bin/env python3
"""Run every desk-scale config in scripts/configs and print a one-line summary each.

    python3 scripts/run_all.py --out results --threads 1
    python3 scripts/run_all.py --only synthetic haar
"""
import argparse
import json
import time
from dataclasses import replace
from pathlib import Path

from bos_uq.experiments import ExperimentConfig, run_experiment

CONFIG_DIR = Path(__file__).resolve().parent / "configs"
KEYS = ("h", "h_support", "ks_real", "ks_imag", "ssim", "argmax_h_support_factor", "cv_optimal_factor")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--only", nargs="*", help="config stems to run")
    args = ap.parse_args()
    for path in sorted(CONFIG_DIR.glob("*.json")):
        if args.only and path.stem not in args.only:
            continue
        cfg = replace(ExperimentConfig.from_json_file(path), threads=args.threads)
        t0 = time.perf_counter()
        rep = run_experiment(cfg)
        rep.write(args.out / path.stem)
        summary = {k: rep.results[k] for k in KEYS if k in rep.results}
        print(f"{path.stem:18s} {time.perf_counter() - t0:6.1f}s {json.dumps(summary)}")


if __name__ == "__main__":
    main()
