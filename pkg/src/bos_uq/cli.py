"""``bos-uq`` command line.

Examples::

    bos-uq run --config cfg.json --out results/ --threads 2
    bos-uq synthetic --seed 3 --out results/synth
    bos-uq checks --out results/checks
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import EXPERIMENTS, ExperimentConfig, default_config, run_experiment


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--out", type=Path, help="output directory (default: config out_dir or ./out)")
    p.add_argument("--threads", type=int, help="worker threads for trials")
    p.add_argument("--trials", type=int, help="override the number of trials")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bos-uq", description="Desparsified LASSO UQ experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiment named in the config file")
    _common(run)
    for name in EXPERIMENTS:
        _common(sub.add_parser(name, help=f"run the {name} experiment (desk-scale defaults)"))
    return parser


def resolve_config(args) -> ExperimentConfig:
    if args.command == "run":
        if args.config is None:
            raise SystemExit("bos-uq run: --config is required")
        cfg = ExperimentConfig.from_json_file(args.config)
    elif args.config is not None:
        with open(args.config) as fh:
            d = json.load(fh)
        d["experiment"] = args.command
        cfg = ExperimentConfig.from_dict(d)
    else:
        cfg = default_config(args.command)
    over = {k: v for k, v in (("seed", args.seed), ("threads", args.threads),
                              ("trials", args.trials)) if v is not None}
    if args.out is not None:
        over["out_dir"] = str(args.out)
    return replace(cfg, **over) if over else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        report = run_experiment(cfg)
    except (ValueError, FileNotFoundError) as exc:
        print(f"bos-uq: error: {exc}", file=sys.stderr)
        return 2
    out = report.write(cfg.out_dir or "out")
    summary = {k: v for k, v in report.results.items() if not isinstance(v, (list, dict))}
    print(json.dumps({"out": str(out), **summary}, sort_keys=True))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
