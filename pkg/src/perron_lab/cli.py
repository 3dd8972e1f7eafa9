"""Command line entry point: ``perron-lab <experiment> --config <path> [--out <dir>] [--seed <u64>]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run_experiment

log = logging.getLogger("perron_lab")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="perron-lab", description="Perron-tree and lattice maximal operator experiments")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", required=True, type=Path, help="JSON config file")
    ap.add_argument("--out", type=Path, default=None, help="output directory (default: out/<experiment>)")
    ap.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        raw = json.loads(args.config.read_text(encoding="utf-8"))
        if isinstance(raw, dict) and raw.setdefault("experiment", args.experiment) != args.experiment:
            raise ConfigError(f"config is for experiment {raw['experiment']!r}, not {args.experiment!r}")
        cfg = ExperimentConfig.from_dict(raw, seed=args.seed, out=str(args.out) if args.out else None)
        t = time.perf_counter()
        rep = run_experiment(cfg)
    except (OSError, json.JSONDecodeError, ConfigError) as e:
        print(f"perron-lab: config error: {e}", file=sys.stderr)
        return 1
    out = Path(cfg.out) if cfg.out else Path("out") / cfg.experiment
    rep.write(out)
    log.info("finished in %.1f s", time.perf_counter() - t)
    for v in rep.verdicts:
        print(f"{v['criterion']:<5} {'PASS' if v['passed'] else 'FAIL'}  {v['check']}")
    for f in rep.failures:
        print(f"FAILURE {json.dumps(f, sort_keys=True)}")
    print(f"wrote {out}/report.json, metrics.csv, figures/")
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
