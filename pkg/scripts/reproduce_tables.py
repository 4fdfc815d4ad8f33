#!/usr/bin/env python3
"""Synthesise data, run both summary-table experiments and draw daily MAPE charts.

    python scripts/reproduce_tables.py                # full grid (slow on one CPU)
    python scripts/reproduce_tables.py --quick        # FCDNN only, one seed, 10 epochs

Outputs land in ``runs/`` at the repository root.
"""
import argparse
import sys
from pathlib import Path

import yaml

from dayahead.cli import main

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent


def quick_copy(name: str, tmp: Path) -> Path:
    cfg = yaml.safe_load((HERE / "configs" / name).read_text())
    cfg.update(architectures=["fcdnn"], seeds=[1], train={**cfg["train"], "epochs": 10})
    for key in ("data_dir", "output_dir"):
        cfg[key] = str((HERE / "configs" / cfg[key]).resolve())
    out = tmp / name
    out.write_text(yaml.safe_dump(cfg))
    return out


def run(argv):
    if main(argv) != 0:
        sys.exit(f"failed: dayahead {' '.join(argv)}")


def plot_all(run_dir: Path, kind: str, features: str) -> None:
    reports = sorted((run_dir / "reports").glob(f"{kind}_{features}_*_seed1.json"))
    if reports:
        run(["plot", *map(str, reports), "--out", str(run_dir / f"daily_{kind}_{features}.svg")])


def parse_args():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--quick", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    return p.parse_args()


if __name__ == "__main__":
    args = parse_args()
    data = ROOT / "runs" / "data"
    run(["synth", "--config", str(HERE / "configs" / "synth.yaml"), "--out", str(data)])
    configs = ["scenarios.yaml", "features.yaml"]
    if args.quick:
        tmp = ROOT / "runs" / "quick_configs"
        tmp.mkdir(parents=True, exist_ok=True)
        paths = [quick_copy(c, tmp) for c in configs]
    else:
        paths = [HERE / "configs" / c for c in configs]
    for path in paths:
        run(["run", str(path), "--workers", str(args.workers)])
    scen, feat = ROOT / "runs" / "scenarios", ROOT / "runs" / "features"
    plot_all(scen, "benchmark", "weather")
    plot_all(scen, "weekend", "weather")
    for f in ("weather", "covid", "mobility"):
        plot_all(feat, "rolling", f)
