#!/usr/bin/env python3
"""Paired-seed comparisons on synthetic regime-shift data.

Prints one row per seed and the win counts behind the directional checks:
weekend vs benchmark, benchmark vs pre-order self-test, mobility vs covid.

    python scripts/seed_sweep.py --arch lstm --hidden 16 --epochs 60 --seeds 10
    python scripts/seed_sweep.py --only features --arch fcdnn --hidden 64 --epochs 50
"""
import argparse
import time

from dayahead.features import build_dataset
from dayahead.ingest import SynthConfig, generate_synthetic
from dayahead.neural.training import TrainConfig
from dayahead.scenarios import ScenarioConfig, run_pre_selftest, run_scenario, seasonal_naive_report


def parse_args():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--arch", default="lstm", choices=["fcdnn", "lstm", "gru"])
    p.add_argument("--hidden", type=int, default=16)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--first-seed", type=int, default=1)
    p.add_argument("--only", choices=["scenarios", "features"])
    p.add_argument("--case-log-sd", type=float, default=SynthConfig.case_log_sd)
    return p.parse_args()


def sweep(args):
    wins = {"weekend<benchmark": 0, "benchmark>selftest": 0, "mobility<covid": 0}
    for seed in range(args.first_seed, args.first_seed + args.seeds):
        t0 = time.perf_counter()
        bundle = generate_synthetic(SynthConfig(seed=seed, case_log_sd=args.case_log_sd))
        train = TrainConfig(seed=seed, epochs=args.epochs, rnn_hidden=args.hidden,
                            fcdnn_hidden=(args.hidden, args.hidden))
        row = {}
        if args.only in (None, "scenarios"):
            ds = build_dataset(bundle, ["weather"])
            bench = ScenarioConfig(kind="benchmark", architecture=args.arch, train=train)
            row["benchmark"] = run_scenario(ds, bench).overall_mape
            row["weekend"] = run_scenario(ds, ScenarioConfig(kind="weekend", architecture=args.arch,
                                                             train=train)).overall_mape
            row["selftest"] = run_pre_selftest(ds, bench).overall_mape
            row["naive"] = seasonal_naive_report(ds, bench.split).overall_mape
            wins["weekend<benchmark"] += row["weekend"] < row["benchmark"]
            wins["benchmark>selftest"] += row["benchmark"] > row["selftest"]
        if args.only in (None, "features"):
            for f in ("weather", "covid", "mobility"):
                cfg = ScenarioConfig(kind="rolling", architecture=args.arch, features=(f,), train=train)
                row[f"rolling-{f}"] = run_scenario(bundle, cfg).overall_mape
            wins["mobility<covid"] += row["rolling-mobility"] < row["rolling-covid"]
        cells = "  ".join(f"{k}={v:.2f}" for k, v in row.items())
        print(f"seed {seed:3d}  {cells}  ({time.perf_counter() - t0:.0f}s)", flush=True)
    print("wins out of", args.seeds, wins)


if __name__ == "__main__":
    sweep(parse_args())
