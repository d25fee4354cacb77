#!/usr/bin/env python3
"""Sweep the oracle noise level and report mean AUC per strategy per gamma.

Example:
  python scripts/noise_sweep.py --gammas 0.2,0.4,0.6 --strategies uniform,entropy
"""
from __future__ import annotations

import argparse
from collections import defaultdict

import numpy as np

from activecc.engine import DatasetSpec, RunConfig, run_suite


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--gammas", default="0.2,0.4,0.6")
    ap.add_argument("--strategies", default="uniform,entropy,info-gain")
    ap.add_argument("--iters", type=int, default=30)
    ap.add_argument("--seeds", type=int, default=15)
    ap.add_argument("--init-fraction", type=float, default=0.05)
    ap.add_argument("--jobs", type=int, default=2)
    ap.add_argument("--out", default="runs/noise-sweep")
    args = ap.parse_args()

    gammas = [float(g) for g in args.gammas.split(",")]
    cfgs = [RunConfig(dataset=DatasetSpec(kind="synthetic", n=args.n),
                      acquisition=name, gamma=gamma, iterations=args.iters,
                      subset_size=10 * args.n,
                      init_fraction=args.init_fraction,
                      seeds=tuple(range(args.seeds)), out_dir=args.out)
            for name in args.strategies.split(",") for gamma in gammas]
    result = run_suite(cfgs, jobs=args.jobs, out_dir=args.out)

    table = defaultdict(dict)
    for cfg, record in result.records:
        table[cfg.acquisition].setdefault(cfg.gamma, []).append(record.auc("ari"))
    header = "  ".join(f"g={g:<6}" for g in gammas)
    print(f"\nmean AUC(ARI):\n{'strategy':12s}{header}")
    for name, row in table.items():
        cells = "  ".join(f"{np.mean(row[g]):7.1f}" for g in gammas)
        print(f"{name:12s}{cells}")
    return 1 if result.failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
