"""Command-line front end: dataset generation, single runs, sweeps, report
aggregation, and the labeling service.

Exit codes: 0 success, 1 run failure, 2 bad configuration or usage.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .acquisition import STRATEGY_NAMES
from .engine import RunConfig, read_jsonl, run_suite
from .oracle import gen_synthetic, write_csv

_CONFIG_FLAGS = [
    # (flag, flat key, type, help)
    ("--dataset", "dataset", str, "dataset kind: synthetic or csv"),
    ("--n", "n", int, "synthetic: number of objects (default 500)"),
    ("--k", "k", int, "synthetic: number of clusters (default 10)"),
    ("--d", "d", int, "synthetic: feature dimensions (default 10)"),
    ("--data-seed", "data_seed", int, "dataset generation seed"),
    ("--csv", "csv_path", str, "csv dataset path"),
    ("--label-col", "label_col", str, "csv label column name"),
    ("--acq", "acquisition", str,
     f"acquisition strategy: {', '.join(STRATEGY_NAMES)}"),
    ("--alpha", "alpha", float, "imu-c magnitude weight (default 1)"),
    ("--beta", "beta", float, "mean-field concentration (default 3)"),
    ("--beta-exp", "beta_exp", float, "maxexp weight sharpness (default 1)"),
    ("--subset-size", "subset_size", int,
     "info-gain candidate pool size (default 50N)"),
    ("--gamma", "gamma", float, "oracle noise level (default 0.4)"),
    ("--batch", "batch", int, "absolute batch size B"),
    ("--batch-frac", "batch_fraction", float,
     "batch size as a fraction of all pairs (default 0.01, rounded up)"),
    ("--iters", "iterations", int, "active-loop iterations (default 30)"),
    ("--init", "init", str, "initialization: random-subset, kmeans, or none"),
    ("--init-fraction", "init_fraction", float,
     "fraction of pairs initialized from the truth (default 0.01)"),
    ("--init-magnitude", "init_magnitude", float,
     "kmeans init similarity magnitude (default 0.01)"),
    ("--kmeans-k", "kmeans_k", int, "kmeans init cluster count"),
    ("--mf-tol", "mf_tol", float, "mean-field convergence tolerance"),
    ("--mf-max-iters", "mf_max_iters", int, "mean-field iteration cap"),
    ("--max-sweeps", "max_sweeps", int, "local-search sweep cap"),
    ("--out", "out_dir", str, "output directory (default runs)"),
]


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    for flag, key, typ, help_text in _CONFIG_FLAGS:
        p.add_argument(flag, dest=key, type=typ, default=argparse.SUPPRESS,
                       help=help_text)
    p.add_argument("--init-noisy", dest="init_noisy", action="store_true",
                   default=argparse.SUPPRESS,
                   help="route initialization reads through the noisy oracle")
    p.add_argument("--power-diversity", dest="power_diversity",
                   action="store_true", default=argparse.SUPPRESS,
                   help="Gumbel-noise batch diversity for entropy (default on)")
    p.add_argument("--no-power-diversity", dest="power_diversity",
                   action="store_false", default=argparse.SUPPRESS)
    p.add_argument("--seeds", type=int, default=argparse.SUPPRESS,
                   help="number of seeded repetitions (seeds 0..N-1)")
    p.add_argument("--seed-list", type=str, default=argparse.SUPPRESS,
                   help="explicit comma-separated seed list")
    p.add_argument("--config", type=str, default=argparse.SUPPRESS,
                   help="TOML or JSON config file (flags override it)")


def _load_config_file(path: str) -> dict:
    text = Path(path).read_text()
    if path.endswith(".json"):
        return json.loads(text)
    try:
        import tomllib  # py311+
    except ModuleNotFoundError:
        import tomli as tomllib
    return tomllib.loads(text)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    provided = {k: v for k, v in vars(args).items()
                if k not in ("func", "command", "dump_config", "jobs",
                             "gamma_grid", "batch_grid", "acq_grid")}
    flat: dict = {}
    if "config" in provided:
        flat.update(_load_config_file(provided.pop("config")))
    seeds = provided.pop("seeds", None)
    seed_list = provided.pop("seed_list", None)
    flat.update(provided)
    if seed_list is not None:
        flat["seeds"] = [int(s) for s in str(seed_list).split(",")]
    elif seeds is not None:
        flat["seeds"] = list(range(int(seeds)))
    return RunConfig.from_flat(flat)


def _cmd_gen(args: argparse.Namespace) -> int:
    features, gt = gen_synthetic(n=args.n, k=args.k, d=args.d, seed=args.seed)
    write_csv(args.out, features, gt, label_col=args.label_col)
    print(f"wrote {gt.n} objects, {gt.labels.max() + 1} clusters -> {args.out}")
    return 0


def _run_configs(cfgs: list[RunConfig], jobs: int) -> int:
    out_dir = cfgs[0].out_dir or "runs"
    result = run_suite(cfgs, jobs=jobs, out_dir=out_dir)
    for cfg, record in result.records:
        final = record.rows[-1]
        print(f"{cfg.acquisition} gamma={cfg.gamma} seed={record.seed}: "
              f"final ARI {final.ari:.4f} (AMI {final.ami:.4f}, K {final.k})"
              + (" [degraded iterations: "
                 f"{record.degraded_iterations}]" if record.degraded_iterations else ""))
    for cfg, seed, err in result.failures:
        print(f"FAILED {cfg.acquisition} seed={seed}: {err}", file=sys.stderr)
    print(f"outputs in {out_dir}/")
    return 1 if result.failures else 0


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    if getattr(args, "dump_config", False):
        print(json.dumps(cfg.to_flat(), indent=2, sort_keys=True))
        return 0
    # a run must say what to cluster and how to query, explicitly
    provided = vars(args)
    if "config" not in provided:
        missing = [flag for flag, key in (("--dataset", "dataset"),
                                          ("--acq", "acquisition"))
                   if key not in provided]
        if missing:
            print(f"error: run requires {' and '.join(missing)} "
                  "(or --config)", file=sys.stderr)
            return 2
    return _run_configs([cfg], jobs=getattr(args, "jobs", 1))


def _cmd_sweep(args: argparse.Namespace) -> int:
    base = _config_from_args(args)
    gammas = ([float(g) for g in args.gamma_grid.split(",")]
              if getattr(args, "gamma_grid", None) else [base.gamma])
    batches = ([int(b) for b in args.batch_grid.split(",")]
               if getattr(args, "batch_grid", None) else [base.batch])
    acqs = (args.acq_grid.split(",")
            if getattr(args, "acq_grid", None) else [base.acquisition])
    cfgs = []
    for name in acqs:
        for gamma in gammas:
            for batch in batches:
                flat = base.to_flat()
                flat.update(acquisition=name, gamma=gamma, batch=batch)
                cfgs.append(RunConfig.from_flat(flat))
    return _run_configs(cfgs, jobs=getattr(args, "jobs", 1))


def _cmd_report(args: argparse.Namespace) -> int:
    runs = []
    for path in args.files:
        with open(path) as fp:
            runs.append(read_jsonl(fp))
    if not runs:
        print("no input files", file=sys.stderr)
        return 2
    hashes = {header["config_hash"] for header, _ in runs}
    if len(hashes) > 1:
        print(f"config-hash mismatch across inputs: {sorted(hashes)}",
              file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = [rec for _, rec in runs]
    n_rows = min(len(r.rows) for r in records)
    with open(out / "aggregate.csv", "w") as fp:
        fp.write("iter,queries,ari_mean,ari_std,ami_mean,ami_std,n_runs\n")
        for i in range(n_rows):
            rows = [r.rows[i] for r in records]
            aris = np.array([row.ari for row in rows])
            amis = np.array([row.ami for row in rows])
            fp.write(f"{rows[0].iteration},{rows[0].queries},"
                     f"{aris.mean():.6f},{aris.std():.6f},"
                     f"{amis.mean():.6f},{amis.std():.6f},{len(rows)}\n")
    with open(out / "auc.csv", "w") as fp:
        fp.write("seed,auc_ari,auc_ami\n")
        for rec in records:
            fp.write(f"{rec.seed},{rec.auc('ari'):.6f},{rec.auc('ami'):.6f}\n")
    print(f"aggregated {len(records)} runs -> {out}/aggregate.csv, {out}/auc.csv")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(data_dir=args.data_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="activecc",
        description="Active correlation clustering with a noisy pairwise oracle")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic CSV dataset")
    gen.add_argument("--n", type=int, default=500)
    gen.add_argument("--k", type=int, default=10)
    gen.add_argument("--d", type=int, default=10)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--label-col", default="label")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen)

    run = sub.add_parser("run", help="run the active loop for each seed")
    _add_config_flags(run)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--dump-config", action="store_true",
                     help="print the resolved config as JSON and exit")
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="grid of runs over gamma/batch/strategy")
    _add_config_flags(sweep)
    sweep.add_argument("--gamma-grid", type=str, default=argparse.SUPPRESS)
    sweep.add_argument("--batch-grid", type=str, default=argparse.SUPPRESS)
    sweep.add_argument("--acq-grid", type=str, default=argparse.SUPPRESS)
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.set_defaults(func=_cmd_sweep)

    report = sub.add_parser("report", help="aggregate run JSONL files")
    report.add_argument("files", nargs="+")
    report.add_argument("--out", default="report")
    report.set_defaults(func=_cmd_report)

    serve = sub.add_parser("serve", help="HTTP labeling service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--data-dir", default="sessions")
    serve.add_argument("--ui-dir", default=None,
                       help="static UI bundle to mount at /ui")
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # run-time failure, not a usage problem
        print(f"run failed: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
