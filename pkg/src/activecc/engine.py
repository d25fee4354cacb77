"""The active clustering loop: cluster, score, query, update.

A run is fully determined by (config, seed): every stochastic phase draws its
own seed from the run seed, the iteration index, and a phase tag, so runs
replay exactly and the HTTP session service can reproduce an engine trace by
stepping the same ActiveLoop. Per-iteration metrics (ARI/AMI against ground
truth, cluster count, re-query counts, phase timings) are logged as JSON
lines; suites aggregate them into per-iteration means and per-run AUCs.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from . import acquisition as acq
from .clusterer import LocalSearchConfig, cluster
from .core import SimilarityStore, pair_key
from .meanfield import mean_field
from .metrics import ami, ari, auc_trapezoid
from .oracle import (GroundTruth, NoiseModel, gen_synthetic,
                     init_from_clustering, init_random_subset, load_csv,
                     lloyd_kmeans, oracle_answer, overlay_truth_subset)

_PHASES = {"init": 1, "oracle": 2, "cluster": 3, "acquire": 4, "select": 5}


def phase_seed(run_seed: int, iteration: int, phase: str) -> int:
    """Deterministic sub-seed for one stochastic phase of one iteration."""
    ss = np.random.SeedSequence([int(run_seed), int(iteration), _PHASES[phase]])
    return int(ss.generate_state(1)[0])


@dataclass
class DatasetSpec:
    kind: str = "synthetic"            # "synthetic" | "csv"
    n: int = 500
    k: int = 10
    d: int = 10
    data_seed: int = 0
    csv_path: str | None = None
    label_col: str = "label"


@dataclass
class RunConfig:
    """Everything that defines a run except the run seed.

    Defaults follow the reference experimental setup: batch size one percent
    of the pairs (rounded up), alpha 1, beta 3, info-gain subset 50N, power
    diversity on the entropy strategy, a one-percent noise-free random-subset
    initialization.
    """

    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    acquisition: str = "uniform"
    alpha: float = 1.0
    beta: float = 3.0
    beta_exp: float = 1.0
    subset_size: int | None = None     # info-gain pool; None means 50 * N
    power_diversity: bool = True       # applies to entropy only
    gamma: float = 0.4
    batch: int | None = None           # absolute B wins over batch_fraction
    batch_fraction: float | None = None
    iterations: int = 30
    init: str = "random-subset"        # "random-subset" | "kmeans" | "none"
    init_fraction: float = 0.01
    init_magnitude: float = 0.01
    init_noisy: bool = False           # route initialization reads through the oracle
    kmeans_k: int | None = None
    mf_tol: float = 1e-4
    mf_max_iters: int = 200
    max_sweeps: int = 50
    seeds: tuple[int, ...] = (0,)
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.acquisition not in acq.STRATEGY_NAMES:
            raise ValueError(
                f"unknown acquisition {self.acquisition!r}; "
                f"valid strategies: {', '.join(acq.STRATEGY_NAMES)}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")

    def batch_size(self, num_pairs: int) -> int:
        if self.batch is not None:
            b = self.batch
        else:
            frac = self.batch_fraction if self.batch_fraction is not None else 0.01
            b = int(np.ceil(frac * num_pairs))
        return max(1, min(b, num_pairs))

    def resolved_subset_size(self, n: int) -> int:
        return self.subset_size if self.subset_size is not None else 50 * n

    def to_flat(self) -> dict:
        d = dataclasses.asdict(self)
        ds = d.pop("dataset")
        flat = {"dataset": ds["kind"], "n": ds["n"], "k": ds["k"],
                "d": ds["d"], "data_seed": ds["data_seed"],
                "csv_path": ds["csv_path"], "label_col": ds["label_col"]}
        flat.update(d)
        flat["seeds"] = list(self.seeds)
        return flat

    @classmethod
    def from_flat(cls, flat: dict) -> "RunConfig":
        flat = dict(flat)
        ds = DatasetSpec(
            kind=flat.pop("dataset", "synthetic"),
            n=int(flat.pop("n", 500)), k=int(flat.pop("k", 10)),
            d=int(flat.pop("d", 10)), data_seed=int(flat.pop("data_seed", 0)),
            csv_path=flat.pop("csv_path", None),
            label_col=flat.pop("label_col", "label"))
        if "seeds" in flat:
            flat["seeds"] = tuple(int(s) for s in flat["seeds"])
        known = {f.name for f in dataclasses.fields(cls)} - {"dataset"}
        unknown = set(flat) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(dataset=ds, **flat)

    def config_hash(self) -> str:
        payload = self.to_flat()
        payload.pop("seeds")
        payload.pop("out_dir")
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class IterationStats:
    iteration: int
    queries: int
    ari: float
    ami: float
    k: int
    requeried: int
    ms_cluster: float
    ms_acq: float

    def to_json(self) -> dict:
        return {"iter": self.iteration, "queries": self.queries,
                "ari": self.ari, "ami": self.ami, "k": self.k,
                "requeried": self.requeried, "ms_cluster": self.ms_cluster,
                "ms_acq": self.ms_acq}


@dataclass
class RunRecord:
    seed: int
    config_hash: str
    rows: list[IterationStats]
    degraded_iterations: list[int] = field(default_factory=list)

    def curve(self, metric: str = "ari") -> tuple[np.ndarray, np.ndarray]:
        x = np.array([r.queries for r in self.rows], dtype=float)
        y = np.array([getattr(r, metric) for r in self.rows])
        return x, y

    def auc(self, metric: str = "ari") -> float:
        return auc_trapezoid(*self.curve(metric))


@dataclass
class LoopParams:
    """The loop-facing subset of a run configuration."""

    acquisition: str
    batch_size: int
    alpha: float = 1.0
    beta: float = 3.0
    beta_exp: float = 1.0
    subset_size: int | None = None
    power_diversity: bool = True
    mf_tol: float = 1e-4
    mf_max_iters: int = 200
    max_sweeps: int = 50

    @classmethod
    def from_config(cls, cfg: RunConfig, n: int) -> "LoopParams":
        num_pairs = n * (n - 1) // 2
        return cls(acquisition=cfg.acquisition,
                   batch_size=cfg.batch_size(num_pairs),
                   alpha=cfg.alpha, beta=cfg.beta, beta_exp=cfg.beta_exp,
                   subset_size=cfg.resolved_subset_size(n),
                   power_diversity=cfg.power_diversity, mf_tol=cfg.mf_tol,
                   mf_max_iters=cfg.mf_max_iters, max_sweeps=cfg.max_sweeps)


class ActiveLoop:
    """Stepwise driver of the active clustering procedure over one store.

    One iteration = next_batch() -> record answers -> finish_iteration().
    The caller owns the oracle (simulated or human); the loop owns the store,
    the warm-started clustering, re-query accounting, and seed discipline.
    """

    def __init__(self, store: SimilarityStore, params: LoopParams, seed: int):
        self.store = store
        self.params = params
        self.seed = seed
        self.iteration = 0
        self.queried: set[tuple[int, int]] = set()
        self.pending_requeried = 0
        self.degraded = False
        self.last_ms_acq = 0.0
        t0 = time.perf_counter()
        self.clustering = cluster(store, LocalSearchConfig(
            max_sweeps=params.max_sweeps, warm_start=None,
            rng_seed=phase_seed(seed, 0, "cluster")))
        self.last_ms_cluster = (time.perf_counter() - t0) * 1000.0

    def _score(self, iteration: int) -> acq.AcquisitionScores:
        p = self.params
        s_acq = phase_seed(self.seed, iteration, "acquire")
        name = p.acquisition
        if name == "uniform":
            return acq.acq_uniform(self.store.n, self.queried, seed=s_acq)
        if name == "imu-c":
            return acq.acq_imu_c(self.store, self.clustering, alpha=p.alpha)
        if name == "maxmin":
            return acq.acq_maxmin(self.store, seed=s_acq)
        if name == "maxexp":
            return acq.acq_maxexp(self.store, beta_exp=p.beta_exp, seed=s_acq)
        state = mean_field(self.store, self.clustering, beta=p.beta,
                           tol=p.mf_tol, max_iters=p.mf_max_iters)
        if name == "entropy":
            return acq.acq_entropy(state, power_diversity=p.power_diversity,
                                   seed=s_acq)
        if name == "info-gain":
            return acq.acq_information_gain(
                self.store, state, subset_size=p.subset_size,
                tol=p.mf_tol, max_iters=p.mf_max_iters, seed=s_acq)
        raise ValueError(f"unknown acquisition {name!r}")

    def next_batch(self) -> list[tuple[int, int]]:
        """Steps (ii)+(iii-select): score all pairs and pick the top batch.

        A scoring failure degrades this iteration to uniform selection rather
        than aborting a long run.
        """
        i = self.iteration + 1
        self.degraded = False
        t0 = time.perf_counter()
        try:
            scores = self._score(i)
        except Exception:
            self.degraded = True
            scores = acq.acq_uniform(self.store.n, self.queried,
                                     seed=phase_seed(self.seed, i, "acquire"))
        self.last_ms_acq = (time.perf_counter() - t0) * 1000.0
        return acq.select_batch(scores, self.params.batch_size,
                                seed=phase_seed(self.seed, i, "select"))

    def record_answer(self, u: int, v: int, value: float) -> None:
        """Step (iv) for one pair: averaging update plus re-query accounting."""
        key = pair_key(u, v)
        if key in self.queried:
            self.pending_requeried += 1
        else:
            self.queried.add(key)
        self.store.record(u, v, value)

    def finish_iteration(self) -> int:
        """Re-cluster (warm-started) after a completed batch; returns the new
        iteration index."""
        self.iteration += 1
        t0 = time.perf_counter()
        self.clustering = cluster(self.store, LocalSearchConfig(
            max_sweeps=self.params.max_sweeps, warm_start=self.clustering,
            rng_seed=phase_seed(self.seed, self.iteration, "cluster")))
        self.last_ms_cluster = (time.perf_counter() - t0) * 1000.0
        requeried = self.pending_requeried
        self.pending_requeried = 0
        return requeried


def build_dataset(cfg: RunConfig) -> tuple[np.ndarray, GroundTruth]:
    ds = cfg.dataset
    if ds.kind == "synthetic":
        return gen_synthetic(n=ds.n, k=ds.k, d=ds.d, seed=ds.data_seed)
    if ds.kind == "csv":
        if not ds.csv_path:
            raise ValueError("csv dataset needs csv_path")
        return load_csv(ds.csv_path, label_col=ds.label_col)
    raise ValueError(f"unknown dataset kind {ds.kind!r}")


def build_initial_store(cfg: RunConfig, gt: GroundTruth,
                        features: np.ndarray, seed: int) -> SimilarityStore:
    init_seed = phase_seed(seed, 0, "init")
    if cfg.init == "none":
        return SimilarityStore(gt.n)
    if cfg.init == "random-subset":
        noise = (NoiseModel(cfg.gamma, rng_seed=init_seed)
                 if cfg.init_noisy else None)
        return init_random_subset(gt, cfg.init_fraction, seed=init_seed,
                                  noise=noise)
    if cfg.init == "kmeans":
        k = cfg.kmeans_k if cfg.kmeans_k is not None else int(gt.labels.max()) + 1
        c0 = lloyd_kmeans(features, k=k, seed=init_seed)
        store = init_from_clustering(c0, magnitude=cfg.init_magnitude)
        if cfg.init_fraction > 0:
            overlay_truth_subset(store, gt, cfg.init_fraction, seed=init_seed)
        return store
    raise ValueError(f"unknown init strategy {cfg.init!r}")


def run_active_loop(cfg: RunConfig, seed: int) -> RunRecord:
    """One complete seeded run; deterministic given (cfg, seed)."""
    features, gt = build_dataset(cfg)
    truth = gt.clustering()
    store = build_initial_store(cfg, gt, features, seed)
    params = LoopParams.from_config(cfg, gt.n)
    noise = NoiseModel(cfg.gamma, rng_seed=phase_seed(seed, 0, "oracle"))
    loop = ActiveLoop(store, params, seed)

    def stats(requeried: int) -> IterationStats:
        return IterationStats(
            iteration=loop.iteration,
            queries=loop.iteration * params.batch_size,
            ari=ari(loop.clustering, truth),
            ami=ami(loop.clustering, truth),
            k=loop.clustering.k, requeried=requeried,
            ms_cluster=round(loop.last_ms_cluster, 3),
            ms_acq=round(loop.last_ms_acq, 3))

    record = RunRecord(seed=seed, config_hash=cfg.config_hash(),
                       rows=[stats(0)])
    for _ in range(cfg.iterations):
        batch = loop.next_batch()
        if loop.degraded:
            record.degraded_iterations.append(loop.iteration + 1)
        for u, v in batch:
            loop.record_answer(u, v, oracle_answer(gt, noise, u, v))
        requeried = loop.finish_iteration()
        record.rows.append(stats(requeried))
    return record


def write_jsonl(record: RunRecord, cfg: RunConfig, fp: IO[str]) -> None:
    header = {"type": "header", "seed": record.seed,
              "config_hash": record.config_hash, "config": cfg.to_flat(),
              "degraded_iterations": record.degraded_iterations}
    fp.write(json.dumps(header) + "\n")
    for row in record.rows:
        fp.write(json.dumps(row.to_json()) + "\n")


def read_jsonl(fp: IO[str]) -> tuple[dict, RunRecord]:
    header = json.loads(fp.readline())
    if header.get("type") != "header":
        raise ValueError("missing JSONL header line")
    rows = []
    for line in fp:
        line = line.strip()
        if not line:
            continue
        d = json.loads(line)
        rows.append(IterationStats(
            iteration=d["iter"], queries=d["queries"], ari=d["ari"],
            ami=d["ami"], k=d["k"], requeried=d["requeried"],
            ms_cluster=d["ms_cluster"], ms_acq=d["ms_acq"]))
    return header, RunRecord(seed=header["seed"],
                             config_hash=header["config_hash"], rows=rows,
                             degraded_iterations=header.get(
                                 "degraded_iterations", []))


def run_filename(cfg: RunConfig, seed: int) -> str:
    return f"run_{cfg.config_hash()}_{cfg.acquisition}_s{seed}.jsonl"


@dataclass
class SuiteResult:
    records: list[tuple[RunConfig, RunRecord]]
    failures: list[tuple[RunConfig, int, str]]


def run_suite(cfgs: Sequence[RunConfig], jobs: int = 1,
              out_dir: str | Path | None = None) -> SuiteResult:
    """Execute every (config, seed) cell; failures are recorded, not raised."""
    cells = [(cfg, seed) for cfg in cfgs for seed in cfg.seeds]
    records: list[tuple[RunConfig, RunRecord]] = []
    failures: list[tuple[RunConfig, int, str]] = []

    def one(cell: tuple[RunConfig, int]):
        cfg, seed = cell
        return cfg, seed, run_active_loop(cfg, seed)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(one, cell) for cell in cells]
            outcomes = []
            for cell, fut in zip(cells, futures):
                try:
                    outcomes.append(fut.result())
                except Exception as exc:
                    failures.append((cell[0], cell[1], repr(exc)))
    else:
        outcomes = []
        for cell in cells:
            try:
                outcomes.append(one(cell))
            except Exception as exc:
                failures.append((cell[0], cell[1], repr(exc)))

    for cfg, seed, record in outcomes:
        records.append((cfg, record))
        if out_dir is not None:
            path = Path(out_dir)
            path.mkdir(parents=True, exist_ok=True)
            with open(path / run_filename(cfg, seed), "w") as fp:
                write_jsonl(record, cfg, fp)

    result = SuiteResult(records=records, failures=failures)
    if out_dir is not None:
        with open(Path(out_dir) / "summary.csv", "w") as fp:
            write_summary(result, fp)
    return result


def write_summary(result: SuiteResult, fp: IO[str]) -> None:
    """Per-iteration mean/std of ARI and AMI plus per-run trapezoidal AUCs,
    grouped by configuration."""
    fp.write("row_type,config_hash,acquisition,gamma,batch_size,iter,queries,"
             "ari_mean,ari_std,ami_mean,ami_std,seed,auc_ari,auc_ami\n")
    by_cfg: dict[str, list[tuple[RunConfig, RunRecord]]] = {}
    for cfg, record in result.records:
        by_cfg.setdefault(record.config_hash, []).append((cfg, record))
    for chash in sorted(by_cfg):
        group = by_cfg[chash]
        cfg = group[0][0]
        n = cfg.dataset.n
        b = cfg.batch_size(n * (n - 1) // 2)
        base = f"{chash},{cfg.acquisition},{cfg.gamma},{b}"
        n_iters = min(len(rec.rows) for _, rec in group)
        for i in range(n_iters):
            rows = [rec.rows[i] for _, rec in group]
            aris = np.array([r.ari for r in rows])
            amis = np.array([r.ami for r in rows])
            fp.write(f"iter,{base},{rows[0].iteration},{rows[0].queries},"
                     f"{aris.mean():.6f},{aris.std():.6f},"
                     f"{amis.mean():.6f},{amis.std():.6f},,,\n")
        for _, rec in group:
            fp.write(f"auc,{base},,,,,,,{rec.seed},"
                     f"{rec.auc('ari'):.6f},{rec.auc('ami'):.6f}\n")
