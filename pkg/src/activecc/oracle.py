"""Ground-truth construction, the noisy non-persistent oracle, similarity
initializers, and dataset plumbing (synthetic generator, CSV ingestion,
k-means for feature-space initial clusterings).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Clustering, SimilarityStore, pair_key


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """True cluster labels; the implied similarity is +1 within a cluster and
    -1 across clusters, hence fully transitive."""

    labels: np.ndarray

    @classmethod
    def from_labels(cls, labels) -> "GroundTruth":
        arr = np.asarray(labels, dtype=np.int64).copy()
        arr.flags.writeable = False
        return cls(labels=arr)

    @property
    def n(self) -> int:
        return self.labels.size

    def similarity(self, u: int, v: int) -> float:
        u, v = pair_key(u, v)
        return 1.0 if self.labels[u] == self.labels[v] else -1.0

    def clustering(self) -> Clustering:
        return Clustering.from_labels(self.labels)


class NoiseModel:
    """Non-persistent oracle noise: each call independently returns the truth
    with probability 1 - gamma, else a uniform draw from [-1, +1]."""

    def __init__(self, gamma: float, rng_seed: int = 0):
        if not 0.0 <= gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {gamma}")
        self.gamma = gamma
        self.rng_seed = rng_seed
        self.rng = np.random.default_rng(rng_seed)


def oracle_answer(gt: GroundTruth, noise: NoiseModel, u: int, v: int) -> float:
    """One noisy query; repeated calls for the same pair err independently."""
    truth = gt.similarity(u, v)
    if noise.gamma > 0.0 and noise.rng.random() < noise.gamma:
        return float(noise.rng.uniform(-1.0, 1.0))
    return truth


def _sample_pairs(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    iu, iv = np.triu_indices(n, 1)
    chosen = rng.choice(iu.size, size=m, replace=False)
    return np.stack([iu[chosen], iv[chosen]], axis=1)


def init_random_subset(gt: GroundTruth, fraction: float, seed: int = 0,
                       noise: "NoiseModel | None" = None) -> SimilarityStore:
    """Reads of the true similarity on a uniform random subset of pairs, each
    recorded as a single pseudo-query; other pairs stay unknown.

    Reads are noise-free by default; pass a noise model to route them through
    the oracle instead.
    """
    n = gt.n
    num_pairs = n * (n - 1) // 2
    m = int(fraction * num_pairs)
    if not 1 <= m <= num_pairs:
        raise ValueError(f"fraction {fraction} selects {m} of {num_pairs} pairs")
    rng = np.random.default_rng(seed)
    store = SimilarityStore(n)
    for u, v in _sample_pairs(n, m, rng):
        if noise is None:
            store.record(int(u), int(v), gt.similarity(int(u), int(v)))
        else:
            store.record(int(u), int(v), oracle_answer(gt, noise, int(u), int(v)))
    return store


def init_from_clustering(c0: Clustering, magnitude: float = 0.01) -> SimilarityStore:
    """Weak prior from an initial clustering: every pair gets +/-magnitude
    depending on co-membership, as a single pseudo-query."""
    if magnitude <= 0:
        raise ValueError("magnitude must be positive")
    store = SimilarityStore(c0.n)
    labels = c0.labels
    iu, iv = np.triu_indices(c0.n, 1)
    for u, v in zip(iu, iv):
        value = magnitude if labels[u] == labels[v] else -magnitude
        store.record(int(u), int(v), value)
    return store


def overlay_truth_subset(store: SimilarityStore, gt: GroundTruth,
                         fraction: float, seed: int = 0) -> None:
    """Replace a uniform random subset of pairs with noise-free truth values
    (initialization-time prior injection; overwrites, does not average)."""
    n = gt.n
    num_pairs = n * (n - 1) // 2
    m = int(fraction * num_pairs)
    if not 1 <= m <= num_pairs:
        raise ValueError(f"fraction {fraction} selects {m} of {num_pairs} pairs")
    rng = np.random.default_rng(seed)
    for u, v in _sample_pairs(n, m, rng):
        store.reset_pair(int(u), int(v), gt.similarity(int(u), int(v)))


def lloyd_kmeans(features: np.ndarray, k: int, iters: int = 100,
                 seed: int = 0) -> Clustering:
    """Plain Lloyd iteration with seeded distinct-point initialization; empty
    clusters are re-seeded from the point farthest from its center."""
    X = np.asarray(features, dtype=float)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centers = X[rng.choice(n, size=k, replace=False)].copy()
    assign = np.full(n, -1, dtype=np.int64)
    for _ in range(iters):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = d2.argmin(axis=1)
        for c in range(k):
            members = new_assign == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
            else:
                farthest = d2[np.arange(n), new_assign].argmax()
                centers[c] = X[farthest]
                new_assign[farthest] = c
        if (new_assign == assign).all():
            break
        assign = new_assign
    return Clustering.from_labels(assign)


def gen_synthetic(n: int = 500, k: int = 10, d: int = 10,
                  seed: int = 0, center_scale: float = 5.0,
                  ) -> tuple[np.ndarray, GroundTruth]:
    """Gaussian blobs: k centers drawn from N(0, center_scale^2 I), unit-
    variance points split evenly (any remainder pads the last cluster)."""
    if k > n:
        raise ValueError("need at least one point per cluster")
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, center_scale, size=(k, d))
    sizes = np.full(k, n // k, dtype=np.int64)
    sizes[-1] += n - sizes.sum()
    labels = np.repeat(np.arange(k), sizes)
    features = centers[labels] + rng.normal(0.0, 1.0, size=(n, d))
    return features, GroundTruth.from_labels(labels)


def write_csv(path: str | Path, features: np.ndarray, gt: GroundTruth,
              label_col: str = "label") -> None:
    features = np.asarray(features)
    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow([label_col] + [f"f{i}" for i in range(features.shape[1])])
        for label, row in zip(gt.labels, features):
            writer.writerow([int(label)] + [repr(float(x)) for x in row])


def load_csv(path: str | Path, label_col: str = "label",
             ) -> tuple[np.ndarray, GroundTruth]:
    """Read a feature dataset: header row, one object per line, cluster label
    in the named column, every other column a real-valued feature."""
    with open(path, newline="") as fp:
        reader = csv.reader(fp)
        header = next(reader)
        if label_col not in header:
            raise ValueError(f"label column {label_col!r} not in header {header}")
        li = header.index(label_col)
        raw_labels: list[str] = []
        rows: list[list[float]] = []
        for line in reader:
            if not line:
                continue
            raw_labels.append(line[li])
            rows.append([float(x) for i, x in enumerate(line) if i != li])
    if len(rows) < 2:
        raise ValueError("dataset needs at least 2 objects")
    _, labels = np.unique(raw_labels, return_inverse=True)
    return np.array(rows), GroundTruth.from_labels(labels)
