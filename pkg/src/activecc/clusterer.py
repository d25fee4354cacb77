"""Local-search minimizer of the max-correlation cost with a dynamic number
of clusters.

Starting from a warm start (or all singletons), objects are visited in a
seeded random order; each visit applies the best strictly-improving
reassignment to an existing cluster or to a fresh cluster. Emptied clusters
disappear, so K adapts to the data. A sweep with no accepted move is a
1-move-optimal fixed point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Clustering, SimilarityStore


@dataclass
class LocalSearchConfig:
    max_sweeps: int = 50
    warm_start: Clustering | None = None
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")


def _adjacency(store: SimilarityStore) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """CSR-style neighbor lists over stored entries (both directions)."""
    us, vs, vals = store.estimate_arrays()
    src = np.concatenate([us, vs])
    dst = np.concatenate([vs, us])
    w = np.concatenate([vals, vals])
    order = np.argsort(src, kind="stable")
    src, dst, w = src[order], dst[order], w[order]
    starts = np.zeros(store.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=store.n), out=starts[1:])
    return starts, dst, w


def cluster(store: SimilarityStore, cfg: LocalSearchConfig | None = None) -> Clustering:
    """Minimize the max-correlation cost by 1-move local search.

    The result never has higher cost than the warm start, and when the search
    converges before max_sweeps it is 1-move-optimal: no single reassignment
    (including to a new cluster) strictly lowers the cost.
    """
    if cfg is None:
        cfg = LocalSearchConfig()
    n = store.n
    if cfg.warm_start is not None:
        if cfg.warm_start.n != n:
            raise ValueError("warm start size mismatch")
        labels = cfg.warm_start.labels.copy()
    else:
        labels = np.arange(n, dtype=np.int64)

    starts, nbr, w = _adjacency(store)
    # one spare slot guarantees an empty cluster id is always available
    sizes = np.zeros(n + 1, dtype=np.int64)
    np.add.at(sizes, labels, 1)
    rng = np.random.default_rng(cfg.rng_seed)
    gains = np.empty(n + 1)

    for _ in range(cfg.max_sweeps):
        moved = False
        for u in rng.permutation(n):
            lo, hi = starts[u], starts[u + 1]
            if lo == hi:
                continue  # no stored neighbors: every move gain is 0
            gains[:] = 0.0
            np.add.at(gains, labels[nbr[lo:hi]], w[lo:hi])
            cur = labels[u]
            s_cur = gains[cur]
            # candidates: nonempty clusters (ascending id), then one empty
            # slot standing for "open a new cluster"; ties keep the earliest,
            # so existing clusters win over a new one and lower ids win
            occupied = np.flatnonzero(sizes > 0)
            occupied = occupied[occupied != cur]
            new_slot = int(np.flatnonzero(sizes == 0)[0])
            candidates = np.append(occupied, new_slot)
            best = candidates[np.argmax(gains[candidates])]
            if gains[best] > s_cur:
                labels[u] = best
                sizes[cur] -= 1
                sizes[best] += 1
                moved = True
        if not moved:
            break

    return Clustering.from_labels(labels)
