"""Clustering-agreement metrics (ARI, AMI) and exhaustive brute-force oracles
used to verify the clusterer, the cost functions, and the mean-field solver on
small instances.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.special import gammaln

from .core import Clustering, SimilarityStore

ENUMERATION_GUARD = 10**7
PARTITION_GUARD = 9


@dataclass(frozen=True)
class ContingencyTable:
    """Co-occurrence counts between two clusterings of the same objects."""

    counts: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    n: int

    @classmethod
    def from_clusterings(cls, a: Clustering, b: Clustering) -> "ContingencyTable":
        if a.n != b.n:
            raise ValueError(f"clusterings disagree on N: {a.n} vs {b.n}")
        if a.n < 2:
            raise ValueError("metrics undefined for N < 2")
        counts = np.zeros((a.k, b.k), dtype=np.int64)
        np.add.at(counts, (a.labels, b.labels), 1)
        return cls(counts=counts, row_sums=counts.sum(axis=1),
                   col_sums=counts.sum(axis=0), n=a.n)


def _comb2(x: np.ndarray) -> np.ndarray:
    return x * (x - 1) / 2.0


def ari(a: Clustering, b: Clustering) -> float:
    """Adjusted Rand index: pair-counting agreement corrected for chance."""
    t = ContingencyTable.from_clusterings(a, b)
    index = _comb2(t.counts).sum()
    sum_a = _comb2(t.row_sums).sum()
    sum_b = _comb2(t.col_sums).sum()
    expected = sum_a * sum_b / _comb2(np.array(t.n))
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        # both partitions trivial (all-one-cluster or all-singletons): identical
        return 1.0
    return float((index - expected) / (max_index - expected))


def _entropy_from_counts(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def _mutual_info(t: ContingencyTable) -> float:
    nz = t.counts > 0
    nij = t.counts[nz].astype(float)
    outer = np.outer(t.row_sums, t.col_sums)[nz].astype(float)
    return float((nij / t.n * (np.log(nij * t.n) - np.log(outer))).sum())


def _expected_mutual_info(t: ContingencyTable) -> float:
    """Expected MI of two random clusterings with these marginals under the
    permutation (hypergeometric) model."""
    n = t.n
    emi = 0.0
    for a_i in t.row_sums:
        for b_j in t.col_sums:
            lo = max(1, a_i + b_j - n)
            hi = min(a_i, b_j)
            if hi < lo:
                continue
            nij = np.arange(lo, hi + 1, dtype=float)
            term = nij / n * (np.log(n * nij) - np.log(float(a_i) * b_j))
            log_hyper = (
                gammaln(a_i + 1) + gammaln(b_j + 1)
                + gammaln(n - a_i + 1) + gammaln(n - b_j + 1)
                - gammaln(n + 1) - gammaln(nij + 1)
                - gammaln(a_i - nij + 1) - gammaln(b_j - nij + 1)
                - gammaln(n - a_i - b_j + nij + 1)
            )
            emi += float((term * np.exp(log_hyper)).sum())
    return emi


def ami(a: Clustering, b: Clustering) -> float:
    """Adjusted mutual information: permutation-model expectation, normalized
    by the arithmetic mean of the two entropies."""
    t = ContingencyTable.from_clusterings(a, b)
    if a.k == b.k == 1:
        return 1.0
    mi = _mutual_info(t)
    emi = _expected_mutual_info(t)
    h_a = _entropy_from_counts(t.row_sums, t.n)
    h_b = _entropy_from_counts(t.col_sums, t.n)
    denom = (h_a + h_b) / 2.0 - emi
    if abs(denom) < 1e-15:
        denom = 1e-15 if denom >= 0 else -1e-15
    return float((mi - emi) / denom)


def label_vectors(n: int, k: int) -> np.ndarray:
    """All k**n label vectors over n objects, one per row."""
    m = k**n
    if m > ENUMERATION_GUARD:
        raise ValueError(f"k**n = {m} exceeds enumeration guard {ENUMERATION_GUARD}")
    grids = np.indices((k,) * n).reshape(n, m).T
    return grids.astype(np.int64)


def set_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Canonical label vectors (restricted growth strings) for every set
    partition of n objects."""
    if n > PARTITION_GUARD:
        raise ValueError(f"n = {n} exceeds partition enumeration guard {PARTITION_GUARD}")

    def grow(prefix: list[int], used: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for label in range(used + 1):
            prefix.append(label)
            yield from grow(prefix, max(used, label + 1))
            prefix.pop()

    yield from grow([0], 1)


def _pairwise_delta(store: SimilarityStore, labels: np.ndarray) -> np.ndarray:
    """Vectorized max-correlation cost for a matrix of label vectors (rows)."""
    delta = np.zeros(labels.shape[0])
    for u, v, s, c in store.entries():
        delta -= (s / c) * (labels[:, u] == labels[:, v])
    return delta


def _pairwise_r(store: SimilarityStore, labels: np.ndarray) -> np.ndarray:
    r = np.zeros(labels.shape[0])
    for u, v, s, c in store.entries():
        est = s / c
        same = labels[:, u] == labels[:, v]
        if est < 0:
            r += np.where(same, -est, 0.0)
        else:
            r += np.where(same, 0.0, est)
    return r


@dataclass(frozen=True)
class GibbsDistribution:
    """Exact Gibbs distribution over label vectors, P(c) ∝ exp(-beta * delta(c))."""

    labels: np.ndarray    # (M, n) all label vectors
    probs: np.ndarray     # (M,)
    log_z: float
    beta: float
    k: int

    @property
    def n(self) -> int:
        return self.labels.shape[1]

    def p_same(self, u: int, v: int) -> float:
        return float(self.probs[self.labels[:, u] == self.labels[:, v]].sum())

    def marginals(self) -> np.ndarray:
        """Exact per-object cluster marginals, shape (n, k)."""
        out = np.zeros((self.n, self.k))
        for u in range(self.n):
            np.add.at(out[u], self.labels[:, u], self.probs)
        return out

    def joint_entropy(self) -> float:
        p = self.probs[self.probs > 0]
        return float(-(p * np.log(p)).sum())

    def kl_factorial(self, q: np.ndarray) -> float:
        """Exact KL(Q || P^Gibbs) for a factorial distribution with row-
        stochastic assignment matrix q (n x k)."""
        if q.shape != (self.n, self.k):
            raise ValueError(f"q has shape {q.shape}, expected {(self.n, self.k)}")
        with np.errstate(divide="ignore"):
            log_q = np.log(q)
        log_q_joint = log_q[np.arange(self.n)[None, :], self.labels].sum(axis=1)
        q_joint = np.exp(log_q_joint)
        with np.errstate(divide="ignore"):
            log_p = np.log(self.probs)
        mask = q_joint > 0
        return float((q_joint[mask] * (log_q_joint[mask] - log_p[mask])).sum())


def brute_gibbs(store: SimilarityStore, k: int, beta: float) -> GibbsDistribution:
    """Enumerate all k**n label vectors and weight them by exp(-beta * delta)."""
    labels = label_vectors(store.n, k)
    energy = beta * _pairwise_delta(store, labels)
    shift = energy.min()
    w = np.exp(-(energy - shift))
    z = w.sum()
    log_z = float(np.log(z) - shift)
    return GibbsDistribution(labels=labels, probs=w / z, log_z=log_z,
                             beta=beta, k=k)


@dataclass(frozen=True)
class BruteForceCosts:
    """Exhaustive minimum of delta and r over all set partitions."""

    partitions: list[tuple[int, ...]]
    deltas: np.ndarray
    rs: np.ndarray
    min_delta: float
    argmin_delta: frozenset[tuple[int, ...]]
    min_r: float
    argmin_r: frozenset[tuple[int, ...]]


def brute_min_cost(store: SimilarityStore, atol: float = 1e-12) -> BruteForceCosts:
    """Enumerate every partition of the store's objects, computing both cost
    functions; checks that their argmin partition sets coincide."""
    partitions = list(set_partitions(store.n))
    labels = np.array(partitions, dtype=np.int64)
    deltas = _pairwise_delta(store, labels)
    rs = _pairwise_r(store, labels)
    min_delta = float(deltas.min())
    min_r = float(rs.min())
    argmin_delta = frozenset(p for p, d in zip(partitions, deltas)
                             if d <= min_delta + atol)
    argmin_r = frozenset(p for p, r in zip(partitions, rs) if r <= min_r + atol)
    if argmin_delta != argmin_r:
        raise AssertionError(
            "argmin sets of delta and r disagree; the two cost functions "
            "should share minimizers")
    return BruteForceCosts(partitions=partitions, deltas=deltas, rs=rs,
                           min_delta=min_delta, argmin_delta=argmin_delta,
                           min_r=min_r, argmin_r=argmin_r)


def auc_trapezoid(x: np.ndarray, y: np.ndarray) -> float:
    """Area under a metric-vs-budget curve by the trapezoidal rule."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ValueError("need two same-length arrays with >= 2 points")
    return float(np.trapezoid(y, x))
