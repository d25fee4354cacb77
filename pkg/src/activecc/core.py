"""Core domain types: object sets, the sparse pairwise-similarity accumulator,
and clustering solutions with their cost functions.

Similarities live in [-1, +1]; +1 means definitely similar, -1 definitely
dissimilar, 0 unknown/neutral. A pair with no recorded queries reports
estimate 0. Zero similarities are treated like positive ones wherever a sign
decision is needed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterator

import numpy as np


class PairError(ValueError):
    """Raised for an invalid pair of objects (u == v or out of range)."""


class ValueRangeError(ValueError):
    """Raised when a similarity value falls outside [-1, +1]."""


@dataclass(frozen=True)
class ObjectSet:
    """A set of n objects, indexed 0..n-1. Pairs are unordered (u < v)."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"need at least 2 objects, got {self.n}")

    @property
    def num_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    def pairs(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in range(u + 1, self.n):
                yield u, v


def pair_key(u: int, v: int) -> tuple[int, int]:
    """Canonical unordered key; rejects self-pairs."""
    if u == v:
        raise PairError(f"self-pair ({u}, {v})")
    return (u, v) if u < v else (v, u)


class SimilarityStore:
    """Sparse symmetric accumulator of pairwise similarity queries.

    Each stored pair keeps the running sum and count of all values recorded
    for it; the current estimate is their mean. Unrecorded pairs estimate 0.
    The diagonal is implicitly zero and never stored.
    """

    __slots__ = ("n", "_entries")

    def __init__(self, n: int):
        if n < 2:
            raise ValueError(f"need at least 2 objects, got {n}")
        self.n = n
        self._entries: dict[tuple[int, int], list] = {}

    def _check(self, u: int, v: int) -> tuple[int, int]:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise PairError(f"pair ({u}, {v}) out of range for n={self.n}")
        return pair_key(u, v)

    def record(self, u: int, v: int, value: float) -> None:
        """Record one query for (u, v); the estimate becomes the mean of all
        recorded values."""
        key = self._check(u, v)
        if not -1.0 <= value <= 1.0:
            raise ValueRangeError(f"similarity {value} outside [-1, 1]")
        entry = self._entries.get(key)
        if entry is None:
            self._entries[key] = [float(value), 1]
        else:
            entry[0] += float(value)
            entry[1] += 1

    def reset_pair(self, u: int, v: int, value: float) -> None:
        """Overwrite a pair with a single pseudo-query. Initialization-time
        plumbing; regular querying must go through record."""
        key = self._check(u, v)
        if not -1.0 <= value <= 1.0:
            raise ValueRangeError(f"similarity {value} outside [-1, 1]")
        self._entries[key] = [float(value), 1]

    def estimate(self, u: int, v: int) -> float:
        key = self._check(u, v)
        entry = self._entries.get(key)
        if entry is None:
            return 0.0
        return entry[0] / entry[1]

    def count(self, u: int, v: int) -> int:
        key = self._check(u, v)
        entry = self._entries.get(key)
        return 0 if entry is None else entry[1]

    def __len__(self) -> int:
        return len(self._entries)

    def entries(self) -> Iterator[tuple[int, int, float, int]]:
        """Yield (u, v, sum, count) for every stored pair, u < v."""
        for (u, v), (s, c) in self._entries.items():
            yield u, v, s, c

    def estimate_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Stored pairs as parallel arrays (us, vs, estimates)."""
        m = len(self._entries)
        us = np.empty(m, dtype=np.int64)
        vs = np.empty(m, dtype=np.int64)
        vals = np.empty(m, dtype=np.float64)
        for i, ((u, v), (s, c)) in enumerate(self._entries.items()):
            us[i] = u
            vs[i] = v
            vals[i] = s / c
        return us, vs, vals

    def to_dense(self) -> np.ndarray:
        """Materialize the full symmetric estimate matrix (zero diagonal)."""
        dense = np.zeros((self.n, self.n))
        us, vs, vals = self.estimate_arrays()
        dense[us, vs] = vals
        dense[vs, us] = vals
        return dense

    def copy(self) -> "SimilarityStore":
        out = SimilarityStore(self.n)
        out._entries = {k: [s, c] for k, (s, c) in self._entries.items()}
        return out

    # line-oriented text format: header "n=<N>", then "u v sum count" per entry
    def dump(self, fp: IO[str]) -> None:
        fp.write(f"n={self.n}\n")
        for (u, v), (s, c) in sorted(self._entries.items()):
            fp.write(f"{u} {v} {s!r} {c}\n")

    @classmethod
    def load(cls, fp: IO[str]) -> "SimilarityStore":
        header = fp.readline().strip()
        if not header.startswith("n="):
            raise ValueError(f"bad similarity store header: {header!r}")
        store = cls(int(header[2:]))
        for line in fp:
            line = line.strip()
            if not line:
                continue
            u, v, s, c = line.split()
            store._entries[pair_key(int(u), int(v))] = [float(s), int(c)]
        return store


@dataclass(frozen=True, eq=False)
class Clustering:
    """An immutable clustering solution: labels in {0..k-1}, no empty clusters."""

    labels: np.ndarray
    k: int

    @classmethod
    def from_labels(cls, labels) -> "Clustering":
        """Build from an arbitrary integer label vector, compacting labels so
        every value in {0..k-1} is used."""
        arr = np.asarray(labels, dtype=np.int64)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("labels must be a 1-d vector over >= 2 objects")
        _, compact = np.unique(arr, return_inverse=True)
        compact = compact.astype(np.int64)
        compact.flags.writeable = False
        return cls(labels=compact, k=int(compact.max()) + 1)

    @classmethod
    def singletons(cls, n: int) -> "Clustering":
        return cls.from_labels(np.arange(n))

    @property
    def n(self) -> int:
        return self.labels.size

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def same_cluster(self, u: int, v: int) -> bool:
        return bool(self.labels[u] == self.labels[v])


def violation(store: SimilarityStore, u: int, v: int, c: Clustering) -> float:
    """|S_uv| if the pair disagrees with the clustering (negative inside a
    cluster, or nonnegative across clusters), else 0."""
    s = store.estimate(u, v)
    same = c.same_cluster(u, v)
    if (same and s < 0) or (not same and s >= 0):
        return abs(s)
    return 0.0


def cost_r(store: SimilarityStore, c: Clustering) -> float:
    """Total violation cost of a clustering.

    Only stored entries can contribute: an unknown pair has estimate 0 and
    |0| = 0 in either branch of the violation rule.
    """
    labels = c.labels
    total = 0.0
    for (u, v), (s, cnt) in store._entries.items():
        est = s / cnt
        if labels[u] == labels[v]:
            if est < 0:
                total -= est
        elif est >= 0:
            total += est
    return total


def cost_delta(store: SimilarityStore, c: Clustering) -> float:
    """Max-correlation cost: negated sum of intra-cluster similarities.

    Shares its argmin set with cost_r; the two differ by a clustering-
    independent constant.
    """
    labels = c.labels
    total = 0.0
    for (u, v), (s, cnt) in store._entries.items():
        if labels[u] == labels[v]:
            total += s / cnt
    return -total
