"""Acquisition functions: per-pair informativeness scores and top-B batch
selection.

Six named strategies ship: uniform, maxmin, maxexp, imu-c, entropy, and
info-gain. The first four need only the similarity store (and a clustering for
imu-c); entropy and info-gain consume a fitted mean-field state. All scores
are plain reals; only their ordering matters to batch selection. Pairs left
unscored (never-selected pairs, or pairs outside info-gain's subset) fall back
to the scores object's default, -inf unless stated otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import Clustering, SimilarityStore, pair_key
from .meanfield import (MeanFieldState, mean_field_conditioned_batch,
                        pair_same_probs, row_entropies)

STRATEGY_NAMES = ("uniform", "maxmin", "maxexp", "imu-c", "entropy", "info-gain")

# w-candidate subsampling kicks in above this many objects (full triple scans
# are cubic in n)
TRIPLE_SCAN_CAP = 600


@dataclass
class AcquisitionScores:
    """Sparse pair -> score map over the n-object pair universe."""

    n: int
    scores: dict[tuple[int, int], float] = field(default_factory=dict)
    default_score: float = -math.inf
    nonconverged: int = 0


@dataclass(frozen=True)
class QueryRegionScore:
    """Aggregate inconsistency (r_d) and magnitude-uncertainty (s_d) of one
    intra- or inter-cluster pair region."""

    region_id: tuple[int, int]
    r_d: float
    s_d: float
    size: int


def _triu(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, 1)


def acq_uniform(n: int, already_queried: Iterable[tuple[int, int]] = (),
                seed: int = 0,
                pairs: Iterable[tuple[int, int]] | None = None) -> AcquisitionScores:
    """I.i.d. scores in (0, 1) for every not-yet-queried pair.

    Queried pairs are left unscored, so they can only enter a batch once
    every other pair has been queried (the selection fallback). The universe
    defaults to all pairs of n objects; pass pairs to restrict it.
    """
    rng = np.random.default_rng(seed)
    queried = {pair_key(u, v) for u, v in already_queried}
    if pairs is None:
        iu, iv = _triu(n)
        universe = [(int(u), int(v)) for u, v in zip(iu, iv)]
    else:
        universe = [pair_key(u, v) for u, v in pairs]
    values = rng.random(len(universe))
    scores = {key: float(x) for key, x in zip(universe, values)
              if key not in queried}
    return AcquisitionScores(n=n, scores=scores)


def region_scores(store: SimilarityStore, c: Clustering) -> dict[tuple[int, int], QueryRegionScore]:
    """Per-region normalized violation cost and negative mean magnitude for
    every nonempty intra/inter-cluster pair region of c."""
    n, k = store.n, c.k
    iu, iv = _triu(n)
    S = store.to_dense()
    s = S[iu, iv]
    labels = c.labels
    lo = np.minimum(labels[iu], labels[iv])
    hi = np.maximum(labels[iu], labels[iv])
    rid = lo * k + hi
    same = lo == hi
    viol = np.where(same, np.where(s < 0, -s, 0.0), np.where(s >= 0, s, 0.0))
    sizes = np.bincount(rid, minlength=k * k)
    viol_sum = np.bincount(rid, weights=viol, minlength=k * k)
    mag_sum = np.bincount(rid, weights=np.abs(s), minlength=k * k)
    out = {}
    for r in np.flatnonzero(sizes):
        out[(int(r // k), int(r % k))] = QueryRegionScore(
            region_id=(int(r // k), int(r % k)),
            r_d=float(viol_sum[r] / sizes[r]),
            s_d=float(-mag_sum[r] / sizes[r]),
            size=int(sizes[r]))
    return out


def acq_imu_c(store: SimilarityStore, c_current: Clustering,
              alpha: float = 1.0) -> AcquisitionScores:
    """Inconsistency/magnitude-uncertainty scores over cluster-induced regions.

    Each pair belongs to exactly one region (its clusters' intra or inter pair
    set); its score is the region's normalized violation cost plus alpha times
    the region's negative mean magnitude, minus the pair's own magnitude.
    """
    n, k = store.n, c_current.k
    iu, iv = _triu(n)
    S = store.to_dense()
    s = S[iu, iv]
    labels = c_current.labels
    lo = np.minimum(labels[iu], labels[iv])
    hi = np.maximum(labels[iu], labels[iv])
    rid = lo * k + hi
    same = lo == hi
    viol = np.where(same, np.where(s < 0, -s, 0.0), np.where(s >= 0, s, 0.0))
    sizes = np.bincount(rid, minlength=k * k).astype(float)
    r_d = np.divide(np.bincount(rid, weights=viol, minlength=k * k), sizes,
                    out=np.zeros(k * k), where=sizes > 0)
    s_d = -np.divide(np.bincount(rid, weights=np.abs(s), minlength=k * k),
                     sizes, out=np.zeros(k * k), where=sizes > 0)
    values = r_d[rid] + alpha * s_d[rid] - np.abs(s)
    scores = {(int(u), int(v)): float(x) for u, v, x in zip(iu, iv, values)}
    return AcquisitionScores(n=n, scores=scores)


def _triple_candidates(n: int, cap: int | None, seed: int) -> np.ndarray | None:
    if cap is None or n <= cap:
        return None
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=cap, replace=False))


def acq_maxmin(store: SimilarityStore, seed: int = 0,
               candidate_cap: int | None = TRIPLE_SCAN_CAP) -> AcquisitionScores:
    """Triple-based inconsistency scores.

    A pair's score is the largest normalized optimal-clustering cost among the
    triples containing it, minus the pair's magnitude. For a transitivity-
    violating triple that optimal cost equals the smallest magnitude in the
    triple; consistent triples cost 0.
    """
    n = store.n
    if n < 3:
        raise ValueError("maxmin needs at least 3 objects")
    S = store.to_dense()
    A = np.abs(S)
    neg = (S < 0).astype(np.int8)  # int: these get summed per triple
    cand = _triple_candidates(n, candidate_cap, seed)
    if cand is None:
        neg_w, A_w = neg, A
        w_ids = np.arange(n)
    else:
        neg_w, A_w = neg[:, cand], A[:, cand]
        w_ids = cand

    iu, iv = _triu(n)
    values = np.empty(iu.size)
    pos = 0
    for u in range(n - 1):
        vs = np.arange(u + 1, n)
        # violation pattern over the (v, w) grid: exactly one negative edge
        cnt = neg[u, vs][:, None] + neg_w[u][None, :] + neg_w[vs]
        minabs = np.minimum(np.minimum(A[u, vs][:, None], A_w[u][None, :]),
                            A_w[vs])
        invalid = (w_ids[None, :] == u) | (w_ids[None, :] == vs[:, None])
        tri = np.where((cnt == 1) & ~invalid, minabs, 0.0)
        values[pos:pos + vs.size] = tri.max(axis=1) / 3.0 - A[u, vs]
        pos += vs.size
    scores = {(int(u), int(v)): float(x) for u, v, x in zip(iu, iv, values)}
    return AcquisitionScores(n=n, scores=scores)


def triple_costs(s_uv: float, s_uw: float, s_vw: float) -> np.ndarray:
    """Normalized violation costs of the 5 clusterings of a triple, ordered:
    all-together, all-singletons, {uv}{w}, {uw}{v}, {vw}{u}."""
    p = np.maximum([s_uv, s_uw, s_vw], 0.0)
    g = np.maximum([-s_uv, -s_uw, -s_vw], 0.0)
    costs = np.array([
        g[0] + g[1] + g[2],
        p[0] + p[1] + p[2],
        g[0] + p[1] + p[2],
        p[0] + g[1] + p[2],
        p[0] + p[1] + g[2],
    ])
    return costs / 3.0


def acq_maxexp(store: SimilarityStore, beta_exp: float = 1.0, seed: int = 0,
               candidate_cap: int | None = TRIPLE_SCAN_CAP) -> AcquisitionScores:
    """Like maxmin, but a triple's inconsistency is the Boltzmann-weighted
    mean cost over its 5 clusterings (weights exp(-beta_exp * cost)); large
    beta_exp recovers maxmin."""
    n = store.n
    if n < 3:
        raise ValueError("maxexp needs at least 3 objects")
    S = store.to_dense()
    A = np.abs(S)
    P = np.maximum(S, 0.0)
    G = np.maximum(-S, 0.0)
    cand = _triple_candidates(n, candidate_cap, seed)
    if cand is None:
        P_w, G_w = P, G
        w_ids = np.arange(n)
    else:
        P_w, G_w = P[:, cand], G[:, cand]
        w_ids = cand

    iu, iv = _triu(n)
    values = np.empty(iu.size)
    pos = 0
    for u in range(n - 1):
        vs = np.arange(u + 1, n)
        p1, g1 = P[u, vs][:, None], G[u, vs][:, None]
        p2, g2 = P_w[u][None, :], G_w[u][None, :]
        p3, g3 = P_w[vs], G_w[vs]
        costs = np.stack([
            g1 + g2 + g3,
            p1 + p2 + p3,
            g1 + p2 + p3,
            p1 + g2 + p3,
            p1 + p2 + g3,
        ]) / 3.0
        w = np.exp(-beta_exp * (costs - costs.min(axis=0)))
        exp_cost = (costs * w).sum(axis=0) / w.sum(axis=0)
        invalid = (w_ids[None, :] == u) | (w_ids[None, :] == vs[:, None])
        exp_cost = np.where(invalid, -np.inf, exp_cost)
        values[pos:pos + vs.size] = exp_cost.max(axis=1) - A[u, vs]
        pos += vs.size
    scores = {(int(u), int(v)): float(x) for u, v, x in zip(iu, iv, values)}
    return AcquisitionScores(n=n, scores=scores)


def binary_entropy(p: np.ndarray) -> np.ndarray:
    """Entropy of a Bernoulli(p) variable in nats, 0 log 0 = 0."""
    p = np.clip(p, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = (np.where(p > 0, p * np.log(p), 0.0)
                 + np.where(p < 1, (1 - p) * np.log(1 - p), 0.0))
    return -terms


def acq_entropy(state: MeanFieldState, power_diversity: bool = False,
                seed: int = 0) -> AcquisitionScores:
    """Entropy of each pair's same/different-cluster variable under the
    mean-field approximation.

    With power_diversity, scores become log(entropy) plus standard Gumbel
    noise, which diversifies the top-B batch; zero-entropy pairs are left
    unscored so they are never preferred over informative ones.
    """
    n = state.n
    iu, iv = _triu(n)
    p1 = pair_same_probs(state.q)[iu, iv]
    h = binary_entropy(p1)
    flagged = 0 if state.converged else 1
    if not power_diversity:
        scores = {(int(u), int(v)): float(x) for u, v, x in zip(iu, iv, h)}
        return AcquisitionScores(n=n, scores=scores, nonconverged=flagged)
    rng = np.random.default_rng(seed)
    eps = rng.gumbel(0.0, 1.0, size=h.size)
    with np.errstate(divide="ignore"):
        noisy = np.log(h) + eps
    scores = {(int(u), int(v)): float(x)
              for u, v, x in zip(iu, iv, noisy) if np.isfinite(x)}
    return AcquisitionScores(n=n, scores=scores, nonconverged=flagged)


def acq_information_gain(store: SimilarityStore, state: MeanFieldState,
                         subset_size: int, tol: float = 1e-4,
                         max_iters: int = 200, seed: int = 0) -> AcquisitionScores:
    """Expected reduction in the factorial joint entropy from observing a
    pair's relation.

    A uniformly sampled subset of pairs is scored; for each, the mean-field
    solution is re-converged under both hypotheses (same cluster / different
    cluster) and the negative expected posterior entropy is the score (the
    prior entropy is pair-independent and dropped). Unsampled pairs keep the
    -inf default. subset_size is clamped to the number of pairs.
    """
    if subset_size < 1:
        raise ValueError("subset_size must be positive")
    n = state.n
    iu, iv = _triu(n)
    m = min(subset_size, iu.size)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(iu.size, size=m, replace=False)
    pairs = np.stack([iu[chosen], iv[chosen]], axis=1)

    both = np.concatenate([pairs, pairs], axis=0)
    js = np.concatenate([np.ones(m), -np.ones(m)])
    q3, conv = mean_field_conditioned_batch(store, state, both, js,
                                            tol=tol, max_iters=max_iters)
    post_ent = row_entropies(q3).sum(axis=1)
    p_plus = np.clip(np.einsum("ij,ij->i", state.q[pairs[:, 0]],
                               state.q[pairs[:, 1]]), 0.0, 1.0)
    values = -(p_plus * post_ent[:m] + (1.0 - p_plus) * post_ent[m:])
    scores = {(int(u), int(v)): float(x)
              for (u, v), x in zip(pairs, values)}
    flagged = int((~conv).sum()) + (0 if state.converged else 1)
    return AcquisitionScores(n=n, scores=scores, nonconverged=flagged)


def acq_imu(store: SimilarityStore,
            regions: Sequence[tuple[Sequence[tuple[int, int]], Mapping[int, int]]],
            alpha: float = 0.0, reduction: str = "max") -> AcquisitionScores:
    """Generic inconsistency/magnitude-uncertainty acquisition.

    Each region is (pairs, labels): a pair subset plus a clustering of the
    objects it touches. A pair's score reduces (max or sum) the quantity
    r_d + alpha * s_d over the regions containing it, then subtracts the
    pair's magnitude. Pairs in no region stay unscored.
    """
    if reduction not in ("max", "sum"):
        raise ValueError("reduction must be 'max' or 'sum'")
    per_pair: dict[tuple[int, int], list[float]] = {}
    for pairs, labels in regions:
        if not pairs:
            continue
        r_d = 0.0
        mag = 0.0
        keys = []
        for u, v in pairs:
            key = pair_key(u, v)
            keys.append(key)
            s = store.estimate(*key)
            same = labels[u] == labels[v]
            if (same and s < 0) or (not same and s >= 0):
                r_d += abs(s)
            mag += abs(s)
        r_d /= len(pairs)
        s_d = -mag / len(pairs)
        for key in keys:
            per_pair.setdefault(key, []).append(r_d + alpha * s_d)
    scores = {}
    for key, vals in per_pair.items():
        agg = max(vals) if reduction == "max" else sum(vals)
        scores[key] = agg - abs(store.estimate(*key))
    return AcquisitionScores(n=store.n, scores=scores)


def select_batch(scores: AcquisitionScores, b: int, seed: int = 0) -> list[tuple[int, int]]:
    """The b highest-scoring pairs; ties broken uniformly at random.

    If fewer than b pairs carry a score above the default, the remainder is
    drawn uniformly from the unscored pairs, so a batch is always full.
    """
    n = scores.n
    num_pairs = n * (n - 1) // 2
    if not 1 <= b <= num_pairs:
        raise ValueError(f"batch size {b} outside [1, {num_pairs}]")
    rng = np.random.default_rng(seed)
    items = list(scores.scores.items())
    if math.isfinite(scores.default_score):
        scored = set(scores.scores)
        iu, iv = _triu(n)
        items += [((int(u), int(v)), scores.default_score)
                  for u, v in zip(iu, iv) if (int(u), int(v)) not in scored]
    if items:
        vals = np.array([x for _, x in items])
        order = np.lexsort((rng.random(len(items)), -vals))
        picked = [items[i][0] for i in order[:b]]
    else:
        picked = []
    if len(picked) < b:
        chosen = set(picked)
        iu, iv = _triu(n)
        pool = [(int(u), int(v)) for u, v in zip(iu, iv)
                if (int(u), int(v)) not in chosen and (int(u), int(v)) not in scores.scores]
        extra = rng.choice(len(pool), size=b - len(picked), replace=False)
        picked += [pool[i] for i in extra]
    return picked
