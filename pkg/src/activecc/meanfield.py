"""Mean-field approximation of the Gibbs distribution over clusterings.

The Gibbs distribution weights a label vector by exp(-beta * delta). Its best
factorial approximation Q(c) = prod_u q[u, c_u] is found by alternating two
synchronous updates until the assignment probabilities stop moving:

    h = -S @ q                    (mean-fields: per-object, per-cluster cost)
    q = row_softmax(-beta * h)    (assignment probabilities)

A conditioned variant answers "what would Q become if S_ab were j?" without
touching the store, by adding a rank-one correction to the two affected rows
of h each iteration. Batched conditioning over many pairs backs the
information-gain acquisition.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .core import Clustering, SimilarityStore


@dataclass(frozen=True)
class MeanFieldState:
    q: np.ndarray          # (n, k) assignment probabilities, rows sum to 1
    h: np.ndarray          # (n, k) mean-fields, h = -S @ q at return
    beta: float
    k: int
    converged: bool
    iters: int

    @property
    def n(self) -> int:
        return self.q.shape[0]


def row_softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; safe for large beta."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


# mixing weight on the previous iterate once plain iteration stalls; damping
# keeps the fixed points of the update map but breaks its 2-cycles
STALL_DAMPING = 0.5


def _solve(S: np.ndarray, q0: np.ndarray, beta: float, tol: float,
           max_iters: int, adjust: tuple[int, int, float] | None = None,
           trace: list | None = None) -> tuple[np.ndarray, np.ndarray, bool, int]:
    """Iterate h <- -S.q (plus optional pair correction), q <- softmax(-beta.h)
    until the largest q change drops below tol.

    Plain synchronous updates can oscillate between two states on frustrated
    instances; if max_iters of them fail to converge, a second damped round of
    the same length finishes the job. The returned h is recomputed from the
    final q.
    """
    q = q0
    converged = False
    iters = 0
    for damping in (0.0, STALL_DAMPING):
        for _ in range(max_iters):
            h = -S @ q
            if adjust is not None:
                a, b, delta = adjust
                h[a] += q[b] * delta
                h[b] += q[a] * delta
            target = row_softmax(-beta * h)
            q_next = target if damping == 0.0 else damping * q + (1.0 - damping) * target
            if trace is not None:
                trace.append((q_next.copy(), h.copy()))
            change = np.abs(q_next - q).max()
            q = q_next
            iters += 1
            if change < tol:
                converged = True
                break
        if converged:
            break
    h = -S @ q
    if adjust is not None:
        a, b, delta = adjust
        h[a] += q[b] * delta
        h[b] += q[a] * delta
    return q, h, converged, iters


def initial_fields(store: SimilarityStore, c_init: Clustering) -> np.ndarray:
    """h0[u, k] = -sum of similarities between u and cluster k of c_init."""
    S = store.to_dense()
    onehot = np.zeros((store.n, c_init.k))
    onehot[np.arange(store.n), c_init.labels] = 1.0
    return -S @ onehot


def mean_field(store: SimilarityStore, c_init: Clustering, beta: float = 3.0,
               tol: float = 1e-4, max_iters: int = 200,
               trace: list | None = None) -> MeanFieldState:
    """Fit the factorial approximation, warm-started from a clustering.

    The cluster count is taken from c_init. A state that exhausts max_iters
    is returned with converged=False; callers decide how to degrade.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    S = store.to_dense()
    h0 = initial_fields(store, c_init)
    q0 = row_softmax(-beta * h0)
    q, h, converged, iters = _solve(S, q0, beta, tol, max_iters, trace=trace)
    return MeanFieldState(q=q, h=h, beta=beta, k=c_init.k,
                          converged=converged, iters=iters)


def mean_field_from(store: SimilarityStore, q0: np.ndarray, beta: float,
                    tol: float = 1e-4, max_iters: int = 200,
                    override_pair: tuple[int, int, float] | None = None,
                    trace: list | None = None) -> MeanFieldState:
    """Run the solver from explicit assignment probabilities.

    override_pair=(a, b, value) runs against a store whose (a, b) entry is
    replaced by value; this is the from-scratch reference for the conditioned
    solver below.
    """
    S = store.to_dense()
    if override_pair is not None:
        a, b, value = override_pair
        S[a, b] = S[b, a] = value
    q, h, converged, iters = _solve(S, np.array(q0, dtype=float), beta, tol,
                                    max_iters, trace=trace)
    return MeanFieldState(q=q, h=h, beta=beta, k=q.shape[1],
                          converged=converged, iters=iters)


def mean_field_conditioned(store: SimilarityStore, base: MeanFieldState,
                           a: int, b: int, j: float, tol: float = 1e-4,
                           max_iters: int = 200,
                           trace: list | None = None) -> np.ndarray:
    """Assignment probabilities under the hypothesis S_ab = j.

    Warm-started from a converged base state; per iteration the rows of a and
    b receive the correction q[other] * (S_ab - j), which is exactly the
    mean-field update on a store with S_ab replaced by j.
    """
    if a == b:
        raise ValueError("conditioning pair must be distinct objects")
    S = store.to_dense()
    delta = S[a, b] - j
    q, _, _, _ = _solve(S, base.q, base.beta, tol, max_iters,
                        adjust=(a, b, delta), trace=trace)
    return q


def mean_field_conditioned_batch(store: SimilarityStore, base: MeanFieldState,
                                 pairs: np.ndarray, js: np.ndarray,
                                 tol: float = 1e-4, max_iters: int = 200,
                                 max_chunk_floats: int = 8_000_000,
                                 ) -> tuple[np.ndarray, np.ndarray]:
    """Conditioned solves for many (pair, j) hypotheses at once.

    pairs is (P, 2), js is (P,). Returns (q3, converged) with q3 of shape
    (P, n, k). Problems are independent; they share the big S @ q products and
    freeze individually once converged. Chunked to bound peak memory. The
    iterates match the single-pair solver's, including the damped fallback.
    """
    S = store.to_dense()
    n, k = base.q.shape
    P = pairs.shape[0]
    q3 = np.empty((P, n, k))
    converged = np.zeros(P, dtype=bool)
    beta = base.beta
    chunk = max(1, max_chunk_floats // (n * k))
    for lo in range(0, P, chunk):
        hi = min(P, lo + chunk)
        idx = np.arange(lo, hi)
        aa = pairs[lo:hi, 0].astype(np.intp)
        bb = pairs[lo:hi, 1].astype(np.intp)
        deltas = S[aa, bb] - js[lo:hi]
        # problem axis in the middle: (n, m, k) reshapes to the GEMM
        # operand (n, m*k) without copying
        q = np.repeat(base.q[:, None, :], hi - lo, axis=1)
        active = np.arange(hi - lo)
        for damping in (0.0, STALL_DAMPING):
            for _ in range(max_iters):
                if active.size == 0:
                    break
                m = active.size
                qa = q[:, active, :]
                h = S @ qa.reshape(n, m * k)
                np.negative(h, out=h)
                h = h.reshape(n, m, k)
                rows = np.arange(m)
                scale = deltas[active][:, None]
                h[aa[active], rows] += qa[bb[active], rows] * scale
                h[bb[active], rows] += qa[aa[active], rows] * scale
                # softmax over k, in place
                h *= -beta
                h -= h.max(axis=2, keepdims=True)
                np.exp(h, out=h)
                h /= h.sum(axis=2, keepdims=True)
                if damping != 0.0:
                    h *= 1.0 - damping
                    h += damping * qa
                q[:, active, :] = h
                np.subtract(h, qa, out=qa)
                np.abs(qa, out=qa)
                change = qa.max(axis=(0, 2))
                done = change < tol
                converged[idx[active[done]]] = True
                active = active[~done]
            if active.size == 0:
                break
        q3[lo:hi] = q.transpose(1, 0, 2)
    return q3, converged


def prob_same_cluster(state: MeanFieldState, u: int, v: int) -> float:
    """P(u and v share a cluster) under the factorial approximation."""
    if u == v:
        raise ValueError("prob_same_cluster needs distinct objects")
    return float(np.clip(state.q[u] @ state.q[v], 0.0, 1.0))


def pair_same_probs(q: np.ndarray) -> np.ndarray:
    """All-pairs same-cluster probabilities, shape (n, n)."""
    return np.clip(q @ q.T, 0.0, 1.0)


def row_entropies(q: np.ndarray) -> np.ndarray:
    """Per-row entropy, natural log, 0 log 0 = 0."""
    return -xlogy(q, q).sum(axis=-1)


def factorial_entropy(q: np.ndarray) -> float:
    """Joint entropy of the factorial distribution: sum of row entropies."""
    return float(row_entropies(q).sum())


def fixed_point_residual(store: SimilarityStore, state: MeanFieldState) -> float:
    """Max deviation of a state from the mean-field fixed-point equations."""
    S = store.to_dense()
    r_h = np.abs(state.h + S @ state.q).max()
    r_q = np.abs(state.q - row_softmax(-state.beta * state.h)).max()
    return float(max(r_h, r_q))
