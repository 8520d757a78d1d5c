"""Partition providers: spectral clustering and a variational EM refiner.

The default pipeline embeds nodes with a regularized normalized-Laplacian
spectral map, clusters the embedding with seeded k-means, and hands that
partition to a mean-field variational EM for the Bernoulli block model
(Beta(1/2, 1/2) priors on block probabilities, Dirichlet(1/2) on
memberships). The EM's hard assignment is what downstream estimation
consumes; its per-block posterior means double as a variational baseline
estimate of the connectivity matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as _la
from scipy.special import gammaln as _gammaln
from scipy.special import psi as _psi
from scipy.special import xlogy as _xlogy

from .errors import NumericalError
from .graph import Graph, Partition, compact_partition

_TAU = 0.5       # Dirichlet prior weight on memberships
_A0 = _B0 = 0.5  # Beta prior on block probabilities


@dataclass(frozen=True, eq=False)
class DetectionResult:
    """A clustering plus provider diagnostics.

    responsibilities, when present, is an n x K soft assignment whose
    row-wise argmax reproduces the hard partition.
    """

    partition: Partition
    responsibilities: np.ndarray | None
    converged: bool
    iterations: int

    def __post_init__(self):
        r = self.responsibilities
        if r is None:
            return
        r = np.asarray(r, dtype=np.float64).copy()
        if r.shape != (self.partition.n, self.partition.K):
            raise ValueError("responsibilities must be n x K")
        if not np.allclose(r.sum(axis=1), 1.0, atol=1e-8):
            raise ValueError("responsibility rows must sum to 1")
        if not np.array_equal(np.argmax(r, axis=1) + 1, self.partition.labels):
            raise ValueError("partition must be the row-wise argmax of responsibilities")
        r.flags.writeable = False
        object.__setattr__(self, "responsibilities", r)


def _kmeans_once(X, K, rng, max_iter=300):
    n = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    first = int(rng.integers(n))
    centers[0] = X[first]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total <= 1e-12:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[k] = X[idx]
        d2 = np.minimum(d2, np.sum((X - centers[k]) ** 2, axis=1))

    labels = np.full(n, -1, dtype=np.int64)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        dist = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(dist, axis=1)
        own = dist[np.arange(n), new_labels].copy()
        for k in range(K):
            if not np.any(new_labels == k):
                far = int(np.argmax(own))
                new_labels[far] = k
                own[far] = -1.0
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
        for k in range(K):
            centers[k] = X[labels == k].mean(axis=0)
    inertia = float(np.sum((X - centers[labels]) ** 2))
    return labels, inertia, it, converged


def spectral_partition(graph: Graph, K: int, seed: int) -> DetectionResult:
    """Cluster nodes via the top-K eigenvectors of the regularized
    normalized adjacency, row-normalized then k-means'd.

    Mean-degree/n is added to every adjacency entry before normalization
    so isolated nodes stay well-defined. k-means runs 10 seeded restarts
    (streams spawned from the given seed); the lowest within-cluster sum
    of squares wins, ties going to the earliest restart.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if K > graph.n:
        raise ValueError(f"K={K} exceeds node count {graph.n}")
    if K == 1:
        part = Partition(labels=np.ones(graph.n, dtype=np.int64), K=1)
        return DetectionResult(partition=part, responsibilities=None,
                               converged=True, iterations=0)
    n = graph.n
    a = graph.adjacency().copy()
    tau = max(2.0 * graph.edge_count / n, 1e-8)
    a += tau / n
    dinv = 1.0 / np.sqrt(a.sum(axis=1))
    norm = a * dinv[:, None] * dinv[None, :]
    _, vecs = _la.eigh(norm, subset_by_index=[n - K, n - 1])
    row_norm = np.linalg.norm(vecs, axis=1)
    emb = vecs / np.maximum(row_norm, 1e-12)[:, None]

    best = None
    for child in np.random.SeedSequence(seed).spawn(10):
        rng = np.random.default_rng(child)
        labels, inertia, iters, conv = _kmeans_once(emb, K, rng)
        if best is None or inertia < best[1]:
            best = (labels, inertia, iters, conv)
    labels, _, iters, conv = best
    part = compact_partition(labels + 1)
    return DetectionResult(partition=part, responsibilities=None,
                           converged=conv, iterations=iters)


def _expected_block_counts(R, X):
    """Expected edge and pair counts per unordered block under soft
    assignments R. Diagonal entries count i < j pairs once."""
    colsum = R.sum(axis=0)
    C = R.T @ X @ R
    Q = R.T @ R
    pairs = np.outer(colsum, colsum) - Q
    edges = C.copy()
    np.fill_diagonal(pairs, (colsum**2 - np.diag(Q)) / 2.0)
    np.fill_diagonal(edges, np.diag(C) / 2.0)
    return edges, pairs, colsum


def _beta_kl(zeta, xi, a0, b0):
    return (
        _gammaln(zeta + xi) - _gammaln(zeta) - _gammaln(xi)
        - _gammaln(a0 + b0) + _gammaln(a0) + _gammaln(b0)
        + (zeta - a0) * _psi(zeta) + (xi - b0) * _psi(xi)
        - (zeta + xi - a0 - b0) * _psi(zeta + xi)
    )


def _elbo(R, X, gamma, zeta, xi, K):
    edges, pairs, colsum = _expected_block_counts(R, X)
    elog_t = _psi(zeta) - _psi(zeta + xi)
    elog_1mt = _psi(xi) - _psi(zeta + xi)
    iu = np.triu_indices(K)
    e_loglik = float(np.sum(edges[iu] * elog_t[iu] + (pairs - edges)[iu] * elog_1mt[iu]))
    elog_pi = _psi(gamma) - _psi(gamma.sum())
    e_logpz = float(colsum @ elog_pi)
    entropy = -float(np.sum(_xlogy(R, R)))
    kl_pi = float(
        _gammaln(gamma.sum()) - np.sum(_gammaln(gamma))
        - _gammaln(K * _TAU) + K * _gammaln(_TAU)
        + np.sum((gamma - _TAU) * (_psi(gamma) - _psi(gamma.sum())))
    )
    kl_theta = float(np.sum(_beta_kl(zeta[iu], xi[iu], _A0, _B0)))
    return e_loglik + e_logpz + entropy - kl_pi - kl_theta


def variational_em(graph: Graph, K: int, init: DetectionResult,
                   max_iter: int = 100, tol: float = 1e-3, trace=None):
    """Mean-field EM for the Bernoulli block model.

    Each sweep updates the membership posterior, the block-probability
    posteriors, and every node's soft assignment in sequence, so the
    objective never decreases. Stops when the improvement falls below
    `tol` or after `max_iter` sweeps.

    Returns (DetectionResult, pi_hat, theta_vb), where theta_vb holds the
    per-block posterior-mean connectivity for the compacted clusters. Pass
    a list as `trace` to capture the objective value of every sweep.
    """
    if init.partition.n != graph.n:
        raise ValueError("init partition does not cover this graph")
    if init.partition.K > K:
        raise ValueError(f"init has {init.partition.K} clusters but K={K}")
    n = graph.n
    X = graph.adjacency()

    if init.responsibilities is not None and init.responsibilities.shape[1] == K:
        R = init.responsibilities.copy()
    else:
        R = np.zeros((n, K))
        R[np.arange(n), init.partition.labels - 1] = 1.0

    gamma = zeta = xi = None
    prev = -np.inf
    converged = False
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        colsum = R.sum(axis=0)
        gamma = _TAU + colsum
        edges, pairs, _ = _expected_block_counts(R, X)
        zeta = _A0 + edges
        xi = _B0 + np.maximum(pairs - edges, 0.0)
        elog_pi = _psi(gamma) - _psi(gamma.sum())
        elog_t = _psi(zeta) - _psi(zeta + xi)
        elog_1mt = _psi(xi) - _psi(zeta + xi)

        for i in range(n):
            s = X[i] @ R
            t = np.maximum(colsum - R[i] - s, 0.0)
            logr = elog_pi + elog_t @ s + elog_1mt @ t
            logr -= logr.max()
            r = np.exp(logr)
            r /= r.sum()
            colsum += r - R[i]
            R[i] = r

        value = _elbo(R, X, gamma, zeta, xi, K)
        if not np.isfinite(value):
            raise NumericalError(f"objective became non-finite at sweep {sweeps}")
        if __debug__ and np.isfinite(prev):
            assert value >= prev - 1e-7 * (1 + abs(prev)), "objective decreased"
        if trace is not None:
            trace.append(value)
        if value - prev < tol and np.isfinite(prev):
            converged = True
            break
        prev = value

    labels0 = np.argmax(R, axis=1)
    used = np.unique(labels0)
    Rc = R[:, used]
    Rc /= Rc.sum(axis=1, keepdims=True)
    part = compact_partition(labels0 + 1)
    edges, pairs, colsum = _expected_block_counts(Rc, X)
    theta_vb = (_A0 + edges) / (_A0 + _B0 + pairs)
    theta_vb = (theta_vb + theta_vb.T) / 2.0
    pi_hat = (_TAU + colsum) / (part.K * _TAU + n)
    det = DetectionResult(partition=part, responsibilities=Rc,
                          converged=converged, iterations=sweeps)
    return det, pi_hat, theta_vb


def detect_pipeline(graph: Graph, K: int, seed: int, max_iter: int = 100,
                    tol: float = 1e-3):
    """Spectral initialization refined by variational EM; the default
    partition provider for estimation and selection runs."""
    init = spectral_partition(graph, K, seed)
    return variational_em(graph, K, init, max_iter=max_iter, tol=tol)
