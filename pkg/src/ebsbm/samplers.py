"""Seeded random-graph generators for block models and graphons.

All sampling uses NumPy's PCG64 generator (``np.random.default_rng(seed)``),
so identical (spec, n, seed) inputs reproduce the same graph bit for bit.
Replicate r of an experiment draws from seed ``base_seed + r``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, Partition, compact_partition


@dataclass(frozen=True, eq=False)
class SbmSpec:
    """Block-model parameters: membership probabilities pi and a symmetric
    connectivity matrix theta with entries in [0, 1]."""

    pi: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.float64).copy()
        theta = np.asarray(self.theta, dtype=np.float64).copy()
        if pi.ndim != 1 or pi.size == 0:
            raise ValueError("pi must be a nonempty vector")
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError("pi must be nonnegative and sum to 1")
        K = pi.size
        if theta.shape != (K, K):
            raise ValueError(f"theta must be {K}x{K}")
        if not np.allclose(theta, theta.T, atol=1e-12):
            raise ValueError("theta must be symmetric")
        if theta.min() < 0 or theta.max() > 1:
            raise ValueError("theta entries must lie in [0, 1]")
        pi.flags.writeable = False
        theta.flags.writeable = False
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "theta", theta)

    @property
    def K(self) -> int:
        return self.pi.size


_PROBE = np.linspace(0.0, 1.0, 100)


@dataclass(frozen=True, eq=False)
class GraphonSpec:
    """A symmetric edge-probability function on the unit square.

    ``w`` must accept array arguments. ``kind`` tags the built-in families
    ("powerlaw", "step") for which exact integrals are available; anything
    else is treated as a generic graphon.
    """

    w: object
    kind: str = "generic"
    rho: float | None = None
    lam: float | None = None

    def __post_init__(self):
        gx, gy = np.meshgrid(_PROBE, _PROBE)
        vals = np.asarray(self.w(gx, gy), dtype=np.float64)
        if vals.shape != gx.shape:
            raise ValueError("w must broadcast over array inputs")
        if not np.all(np.isfinite(vals)) or vals.min() < -1e-12 or vals.max() > 1 + 1e-12:
            raise ValueError("w must map the probe grid into [0, 1]")
        if not np.allclose(vals, vals.T, atol=1e-12):
            raise ValueError("w must be symmetric on the probe grid")


class _PowerlawW:
    """w(x, y) = rho * lam^2 * (x y)^(lam - 1); picklable for worker pools."""

    def __init__(self, rho, lam):
        self.rho = rho
        self.lam = lam

    def __call__(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return self.rho * self.lam**2 * (x * y) ** (self.lam - 1.0)


def powerlaw_graphon(rho: float, lam: float) -> GraphonSpec:
    """Sparsity/concentration family with expected edge density rho.

    Requires lam >= 1 (so the function stays bounded) and rho * lam^2 <= 1
    (so the peak value at (1, 1) is a probability).
    """
    if not (0 < rho <= 1):
        raise ValueError("rho must lie in (0, 1]")
    if lam < 1:
        raise ValueError("lam must be >= 1")
    if rho * lam * lam > 1 + 1e-12:
        raise ValueError("rho * lam^2 must not exceed 1")
    return GraphonSpec(w=_PowerlawW(rho, lam), kind="powerlaw", rho=float(rho), lam=float(lam))


def constant_graphon(p: float) -> GraphonSpec:
    """Erdos-Renyi edge probability p as the lam = 1 power-law member."""
    return powerlaw_graphon(rho=p, lam=1.0)


def affiliation_theta(K: int, lam: float, epsilon: float, rho: float) -> SbmSpec:
    """Assortative block model: within-cluster probability rho*lam,
    between-cluster probability rho*epsilon, uniform memberships 1/K."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if not (0 <= epsilon < lam <= 1):
        raise ValueError("need 0 <= epsilon < lam <= 1")
    if not (0 < rho <= 1):
        raise ValueError("rho must lie in (0, 1]")
    theta = np.full((K, K), rho * epsilon)
    np.fill_diagonal(theta, rho * lam)
    return SbmSpec(pi=np.full(K, 1.0 / K), theta=theta)


def _pair_edges(rng, probs_upper, iu):
    draws = rng.random(probs_upper.size)
    keep = draws < probs_upper
    return frozenset(
        (int(i), int(j)) for i, j in zip(iu[0][keep], iu[1][keep])
    )


def sample_sbm(spec: SbmSpec, n: int, seed: int) -> tuple[Graph, Partition]:
    """Draw labels from pi, then connect each pair independently.

    The returned partition is compacted: clusters that received no node
    are dropped and K reduced accordingly.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    z0 = rng.choice(spec.K, size=n, p=spec.pi)
    iu = np.triu_indices(n, k=1)
    probs = spec.theta[z0[iu[0]], z0[iu[1]]]
    edges = _pair_edges(rng, probs, iu)
    return Graph(n=n, edges=edges), compact_partition(z0 + 1)


def sample_graphon(spec: GraphonSpec, n: int, seed: int) -> tuple[Graph, np.ndarray]:
    """Draw uniform latents u_i, connect pair (i, j) with probability
    w(u_i, u_j). Returns the graph and the latent vector."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    iu = np.triu_indices(n, k=1)
    probs = np.asarray(spec.w(u[iu[0]], u[iu[1]]), dtype=np.float64)
    if probs.size and (not np.all(np.isfinite(probs)) or probs.min() < 0 or probs.max() > 1):
        raise ValueError("graphon returned a value outside [0, 1] at a sampled point")
    edges = _pair_edges(rng, probs, iu)
    return Graph(n=n, edges=edges), u
