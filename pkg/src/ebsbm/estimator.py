"""Connectivity estimation under a hierarchical Beta-Binomial block model.

Each block's edge count is Binomial(n_ab, theta_ab) with theta_ab drawn
from one of two Beta priors: (alpha0, beta0) for diagonal blocks and
(alpha1, beta1) for off-diagonal ones. The marginal likelihood of the
adjacency data integrates theta out blockwise:

    sum_blocks log Beta(alpha + X, beta + n - X) - (#blocks) log Beta(alpha, beta)

Maximizing it over the hyperparameters (in log space, inside a fixed box)
and plugging the maximizer into the conditional posterior mean

    (alpha + X) / (alpha + beta + n)

gives the empirical Bayes estimate. The same posterior-mean formula with
user-pinned hyperparameters is the fixed-prior baseline, and the raw block
frequency X / n is the MLE baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import BlockStats
from .numerics import Bounds, digamma, log_beta, maximize_box

# Hyperparameter search box; spans essentially-no-shrinkage (1e-4) through
# full-pooling (1e6) regimes. Optimization runs on log(alpha), log(beta).
HYPER_BOX_LOWER = 1e-4
HYPER_BOX_UPPER = 1e6

_WHICH = ("diagonal", "offdiagonal")


@dataclass(frozen=True)
class HyperParams:
    """The four Beta hyperparameters: (alpha0, beta0) for diagonal blocks,
    (alpha1, beta1) for off-diagonal blocks."""

    alpha0: float
    beta0: float
    alpha1: float
    beta1: float
    offdiag_fitted: bool = True
    diag_converged: bool = True
    offdiag_converged: bool = True

    def __post_init__(self):
        for name in ("alpha0", "beta0", "alpha1", "beta1"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be a positive finite real")
            object.__setattr__(self, name, v)

    def pair(self, d: int) -> tuple[float, float]:
        """(alpha, beta) for d = 0 (diagonal) or d = 1 (off-diagonal)."""
        if d == 0:
            return self.alpha0, self.beta0
        if d == 1:
            return self.alpha1, self.beta1
        raise ValueError("d must be 0 or 1")

    def to_json_dict(self):
        return {
            "alpha0": self.alpha0, "beta0": self.beta0,
            "alpha1": self.alpha1, "beta1": self.beta1,
            "offdiag_fitted": self.offdiag_fitted,
            "diag_converged": self.diag_converged,
            "offdiag_converged": self.offdiag_converged,
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True, eq=False)
class ConnectivityEstimate:
    """A K x K symmetric connectivity matrix plus provenance.

    method is one of "MLE", "EB", "VBEM-baseline", "fixed-prior".
    shrinkage, when present, holds the weight each block placed on the
    prior mean rather than its own empirical frequency.
    """

    theta: np.ndarray
    method: str
    hyper: HyperParams | None = None
    shrinkage: np.ndarray | None = None
    flags: tuple = ()

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64).copy()
        if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
            raise ValueError("theta must be square")
        if not np.allclose(theta, theta.T, atol=1e-9):
            raise ValueError("theta must be symmetric")
        if theta.min() < -1e-12 or theta.max() > 1 + 1e-12:
            raise ValueError("theta entries must lie in [0, 1]")
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        if self.shrinkage is not None:
            sh = np.asarray(self.shrinkage, dtype=np.float64).copy()
            if sh.shape != theta.shape or sh.min() < -1e-12 or sh.max() > 1 + 1e-12:
                raise ValueError("shrinkage must be K x K with entries in [0, 1]")
            sh.flags.writeable = False
            object.__setattr__(self, "shrinkage", sh)
        object.__setattr__(self, "flags", tuple(self.flags))

    @property
    def K(self) -> int:
        return self.theta.shape[0]

    def to_json_dict(self):
        return {
            "K": self.K,
            "method": self.method,
            "theta": [float(v) for v in self.theta.ravel()],
            "hyper": self.hyper.to_json_dict() if self.hyper is not None else None,
            "shrinkage": ([float(v) for v in self.shrinkage.ravel()]
                          if self.shrinkage is not None else None),
            "flags": list(self.flags),
        }

    @classmethod
    def from_json_dict(cls, d):
        K = int(d["K"])
        theta = np.array(d["theta"], dtype=np.float64).reshape(K, K)
        shrink = d.get("shrinkage")
        if shrink is not None:
            shrink = np.array(shrink, dtype=np.float64).reshape(K, K)
        hyper = d.get("hyper")
        if hyper is not None:
            hyper = HyperParams.from_json_dict(hyper)
        return cls(theta=theta, method=d["method"], hyper=hyper,
                   shrinkage=shrink, flags=tuple(d.get("flags", ())))


def _selected_counts(stats: BlockStats, which: str):
    if which == "diagonal":
        return stats.diagonal_counts()
    if which == "offdiagonal":
        return stats.offdiagonal_counts()
    raise ValueError(f"which must be one of {_WHICH}, got {which!r}")


def _check_pair(alpha, beta):
    if not (np.isfinite(alpha) and alpha > 0 and np.isfinite(beta) and beta > 0):
        raise ValueError("hyperparameters must be positive finite reals")


def marginal_loglik(stats: BlockStats, alpha: float, beta: float, which: str) -> float:
    """Blockwise-integrated log-likelihood over the selected blocks.

    Blocks with zero pairs contribute exactly 0 (an empty product), so
    singleton clusters degrade gracefully rather than erroring.
    """
    _check_pair(alpha, beta)
    x, m = _selected_counts(stats, which)
    keep = m > 0
    x, m = x[keep].astype(np.float64), m[keep].astype(np.float64)
    if x.size == 0:
        return 0.0
    return float(np.sum(log_beta(alpha + x, beta + m - x)) - x.size * log_beta(alpha, beta))


def loglik_gradient(stats: BlockStats, alpha: float, beta: float, which: str):
    """(d/dalpha, d/dbeta) of :func:`marginal_loglik`, via digamma."""
    _check_pair(alpha, beta)
    x, m = _selected_counts(stats, which)
    keep = m > 0
    x, m = x[keep].astype(np.float64), m[keep].astype(np.float64)
    if x.size == 0:
        return (0.0, 0.0)
    psi_sum = digamma(alpha + beta + m)
    da = np.sum(digamma(alpha + x) - psi_sum) - x.size * (digamma(alpha) - digamma(alpha + beta))
    db = np.sum(digamma(beta + m - x) - psi_sum) - x.size * (digamma(beta) - digamma(alpha + beta))
    return (float(da), float(db))


def mle_estimate(stats: BlockStats) -> ConnectivityEstimate:
    """Per-block empirical edge frequency X / n.

    Blocks without any node pair get the global edge density and a flag,
    so downstream squared-error comparisons always have a defined value.
    """
    m = stats.pair_counts
    x = stats.edge_counts
    fill = stats.total_edges / stats.total_pairs if stats.total_pairs > 0 else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.where(m > 0, x / np.maximum(m, 1), fill)
    flags = tuple(
        f"block({a + 1},{b + 1}):global-density-fill"
        for a in range(stats.K) for b in range(a, stats.K) if m[a, b] == 0
    )
    return ConnectivityEstimate(theta=theta, method="MLE", flags=flags)


def _moment_init(x, m):
    """Beta moment-matching start for the optimizer, clamped into the box."""
    freqs = x / m
    mu = float(np.clip(freqs.mean(), 1e-6, 1 - 1e-6))
    var = float(freqs.var())
    if freqs.size < 2 or var <= 1e-12:
        return np.array([1.0, 1.0])
    s = mu * (1 - mu) / var - 1.0
    if s <= 0:
        return np.array([1.0, 1.0])
    lo = HYPER_BOX_LOWER * (1 + 1e-6)
    hi = HYPER_BOX_UPPER * (1 - 1e-6)
    return np.clip(np.array([mu * s, (1 - mu) * s]), lo, hi)


def _fit_pair(x, m):
    """Maximize the blockwise marginal over (alpha, beta) in log space."""
    x = x.astype(np.float64)
    m = m.astype(np.float64)
    count = x.size

    def objective(u):
        a, b = np.exp(u)
        psi_sum = digamma(a + b + m)
        f = np.sum(log_beta(a + x, b + m - x)) - count * log_beta(a, b)
        da = np.sum(digamma(a + x) - psi_sum) - count * (digamma(a) - digamma(a + b))
        db = np.sum(digamma(b + m - x) - psi_sum) - count * (digamma(b) - digamma(a + b))
        return float(f), np.array([da * a, db * b])

    log_lo = np.log(HYPER_BOX_LOWER)
    log_hi = np.log(HYPER_BOX_UPPER)
    bounds = Bounds(lower=np.full(2, log_lo), upper=np.full(2, log_hi))
    init = np.clip(np.log(_moment_init(x, m)), log_lo + 1e-9, log_hi - 1e-9)
    res = maximize_box(objective, bounds, init)
    a, b = np.exp(res.argmax)
    return float(a), float(b), res.converged


def fit_hyperparams(stats: BlockStats) -> HyperParams:
    """Maximum-likelihood Beta hyperparameters for each block family.

    The diagonal pair requires at least one diagonal block with pairs.
    The off-diagonal pair is fitted whenever such blocks exist (always the
    case for K >= 2 without empty clusters) and defaults to (1, 1),
    flagged unfitted, otherwise.
    """
    xd, md = stats.diagonal_counts()
    keep = md > 0
    if not np.any(keep):
        raise ValueError("no diagonal block has any node pair; cannot fit hyperparameters")
    a0, b0, conv0 = _fit_pair(xd[keep], md[keep])

    xo, mo = stats.offdiagonal_counts()
    keep_o = mo > 0
    if stats.K >= 2 and np.any(keep_o):
        a1, b1, conv1 = _fit_pair(xo[keep_o], mo[keep_o])
        fitted = True
    else:
        a1, b1, conv1, fitted = 1.0, 1.0, True, False
    return HyperParams(alpha0=a0, beta0=b0, alpha1=a1, beta1=b1,
                       offdiag_fitted=fitted, diag_converged=conv0,
                       offdiag_converged=conv1)


def _posterior_mean(stats: BlockStats, a0, b0, a1, b1):
    diag = np.eye(stats.K, dtype=bool)
    alpha = np.where(diag, a0, a1)
    beta = np.where(diag, b0, b1)
    m = stats.pair_counts
    x = stats.edge_counts
    theta = (alpha + x) / (alpha + beta + m)
    shrink = (alpha + beta) / (alpha + beta + m)
    return theta, shrink


def eb_estimate(stats: BlockStats, hyper: HyperParams) -> ConnectivityEstimate:
    """Posterior-mean connectivity under the fitted hyperparameters.

    Satisfies theta = eta * prior_mean + (1 - eta) * MLE exactly on every
    block with at least one pair, where eta is the returned shrinkage.
    """
    theta, shrink = _posterior_mean(stats, hyper.alpha0, hyper.beta0,
                                    hyper.alpha1, hyper.beta1)
    return ConnectivityEstimate(theta=theta, method="EB", hyper=hyper, shrinkage=shrink)


def fixed_prior_estimate(stats: BlockStats, a0: float = 0.5, b0: float = 0.5) -> ConnectivityEstimate:
    """Posterior mean under one fixed Beta(a0, b0) prior on every block."""
    if not (a0 > 0 and b0 > 0):
        raise ValueError("prior parameters must be positive")
    theta, shrink = _posterior_mean(stats, a0, b0, a0, b0)
    return ConnectivityEstimate(theta=theta, method="fixed-prior", shrinkage=shrink)
