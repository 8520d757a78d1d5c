"""Comparison metrics and evaluation records.

Includes pairwise squared error between expanded connectivity matrices,
the reference cluster count that minimizes the MLE's error curve, mean
absolute deviations of selected cluster counts, the annotation-based
ground-truth connectivity, and the held-out likelihood protocol pieces
(node splitting and the test log-likelihood).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .estimator import mle_estimate
from .graph import Graph, Partition, block_stats, expand_theta
from .selection import SelectionScore

_CLAMP = 1e-9  # probability clipping for log terms


def mse_sbm(est_theta, est_partition: Partition, true_theta,
            true_partition: Partition) -> float:
    """Mean squared difference of the two expanded n x n connectivity
    matrices over ordered pairs i != j."""
    if est_partition.n != true_partition.n:
        raise ValueError("partitions cover different node counts")
    est = expand_theta(est_theta, est_partition)
    true = expand_theta(true_theta, true_partition)
    n = est_partition.n
    iu = np.triu_indices(n, k=1)
    # ordered-pair average equals the upper-triangle average by symmetry
    return float(np.mean((est[iu] - true[iu]) ** 2)) if iu[0].size else 0.0


def k_tilde(curve) -> int:
    """K minimizing an (K, mse) curve; ties resolve to the smallest K."""
    points = list(curve)
    if not points:
        raise ValueError("curve must be nonempty")
    best_k, best_v = points[0]
    for k, v in points[1:]:
        if v < best_v or (v == best_v and k < best_k):
            best_k, best_v = k, v
    return int(best_k)


def deviation_metrics(k_hats, k_star: int, k_tildes):
    """Mean absolute deviations of selections from the true count and from
    each replicate's error-minimizing count."""
    k_hats = np.asarray(list(k_hats), dtype=np.float64)
    k_tildes = np.asarray(list(k_tildes), dtype=np.float64)
    if k_hats.size != k_tildes.size or k_hats.size == 0:
        raise ValueError("k_hats and k_tildes must have equal positive length")
    e_star = float(np.mean(np.abs(k_hats - k_star)))
    e_tilde = float(np.mean(np.abs(k_hats - k_tildes)))
    return e_star, e_tilde


def theta_star(graph: Graph, true_partition: Partition) -> np.ndarray:
    """Empirical block frequencies under an annotated partition; blocks
    without pairs carry the global edge density."""
    return mle_estimate(block_stats(graph, true_partition)).theta


def split_nodes(n: int, fraction: float = 0.7, seed: int = 0):
    """Uniform train/test node split without replacement.

    Train size is round-half-up of fraction * n. Returns sorted index
    arrays whose disjoint union is 0..n-1; deterministic given the seed.
    """
    if not (0 < fraction < 1):
        raise ValueError("fraction must lie strictly between 0 and 1")
    m = int(np.floor(fraction * n + 0.5))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    train = np.sort(perm[:m])
    test = np.sort(perm[m:])
    return train, test


def test_loglik(graph: Graph, labels: Partition, theta_hat, train, test) -> float:
    """Log-likelihood of the held-out edge variables.

    Sums x log(theta) + (1 - x) log(1 - theta) over train x test pairs and
    test-internal pairs; train-internal pairs never contribute. Estimated
    probabilities are clipped to [1e-9, 1 - 1e-9] before the logs.
    """
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    if theta_hat.min() < 0 or theta_hat.max() > 1:
        raise ValueError("theta_hat entries must lie in [0, 1]")
    if labels.n != graph.n:
        raise ValueError("labels must cover every node")
    train = np.asarray(train, dtype=np.int64)
    test = np.asarray(test, dtype=np.int64)
    both = np.concatenate([train, test])
    if both.size and (both.min() < 0 or both.max() >= graph.n):
        raise ValueError("node indices out of range")
    if np.intersect1d(train, test).size:
        raise ValueError("train and test must be disjoint")
    adj = graph.adjacency()
    probs = np.clip(expand_theta(theta_hat, labels), _CLAMP, 1 - _CLAMP)
    ll = adj * np.log(probs) + (1 - adj) * np.log1p(-probs)
    total = float(ll[np.ix_(train, test)].sum())
    if test.size > 1:
        block = ll[np.ix_(test, test)]
        total += float(block[np.triu_indices(test.size, k=1)].sum())
    return total


@dataclass(frozen=True)
class ExperimentRecord:
    """Per-replicate, per-input-K evaluation row."""

    replicate: int
    K_input: int
    K_returned: int
    mse_mle: float
    mse_eb: float
    mse_vbem: float
    scores: list = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        if self.K_returned > self.K_input:
            raise ValueError("K_returned cannot exceed K_input")
        for name in ("mse_mle", "mse_eb", "mse_vbem"):
            v = getattr(self, name)
            if np.isfinite(v) and v < 0:
                raise ValueError(f"{name} must be nonnegative")

    def to_json_dict(self):
        return {
            "replicate": self.replicate,
            "K_input": self.K_input,
            "K_returned": self.K_returned,
            "mse_mle": self.mse_mle,
            "mse_eb": self.mse_eb,
            "mse_vbem": self.mse_vbem,
            "scores": [s.to_json_dict() for s in self.scores],
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            replicate=int(d["replicate"]), K_input=int(d["K_input"]),
            K_returned=int(d["K_returned"]), mse_mle=float(d["mse_mle"]),
            mse_eb=float(d["mse_eb"]), mse_vbem=float(d["mse_vbem"]),
            scores=[SelectionScore.from_json_dict(s) for s in d.get("scores", [])],
            seed=int(d["seed"]),
        )

    def __eq__(self, other):
        if not isinstance(other, ExperimentRecord):
            return NotImplemented
        return self.to_json_dict() == other.to_json_dict()


def write_records_jsonl(records, path):
    """One sorted-key JSON document per line; byte-stable given equal records."""
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json_dict(), sort_keys=True,
                                separators=(",", ":")))
            fh.write("\n")


def read_records_jsonl(path):
    with open(path) as fh:
        return [ExperimentRecord.from_json_dict(json.loads(line))
                for line in fh if line.strip()]


def write_records_csv(records, path):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replicate", "K_input", "K_returned",
                    "mse_mle", "mse_eb", "mse_vbem", "seed"])
        for r in records:
            w.writerow([r.replicate, r.K_input, r.K_returned,
                        repr(r.mse_mle), repr(r.mse_eb), repr(r.mse_vbem), r.seed])


def summarize_records(records):
    """Per-input-K medians of the error columns and of the per-replicate
    ratios of the pooled estimate against each baseline."""
    by_k = {}
    for r in records:
        by_k.setdefault(r.K_input, []).append(r)
    rows = []
    for K in sorted(by_k):
        group = by_k[K]
        mle = np.array([g.mse_mle for g in group])
        eb = np.array([g.mse_eb for g in group])
        vb = np.array([g.mse_vbem for g in group])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio_mle = np.where(mle > 0, eb / mle, np.nan)
            ratio_vb = np.where(vb > 0, eb / vb, np.nan)

        def med(a):
            return float(np.nanmedian(a)) if np.any(np.isfinite(a)) else float("nan")

        rows.append({
            "K": K,
            "replicates": len(group),
            "median_mse_mle": med(mle),
            "median_mse_eb": med(eb),
            "median_mse_vbem": med(vb),
            "median_ratio_eb_mle": med(ratio_mle),
            "median_ratio_eb_vbem": med(ratio_vb),
        })
    return rows


def write_summary_csv(rows, path):
    import csv

    cols = ["K", "replicates", "median_mse_mle", "median_mse_eb",
            "median_mse_vbem", "median_ratio_eb_mle", "median_ratio_eb_vbem"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in rows:
            w.writerow([row[c] if c in ("K", "replicates") else repr(row[c])
                        for c in cols])
