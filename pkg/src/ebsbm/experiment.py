"""End-to-end experiment harness.

A run simulates (or loads) graphs, detects communities over an input K
range, computes all three connectivity estimates and their errors against
the truth, scores every candidate for model selection, and streams the
per-replicate records plus summary tables to an output directory:

    out/
      manifest.json     config, seeds, version: everything needed to rerun
      records.jsonl     one record per (replicate, input K)
      summary.csv       per-K medians and error ratios
      selection.csv     chosen K per criterion with deviation metrics
      replicates/rNNN/  simulated edge lists and truth sidecars

Replicate r draws from seed base_seed + r and is independent of the
others, so replicates parallelize across a process pool. Graphs are
canonicalized to the node order an edge-list round-trip produces, which
makes one-replicate runs equal the composed simulate/estimate/select
commands output-for-output.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .community import detect_pipeline
from .estimator import (
    ConnectivityEstimate,
    eb_estimate,
    fit_hyperparams,
    fixed_prior_estimate,
    mle_estimate,
)
from .graph import BlockStats, Graph, Partition, block_counts, block_stats, induced_subgraph
from .graphon import build_step_graphon, mse_graphon, reorder_identifiable
from .io import canonical_order, ingest_network, relabel_nodes, write_edge_list
from .metrics import (
    ExperimentRecord,
    deviation_metrics,
    k_tilde,
    mse_sbm,
    split_nodes,
    summarize_records,
    test_loglik,
    write_records_jsonl,
    write_summary_csv,
)
from .samplers import affiliation_theta, powerlaw_graphon, sample_graphon
from .selection import pick_best, score_partition

_MODELS = ("sbm-affiliation", "graphon-powerlaw", "file")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "sbm-affiliation"
    n: int = 200
    k_star: int = 10
    lam: float = 0.9
    epsilon: float = 0.1
    rho: float = 1.0
    k_range: tuple = tuple(range(1, 21))
    replicates: int = 20
    base_seed: int = 0
    criterion: str = "EB"
    cvrp_mode: str = "squared"
    workers: int = 1
    vem_max_iter: int = 100
    vem_tol: float = 1e-3
    graph_file: str | None = None
    label_file: str | None = None
    write_replicates: bool = True

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"model must be one of {_MODELS}")
        if not self.k_range:
            raise ValueError("k_range must be nonempty")
        object.__setattr__(self, "k_range", tuple(int(k) for k in self.k_range))
        if any(k < 1 for k in self.k_range):
            raise ValueError("k_range entries must be >= 1")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.model == "file" and not self.graph_file:
            raise ValueError("model 'file' needs graph_file")
        if self.criterion not in ("EB", "CVRP"):
            raise ValueError("criterion must be 'EB' or 'CVRP'")

    def to_json_dict(self):
        return asdict(self)

    @classmethod
    def from_json_dict(cls, d):
        d = dict(d)
        d["k_range"] = tuple(d["k_range"])
        return cls(**d)


def _restrict_truth(theta_full, raw_labels1, ids):
    """Truth matrix and partition restricted to the kept nodes; clusters
    that lost every node are dropped from both."""
    labs = np.asarray(raw_labels1)[ids]
    present = np.unique(labs)
    theta = np.asarray(theta_full)[np.ix_(present - 1, present - 1)]
    remap = np.zeros(int(present.max()) + 1, dtype=np.int64)
    remap[present] = np.arange(1, present.size + 1)
    return theta, Partition(labels=remap[labs], K=present.size)


def _simulate_replicate(cfg: ExperimentConfig, r: int):
    """Returns (canonical graph, truth dict, sidecars dict)."""
    seed = cfg.base_seed + r
    if cfg.model == "sbm-affiliation":
        spec = affiliation_theta(cfg.k_star, cfg.lam, cfg.epsilon, cfg.rho)
        graph, raw1 = _sample_sbm_raw(spec, cfg.n, seed)
        order = canonical_order(graph)
        g = relabel_nodes(graph, order)
        theta_t, part_t = _restrict_truth(spec.theta, raw1, order)
        truth = {"kind": "sbm", "theta": theta_t, "partition": part_t}
        sidecars = {"graph": graph, "labels": raw1}
    elif cfg.model == "graphon-powerlaw":
        spec = powerlaw_graphon(cfg.rho, cfg.lam)
        graph, latents = sample_graphon(spec, cfg.n, seed)
        order = canonical_order(graph)
        g = relabel_nodes(graph, order)
        truth = {"kind": "graphon", "spec": spec}
        sidecars = {"graph": graph, "latents": latents}
    else:
        raise ValueError(cfg.model)
    return g, truth, sidecars


def _sample_sbm_raw(spec, n, seed):
    """sample_sbm plus the uncompacted 1-based truth labels."""
    from .samplers import _pair_edges

    rng = np.random.default_rng(seed)
    z0 = rng.choice(spec.K, size=n, p=spec.pi)
    iu = np.triu_indices(n, k=1)
    probs = spec.theta[z0[iu[0]], z0[iu[1]]]
    edges = _pair_edges(rng, probs, iu)
    return Graph(n=n, edges=edges), z0 + 1


def _mse_against_truth(est: ConnectivityEstimate, partition, truth) -> float:
    if truth is None:
        return float("nan")
    if truth["kind"] == "sbm":
        return mse_sbm(est.theta, partition, truth["theta"], truth["partition"])
    step = build_step_graphon(partition, est)
    step, _ = reorder_identifiable(step)
    return mse_graphon(step, truth["spec"])


def analyze_graph(graph: Graph, k_range, seed: int, truth=None,
                  replicate: int = 0, cfg: ExperimentConfig | None = None):
    """Run detection, estimation, scoring and selection over the K range.

    Returns (records, selection) where selection maps criterion name to
    the chosen (compacted) K and carries the error-minimizing reference K.
    """
    cfg = cfg or ExperimentConfig(k_range=tuple(k_range))
    records = []
    estimates = []
    for K in k_range:
        det, _, theta_vb = detect_pipeline(graph, K, seed,
                                           max_iter=cfg.vem_max_iter, tol=cfg.vem_tol)
        stats = block_stats(graph, det.partition)
        hyper = fit_hyperparams(stats)
        est_mle = mle_estimate(stats)
        est_eb = eb_estimate(stats, hyper)
        est_vb = ConnectivityEstimate(theta=theta_vb, method="VBEM-baseline")
        score = score_partition(graph, det.partition, cvrp_mode=cfg.cvrp_mode,
                                stats=stats, hyper=hyper)
        rec = ExperimentRecord(
            replicate=replicate, K_input=int(K), K_returned=det.partition.K,
            mse_mle=_mse_against_truth(est_mle, det.partition, truth),
            mse_eb=_mse_against_truth(est_eb, det.partition, truth),
            mse_vbem=_mse_against_truth(est_vb, det.partition, truth),
            scores=[score], seed=int(seed),
        )
        records.append(rec)
        estimates.append({"K": int(K), "partition": det.partition,
                          "mle": est_mle, "eb": est_eb, "vbem": est_vb})
    flat_scores = [rec.scores[0] for rec in records]
    selection = {
        "EB": flat_scores[pick_best(flat_scores, "EB")].K,
        "CVRP": flat_scores[pick_best(flat_scores, "CVRP")].K,
    }
    if truth is not None and not any(np.isnan(rec.mse_mle) for rec in records):
        selection["k_tilde"] = k_tilde([(rec.K_input, rec.mse_mle) for rec in records])
    return records, selection, estimates


def _run_one(cfg: ExperimentConfig, r: int, loaded=None):
    if cfg.model == "file":
        graph, truth = loaded
        sidecars = None
    else:
        graph, truth, sidecars = _simulate_replicate(cfg, r)
    records, selection, _ = analyze_graph(
        graph, cfg.k_range, cfg.base_seed + r, truth=truth, replicate=r, cfg=cfg)
    return {"replicate": r, "records": records, "selection": selection,
            "sidecars": sidecars}


def _worker(args):
    cfg, r = args
    loaded = _load_file_model(cfg) if cfg.model == "file" else None
    return _run_one(cfg, r, loaded=loaded)


def _load_file_model(cfg: ExperimentConfig):
    graph, part, _, _ = ingest_network(cfg.graph_file, cfg.label_file)
    if part is not None:
        from .metrics import theta_star

        truth = {"kind": "sbm", "theta": theta_star(graph, part), "partition": part}
    else:
        truth = None
    return graph, truth


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    selection_rows: list
    summary_rows: list
    skipped: list
    out_dir: str | None


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None) -> ExperimentResult:
    """Execute all replicates and (when out_dir is given) write the full
    output layout. Replicates that raise are logged, skipped and counted."""
    loaded = _load_file_model(cfg) if cfg.model == "file" else None
    results = []
    skipped = []
    tasks = list(range(cfg.replicates))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = {r: pool.submit(_worker, (cfg, r)) for r in tasks}
            for r in tasks:
                try:
                    results.append(futures[r].result())
                except Exception as exc:  # noqa: BLE001 - replicate isolation
                    skipped.append({"replicate": r, "error": f"{type(exc).__name__}: {exc}"})
    else:
        for r in tasks:
            try:
                results.append(_run_one(cfg, r, loaded=loaded))
            except Exception as exc:  # noqa: BLE001 - replicate isolation
                skipped.append({"replicate": r, "error": f"{type(exc).__name__}: {exc}"})

    results.sort(key=lambda d: d["replicate"])
    records = [rec for res in results for rec in res["records"]]
    selection_rows = _selection_summary(cfg, results)
    summary_rows = summarize_records(records)

    if out_dir is not None:
        _write_outputs(cfg, out_dir, results, records, summary_rows, selection_rows, skipped)
    return ExperimentResult(config=cfg, records=records, selection_rows=selection_rows,
                            summary_rows=summary_rows, skipped=skipped, out_dir=out_dir)


def _selection_summary(cfg: ExperimentConfig, results):
    rows = []
    k_tildes = [res["selection"].get("k_tilde") for res in results]
    have_tilde = all(k is not None for k in k_tildes) and k_tildes
    for criterion in ("EB", "CVRP"):
        k_hats = [res["selection"][criterion] for res in results]
        freq = {}
        for k in k_hats:
            freq[k] = freq.get(k, 0) + 1
        row = {"criterion": criterion, "k_hats": k_hats,
               "frequencies": dict(sorted(freq.items()))}
        if have_tilde:
            k_star = cfg.k_star if cfg.model == "sbm-affiliation" else None
            if k_star is not None:
                e_star, e_tilde = deviation_metrics(k_hats, k_star, k_tildes)
                row["e_k_star"] = e_star
            else:
                _, e_tilde = deviation_metrics(k_hats, 0, k_tildes)
            row["e_k_tilde"] = e_tilde
        rows.append(row)
    return rows


def _write_outputs(cfg, out_dir, results, records, summary_rows, selection_rows, skipped):
    os.makedirs(out_dir, exist_ok=True)
    write_records_jsonl(records, os.path.join(out_dir, "records.jsonl"))
    write_summary_csv(summary_rows, os.path.join(out_dir, "summary.csv"))
    _write_selection_csv(selection_rows, os.path.join(out_dir, "selection.csv"))
    if cfg.write_replicates and cfg.model != "file":
        for res in results:
            sub = os.path.join(out_dir, "replicates", f"r{res['replicate']:03d}")
            os.makedirs(sub, exist_ok=True)
            side = res["sidecars"]
            write_edge_list(side["graph"], os.path.join(sub, "graph.txt"))
            if "labels" in side:
                with open(os.path.join(sub, "labels.txt"), "w") as fh:
                    for i, lab in enumerate(side["labels"]):
                        fh.write(f"{i} {lab}\n")
            if "latents" in side:
                with open(os.path.join(sub, "latents.txt"), "w") as fh:
                    for i, u in enumerate(side["latents"]):
                        fh.write(f"{i} {u!r}\n")
    manifest = {
        "version": __version__,
        "command": "experiment",
        "config": cfg.to_json_dict(),
        "seeds": [cfg.base_seed + r for r in range(cfg.replicates)],
        "completed": [res["replicate"] for res in results],
        "skipped": skipped,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_selection_csv(rows, path):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["criterion", "k_hat_frequencies", "e_k_star", "e_k_tilde"])
        for row in rows:
            freq = ";".join(f"{k}:{v}" for k, v in row["frequencies"].items())
            w.writerow([row["criterion"], freq,
                        repr(row.get("e_k_star", "")), repr(row.get("e_k_tilde", ""))])


def run_testlik_protocol(graph: Graph, partition: Partition, n_splits: int = 100,
                         fraction: float = 0.7, base_seed: int = 0):
    """Held-out likelihood comparison across estimation methods.

    Per split: fit each estimator on the train-induced subgraph under the
    annotated labels (keeping the full K* block structure; blocks emptied
    by the split contribute prior means or density fills), then score the
    held-out pairs. Returns method -> list of log-likelihoods.
    """
    out = {"MLE": [], "EB": [], "fixed-prior": []}
    K = partition.K
    for s in range(n_splits):
        train, test = split_nodes(graph.n, fraction=fraction, seed=base_seed + s)
        sub, ids = induced_subgraph(graph, train)
        labs0 = partition.labels[ids] - 1
        x, m = block_counts(sub, labs0, K)
        stats = BlockStats(K=K, edge_counts=x, pair_counts=m)
        ests = {
            "MLE": mle_estimate(stats),
            "EB": eb_estimate(stats, fit_hyperparams(stats)),
            "fixed-prior": fixed_prior_estimate(stats),
        }
        for name, est in ests.items():
            out[name].append(test_loglik(graph, partition, est.theta, train, test))
    return out
