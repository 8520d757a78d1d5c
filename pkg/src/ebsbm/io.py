"""Edge-list and label-file ingestion.

Format: UTF-8 text, one edge per line as two whitespace-separated node
tokens; lines starting with '#' (and blank lines) are ignored. Node
tokens may be arbitrary strings and are mapped to 0-based indices in
first-seen order; the mapping is returned so results can be reported in
the original ids. Duplicate edges (either orientation) and self-loops are
dropped silently but counted. Label files hold one "node label" pair per
line with the same token conventions.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError
from .graph import Graph, Partition

__all__ = [
    "read_edge_list", "write_edge_list", "read_label_file", "write_label_file",
    "ingest_network", "canonical_order", "relabel_nodes", "bundled_data_path",
]


def bundled_data_path(name: str) -> str:
    """Path to a data file shipped with the package."""
    from importlib import resources

    return str(resources.files("ebsbm").joinpath("data", name))


def _data_lines(path):
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                yield lineno, line
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def read_edge_list(path):
    """Parse an edge list. Returns (graph, node_ids, report) where report
    counts dropped self-loops and duplicates."""
    index = {}
    ids = []
    edges = set()
    self_loops = 0
    duplicates = 0
    for lineno, line in _data_lines(path):
        tokens = line.split()
        if len(tokens) != 2:
            raise DataError(f"{path}: line {lineno}: expected two node tokens, got {len(tokens)}")
        pair = []
        for tok in tokens:
            if tok not in index:
                index[tok] = len(ids)
                ids.append(tok)
            pair.append(index[tok])
        i, j = pair
        if i == j:
            self_loops += 1
            continue
        edge = (min(i, j), max(i, j))
        if edge in edges:
            duplicates += 1
        else:
            edges.add(edge)
    if not ids:
        raise DataError(f"{path}: no edges found")
    graph = Graph(n=len(ids), edges=frozenset(edges))
    report = {"n": graph.n, "edges": graph.edge_count,
              "self_loops_dropped": self_loops, "duplicates_dropped": duplicates}
    return graph, ids, report


def write_edge_list(graph: Graph, path, node_ids=None):
    """Write edges sorted by index pair, one per line; byte-deterministic."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in sorted(graph.edges):
            a = node_ids[i] if node_ids is not None else i
            b = node_ids[j] if node_ids is not None else j
            fh.write(f"{a} {b}\n")


def read_label_file(path, node_ids):
    """Parse "node label" pairs covering every node in node_ids.

    Label tokens map to 1..K in first-seen order; returns (partition,
    label_names) with label_names[k-1] the original token of cluster k.
    """
    index = {tok: pos for pos, tok in enumerate(node_ids)}
    raw = {}
    label_index = {}
    label_names = []
    for lineno, line in _data_lines(path):
        tokens = line.split()
        if len(tokens) != 2:
            raise DataError(f"{path}: line {lineno}: expected 'node label', got {len(tokens)} tokens")
        node_tok, label_tok = tokens
        if node_tok not in index:
            raise DataError(f"{path}: line {lineno}: unknown node {node_tok!r}")
        if label_tok not in label_index:
            label_index[label_tok] = len(label_names) + 1
            label_names.append(label_tok)
        raw[index[node_tok]] = label_index[label_tok]
    missing = len(node_ids) - len(raw)
    if missing:
        raise DataError(f"{path}: {missing} node(s) have no label")
    labels = np.array([raw[i] for i in range(len(node_ids))], dtype=np.int64)
    return Partition(labels=labels, K=len(label_names)), label_names


def write_label_file(partition: Partition, path, node_ids=None):
    with open(path, "w", encoding="utf-8") as fh:
        for i, lab in enumerate(partition.labels):
            tok = node_ids[i] if node_ids is not None else i
            fh.write(f"{tok} {lab}\n")


def ingest_network(edges_path, labels_path=None):
    """Load a network and optional annotation into canonical form.

    Nodes appearing only in the label file are appended as isolated
    nodes, so annotated node counts survive sparse edge lists. Returns
    (graph, partition_or_None, node_ids, report).
    """
    graph, ids, report = read_edge_list(edges_path)
    part = None
    if labels_path is not None:
        index = {tok: pos for pos, tok in enumerate(ids)}
        extra = []
        for lineno, line in _data_lines(labels_path):
            tokens = line.split()
            if len(tokens) != 2:
                raise DataError(
                    f"{labels_path}: line {lineno}: expected 'node label', got {len(tokens)} tokens")
            if tokens[0] not in index:
                index[tokens[0]] = len(ids) + len(extra)
                extra.append(tokens[0])
        if extra:
            ids = ids + extra
            graph = Graph(n=len(ids), edges=graph.edges)
        part, _ = read_label_file(labels_path, ids)
        report = dict(report, n=graph.n, k_labels=part.K)
    else:
        report = dict(report, k_labels=None)
    return graph, part, ids, report


def canonical_order(graph: Graph) -> np.ndarray:
    """Node order produced by writing the edge list and reading it back:
    first appearance over index-sorted edges. Isolated nodes do not appear
    in an edge list, so they are absent here too."""
    order = []
    seen = set()
    for i, j in graph.edge_array():
        for v in (int(i), int(j)):
            if v not in seen:
                seen.add(v)
                order.append(v)
    return np.array(order, dtype=np.int64)


def relabel_nodes(graph: Graph, order: np.ndarray) -> Graph:
    """Graph with node order[p] renamed to p; edges outside `order` drop."""
    pos = -np.ones(graph.n, dtype=np.int64)
    pos[order] = np.arange(order.size)
    edges = frozenset(
        (int(min(pos[i], pos[j])), int(max(pos[i], pos[j])))
        for i, j in graph.edges if pos[i] >= 0 and pos[j] >= 0
    )
    return Graph(n=order.size, edges=edges)
