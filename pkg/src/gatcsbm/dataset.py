"""Neutral TSV graph ingestion and the one-vs-all mean-shift protocol for real data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .csbm import CsbmSample
from .experiments import SweepRecord, evaluate_models

__all__ = [
    "BinarizedTask",
    "ExternalGraph",
    "ParseError",
    "REAL_MODELS",
    "evaluate_real_task",
    "injection_direction",
    "load_external_graph",
    "one_vs_all_mean_shift",
]

REAL_MODELS = ("mlp-psi", "gcn", "linear")
SPLITS = ("train", "val", "test")


class ParseError(ValueError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


@dataclass(frozen=True, eq=False)
class ExternalGraph:
    features: np.ndarray
    edges: np.ndarray
    labels: np.ndarray
    masks: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    def to_sample(self, labels=None, features=None) -> CsbmSample:
        return CsbmSample.from_edge_list(self.labels if labels is None else labels,
                                         self.features if features is None else features,
                                         self.edges)


def _rows(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if line.strip() == "":
                continue
            yield lineno, line.split("\t")


def _node_id(path, lineno, token, n=None) -> int:
    try:
        v = int(token)
    except ValueError:
        raise ParseError(path, lineno, f"bad node id {token!r}") from None
    if v < 0 or (n is not None and v >= n):
        raise ParseError(path, lineno, f"unknown node id {v}")
    return v


def _per_node(path, n, parse_value):
    out = [None] * n
    for lineno, parts in _rows(path):
        if len(parts) != 2:
            raise ParseError(path, lineno, f"expected 2 fields, got {len(parts)}")
        i = _node_id(path, lineno, parts[0], n)
        if out[i] is not None:
            raise ParseError(path, lineno, f"node {i} listed twice")
        out[i] = parse_value(lineno, parts[1])
    missing = [i for i, v in enumerate(out) if v is None]
    if missing:
        raise ParseError(path, 0, f"no entry for node {missing[0]}")
    return out


def load_external_graph(features_path, edges_path, labels_path, masks_path=None) -> ExternalGraph:
    """Parse the TSV triple (plus optional masks) and validate it.

    Node ids must cover ``0..n-1`` where ``n`` is the number of feature rows.
    Edges are stored with ``u < v``; self-loops and repeated edges are errors.
    """
    feats: dict[int, list[float]] = {}
    width = None
    for lineno, parts in _rows(features_path):
        i = _node_id(features_path, lineno, parts[0])
        try:
            vals = [float(x) for x in parts[1:]]
        except ValueError:
            raise ParseError(features_path, lineno, "non-numeric feature value") from None
        if width is None:
            width = len(vals)
            if width == 0:
                raise ParseError(features_path, lineno, "row has no feature values")
        elif len(vals) != width:
            raise ParseError(features_path, lineno, f"ragged row: {len(vals)} values, expected {width}")
        if i in feats:
            raise ParseError(features_path, lineno, f"node {i} listed twice")
        feats[i] = vals
    n = len(feats)
    if n == 0:
        raise ParseError(features_path, 0, "no feature rows")
    if sorted(feats) != list(range(n)):
        bad = next(i for i in sorted(feats) if i >= n)
        raise ParseError(features_path, 0, f"node ids must be 0..{n - 1}, found {bad}")
    features = np.array([feats[i] for i in range(n)], dtype=float)

    seen: set[tuple[int, int]] = set()
    edges = []
    for lineno, parts in _rows(edges_path):
        if len(parts) != 2:
            raise ParseError(edges_path, lineno, f"expected 2 fields, got {len(parts)}")
        u = _node_id(edges_path, lineno, parts[0], n)
        v = _node_id(edges_path, lineno, parts[1], n)
        if u == v:
            raise ParseError(edges_path, lineno, f"self-loop at line {lineno}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError(edges_path, lineno, f"duplicate edge {key}")
        seen.add(key)
        edges.append(key)
    edges_arr = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)

    def parse_label(lineno, tok):
        try:
            return int(tok)
        except ValueError:
            raise ParseError(labels_path, lineno, f"bad label {tok!r}") from None

    labels = np.array(_per_node(labels_path, n, parse_label), dtype=np.int64)

    masks = None
    if masks_path is not None:
        def parse_mask(lineno, tok):
            if tok not in SPLITS:
                raise ParseError(masks_path, lineno, f"split must be one of {SPLITS}, got {tok!r}")
            return tok

        masks = np.array(_per_node(masks_path, n, parse_mask))
    return ExternalGraph(features, edges_arr, labels, masks)


@dataclass(frozen=True, eq=False)
class BinarizedTask:
    graph: ExternalGraph
    target_class: int
    binary_labels: np.ndarray
    shifted_features: np.ndarray
    mu_applied: np.ndarray

    def to_sample(self) -> CsbmSample:
        return self.graph.to_sample(self.binary_labels, self.shifted_features)


def one_vs_all_mean_shift(graph: ExternalGraph, target_class: int, mu) -> BinarizedTask:
    """Recenter the target class at ``+mu`` and all other nodes jointly at ``-mu``."""
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.shape[0] != graph.d:
        raise ValueError(f"mu has dimension {mu.shape[0]}, features have {graph.d}")
    binary = (graph.labels == target_class).astype(np.int64)
    pos = binary == 1
    if not pos.any():
        raise ValueError(f"class {target_class} has no nodes")
    if pos.all():
        raise ValueError(f"class {target_class} covers every node; the rest is empty")
    x = graph.features
    shifted = np.empty_like(x)
    shifted[pos] = x[pos] - x[pos].mean(axis=0) + mu
    shifted[~pos] = x[~pos] - x[~pos].mean(axis=0) - mu
    return BinarizedTask(graph, int(target_class), binary, shifted, mu)


def injection_direction(graph: ExternalGraph, target_class: int) -> np.ndarray:
    """Unit difference of raw class means (target minus rest), else the first axis."""
    pos = graph.labels == target_class
    diff = graph.features[pos].mean(axis=0) - graph.features[~pos].mean(axis=0)
    norm = float(np.linalg.norm(diff))
    if norm < 1e-12:
        e = np.zeros(graph.d)
        e[0] = 1.0
        return e
    return diff / norm


def _edge_rates(sample: CsbmSample) -> tuple[float, float]:
    lab = sample.labels
    n1 = int(lab.sum())
    n0 = sample.n - n1
    edges = sample.edges()
    same = lab[edges[:, 0]] == lab[edges[:, 1]]
    intra_pairs = n0 * (n0 - 1) / 2 + n1 * (n1 - 1) / 2
    inter_pairs = n0 * n1
    p = float(same.sum() / intra_pairs) if intra_pairs else 0.0
    q = float((~same).sum() / inter_pairs) if inter_pairs else 0.0
    return p, q


def evaluate_real_task(task: BinarizedTask, models=REAL_MODELS, mu_norm_grid=(),
                       sigma: float | None = None) -> list[SweepRecord]:
    """Sweep the injected mean norm on a binarized real graph.

    For each norm the raw graph is re-shifted with ``mu = norm * u``. When
    masks exist, metrics use the non-training nodes only. ``p``/``q`` used
    for references are the empirical edge rates; ``sigma`` defaults to the
    pooled per-coordinate std of the centered features.
    """
    graph = task.graph
    u = injection_direction(graph, task.target_class)
    nodes = None
    if graph.masks is not None:
        nodes = np.flatnonzero(graph.masks != "train")
    records: list[SweepRecord] = []
    for norm in mu_norm_grid:
        mu = float(norm) * u
        shifted = one_vs_all_mean_shift(graph, task.target_class, mu)
        sample = shifted.to_sample()
        p, q = _edge_rates(sample)
        if sigma is None:
            centered = shifted.shifted_features - np.where(shifted.binary_labels[:, None] == 1, mu, -mu)
            sig = float(centered.std()) or 1.0
        else:
            sig = sigma
        records += evaluate_models(sample, mu, p, q, sig, models, "experiment",
                                   sweep_value=float(norm), trial=0, nodes=nodes)
    records.sort()
    return records
