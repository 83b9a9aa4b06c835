"""Two-class contextual stochastic block model: sampling, neighborhoods, diagnostics."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .numerics import RngStream

__all__ = [
    "CsbmParams",
    "CsbmSample",
    "EventCheck",
    "EventReport",
    "check_high_prob_events",
    "dump_sample_tsv",
    "neighborhood",
    "sample_csbm",
]

# Constant for the class-balance event; only the O(sqrt(n log n)) order is given.
E1_CONSTANT = 10.0


@dataclass(frozen=True)
class CsbmParams:
    n: int
    d: int
    p: float
    q: float
    mu: np.ndarray
    sigma: float

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        object.__setattr__(self, "mu", mu)
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if mu.shape != (self.d,):
            raise ValueError(f"mu must have dimension d={self.d}, got shape {mu.shape}")
        for name in ("p", "q"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @property
    def mu_norm(self) -> float:
        return float(np.linalg.norm(self.mu))


@dataclass(frozen=True, eq=False)
class CsbmSample:
    """A labelled graph with node features.

    The adjacency is held as CSR arrays (``indptr``, ``indices``) without the
    diagonal. Neighborhoods ``N_i`` always add ``i`` itself; the
    ``nbr_*`` properties give the self-inclusive CSR used by attention.
    """

    labels: np.ndarray
    features: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edge_list(cls, labels, features, edges) -> "CsbmSample":
        """Build from an undirected ``(m, 2)`` edge array (self-loops rejected)."""
        labels = np.asarray(labels, dtype=np.int64)
        features = np.asarray(features, dtype=float)
        n = labels.shape[0]
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ValueError("self-loops are not allowed in the adjacency")
        rows = np.concatenate([edges[:, 0], edges[:, 1]])
        cols = np.concatenate([edges[:, 1], edges[:, 0]])
        return cls._from_directed(n, rows, cols, labels, features)

    @classmethod
    def _from_directed(cls, n, rows, cols, labels, features) -> "CsbmSample":
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        if rows.size > 1:
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if np.any(dup):
                raise ValueError("duplicate edges in adjacency")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return cls(labels=labels, features=features, indptr=indptr, indices=cols.astype(np.int64))

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @cached_property
    def rows(self) -> np.ndarray:
        """Row index of every stored (directed) adjacency entry."""
        return np.repeat(np.arange(self.n), self.degrees)

    @cached_property
    def _self_csr(self):
        n = self.n
        rows = np.concatenate([self.rows, np.arange(n)])
        cols = np.concatenate([self.indices, np.arange(n)])
        order = np.lexsort((cols, rows))
        ptr = self.indptr + np.arange(n + 1)
        return ptr, rows[order], cols[order]

    @property
    def nbr_ptr(self) -> np.ndarray:
        return self._self_csr[0]

    @property
    def nbr_rows(self) -> np.ndarray:
        return self._self_csr[1]

    @property
    def nbr_cols(self) -> np.ndarray:
        return self._self_csr[2]

    @cached_property
    def neighbor_lists(self) -> list[np.ndarray]:
        ptr, _, cols = self._self_csr
        return [cols[ptr[i]:ptr[i + 1]] for i in range(self.n)]

    def edges(self) -> np.ndarray:
        """Undirected edges as an ``(m, 2)`` array with ``u < v``, sorted."""
        mask = self.rows < self.indices
        return np.stack([self.rows[mask], self.indices[mask]], axis=1)

    def adjacency_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int8)
        a[self.rows, self.indices] = 1
        return a

    def adjacency_sparse(self):
        import scipy.sparse as sp

        data = np.ones(self.indices.shape[0], dtype=float)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def with_features(self, features) -> "CsbmSample":
        return CsbmSample(self.labels, np.asarray(features, dtype=float), self.indptr, self.indices)


def sample_csbm(params: CsbmParams, rng: RngStream, balanced: bool = False) -> CsbmSample:
    """Draw labels, features and the adjacency, in that order, from ``rng``.

    Every unordered pair ``i < j`` gets its own uniform draw compared against
    ``p`` (same label) or ``q``, so two calls sharing a stream but differing
    only in ``q`` produce coupled graphs.
    """
    n, d = params.n, params.d
    if balanced:
        labels = np.zeros(n, dtype=np.int64)
        labels[rng.generator.permutation(n)[: n // 2]] = 1
    else:
        labels = (rng.uniform(n) < 0.5).astype(np.int64)
    g = rng.normal((n, d))
    features = np.outer(2 * labels - 1, params.mu) + params.sigma * g

    iu, ju = np.triu_indices(n, k=1)
    u = rng.uniform(iu.shape[0])
    same = labels[iu] == labels[ju]
    keep = u < np.where(same, params.p, params.q)
    iu, ju = iu[keep], ju[keep]
    rows = np.concatenate([iu, ju])
    cols = np.concatenate([ju, iu])
    return CsbmSample._from_directed(n, rows, cols, labels, features)


def neighborhood(sample: CsbmSample, i: int) -> np.ndarray:
    """``N_i``: adjacency neighbors of ``i`` plus ``i`` itself, sorted."""
    if not 0 <= i < sample.n:
        raise IndexError(f"node index {i} out of range for n={sample.n}")
    return sample.neighbor_lists[i]


@dataclass(frozen=True)
class EventCheck:
    holds: bool | None
    deviation: float | None
    bound: float | None
    note: str = ""


@dataclass(frozen=True)
class EventReport:
    e1_class_balance: EventCheck
    e2_degree_concentration: EventCheck
    e3_neighbor_split: EventCheck
    e4_feature_projection: EventCheck
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def all_hold(self) -> bool:
        """Intersection of the defined events; an undefined event is ignored."""
        checks = (self.e1_class_balance, self.e2_degree_concentration,
                  self.e3_neighbor_split, self.e4_feature_projection)
        return all(c.holds for c in checks if c.holds is not None)


def _relative_dev(observed, expected) -> float:
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(observed - expected) / expected
    rel = np.where(expected == 0, np.where(observed == 0, 0.0, np.inf), rel)
    return float(rel.max()) if rel.size else 0.0


def check_high_prob_events(sample: CsbmSample, params: CsbmParams) -> EventReport:
    """Evaluate the four concentration events on a realized sample.

    E1 uses the constant 10 in ``n/2 +- 10 sqrt(n log n)``; this constant is a
    chosen value. Neighbor counts in E3 are over adjacency neighbors (``A_ij``),
    consistent with the degree used in E2.
    """
    n = sample.n
    log_n = math.log(n)
    labels = sample.labels

    sizes = np.array([(labels == 0).sum(), (labels == 1).sum()], dtype=float)
    e1_dev = float(np.abs(sizes - n / 2).max() / math.sqrt(n * log_n))
    e1 = EventCheck(e1_dev <= E1_CONSTANT, e1_dev, E1_CONSTANT,
                    "max ||C_k| - n/2| / sqrt(n log n); constant 10 is a chosen value")

    band = 10.0 / math.sqrt(log_n)
    deg = sample.degrees.astype(float)
    exp_deg = n * (params.p + params.q) / 2.0
    e2_dev = _relative_dev(deg, np.full(n, exp_deg))
    e2 = EventCheck(e2_dev <= band, e2_dev, band, "max |D_ii - n(p+q)/2| / (n(p+q)/2)")

    nbr_lab = labels[sample.indices]
    in_c1 = np.bincount(sample.rows, weights=nbr_lab, minlength=n)
    in_c0 = deg - in_c1
    pq = params.p + params.q
    if pq > 0:
        eps = labels.astype(float)
        exp_c0 = deg * ((1 - eps) * params.p + eps * params.q) / pq
        exp_c1 = deg * ((1 - eps) * params.q + eps * params.p) / pq
        e3_dev = max(_relative_dev(in_c0, exp_c0), _relative_dev(in_c1, exp_c1))
    else:
        e3_dev = 0.0
    e3 = EventCheck(e3_dev <= band, e3_dev, band, "worst relative deviation of per-class neighbor counts")

    mu_norm = params.mu_norm
    if mu_norm == 0:
        e4 = EventCheck(None, None, 10.0, "undefined: ||mu|| = 0")
    else:
        w = params.mu / mu_norm
        proj = sample.features @ w
        expected = (2 * labels - 1) * mu_norm
        e4_dev = float(np.abs(proj - expected).max() / (params.sigma * math.sqrt(log_n)))
        e4 = EventCheck(e4_dev <= 10.0, e4_dev, 10.0, "max |w.X_i - E[w.X_i]| / (sigma sqrt(log n))")

    return EventReport(e1, e2, e3, e4, notes=("E1 constant 10 is chosen, not taken from the model",))


def dump_sample_tsv(sample: CsbmSample, directory) -> dict[str, str]:
    """Write ``features.tsv``, ``edges.tsv`` and ``labels.tsv`` into ``directory``."""
    os.makedirs(directory, exist_ok=True)
    paths = {k: os.path.join(directory, f"{k}.tsv") for k in ("features", "edges", "labels")}
    with open(paths["features"], "w", encoding="utf-8", newline="\n") as fh:
        for i, row in enumerate(sample.features):
            fh.write(str(i) + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")
    with open(paths["edges"], "w", encoding="utf-8", newline="\n") as fh:
        for u, v in sample.edges():
            fh.write(f"{u}\t{v}\n")
    with open(paths["labels"], "w", encoding="utf-8", newline="\n") as fh:
        for i, lab in enumerate(sample.labels):
            fh.write(f"{i}\t{int(lab)}\n")
    return paths
