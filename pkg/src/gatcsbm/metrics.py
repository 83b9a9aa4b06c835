"""Edge/node accuracies, attention-coefficient statistics and regime labels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attention import AttentionField
from .csbm import CsbmSample
from .numerics import std_normal_sf

__all__ = [
    "EdgeMetrics",
    "GammaStats",
    "RegimeLabel",
    "edge_metrics",
    "edge_metrics_from_predictions",
    "gamma_stats",
    "hard_regime_floor",
    "hard_regime_floor_check",
    "node_accuracy",
    "regime_label",
    "uniform_band_fraction",
]

ALMOST_PERFECT_KAPPA = 3.0


@dataclass(frozen=True)
class EdgeMetrics:
    intra_accuracy: float
    inter_accuracy: float
    overall_accuracy: float
    inter_misclassified_fraction: float
    n_intra: int = 0
    n_inter: int = 0

    @classmethod
    def empty(cls) -> "EdgeMetrics":
        nan = math.nan
        return cls(nan, nan, nan, nan, 0, 0)

    @property
    def is_empty(self) -> bool:
        return self.n_intra + self.n_inter == 0


def edge_metrics_from_predictions(is_intra, predicted_intra, correct_mask=None) -> EdgeMetrics:
    """Accuracies from truth/prediction arrays; ``correct_mask`` can veto predictions."""
    is_intra = np.asarray(is_intra, dtype=bool)
    predicted_intra = np.asarray(predicted_intra, dtype=bool)
    if is_intra.size == 0:
        return EdgeMetrics.empty()
    correct = predicted_intra == is_intra
    if correct_mask is not None:
        correct &= np.asarray(correct_mask, dtype=bool)
    n_intra = int(is_intra.sum())
    n_inter = int(is_intra.size - n_intra)
    intra_acc = float(correct[is_intra].mean()) if n_intra else math.nan
    inter_acc = float(correct[~is_intra].mean()) if n_inter else math.nan
    return EdgeMetrics(intra_acc, inter_acc, float(correct.mean()),
                       1.0 - inter_acc if n_inter else math.nan, n_intra, n_inter)


def _undirected_pairs(sample: CsbmSample, nodes=None):
    rows, cols = sample.rows, sample.indices
    mask = rows < cols
    if nodes is not None:
        mask &= np.isin(rows, nodes) | np.isin(cols, nodes)
    return rows[mask], cols[mask]


def edge_metrics(sample: CsbmSample, scorer, orientation: int = 1, nodes=None) -> EdgeMetrics:
    """Classify every edge ``i < j`` by the sign of ``orientation * score(i, j)``.

    A zero score is wrong for both classes. ``nodes`` optionally restricts to
    edges touching the given node set.
    """
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    i, j = _undirected_pairs(sample, nodes)
    if i.size == 0:
        return EdgeMetrics.empty()
    s = orientation * np.asarray(scorer(sample, i, j), dtype=float)
    is_intra = sample.labels[i] == sample.labels[j]
    return edge_metrics_from_predictions(is_intra, s > 0, correct_mask=s != 0)


def node_accuracy(pred, truth, up_to_flip: bool = False) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        return math.nan
    acc = float(np.mean(pred == truth))
    return max(acc, 1.0 - acc) if up_to_flip else acc


@dataclass(frozen=True)
class GammaStats:
    intra_mean: float | None
    intra_std: float | None
    inter_mean: float | None
    inter_std: float | None
    ref_intra: float | None
    ref_inter: float | None
    ref_uniform_mean: float | None
    ref_uniform_std: float | None


def _moments(x: np.ndarray):
    if x.size == 0:
        return None, None
    return float(x.mean()), float(x.std())


def gamma_stats(sample: CsbmSample, field: AttentionField, p: float, q: float, nodes=None) -> GammaStats:
    """Moments of gamma over off-self pairs, split by class agreement.

    References are 2/(np), 2/(nq) and the moments of 1/|N_i| over the same pairs.
    """
    off = field.rows != field.cols
    if nodes is not None:
        off &= np.isin(field.rows, nodes)
    rows, cols, gamma = field.rows[off], field.cols[off], field.gamma[off]
    same = sample.labels[rows] == sample.labels[cols]
    n = sample.n
    uni = 1.0 / field.sizes[rows]
    im, isd = _moments(gamma[same])
    em, esd = _moments(gamma[~same])
    um, usd = _moments(uni)
    return GammaStats(im, isd, em, esd,
                      2.0 / (n * p) if p > 0 else None,
                      2.0 / (n * q) if q > 0 else None,
                      um, usd)


def uniform_band_fraction(sample: CsbmSample, field: AttentionField,
                          lo: float = 0.25, hi: float = 4.0, per_node: float = 0.9) -> float:
    """Fraction of nodes whose coefficients look uniform.

    A node qualifies when, separately within ``N_i ∩ C0`` and ``N_i ∩ C1``,
    at least ``per_node`` of its neighbors have ``gamma_ij |N_i|`` in ``[lo, hi]``.
    """
    size = field.sizes[field.rows]
    ok = (field.gamma * size >= lo) & (field.gamma * size <= hi)
    n = sample.n
    good = np.ones(n, dtype=bool)
    nbr_class = sample.labels[field.cols]
    for c in (0, 1):
        m = nbr_class == c
        tot = np.bincount(field.rows[m], minlength=n)
        hit = np.bincount(field.rows[m], weights=ok[m], minlength=n)
        good &= (tot == 0) | (hit >= per_node * tot)
    return float(good.mean())


def hard_regime_floor(kappa: float) -> float:
    return 2.0 * std_normal_sf(kappa) ** 2


def hard_regime_floor_check(kappa: float, em: EdgeMetrics, slack: float) -> bool:
    if slack < 0:
        raise ValueError("slack must be >= 0")
    return em.inter_misclassified_fraction >= hard_regime_floor(kappa) - slack


@dataclass(frozen=True)
class RegimeLabel:
    kappa: float
    regime: str


def regime_label(kappa: float, n: int, almost_threshold: float = ALMOST_PERFECT_KAPPA) -> RegimeLabel:
    """perfect if kappa >= sqrt(2 log n); almost-perfect above a finite-n proxy; else partial."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if kappa >= math.sqrt(2.0 * math.log(n)):
        return RegimeLabel(kappa, "perfect")
    if kappa >= almost_threshold:
        return RegimeLabel(kappa, "almost-perfect")
    return RegimeLabel(kappa, "partial")
