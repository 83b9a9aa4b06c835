"""Reference classifiers: Bayes node/edge rules, spectral recovery, sign thresholding."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .attention import ConvolutionOutput

__all__ = [
    "ConvergenceError",
    "EdgePairFeature",
    "bayes_edge_classify",
    "bayes_edge_classify_projections",
    "bayes_edge_log_odds",
    "bayes_node_classify",
    "logcosh",
    "sign_decision",
    "spectral_node_classify",
]


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def logcosh(z):
    """log cosh(z) = |z| + log((1 + exp(-2|z|)) / 2), safe for large |z|."""
    a = np.abs(np.asarray(z, dtype=float))
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def bayes_node_classify(x, mu):
    """1 if mu.x > 0 else 0; accepts a single vector or an (n, d) matrix."""
    return (np.asarray(x, dtype=float) @ np.asarray(mu, dtype=float) > 0).astype(np.int64)


@dataclass(frozen=True)
class EdgePairFeature:
    """Concatenated pair features ``[X_i; X_j]`` with the two reference directions."""

    x: np.ndarray
    mu_prime: np.ndarray
    nu_prime: np.ndarray

    @classmethod
    def from_nodes(cls, xi, xj, mu) -> "EdgePairFeature":
        xi, xj, mu = (np.asarray(v, dtype=float) for v in (xi, xj, mu))
        return cls(np.concatenate([xi, xj]), np.concatenate([mu, mu]), np.concatenate([mu, -mu]))


def _log_prob(v: float) -> float:
    return math.log(v) if v > 0 else -math.inf


def bayes_edge_log_odds(t_sum, t_diff, sigma: float, p: float, q: float):
    """``log(p cosh(t_sum/s^2)) - log(q cosh(t_diff/s^2))``; > 0 means intra."""
    if p == 0 and q == 0:
        raise ValueError("p and q cannot both be zero")
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    s2 = sigma * sigma
    return (_log_prob(p) + logcosh(np.asarray(t_sum) / s2)) - (_log_prob(q) + logcosh(np.asarray(t_diff) / s2))


def bayes_edge_classify(pair: EdgePairFeature, sigma: float, p: float, q: float) -> int:
    """0 (inter) when p cosh(x.mu'/s^2) <= q cosh(x.nu'/s^2), else 1 (intra)."""
    odds = bayes_edge_log_odds(pair.x @ pair.mu_prime, pair.x @ pair.nu_prime, sigma, p, q)
    return int(odds > 0)


def bayes_edge_classify_projections(ti, tj, sigma: float, p: float, q: float) -> np.ndarray:
    """Vectorized rule from ``t = X @ mu`` at both endpoints."""
    ti = np.asarray(ti, dtype=float)
    tj = np.asarray(tj, dtype=float)
    return (bayes_edge_log_odds(ti + tj, ti - tj, sigma, p, q) > 0).astype(np.int64)


def _as_sparse(adjacency):
    if hasattr(adjacency, "adjacency_sparse"):
        return adjacency.adjacency_sparse()
    if sp.issparse(adjacency):
        return sp.csr_matrix(adjacency, dtype=float)
    return sp.csr_matrix(np.asarray(adjacency, dtype=float))


def _power_iterate(matvec, v0, tol, max_iter):
    v = v0 / np.linalg.norm(v0)
    lam, res = 0.0, math.inf
    for _ in range(max_iter):
        av = matvec(v)
        lam = float(v @ av)
        res = float(np.linalg.norm(av - lam * v))
        if res <= tol * max(abs(lam), 1.0):
            return lam, v
        norm = np.linalg.norm(av)
        if norm == 0:
            raise ConvergenceError("power iteration collapsed to zero", res)
        v = av / norm
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations", res)


def spectral_node_classify(adjacency, tol: float = 1e-8, max_iter: int = 10_000) -> np.ndarray:
    """Signs of the second eigenvector (by magnitude) of the adjacency matrix.

    Runs power iteration for the leading eigenpair, deflates it, and power
    iterates again. The labelling is only defined up to a global flip.
    """
    a = _as_sparse(adjacency)
    n = a.shape[0]
    lam1, v1 = _power_iterate(a.dot, np.ones(n), tol, max_iter)

    def deflated(x):
        return a.dot(x) - lam1 * v1 * (v1 @ x)

    # deterministic start that does not depend on node order beyond its values
    start = np.cos(np.arange(n) * 1.618033988749895 + 0.5)
    start = start - v1 * (v1 @ start)
    _, v2 = _power_iterate(deflated, start, tol, max_iter)
    return (v2 > 0).astype(np.int64)


def sign_decision(h) -> np.ndarray:
    """1 where h'_i > 0, else 0 (zero maps to 0, matching the Bayes tie rule)."""
    arr = h.h_prime if isinstance(h, ConvolutionOutput) else h
    return (np.asarray(arr, dtype=float) > 0).astype(np.int64)
