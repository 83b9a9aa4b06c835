"""Attention scores, softmax coefficients over N_i, and (attention) graph convolution.

Scorers are callables ``scorer(sample, rows, cols) -> scores`` evaluated on
arrays of ordered node pairs; this keeps every model vectorized over the
self-inclusive neighbor CSR of a :class:`~gatcsbm.csbm.CsbmSample`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .csbm import CsbmSample

__all__ = [
    "AttentionField",
    "ConvolutionOutput",
    "GatHeadParams",
    "GatHeadScorer",
    "IdealizedPsiParams",
    "IdealizedScorer",
    "MlpPsiParams",
    "MlpPsiScorer",
    "UniformScorer",
    "attention_coefficients",
    "attention_convolution",
    "attention_field",
    "gat_ansatz_heads",
    "gat_single_layer_score",
    "idealized_score",
    "leaky_relu",
    "mlp_attention_score",
    "mlp_psi_piecewise",
    "mlp_psi_raw",
    "multi_head_convolution",
    "psi_on_expected_means",
    "r_scale",
    "sign_pm",
    "simple_graph_convolution",
    "unit_direction",
]

DEFAULT_LEAKY_SLOPE = 0.2

# rows of S and entries of r / R in the two-layer attention MLP
_S = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
_R_SIGNS = np.array([1.0, 1.0, -1.0, -1.0])


def sign_pm(x: float) -> float:
    """sign with sign(0) = +1."""
    return 1.0 if x >= 0 else -1.0


def leaky_relu(x, slope: float = DEFAULT_LEAKY_SLOPE):
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, x, slope * x)


def unit_direction(mu) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    norm = float(np.linalg.norm(mu))
    if norm == 0:
        raise ValueError("mu must be nonzero to define a unit direction")
    return mu / norm


def r_scale(policy: str, *, n: int, sigma: float, mu_norm: float) -> float:
    """Scale R of the attention MLP for a named policy.

    ``experiment``: R = 1. ``theorem``: R = 1/sqrt(sigma sqrt(log n) ||mu||), which
    sits between the two asymptotic limits on 1/R. ``theorem13``: R = n log^2 n / sigma.
    """
    if policy == "experiment":
        return 1.0
    if policy == "theorem":
        if mu_norm <= 0:
            raise ValueError("theorem R policy needs ||mu|| > 0")
        return 1.0 / math.sqrt(sigma * math.sqrt(math.log(n)) * mu_norm)
    if policy == "theorem13":
        return n * math.log(n) ** 2 / sigma
    raise ValueError(f"unknown R policy {policy!r}")


# --------------------------------------------------------------------------- MLP

@dataclass(frozen=True)
class MlpPsiParams:
    w_tilde: np.ndarray
    scale_r: float = 1.0
    leaky_slope: float = DEFAULT_LEAKY_SLOPE
    sign_flip: bool = False

    def __post_init__(self):
        w = np.asarray(self.w_tilde, dtype=float).reshape(-1)
        object.__setattr__(self, "w_tilde", w)
        if abs(float(np.linalg.norm(w)) - 1.0) > 1e-9:
            raise ValueError("w_tilde must be a unit vector")
        if not self.scale_r > 0:
            raise ValueError("scale_r must be > 0")
        if not 0.0 <= self.leaky_slope < 1.0:
            raise ValueError("leaky_slope must lie in [0, 1)")

    @classmethod
    def from_mu(cls, mu, scale_r=1.0, leaky_slope=DEFAULT_LEAKY_SLOPE, sign_flip=False):
        return cls(unit_direction(mu), scale_r, leaky_slope, sign_flip)

    @classmethod
    def signed(cls, mu, p, q, scale_r=1.0, leaky_slope=DEFAULT_LEAKY_SLOPE):
        """Ψ' : Ψ when p >= q and -Ψ when p < q."""
        return cls.from_mu(mu, scale_r, leaky_slope, sign_flip=p < q)


def mlp_psi_piecewise(si, sj, scale_r: float, slope: float):
    """Three-branch closed form of the attention MLP on projections."""
    si = np.asarray(si, dtype=float)
    sj = np.asarray(sj, dtype=float)
    c = 2.0 * scale_r * (1.0 - slope)
    a = np.abs(si)
    return np.where(sj <= -a, -c * si, np.where(sj >= a, c * si, c * np.sign(si) * sj))


def mlp_psi_raw(si, sj, scale_r: float, slope: float):
    """``r^T LeakyRelu(S [si, sj])`` evaluated literally."""
    z = np.stack(np.broadcast_arrays(np.asarray(si, float), np.asarray(sj, float)), axis=-1)
    hidden = leaky_relu(z @ _S.T, slope)
    return hidden @ (scale_r * _R_SIGNS)


def mlp_attention_score(xi, xj, params: MlpPsiParams) -> float:
    si = float(np.dot(params.w_tilde, xi))
    sj = float(np.dot(params.w_tilde, xj))
    val = float(mlp_psi_piecewise(si, sj, params.scale_r, params.leaky_slope))
    return -val if params.sign_flip else val


def psi_on_expected_means(params: MlpPsiParams, mu, same_class: bool) -> float:
    """Score of the pair of class means: ``+-2R(1-beta)||mu||`` (sign_flip applied)."""
    mu = np.asarray(mu, dtype=float)
    if float(np.linalg.norm(mu)) == 0:
        raise ValueError("mu must be nonzero")
    return mlp_attention_score(mu, mu if same_class else -mu, params)


class MlpPsiScorer:
    def __init__(self, params: MlpPsiParams):
        self.params = params

    def __call__(self, sample: CsbmSample, rows, cols) -> np.ndarray:
        s = sample.features @ self.params.w_tilde
        out = mlp_psi_piecewise(s[rows], s[cols], self.params.scale_r, self.params.leaky_slope)
        return -out if self.params.sign_flip else out


# --------------------------------------------------------------------------- GAT

@dataclass(frozen=True)
class GatHeadParams:
    w: np.ndarray
    a: np.ndarray
    b: float
    leaky_slope: float = DEFAULT_LEAKY_SLOPE

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float).reshape(-1))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float).reshape(2))
        if not 0.0 <= self.leaky_slope < 1.0:
            raise ValueError("leaky_slope must lie in [0, 1)")


def gat_single_layer_score(xi, xj, head: GatHeadParams) -> float:
    lin = head.a[0] * float(np.dot(head.w, xi)) + head.a[1] * float(np.dot(head.w, xj)) + head.b
    return float(leaky_relu(lin, head.leaky_slope))


def gat_ansatz_heads(mu, leaky_slope: float = DEFAULT_LEAKY_SLOPE) -> tuple[GatHeadParams, GatHeadParams]:
    """Two heads keeping intra-class edges of C1 and of C0 respectively."""
    w = unit_direction(mu)
    a1 = np.array([1.0, 1.0]) / math.sqrt(2.0)
    b1 = -float(w @ np.asarray(mu, dtype=float)) / math.sqrt(2.0)
    return GatHeadParams(w, a1, b1, leaky_slope), GatHeadParams(w, -a1, -b1, leaky_slope)


class GatHeadScorer:
    def __init__(self, head: GatHeadParams):
        self.head = head

    def __call__(self, sample: CsbmSample, rows, cols) -> np.ndarray:
        s = sample.features @ self.head.w
        lin = self.head.a[0] * s[rows] + self.head.a[1] * s[cols] + self.head.b
        return leaky_relu(lin, self.head.leaky_slope)


# ----------------------------------------------------------------- idealized / uniform

@dataclass(frozen=True)
class IdealizedPsiParams:
    t: float
    p: float
    q: float
    labels: np.ndarray

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError("margin t must be >= 0")
        object.__setattr__(self, "labels", np.asarray(self.labels))


def idealized_score(i, j, params: IdealizedPsiParams):
    """``+sign(p-q) t`` on same-label pairs and ``-sign(p-q) t`` otherwise."""
    same = params.labels[i] == params.labels[j]
    val = sign_pm(params.p - params.q) * params.t
    return np.where(same, val, -val) if np.ndim(same) else (val if same else -val)


class IdealizedScorer:
    def __init__(self, params: IdealizedPsiParams):
        self.params = params

    def __call__(self, sample, rows, cols) -> np.ndarray:
        return np.asarray(idealized_score(rows, cols, self.params), dtype=float)


class UniformScorer:
    """Constant zero score: softmax gives 1/|N_i| on every neighbor."""

    def __call__(self, sample, rows, cols) -> np.ndarray:
        return np.zeros(np.shape(rows), dtype=float)


# ------------------------------------------------------------------ softmax / conv

@dataclass(frozen=True, eq=False)
class AttentionField:
    """Coefficients on the self-inclusive neighbor CSR of a sample.

    ``gamma[ptr[i]:ptr[i+1]]`` are the weights node ``i`` puts on
    ``cols[ptr[i]:ptr[i+1]]``.
    """

    ptr: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    gamma: np.ndarray

    def row(self, i: int) -> dict[int, float]:
        sl = slice(self.ptr[i], self.ptr[i + 1])
        return {int(j): float(g) for j, g in zip(self.cols[sl], self.gamma[sl])}

    def row_sums(self) -> np.ndarray:
        return np.add.reduceat(self.gamma, self.ptr[:-1])

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.ptr)


@dataclass(frozen=True)
class ConvolutionOutput:
    h_prime: np.ndarray


def _segment_softmax(scores: np.ndarray, ptr: np.ndarray) -> np.ndarray:
    starts = ptr[:-1]
    seg_max = np.maximum.reduceat(scores, starts)
    sizes = np.diff(ptr)
    ex = np.exp(scores - np.repeat(seg_max, sizes))
    denom = np.add.reduceat(ex, starts)
    return ex / np.repeat(denom, sizes)


def _checked_scores(scorer, sample, rows, cols) -> np.ndarray:
    scores = np.asarray(scorer(sample, rows, cols), dtype=float)
    bad = ~np.isfinite(scores)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise FloatingPointError(
            f"non-finite attention score {scores[k]!r} for pair ({int(rows[k])}, {int(cols[k])})")
    return scores


def attention_field(sample: CsbmSample, scorer) -> AttentionField:
    """Softmax of ``scorer`` over every ``N_i`` with per-node max subtraction."""
    ptr, rows, cols = sample.nbr_ptr, sample.nbr_rows, sample.nbr_cols
    scores = _checked_scores(scorer, sample, rows, cols)
    return AttentionField(ptr, rows, cols, _segment_softmax(scores, ptr))


def attention_coefficients(sample: CsbmSample, scorer, i: int) -> dict[int, float]:
    nbrs = sample.neighbor_lists[i]
    rows = np.full(nbrs.shape, i)
    scores = _checked_scores(scorer, sample, rows, nbrs)
    gamma = _segment_softmax(scores, np.array([0, nbrs.size]))
    return {int(j): float(g) for j, g in zip(nbrs, gamma)}


def attention_convolution(sample: CsbmSample, field: AttentionField, w) -> ConvolutionOutput:
    """``h'_i = sum_{j in N_i} gamma_ij w^T X_j`` (scalar output, identity activation)."""
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != sample.d:
        raise ValueError(f"w has dimension {w.shape[0]}, features have {sample.d}")
    s = sample.features @ w
    h = np.add.reduceat(field.gamma * s[field.cols], field.ptr[:-1])
    return ConvolutionOutput(h)


def multi_head_convolution(sample: CsbmSample, heads, w) -> ConvolutionOutput:
    heads = list(heads)
    if not heads:
        raise ValueError("multi-head convolution needs at least one head")
    outs = [attention_convolution(sample, attention_field(sample, h), w).h_prime for h in heads]
    return ConvolutionOutput(np.mean(outs, axis=0))


def simple_graph_convolution(sample: CsbmSample, w) -> ConvolutionOutput:
    return attention_convolution(sample, attention_field(sample, UniformScorer()), w)
