"""Deterministic random streams, Gaussian sampling and the standard normal CDF."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NormalTail",
    "RngStream",
    "normal_tail",
    "sample_gaussian_vector",
    "std_normal_cdf",
    "std_normal_sf",
]

_MASK64 = (1 << 64) - 1


class RngStream:
    """Reproducible random stream addressed by ``(seed, stream_id)``.

    The underlying bit generator is Philox (counter based) keyed through a
    ``SeedSequence`` whose spawn key is the stream id, so trial ``t`` of a
    sweep sees the same numbers no matter which worker runs it or in what
    order.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if not (0 <= seed <= _MASK64) or not (0 <= stream_id <= _MASK64):
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.Philox(ss))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def normal(self, size=None) -> np.ndarray:
        return self._gen.standard_normal(size)

    def uniform(self, size=None) -> np.ndarray:
        return self._gen.random(size)


@dataclass(frozen=True)
class NormalTail:
    """``phi`` = Φ(x) and its complement ``phi_c`` = 1 - Φ(x)."""

    phi: float
    phi_c: float


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via ``erfc`` (absolute error well below 1e-7)."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"std_normal_cdf needs a finite argument, got {x!r}")
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def std_normal_sf(x: float) -> float:
    """Φc(x) = 1 - Φ(x), written so that Φ(x) + Φc(x) == 1 as computed."""
    return 1.0 - std_normal_cdf(x)


def normal_tail(x: float) -> NormalTail:
    phi = std_normal_cdf(x)
    return NormalTail(phi=phi, phi_c=1.0 - phi)


def sample_gaussian_vector(mean, sigma: float, rng: RngStream) -> np.ndarray:
    """Draw ``mean + sigma * g`` with ``g`` standard normal, coordinatewise."""
    mean = np.asarray(mean, dtype=float)
    if mean.ndim != 1 or mean.size < 1:
        raise ValueError("mean must be a non-empty vector")
    if not sigma >= 0:
        raise ValueError(f"sigma must be non-negative, got {sigma!r}")
    g = rng.normal(mean.shape)
    if sigma == 0:
        return mean.copy()
    return mean + sigma * g
