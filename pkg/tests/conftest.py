import numpy as np
import pytest

from gatcsbm.csbm import CsbmParams, CsbmSample, sample_csbm
from gatcsbm.numerics import RngStream


def make_sample(n=200, d=4, p=0.5, q=0.1, kappa=1.0, sigma=0.1, seed=0, stream=0, balanced=False):
    mu = np.full(d, kappa * sigma / np.sqrt(d))
    params = CsbmParams(n, d, p, q, mu, sigma)
    return params, sample_csbm(params, RngStream(seed, stream), balanced=balanced)


def toy_sample(labels, features, edges):
    return CsbmSample.from_edge_list(np.asarray(labels), np.asarray(features, dtype=float),
                                     np.asarray(edges, dtype=np.int64).reshape(-1, 2))


@pytest.fixture
def small():
    return make_sample()


class FixedScorerBase:
    """Adapter turning a plain function into a scorer."""

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, sample, rows, cols):
        return self.fn(sample, rows, cols)
