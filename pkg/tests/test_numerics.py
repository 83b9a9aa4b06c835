import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from gatcsbm.numerics import (
    RngStream,
    normal_tail,
    sample_gaussian_vector,
    std_normal_cdf,
    std_normal_sf,
)


def _cdf_oracle(x):
    # independent quadrature of the Gaussian density
    dens = lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi)
    if x >= 0:
        return 0.5 + integrate.quad(dens, 0.0, x, epsabs=1e-14, epsrel=1e-14)[0]
    return integrate.quad(dens, -math.inf, x, epsabs=1e-15, epsrel=1e-12)[0]


def test_cdf_at_zero():
    assert std_normal_cdf(0.0) == 0.5


def test_cdf_at_one_matches_quadrature():
    assert abs(std_normal_cdf(1.0) - _cdf_oracle(1.0)) < 1e-10
    assert abs(std_normal_cdf(1.0) - 0.8413447) < 1e-6


@pytest.mark.parametrize("x", [-6.0, -2.5, -0.3, 0.7, 1.96, 4.0])
def test_cdf_matches_quadrature_on_grid(x):
    assert abs(std_normal_cdf(x) - _cdf_oracle(x)) < 1e-10


def test_cdf_monotone_and_symmetric_on_dense_grid():
    xs = np.linspace(-8, 8, 10_000)
    vals = np.array([std_normal_cdf(x) for x in xs])
    assert np.all(np.diff(vals) >= 0)
    sym = np.array([std_normal_cdf(x) + std_normal_cdf(-x) for x in xs])
    assert np.max(np.abs(sym - 1.0)) <= 1e-12


@given(st.floats(-30, 30, allow_nan=False))
def test_cdf_symmetry_property(x):
    assert abs(std_normal_cdf(x) + std_normal_cdf(-x) - 1.0) <= 1e-12


def test_cdf_rejects_nan():
    with pytest.raises(ValueError):
        std_normal_cdf(float("nan"))


def test_tail_pair():
    t = normal_tail(1.0)
    assert abs(t.phi + t.phi_c - 1.0) < 1e-15
    assert abs(t.phi_c - std_normal_sf(1.0)) < 1e-15
    assert abs(std_normal_sf(1.0) - 0.15865525393145707) < 1e-12


def test_sigma_zero_returns_mean_exactly():
    mean = np.array([0.1, -2.0, 3.5])
    out = sample_gaussian_vector(mean, 0.0, RngStream(1))
    assert np.array_equal(out, mean)


def test_negative_sigma_rejected():
    with pytest.raises(ValueError):
        sample_gaussian_vector(np.zeros(2), -1.0, RngStream(1))


def test_gaussian_mean_within_clt_bound():
    mean = np.array([1.0, -0.5, 0.0])
    sigma, m = 2.0, 100_000
    rng = RngStream(3)
    draws = np.array([sample_gaussian_vector(mean, sigma, rng) for _ in range(m)])
    assert np.all(np.abs(draws.mean(axis=0) - mean) <= 4 * sigma / math.sqrt(m))


def test_gaussian_vector_repeatable():
    a, b = RngStream(5, 2), RngStream(5, 2)
    seq_a = [sample_gaussian_vector(np.zeros(4), 1.0, a) for _ in range(3)]
    seq_b = [sample_gaussian_vector(np.zeros(4), 1.0, b) for _ in range(3)]
    for x, y in zip(seq_a, seq_b):
        assert x.tobytes() == y.tobytes()


def test_streams_differ_by_id_and_seed():
    base = RngStream(5, 0).uniform(8)
    assert not np.array_equal(base, RngStream(5, 1).uniform(8))
    assert not np.array_equal(base, RngStream(6, 0).uniform(8))


@given(st.integers(0, 2**64 - 1), st.integers(0, 1000))
def test_stream_bytes_reproducible(seed, sid):
    assert RngStream(seed, sid).uniform(16).tobytes() == RngStream(seed, sid).uniform(16).tobytes()


def test_stream_rejects_negative_seed():
    with pytest.raises(ValueError):
        RngStream(-1)
