"""Tests for random streams and the interarrival distribution families."""

import math

import numpy as np
import pytest
from scipy import integrate

from bridge_lab.rng_dist import (
    DistributionSpec,
    derive_stream_id,
    dist_moments,
    make_stream,
    sample_gaussian,
    sample_positive,
)


def test_same_key_same_sequence():
    a = make_stream(42, 0).uniforms(1000)
    b = make_stream(42, 0).uniforms(1000)
    np.testing.assert_array_equal(a, b)


def test_distinct_stream_ids_differ():
    a = make_stream(42, 0).uniforms(1000)
    b = make_stream(42, 1).uniforms(1000)
    assert not np.array_equal(a, b)


def test_stream_state_is_per_stream():
    # Interleaving draws across streams (as a worker pool would) must not
    # change what each stream produces.
    solo = [make_stream(9, i).uniforms(64) for i in range(8)]
    streams = [make_stream(9, i) for i in range(8)]
    chunks = {i: [] for i in range(8)}
    for _ in range(4):
        for i in (3, 0, 7, 5, 1, 6, 2, 4):
            chunks[i].append(streams[i].uniforms(16))
    for i in range(8):
        np.testing.assert_array_equal(solo[i], np.concatenate(chunks[i]))


def test_derive_stream_id_stable():
    # Frozen values (low 64 bits of sha256sum output): the derivation is
    # part of the reproducibility contract, so a silent change would alter
    # every archived report.
    assert derive_stream_id("demo:0") == 0x3CC86650C36C0A14
    assert derive_stream_id("demo:1") == 0x6DF0503B8569E870
    assert derive_stream_id("demo:0") != derive_stream_id("demo:00")


def test_uniforms_open_interval():
    u = make_stream(1, 1).uniforms(200000)
    assert u.min() > 0.0
    assert u.max() < 1.0


def test_deterministic_always_value():
    d = DistributionSpec("deterministic", value=1.0)
    s = make_stream(0, 0)
    assert sample_positive(s, d) == 1.0
    assert np.all(sample_positive(s, d, 500) == 1.0)


def test_exponential_mean_lln():
    d = DistributionSpec("exponential", rate=1.0)
    x = sample_positive(make_stream(2024, 5), d, 1_000_000)
    assert abs(x.mean() - 1.0) < 0.005


def test_two_point_support():
    d = DistributionSpec("two-point-lattice", low=1.0, high=2.0)
    x = sample_positive(make_stream(3, 3), d, 10000)
    assert set(np.unique(x)) == {1.0, 2.0}
    # default split is fair
    assert abs((x == 1.0).mean() - 0.5) < 0.02


def test_moments_closed_forms():
    assert dist_moments(DistributionSpec("exponential", rate=1.0)) == (1.0, 1.0)
    mu, var = dist_moments(DistributionSpec("uniform", low=0.0, high=2.0))
    assert mu == 1.0
    assert var == pytest.approx(1.0 / 3.0)
    assert dist_moments(DistributionSpec("deterministic", value=3.5)) == (3.5, 0.0)
    mu, var = dist_moments(DistributionSpec("two-point-lattice", low=1.0, high=2.0))
    assert (mu, var) == (1.5, 0.25)


@pytest.mark.parametrize(
    "dist",
    [
        DistributionSpec("gamma", shape=2.0, scale=0.5),
        DistributionSpec("pareto", shape=3.0, scale=1.0),
        DistributionSpec("pareto", shape=2.5, scale=2.0),
    ],
)
def test_moments_match_quadrature(dist):
    # Independent check of the closed forms against numerical integration
    # of the density.
    if dist.kind == "gamma":
        k, th = dist.shape, dist.scale

        def pdf(x):
            return x ** (k - 1) * math.exp(-x / th) / (math.gamma(k) * th**k)

        lo, hi = 0.0, np.inf
    else:
        a, xm = dist.shape, dist.scale

        def pdf(x):
            return a * xm**a / x ** (a + 1)

        lo, hi = xm, np.inf
    m1 = integrate.quad(lambda x: x * pdf(x), lo, hi)[0]
    m2 = integrate.quad(lambda x: x * x * pdf(x), lo, hi)[0]
    mu, var = dist_moments(dist)
    assert mu == pytest.approx(m1, rel=1e-8)
    assert var == pytest.approx(m2 - m1 * m1, rel=1e-7)


def test_empirical_moments_all_families():
    # Moment fidelity: 1e6 draws per family, mean and variance within five
    # standard errors of the exact values.
    specs = [
        DistributionSpec("exponential", rate=2.0),
        DistributionSpec("uniform", low=0.5, high=1.5),
        DistributionSpec("two-point-lattice", low=1.0, high=3.0, p_low=0.25),
        DistributionSpec("gamma", shape=3.0, scale=1.0),
        DistributionSpec("pareto", shape=4.0, scale=1.0),
    ]
    n = 1_000_000
    for i, d in enumerate(specs):
        x = sample_positive(make_stream(11, i), d, n)
        assert x.min() > 0.0
        mu, var = dist_moments(d)
        se_mean = math.sqrt(var / n)
        assert abs(x.mean() - mu) < 5 * se_mean, d.kind
        c = x - x.mean()
        se_var = math.sqrt(((c**4).mean() - (c**2).mean() ** 2) / n)
        assert abs(x.var() - var) < 5 * se_var, d.kind


def test_gaussian_moments():
    x = sample_gaussian(make_stream(7, 0), 1_000_000)
    assert abs(x.mean()) < 0.004
    assert abs(x.var() - 1.0) < 0.01
    assert abs((x**3).mean()) < 0.01


def test_gaussian_same_state_same_draw():
    assert sample_gaussian(make_stream(5, 5)) == sample_gaussian(make_stream(5, 5))


def test_split_labels_independent():
    s = make_stream(13, 100)
    a = s.split("driver")
    b = s.split("cycles")
    assert a.seed == 13 and b.seed == 13
    assert a.stream_id != b.stream_id
    assert not np.array_equal(a.uniforms(100), b.uniforms(100))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="exponential", rate=0.0),
        dict(kind="exponential"),
        dict(kind="uniform", low=-1.0, high=1.0),
        dict(kind="uniform", low=2.0, high=2.0),
        dict(kind="deterministic", value=0.0),
        dict(kind="two-point-lattice", low=2.0, high=1.0),
        dict(kind="two-point-lattice", low=1.0, high=2.0, p_low=1.0),
        dict(kind="gamma", shape=-1.0, scale=1.0),
        dict(kind="pareto", shape=2.0, scale=1.0),
        dict(kind="pareto", shape=1.5, scale=1.0),
        dict(kind="cauchy"),
    ],
)
def test_inadmissible_parameters_rejected(kwargs):
    with pytest.raises(ValueError):
        DistributionSpec(**kwargs)


def test_bad_stream_key_rejected():
    with pytest.raises(ValueError):
        make_stream(-1, 0)
    with pytest.raises(ValueError):
        make_stream(0, 1 << 64)
    with pytest.raises(TypeError):
        make_stream(1.5, 0)
