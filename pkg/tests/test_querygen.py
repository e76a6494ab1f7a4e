import math

import numpy as np
import pytest

from online_bisection.errors import DegenerateInputError
from online_bisection.geometry import Basis, cos_angle
from online_bisection.learner import angle_threshold
from online_bisection.querygen import (
    QueryDistribution, estimate_p, make_subspace, r_from_p, sample_queries, sample_query,
    within_angle_fractions,
)


@pytest.mark.parametrize("D,d", [(4, 2), (5, 5), (1, 1), (64, 3), (10, 1)])
def test_make_subspace(D, d, rng):
    basis = make_subspace(D, d, rng)
    assert isinstance(basis, Basis) and basis.d == d and basis.D == D
    assert np.all(basis.vectors >= 0)
    support = basis.vectors > 0
    assert np.all(support.sum(axis=0) <= 1)        # disjoint blocks
    if d == D:
        np.testing.assert_array_equal(np.sort(basis.vectors, axis=1)[:, -1], np.ones(D))


def in_span_residual(qs, basis):
    coeffs = qs @ basis.vectors.T
    return np.max(np.linalg.norm(qs - coeffs @ basis.vectors, axis=1))


@pytest.mark.parametrize("kind", ["basis_mixture", "uniform_coeff"])
@pytest.mark.parametrize("D,d", [(4, 2), (12, 3), (3, 1)])
def test_query_validity_sweep(kind, D, d, rng):
    dist = QueryDistribution(make_subspace(D, d, rng), kind=kind, scale_range=(0.1, 1.0))
    qs = sample_queries(dist, 100_000, rng)
    assert qs.min() >= 0.0 and qs.max() <= 1.0
    assert np.all(np.linalg.norm(qs, axis=1) > 0)
    assert in_span_residual(qs, dist.subspace) <= 1e-10


def test_pure_basis_queries(rng):
    basis = make_subspace(6, 3, rng)
    dist = QueryDistribution(basis, mixture_weight=1.0, jitter_angle=0.0)
    for _ in range(50):
        q = sample_query(dist, rng)
        assert max(cos_angle(q, e) for e in basis.vectors) == pytest.approx(1.0, abs=1e-15)


def test_mixture_fraction_near_basis(rng):
    basis = make_subspace(4, 2, rng)
    phi = angle_threshold(2)
    dist = QueryDistribution(basis, mixture_weight=0.5)
    qs = sample_queries(dist, 100_000, rng)
    qn = qs / np.linalg.norm(qs, axis=1, keepdims=True)
    near = np.any(np.arccos(np.clip(qn @ basis.vectors.T, -1, 1)) <= phi, axis=1)
    # the uniform half lands within phi of one of the two axes with probability tan(phi)
    expected = 0.5 + 0.5 * math.tan(phi)
    assert abs(near.mean() - expected) <= 0.01


def test_estimate_p_symmetric_basis(rng):
    dist = QueryDistribution(make_subspace(4, 2, rng), mixture_weight=1.0, jitter_angle=0.0)
    fr = within_angle_fractions(sample_queries(dist, 10_000, rng), dist.subspace, 1e-6)
    assert np.all(np.abs(fr - 0.5) <= 0.02)
    assert abs(estimate_p(dist, 1e-6, 10_000, rng) - 0.5) <= 0.02


def test_estimate_p_everything_within_pi(rng):
    dist = QueryDistribution(make_subspace(5, 3, rng), kind="uniform_coeff")
    assert estimate_p(dist, math.pi, 1000, rng) == 1.0


def test_estimate_p_uniform_is_tiny(rng):
    dist = QueryDistribution(make_subspace(8, 4, rng), kind="uniform_coeff")
    assert estimate_p(dist, angle_threshold(4), 20_000, rng) < 0.001


def test_mixture_lower_bound_on_p(rng):
    d, w, n = 3, 0.6, 20_000
    dist = QueryDistribution(make_subspace(9, d, rng), mixture_weight=w)
    p = estimate_p(dist, angle_threshold(d), n, rng)
    sigma = math.sqrt((w / d) * (1 - w / d) / n)
    assert p >= w / d - 3 * sigma


def test_normalizing_keeps_best_direction(rng):
    basis = make_subspace(6, 3, rng)
    qs = sample_queries(QueryDistribution(basis, kind="uniform_coeff"), 1000, rng)
    raw = np.argmax(qs @ basis.vectors.T, axis=1)
    normed = np.argmax((qs / np.linalg.norm(qs, axis=1, keepdims=True)) @ basis.vectors.T, axis=1)
    np.testing.assert_array_equal(raw, normed)


def test_r_from_p():
    assert r_from_p(1.0) == 2.0
    assert r_from_p(0.5) == 8.0
    assert r_from_p(0.125) == 128.0
    with pytest.raises(DegenerateInputError):
        r_from_p(0.0)
