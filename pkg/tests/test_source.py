import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gridrecover.source import (
    GaussianSourceSpec,
    load_source,
    mismatch_covariance,
    read_matrix_csv,
    sample_source,
    synthetic_covariance,
    write_matrix_csv,
)


def test_synthetic_covariance_small_cases():
    np.testing.assert_array_equal(synthetic_covariance(1, 4.0, 0.5), [[4.0]])
    np.testing.assert_allclose(synthetic_covariance(2, 1.0, 0.9), [[1.0, 0.9], [0.9, 1.0]], rtol=0, atol=1e-15)


def test_synthetic_covariance_positive_definite():
    eig = np.linalg.eigvalsh(synthetic_covariance(50, 1.0, 0.9))
    assert eig[0] > 0


@given(n=st.integers(1, 40), variance=st.floats(0.01, 100), rho=st.floats(0.0, 0.99))
@settings(max_examples=60, deadline=None)
def test_synthetic_covariance_invariants(n, variance, rho):
    cov = synthetic_covariance(n, variance, rho)
    assert np.array_equal(cov, cov.T)
    assert np.trace(cov) / n == pytest.approx(variance)
    assert np.linalg.eigvalsh(cov)[0] > 0


@pytest.mark.parametrize("args", [(3, 1.0, 1.0), (3, 0.0, 0.5), (3, -1.0, 0.5), (0, 1.0, 0.5), (3, 1.0, -0.1)])
def test_synthetic_covariance_domain_errors(args):
    with pytest.raises(ValueError):
        synthetic_covariance(*args)


def test_spec_validation():
    with pytest.raises(ValueError):
        GaussianSourceSpec(np.zeros(3), np.eye(2))
    with pytest.raises(ValueError):
        GaussianSourceSpec(np.zeros(2), np.array([[1.0, 0.5], [0.4, 1.0]]))
    with pytest.raises(ValueError):
        GaussianSourceSpec(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_sample_zero_covariance_returns_mean(rng):
    spec = GaussianSourceSpec(np.full(6, 5.0), np.zeros((6, 6)))
    m = sample_source(spec, 4, rng)
    assert np.array_equal(m, np.full((6, 4), 5.0))


def test_sample_semidefinite_covariance():
    v = np.array([1.0, 2.0, 3.0])
    spec = GaussianSourceSpec(np.zeros(3), np.outer(v, v))
    m = sample_source(spec, 10, np.random.default_rng(1))
    # rank-one covariance: every column is a multiple of v
    assert np.linalg.matrix_rank(m, tol=1e-4) == 1


def test_sample_deterministic():
    spec = GaussianSourceSpec(np.zeros(5), synthetic_covariance(5, 2.0, 0.7))
    a = sample_source(spec, 7, np.random.default_rng(3))
    b = sample_source(spec, 7, np.random.default_rng(3))
    assert np.array_equal(a, b)


def test_sample_law_of_large_numbers():
    n, l = 100, 100_000
    spec = GaussianSourceSpec(np.zeros(n), np.eye(n))
    m = sample_source(spec, l, np.random.default_rng(11))
    cov = m @ m.T / l
    assert np.max(np.abs(cov - np.eye(n))) <= 0.05


def test_sample_mean_bound():
    n, l = 20, 100_000
    cov = synthetic_covariance(n, 3.0, 0.8)
    mu = np.linspace(-2, 2, n)
    m = sample_source(GaussianSourceSpec(mu, cov), l, np.random.default_rng(5))
    assert np.all(np.abs(m.mean(axis=1) - mu) <= 5 * np.sqrt(np.max(np.diag(cov)) / l))


def test_mismatch_unit_smr_matches_norm(rng):
    sigma = synthetic_covariance(30, 2.0, 0.9)
    out = mismatch_covariance(sigma, 1.0, rng)
    ratio = np.linalg.norm(out - sigma) / np.linalg.norm(sigma)
    assert ratio == pytest.approx(1.0, rel=1e-12)


def test_mismatch_vanishes_at_large_smr(rng):
    sigma = synthetic_covariance(30, 2.0, 0.9)
    out = mismatch_covariance(sigma, 1e12, rng)
    assert np.linalg.norm(out - sigma) / np.linalg.norm(sigma) <= 1e-11


def test_mismatch_squared_scale():
    sigma = synthetic_covariance(10, 3.0, 0.5)
    out = mismatch_covariance(sigma, 4.0, np.random.default_rng(0), mode="squared")
    h = np.random.default_rng(0).standard_normal((10, 10))
    delta = h @ h.T
    delta = 0.5 * (delta + delta.T)
    expected = sigma + 0.25 * np.linalg.norm(sigma) ** 2 / np.linalg.norm(delta) ** 2 * delta
    np.testing.assert_allclose(out, expected, rtol=1e-13)


@given(smr=st.floats(0.01, 1e6), seed=st.integers(0, 2**31), n=st.integers(1, 25))
@settings(max_examples=60, deadline=None)
def test_mismatch_symmetric_and_psd(smr, seed, n):
    sigma = synthetic_covariance(n, 1.5, 0.9)
    out = mismatch_covariance(sigma, smr, np.random.default_rng(seed))
    assert np.array_equal(out, out.T)
    assert np.linalg.eigvalsh(out)[0] >= np.linalg.eigvalsh(sigma)[0] - 1e-10


def test_mismatch_rejects_bad_input(rng):
    with pytest.raises(ValueError):
        mismatch_covariance(np.eye(3), 0.0, rng)
    with pytest.raises(ValueError):
        mismatch_covariance(np.eye(3), 1.0, rng, mode="bogus")


def test_csv_round_trip(tmp_path):
    cov = synthetic_covariance(4, 2.5, 0.3)
    write_matrix_csv(tmp_path / "cov.csv", cov)
    assert np.array_equal(read_matrix_csv(tmp_path / "cov.csv"), cov)
    write_matrix_csv(tmp_path / "mean.csv", np.arange(4.0))
    spec = load_source(tmp_path / "cov.csv", tmp_path / "mean.csv")
    assert np.array_equal(spec.mean, np.arange(4.0))
    assert np.array_equal(spec.covariance, cov)
