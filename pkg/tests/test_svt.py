import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gridrecover import svt
from gridrecover.acquisition import NoisyObservations, acquire
from gridrecover.sampling import ObservationMask, uniform_mask
from gridrecover.svt import SvtConfig, soft_threshold, svt_recover

small = arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
               elements=st.floats(-10, 10, allow_nan=False))


def _low_rank(rng, n, l, r):
    return rng.standard_normal((n, r)) @ rng.standard_normal((r, l))


def test_tau_zero_is_identity(rng):
    y = rng.standard_normal((7, 5))
    np.testing.assert_allclose(soft_threshold(y, 0.0), y, atol=1e-12)


def test_diagonal_example():
    out = soft_threshold(np.diag([3.0, 1.0]), 2.0)
    np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-14)


def test_large_tau_gives_zero(rng):
    y = rng.standard_normal((6, 4))
    smax = np.linalg.norm(y, 2)
    assert np.array_equal(soft_threshold(y, smax), np.zeros_like(y))
    assert np.array_equal(soft_threshold(y, 10 * smax), np.zeros_like(y))


def test_negative_tau_rejected():
    with pytest.raises(ValueError):
        soft_threshold(np.eye(2), -1.0)


def test_non_finite_input_rejected():
    with pytest.raises(np.linalg.LinAlgError):
        soft_threshold(np.array([[np.nan, 0.0], [0.0, 1.0]]), 0.1)


@settings(max_examples=60, deadline=None)
@given(small, small, st.floats(0, 5))
def test_non_expansive(a, b, tau):
    if a.shape != b.shape:
        b = np.resize(b, a.shape)
    lhs = np.linalg.norm(soft_threshold(a, tau) - soft_threshold(b, tau))
    assert lhs <= np.linalg.norm(a - b) * (1 + 1e-9) + 1e-9


@settings(max_examples=40, deadline=None)
@given(small, st.floats(0, 5), st.integers(0, 2**31))
def test_orthogonal_invariance(y, tau, seed):
    rng = np.random.default_rng(seed)
    q1 = np.linalg.qr(rng.standard_normal((y.shape[0],) * 2))[0]
    q2 = np.linalg.qr(rng.standard_normal((y.shape[1],) * 2))[0]
    lhs = soft_threshold(q1 @ y @ q2.T, tau)
    rhs = q1 @ soft_threshold(y, tau) @ q2.T
    np.testing.assert_allclose(lhs, rhs, atol=1e-8 * max(1.0, np.abs(y).max()))


@settings(max_examples=40, deadline=None)
@given(small, st.floats(0, 5), st.floats(0, 5))
def test_nuclear_norm_non_increasing_in_tau(y, t1, t2):
    lo, hi = sorted((t1, t2))
    n_lo = np.linalg.norm(soft_threshold(y, lo), "nuc")
    n_hi = np.linalg.norm(soft_threshold(y, hi), "nuc")
    assert n_hi <= n_lo + 1e-9 * max(1.0, n_lo)


@settings(max_examples=40, deadline=None)
@given(small, st.floats(0, 5))
def test_singular_values_shift_by_tau(y, tau):
    s = np.linalg.svd(y, compute_uv=False)
    out = np.linalg.svd(soft_threshold(y, tau), compute_uv=False)
    np.testing.assert_allclose(out, np.maximum(s - tau, 0), atol=1e-9 * max(1.0, s.max(initial=0)))


def test_default_threshold():
    assert SvtConfig().threshold(200) == 1000.0
    assert SvtConfig(tau=3.0).threshold(200) == 3.0


@pytest.mark.parametrize("kw", [dict(tau=-1), dict(step_size=0), dict(step_size=2), dict(tolerance=0), dict(max_iterations=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SvtConfig(**kw)


def test_empty_observations_rejected():
    obs = NoisyObservations(ObservationMask(np.zeros((3, 3), bool)), [], 0.1)
    with pytest.raises(ValueError):
        svt_recover(obs)


def test_iterate_stays_on_observed_support(rng, monkeypatch):
    m = _low_rank(rng, 20, 15, 2)
    mask = uniform_mask(20, 15, 0.5, rng)
    obs = acquire(m, mask, 0.0, rng)
    seen = []
    real = svt.soft_threshold

    def spy(y, tau):
        seen.append(y.copy())
        return real(y, tau)

    monkeypatch.setattr(svt, "soft_threshold", spy)
    svt_recover(obs, SvtConfig(tau=5.0, max_iterations=30))
    assert len(seen) == 29
    for y in seen:
        assert np.all(y[mask.missing] == 0)


def test_full_mask_noiseless_converges(rng):
    m = _low_rank(rng, 30, 30, 3)
    obs = acquire(m, ObservationMask(np.ones(m.shape, bool)), 0.0, rng)
    res = svt_recover(obs, SvtConfig(tau=50.0, max_iterations=2000))
    assert res.converged
    assert res.residual <= 1e-4
    assert np.linalg.norm(res.estimate - m) / np.linalg.norm(m) < 1e-3


def test_rank2_completion():
    rng = np.random.default_rng(7)
    m = _low_rank(rng, 100, 100, 2)
    mask = uniform_mask(100, 100, 0.6, rng)
    obs = acquire(m, mask, 0.0, rng)
    res = svt_recover(obs, SvtConfig(tau=500.0, step_size=1.9, tolerance=1e-7, max_iterations=3000))
    err = np.sum((res.estimate - m) ** 2) / np.sum(m**2)
    assert res.converged
    assert err <= 1e-6


def test_non_convergence_flagged(rng):
    m = _low_rank(rng, 20, 20, 2)
    obs = acquire(m, uniform_mask(20, 20, 0.5, rng), 0.0, rng)
    res = svt_recover(obs, SvtConfig(tau=100.0, max_iterations=3))
    assert not res.converged
    assert res.iterations == 3
    assert np.isfinite(res.residual)


def test_first_iterate_is_zero(rng):
    m = _low_rank(rng, 10, 10, 1)
    obs = acquire(m, uniform_mask(10, 10, 0.3, rng), 0.0, rng)
    res = svt_recover(obs, SvtConfig(max_iterations=1))
    assert np.array_equal(res.estimate, np.zeros((10, 10)))
    assert res.residual == pytest.approx(1.0)


def test_svd_falls_back_when_gesdd_fails(rng, monkeypatch):
    import scipy.linalg as sla

    real = sla.svd
    drivers = []

    def flaky(a, *args, lapack_driver="gesdd", **kw):
        drivers.append(lapack_driver)
        if lapack_driver == "gesdd":
            raise np.linalg.LinAlgError("SVD did not converge")
        return real(a, *args, lapack_driver=lapack_driver, **kw)

    monkeypatch.setattr(svt.sla, "svd", flaky)
    y = rng.standard_normal((6, 4))
    u, s, vt = svt.svd(y)
    assert drivers == ["gesdd", "gesvd"]
    np.testing.assert_allclose((u * s) @ vt, y, atol=1e-12)
