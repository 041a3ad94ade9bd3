import numpy as np
import pytest

from gridrecover.acquisition import (
    NoisyObservations,
    acquire,
    read_observations_csv,
    sigma_from_snr,
    write_observations_csv,
)
from gridrecover.sampling import ObservationMask, uniform_mask


@pytest.mark.parametrize(
    "cov,snr_db,expected",
    [(np.eye(5), 0.0, 1.0), (np.eye(3), 20.0, 0.01), (4.0 * np.eye(2), 10.0, 0.4)],
)
def test_sigma_from_snr(cov, snr_db, expected):
    assert sigma_from_snr(cov, snr_db) == pytest.approx(expected, rel=1e-14)


def test_noiseless_full_mask_is_identity(rng):
    m = rng.standard_normal((6, 4))
    obs = acquire(m, ObservationMask(np.ones((6, 4), bool)), 0.0, rng)
    assert np.array_equal(obs.to_dense(), m)


def test_noise_variance(rng):
    obs = acquire(np.zeros((500, 500)), ObservationMask(np.ones((500, 500), bool)), 0.01, rng)
    assert np.mean(obs.values**2) == pytest.approx(0.01, rel=0.05)


def test_empty_mask(rng):
    obs = acquire(np.ones((3, 3)), ObservationMask(np.zeros((3, 3), bool)), 0.5, rng)
    assert obs.values.size == 0


def test_unobserved_entries_never_leak():
    mask = uniform_mask(20, 15, 0.5, np.random.default_rng(1))
    a = np.random.default_rng(2).standard_normal((20, 15))
    b = a.copy()
    b[mask.missing] = 1e9
    oa = acquire(a, mask, 0.3, np.random.default_rng(7))
    ob = acquire(b, mask, 0.3, np.random.default_rng(7))
    assert oa.values.tobytes() == ob.values.tobytes()


def test_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        acquire(np.zeros((3, 4)), ObservationMask(np.ones((4, 3), bool)), 0.1, rng)


def test_values_must_match_mask():
    with pytest.raises(ValueError):
        NoisyObservations(ObservationMask(np.ones((2, 2), bool)), [1.0, 2.0], 0.0)


def test_csv_round_trip(tmp_path, rng):
    mask = uniform_mask(8, 6, 0.4, rng)
    obs = acquire(rng.standard_normal((8, 6)), mask, 0.02, rng)
    write_observations_csv(tmp_path / "o.csv", obs)
    back = read_observations_csv(tmp_path / "o.csv")
    assert back.mask == obs.mask
    assert np.array_equal(back.values, obs.values)
    assert back.noise_variance == obs.noise_variance
    assert back.checksum() == obs.checksum()
