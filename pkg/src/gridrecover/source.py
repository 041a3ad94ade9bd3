"""Gaussian source for state-variable matrices.

Columns of the N x L state matrix are i.i.d. draws from N(mean, covariance);
rows are time instants, columns are feeders.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

PSD_RTOL = 1e-10


@dataclass(frozen=True)
class GaussianSourceSpec:
    """Per-column law of the state matrix."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.covariance, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValueError(f"covariance must be square, got shape {cov.shape}")
        if mean.shape[0] != cov.shape[0]:
            raise ValueError(
                f"mean has length {mean.shape[0]} but covariance is {cov.shape[0]}x{cov.shape[0]}"
            )
        check_covariance(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def n(self) -> int:
        return self.mean.shape[0]

    @property
    def signal_power(self) -> float:
        return float(np.trace(self.covariance)) / self.n


def check_covariance(cov: np.ndarray) -> None:
    """Raise ``ValueError`` unless ``cov`` is exactly symmetric and PSD within tolerance."""
    if not np.all(np.isfinite(cov)):
        raise ValueError("covariance has non-finite entries")
    if np.max(np.abs(cov - cov.T), initial=0.0) != 0.0:
        raise ValueError("covariance is not symmetric")
    if cov.size == 0:
        raise ValueError("covariance is empty")
    eig = np.linalg.eigvalsh(cov)
    if eig[0] < -PSD_RTOL * max(eig[-1], 0.0):
        raise ValueError(f"covariance is not positive semidefinite (min eigenvalue {eig[0]:.3e})")


def synthetic_covariance(n: int, variance: float, rho: float) -> np.ndarray:
    """Exponentially decaying correlation, ``variance * rho**|i-j|``.

    Parameters
    ----------
    n : int
        Number of time instants.
    variance : float
        Per-entry variance; equals ``Tr(cov) / n``.
    rho : float
        Lag-one correlation, ``0 <= rho < 1``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not variance > 0:
        raise ValueError("variance must be positive")
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    lag = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return variance * np.power(float(rho), lag)


def _symmetric_factor(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    n = cov.shape[0]
    jitter = 1e-12 * np.trace(cov) / n
    # zero covariance: degenerate but valid
    if jitter == 0.0:
        return np.zeros_like(cov)
    return np.linalg.cholesky(cov + jitter * np.eye(n))


def sample_source(spec: GaussianSourceSpec, l: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an ``n x l`` state matrix with independent N(mean, cov) columns."""
    if l < 1:
        raise ValueError("l must be >= 1")
    factor = _symmetric_factor(spec.covariance)
    white = rng.standard_normal((spec.n, l))
    return spec.mean[:, None] + factor @ white


def mismatch_covariance(
    sigma: np.ndarray,
    smr: float,
    rng: np.random.Generator,
    mode: str = "normalized",
) -> np.ndarray:
    """Postulated covariance ``sigma + alpha * H H^T`` with H i.i.d. standard normal.

    In ``normalized`` mode ``alpha`` makes ``||out - sigma||_F / ||sigma||_F``
    equal ``1 / smr``. ``squared`` uses ``||sigma||_F^2 / ||Delta||_F^2``
    instead of the ratio of norms, which is not scale invariant.
    """
    if not smr > 0:
        raise ValueError("smr must be positive")
    if mode not in ("normalized", "squared"):
        raise ValueError(f"unknown mismatch mode {mode!r}")
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0]
    for _ in range(2):
        h = rng.standard_normal((n, n))
        delta = h @ h.T
        delta = 0.5 * (delta + delta.T)
        dnorm = np.linalg.norm(delta)
        if dnorm > 0:
            break
    else:
        raise ArithmeticError("mismatch direction has zero norm after a re-draw")
    snorm = np.linalg.norm(sigma)
    if mode == "normalized":
        alpha = (snorm / dnorm) / smr
    else:
        alpha = (snorm**2 / dnorm**2) / smr
    return sigma + alpha * delta


def read_matrix_csv(path) -> np.ndarray:
    """Plain numeric CSV, one row per line, no header. A single line reads as a vector."""
    data = np.loadtxt(Path(path), delimiter=",", ndmin=2)
    return data


def write_matrix_csv(path, values) -> None:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    with open(path, "w") as fh:
        for row in values:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def load_source(covariance_path, mean_path=None, mean_level: float = 0.0) -> GaussianSourceSpec:
    cov = read_matrix_csv(covariance_path)
    if mean_path is None:
        mean = np.full(cov.shape[0], float(mean_level))
    else:
        mean = read_matrix_csv(mean_path).reshape(-1)
    return GaussianSourceSpec(mean, cov)
