"""Singular value thresholding for matrix completion."""
from __future__ import annotations

from dataclasses import dataclass

import logging

import numpy as np
import scipy.linalg as sla

from .acquisition import NoisyObservations

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SvtConfig:
    tau: float | None = None  # None -> 5 * n_rows
    step_size: float = 1.2
    tolerance: float = 1e-4
    max_iterations: int = 500

    def __post_init__(self):
        if self.tau is not None and not self.tau >= 0:
            raise ValueError("tau must be >= 0")
        if not 0.0 < self.step_size < 2.0:
            raise ValueError("step_size must lie in (0, 2)")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def threshold(self, n_rows: int) -> float:
        return 5.0 * n_rows if self.tau is None else float(self.tau)


@dataclass
class SvtResult:
    estimate: np.ndarray
    iterations: int
    converged: bool
    residual: float


def svd(y: np.ndarray):
    """Thin SVD; falls back to the slower but more robust driver on failure.

    gesdd occasionally fails to converge on finite input (LAPACK may print a
    DLASCL diagnostic when it does); gesvd handles those matrices.
    """
    if not np.all(np.isfinite(y)):
        raise np.linalg.LinAlgError("SVD of a matrix with non-finite entries")
    try:
        return sla.svd(y, full_matrices=False, check_finite=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        log.debug("gesdd did not converge on a %dx%d matrix; retrying with gesvd", *y.shape)
        return sla.svd(y, full_matrices=False, check_finite=False, lapack_driver="gesvd")


def shrink(u, s, vt, tau: float) -> np.ndarray:
    """``U diag((s - tau)_+) V^T`` from a precomputed SVD."""
    kept = s > tau
    return (u[:, kept] * (s[kept] - tau)) @ vt[kept]


def soft_threshold(y, tau: float) -> np.ndarray:
    """Proximal operator of ``tau * ||.||_*``: shrink every singular value by ``tau``."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    y = np.asarray(y, dtype=float)
    return shrink(*svd(y), tau)


def relative_residual(x_obs: np.ndarray, obs: NoisyObservations, obs_norm: float) -> float:
    err = float(np.linalg.norm(x_obs - obs.values))
    if obs_norm == 0.0:
        return 0.0 if err == 0.0 else np.inf
    return err / obs_norm


def svt_recover(obs: NoisyObservations, config: SvtConfig = SvtConfig()) -> SvtResult:
    """Two-step SVT iteration started from ``Y = 0``.

    The noisy observed values stand in for the unknown clean entries in both
    the update and the stopping rule. Running out of iterations is reported
    through ``converged=False``, not raised.
    """
    if obs.mask.n_observed == 0:
        raise ValueError("SVT needs at least one observed entry")
    n_rows, n_cols = obs.shape
    tau = config.threshold(n_rows)
    rows, cols = obs.rows, obs.cols
    obs_norm = float(np.linalg.norm(obs.values))
    y = np.zeros((n_rows, n_cols))
    x = y
    residual = np.inf
    for k in range(1, config.max_iterations + 1):
        x = soft_threshold(y, tau) if k > 1 else np.zeros_like(y)
        x_obs = x[rows, cols]
        residual = relative_residual(x_obs, obs, obs_norm)
        if residual <= config.tolerance:
            return SvtResult(x, k, True, residual)
        y[rows, cols] += config.step_size * (obs.values - x_obs)
    return SvtResult(x, config.max_iterations, False, residual)
