"""Column-wise linear MMSE recovery under a (possibly mismatched) Gaussian model."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .acquisition import NoisyObservations
from .sampling import ObservationMask
from .source import check_covariance

JITTER_RTOL = 1e-10


@dataclass(frozen=True)
class LmmseModel:
    """Postulated second-order statistics handed to an estimator."""

    mean: np.ndarray
    covariance: np.ndarray
    noise_variance: float

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (mean.shape[0], mean.shape[0]):
            raise ValueError(f"covariance shape {cov.shape} does not match mean length {mean.shape[0]}")
        if not self.noise_variance >= 0:
            raise ValueError("noise_variance must be >= 0")
        check_covariance(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @property
    def n(self) -> int:
        return self.mean.shape[0]

    @property
    def jitter(self) -> float:
        return JITTER_RTOL * float(np.trace(self.covariance)) / self.n


def _cho_factor(a: np.ndarray, jitter: float):
    """Cholesky of an SPD block; one jittered retry for semidefinite input."""
    try:
        return sla.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        if jitter <= 0:
            raise
    return sla.cho_factor(a + jitter * np.eye(a.shape[0]), lower=True, check_finite=False)


def _observed_block(model: LmmseModel, obs_rows: np.ndarray, regularize: float) -> np.ndarray:
    block = model.covariance[np.ix_(obs_rows, obs_rows)]
    if regularize:
        block = block + regularize * np.eye(obs_rows.shape[0])
    return block


def lmmse_column(observed_rows, observed_values, model: LmmseModel) -> np.ndarray:
    """LMMSE estimate of one full column from its noisy observed entries."""
    rows = np.asarray(observed_rows, dtype=np.int64).reshape(-1)
    values = np.asarray(observed_values, dtype=float).reshape(-1)
    if rows.shape != values.shape:
        raise ValueError("observed_rows and observed_values differ in length")
    if rows.size == 0:
        return model.mean.copy()
    if rows.min() < 0 or rows.max() >= model.n or np.unique(rows).size != rows.size:
        raise ValueError("observed_rows must be distinct indices in [0, N)")
    factor = _cho_factor(_observed_block(model, rows, model.noise_variance), model.jitter)
    weights = sla.cho_solve(factor, values - model.mean[rows], check_finite=False)
    return model.mean + model.covariance[:, rows] @ weights


def _column_groups(observed: np.ndarray):
    """Yield ``(column_indices, observed_rows, missing_rows)`` per distinct column pattern."""
    patterns, inverse = np.unique(observed.T, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    for g, pattern in enumerate(patterns):
        cols = np.flatnonzero(inverse == g)
        yield cols, np.flatnonzero(pattern), np.flatnonzero(~pattern)


def lmmse_recover(obs: NoisyObservations, model: LmmseModel) -> np.ndarray:
    """Apply :func:`lmmse_column` to every column.

    Columns sharing a mask pattern share one factorization.
    """
    n_rows, n_cols = obs.shape
    if model.n != n_rows:
        raise ValueError(f"model dimension {model.n} does not match {n_rows} rows")
    data = obs.to_dense()
    out = np.empty((n_rows, n_cols))
    for cols, o, _ in _column_groups(obs.mask.observed):
        if o.size == 0:
            out[:, cols] = model.mean[:, None]
            continue
        factor = _cho_factor(_observed_block(model, o, model.noise_variance), model.jitter)
        centered = data[np.ix_(o, cols)] - model.mean[o, None]
        weights = sla.cho_solve(factor, centered, check_finite=False)
        out[:, cols] = model.mean[:, None] + model.covariance[:, o] @ weights
    return out


def lmmse_posterior_distortion(mask: ObservationMask, model: LmmseModel) -> float:
    """Average posterior variance over the missing entries (0 if none are missing)."""
    if model.n != mask.n_rows:
        raise ValueError(f"model dimension {model.n} does not match {mask.n_rows} rows")
    total = 0.0
    for cols, o, m in _column_groups(mask.observed):
        if m.size == 0:
            continue
        prior = float(np.trace(model.covariance[np.ix_(m, m)]))
        if o.size:
            factor = _cho_factor(_observed_block(model, o, model.noise_variance), model.jitter)
            cross = model.covariance[np.ix_(o, m)]
            solved = sla.cho_solve(factor, cross, check_finite=False)
            prior -= float(np.sum(cross * solved))
        total += prior * cols.size
    n_missing = mask.n_missing
    return max(total / n_missing, 0.0) if n_missing else 0.0


class ConditionalFill:
    """Affine map filling the missing entries from values on the observed ones.

    ``fill(v)`` returns ``mean[miss] + Sigma_{miss,obs} (Sigma_{obs,obs} + r I)^-1 (v - mean[obs])``
    for every column at once, where ``v`` holds values on the observed entries in
    the mask's column-major order. ``r`` is ``model.jitter`` (noiseless
    conditioning) or the model's noise variance when ``regularized``.
    Output entries follow the column-major order of the missing set.
    """

    def __init__(self, mask: ObservationMask, model: LmmseModel, regularized: bool = False):
        if model.n != mask.n_rows:
            raise ValueError(f"model dimension {model.n} does not match {mask.n_rows} rows")
        n_rows, n_cols = mask.shape
        ridge = model.noise_variance if regularized else model.jitter
        obs_pos = np.full(mask.shape, -1, dtype=np.int64)
        r, c = mask.indices()
        obs_pos[r, c] = np.arange(r.size)
        mis_pos = np.full(mask.shape, -1, dtype=np.int64)
        mr, mc = mask.complement().indices()
        mis_pos[mr, mc] = np.arange(mr.size)

        offset = np.empty(mr.size)
        rows_idx, cols_idx, vals = [], [], []
        for cols, o, m in _column_groups(mask.observed):
            if m.size == 0:
                continue
            if o.size == 0:
                for j in cols:
                    offset[mis_pos[m, j]] = model.mean[m]
                continue
            block = model.covariance[np.ix_(o, o)] + ridge * np.eye(o.size)
            factor = _cho_factor(block, model.jitter)
            gain = sla.cho_solve(factor, model.covariance[np.ix_(o, m)], check_finite=False).T
            shift = model.mean[m] - gain @ model.mean[o]
            for j in cols:
                out_idx = mis_pos[m, j]
                in_idx = obs_pos[o, j]
                offset[out_idx] = shift
                rows_idx.append(np.repeat(out_idx, o.size))
                cols_idx.append(np.tile(in_idx, m.size))
                vals.append(gain.ravel())
        if vals:
            self.operator = sp.csr_matrix(
                (np.concatenate(vals), (np.concatenate(rows_idx), np.concatenate(cols_idx))),
                shape=(mr.size, r.size),
            )
        else:
            self.operator = sp.csr_matrix((mr.size, r.size))
        self.offset = offset
        self.missing_rows = mr
        self.missing_cols = mc

    def __call__(self, observed_values: np.ndarray) -> np.ndarray:
        return self.offset + self.operator @ observed_values
