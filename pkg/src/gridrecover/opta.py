"""Information-theoretic floor on recovery NMSE.

The source rate needed for distortion D (reverse water-filling over the
covariance eigenvalues) is matched against the capacity of the noisy
observation channel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RATE_RTOL = 1e-10


@dataclass(frozen=True)
class RateDistortionPoint:
    theta: float
    rate: float  # nats per source symbol
    distortion: float  # per-entry MSE


def _eigs(eigenvalues) -> np.ndarray:
    lam = np.asarray(eigenvalues, dtype=float).reshape(-1)
    if lam.size == 0:
        raise ValueError("need at least one eigenvalue")
    # eigvalsh can return tiny negatives for PSD input
    scale = max(float(np.max(np.abs(lam))), 1.0)
    if np.any(lam < -1e-10 * scale):
        raise ValueError("eigenvalues must be non-negative")
    return np.clip(lam, 0.0, None)


def _rate(lam: np.ndarray, theta: float) -> float:
    pos = lam[lam > theta]
    return float(np.sum(0.5 * np.log(pos / theta))) / lam.size


def _distortion(lam: np.ndarray, theta: float) -> float:
    return float(np.sum(np.minimum(theta, lam))) / lam.size


def rd_point(eigenvalues, theta: float) -> RateDistortionPoint:
    """Rate and distortion at water level ``theta``."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    lam = _eigs(eigenvalues)
    return RateDistortionPoint(float(theta), _rate(lam, theta), _distortion(lam, theta))


def _water_level(lam: np.ndarray, target_rate: float) -> float:
    pos = np.sort(lam[lam > 0])
    n = lam.size
    # below the smallest positive eigenvalue every component is coded: closed form
    if target_rate >= _rate(lam, pos[0]):
        return math.exp((np.sum(np.log(pos)) - 2.0 * n * target_rate) / pos.size)
    lo, hi = math.log(pos[0]), math.log(pos[-1])
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if _rate(lam, math.exp(mid)) > target_rate:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(mid)):
            break
    return math.exp(0.5 * (lo + hi))


def distortion_at_rate(eigenvalues, target_rate: float) -> float:
    """Minimum per-entry MSE of the Gaussian source at ``target_rate`` nats per symbol."""
    if not target_rate >= 0:
        raise ValueError("target_rate must be >= 0")
    lam = _eigs(eigenvalues)
    if not np.any(lam > 0):
        return 0.0
    if target_rate == 0:
        return float(np.mean(lam))
    return _distortion(lam, _water_level(lam, target_rate))


def capacity_rate(n_observed: int, n_rows: int, n_cols: int, snr: float, log_base: str = "e") -> float:
    """Observation-channel budget per source symbol.

    ``log_base="e"`` (nats) matches the rate-distortion side; ``"10"`` reproduces
    a base-10 capacity for comparison studies.
    """
    if log_base == "e":
        log = math.log1p(snr)
    elif log_base == "10":
        log = math.log10(1.0 + snr)
    else:
        raise ValueError(f"unknown log base {log_base!r}")
    return n_observed / (2.0 * n_rows * n_cols) * log


def opta_nmse(
    sigma_cov,
    n_observed: int,
    n_rows: int,
    n_cols: int,
    snr_db: float,
    ground_truth_energy: float,
    log_base: str = "e",
) -> float:
    """NMSE floor for ``n_observed`` noisy entries of an ``n_rows x n_cols`` matrix."""
    if not ground_truth_energy > 0:
        raise ValueError("ground_truth_energy must be positive")
    if n_observed < 0 or n_observed > n_rows * n_cols:
        raise ValueError("n_observed out of range")
    lam = np.linalg.eigvalsh(np.asarray(sigma_cov, dtype=float))
    snr = 10.0 ** (snr_db / 10.0)
    budget = capacity_rate(n_observed, n_rows, n_cols, snr, log_base)
    d = distortion_at_rate(lam, budget)
    return d * n_rows * n_cols / ground_truth_energy


def write_bound_csv(path, curve) -> None:
    """``curve`` is an iterable of ``(gamma, opta_nmse)`` pairs."""
    with open(path, "w") as fh:
        fh.write("gamma,opta_nmse\n")
        for g, b in curve:
            fh.write(f"{float(g)!r},{float(b)!r}\n")
