"""Bayesian singular value thresholding.

SVT iterations in which the missing entries are filled by an LMMSE estimate
before every thresholding step, and the threshold is re-chosen at each
iteration by minimising Stein's unbiased risk estimate of the
soft-thresholding denoiser.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .acquisition import NoisyObservations
from .lmmse import ConditionalFill, LmmseModel, lmmse_posterior_distortion
from .svt import relative_residual, shrink, svd

REPEAT_RTOL = 1e-9
NOISE_FLOOR_RTOL = 1e-12


def has_repeated(s: np.ndarray) -> bool:
    """True when two sorted singular values coincide within ``REPEAT_RTOL``."""
    if s.size < 2:
        return False
    hi = np.maximum(s[:-1], s[1:])
    return bool(np.any(np.abs(s[:-1] - s[1:]) <= REPEAT_RTOL * hi))


def _check_spectrum(s) -> np.ndarray:
    s = np.asarray(s, dtype=float).reshape(-1)
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise ValueError("singular values must be finite and non-negative")
    if np.any(np.diff(s) > 0):
        raise ValueError("singular values must be sorted in descending order")
    return s


def sure_curve(s, taus, noise_variance: float, n_rows: int, n_cols: int) -> np.ndarray:
    """SURE of ``D_tau`` for every ``tau`` in ``taus`` at a fixed spectrum ``s``.

    The divergence of the soft-thresholding map is taken as zero when ``s``
    has repeated values.
    """
    if noise_variance < 0:
        raise ValueError("noise variance must be >= 0")
    s = _check_spectrum(s)
    if s.size != min(n_rows, n_cols):
        raise ValueError(f"expected {min(n_rows, n_cols)} singular values, got {s.size}")
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    return _kernels.sure_curve(s, taus, noise_variance, n_rows, n_cols, not has_repeated(s))


def sure_risk(singular_values, tau: float, noise_variance: float, n_rows: int, n_cols: int) -> float:
    """Unbiased estimate of ``E||D_tau(Z) - M||_F^2`` for ``Z = M + W``, ``W`` i.i.d. N(0, noise_variance)."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    return float(sure_curve(singular_values, [tau], noise_variance, n_rows, n_cols)[0])


def threshold_candidates(s: np.ndarray, grid_size: int) -> np.ndarray:
    top = float(s[0]) if s.size else 0.0
    return np.unique(np.concatenate([[0.0], s, np.linspace(0.0, top, grid_size)]))


def best_threshold(s, noise_variance: float, n_rows: int, n_cols: int, grid_size: int) -> float:
    """Minimiser of SURE over ``{0} U {s_i} U linspace(0, s_max, grid_size)``; ties go to the smaller tau."""
    candidates = threshold_candidates(np.asarray(s, dtype=float), grid_size)
    risk = sure_curve(s, candidates, noise_variance, n_rows, n_cols)
    return float(candidates[int(np.argmin(risk))])


def optimal_threshold(z, noise_variance: float, grid_size: int = 512) -> float:
    z = np.asarray(z, dtype=float)
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    s = svd(z)[1]
    return best_threshold(s, noise_variance, z.shape[0], z.shape[1], grid_size)


def _noise_level(y_obs: np.ndarray, obs: NoisyObservations, d_lmmse: float) -> float:
    n_rows, n_cols = obs.shape
    residual = float(np.sum((y_obs - obs.values) ** 2))
    level = (residual + obs.mask.n_missing * d_lmmse) / (n_rows * n_cols)
    floor = NOISE_FLOOR_RTOL * float(np.mean(obs.values**2)) if obs.values.size else 0.0
    return max(level, floor)


def noise_level(y_k, obs: NoisyObservations, d_lmmse: float) -> float:
    """Per-entry noise variance of ``Z^k``, weighting the observed residual and the LMMSE error.

    ``y_k`` must vanish off the observed set.
    """
    y_k = np.asarray(y_k, dtype=float)
    if y_k.shape != obs.shape:
        raise ValueError(f"y_k has shape {y_k.shape}, expected {obs.shape}")
    if np.any(y_k[obs.mask.missing] != 0):
        raise ValueError("y_k must be supported on the observed entries")
    return _noise_level(y_k[obs.rows, obs.cols], obs, d_lmmse)


@dataclass(frozen=True)
class BsvtConfig:
    """``conditioning="iterate"`` fills from the observed entries of ``Y^k``;
    ``"observations"`` fills from the noisy observations instead.
    ``regularized`` adds the noise variance to the conditioning block."""

    model: LmmseModel
    step_size: float = 1.2
    tolerance: float = 1e-4
    max_iterations: int = 500
    grid_size: int = 512
    conditioning: str = "iterate"
    regularized: bool = False

    def __post_init__(self):
        if not 0.0 < self.step_size < 2.0:
            raise ValueError("step_size must lie in (0, 2)")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.grid_size < 2:
            raise ValueError("grid_size must be >= 2")
        if self.conditioning not in ("iterate", "observations"):
            raise ValueError(f"unknown conditioning {self.conditioning!r}")


@dataclass
class BsvtResult:
    estimate: np.ndarray
    iterations: int
    converged: bool
    thresholds: list = field(default_factory=list)
    # (k, tau, sigma2_z, residual); tau/sigma2_z are nan on the stopping iteration
    history: list = field(default_factory=list)


def bsvt_recover(obs: NoisyObservations, config: BsvtConfig) -> BsvtResult:
    if obs.mask.n_observed == 0:
        raise ValueError("BSVT needs at least one observed entry")
    n_rows, n_cols = obs.shape
    model = config.model
    fill = ConditionalFill(obs.mask, model, regularized=config.regularized)
    d_lmmse = lmmse_posterior_distortion(obs.mask, model)
    rows, cols = obs.rows, obs.cols
    mrows, mcols = fill.missing_rows, fill.missing_cols
    obs_norm = float(np.linalg.norm(obs.values))
    fixed_fill = fill(obs.values) if config.conditioning == "observations" else None

    y_obs = np.zeros(rows.size)
    z = np.zeros((n_rows, n_cols))
    spectrum = None  # SVD of Z^{k-1}; Z^0 = 0
    tau = 0.0
    thresholds, history = [], []
    x = z
    for k in range(1, config.max_iterations + 1):
        x = shrink(*spectrum, tau) if spectrum is not None else np.zeros((n_rows, n_cols))
        x_obs = x[rows, cols]
        residual = relative_residual(x_obs, obs, obs_norm)
        if residual <= config.tolerance:
            history.append((k, np.nan, np.nan, residual))
            return BsvtResult(x, k, True, thresholds, history)
        y_obs = y_obs + config.step_size * (obs.values - x_obs)
        z[rows, cols] = y_obs
        z[mrows, mcols] = fixed_fill if fixed_fill is not None else fill(y_obs)
        sigma2_z = _noise_level(y_obs, obs, d_lmmse)
        spectrum = svd(z)
        tau = best_threshold(spectrum[1], sigma2_z, n_rows, n_cols, config.grid_size)
        thresholds.append(tau)
        history.append((k, tau, sigma2_z, residual))
    return BsvtResult(x, config.max_iterations, False, thresholds, history)


def write_trace_csv(path, result: BsvtResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "tau", "sigma2_z", "residual"])
        for k, tau, s2, res in result.history:
            w.writerow([k, repr(float(tau)), repr(float(s2)), repr(float(res))])
