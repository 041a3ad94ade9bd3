"""Recovery of missing entries in low-rank, Gaussian-correlated state matrices."""
from ._kernels import BACKEND
from .acquisition import NoisyObservations, acquire, sigma_from_snr
from .bsvt import BsvtConfig, BsvtResult, bsvt_recover, noise_level, optimal_threshold, sure_risk
from .harness import ExperimentConfig, RunResult, emit_plot_data, nmse, run_sweep
from .lmmse import LmmseModel, lmmse_column, lmmse_posterior_distortion, lmmse_recover
from .opta import RateDistortionPoint, distortion_at_rate, opta_nmse, rd_point
from .sampling import (
    MarkovSamplerParams,
    ObservationMask,
    markov_mask,
    markov_params_from_targets,
    mask_stats,
    uniform_mask,
)
from .source import GaussianSourceSpec, mismatch_covariance, sample_source, synthetic_covariance
from .svt import SvtConfig, SvtResult, soft_threshold, svt_recover

__all__ = [
    "BACKEND",
    "BsvtConfig",
    "BsvtResult",
    "ExperimentConfig",
    "GaussianSourceSpec",
    "LmmseModel",
    "MarkovSamplerParams",
    "NoisyObservations",
    "ObservationMask",
    "RateDistortionPoint",
    "RunResult",
    "SvtConfig",
    "SvtResult",
    "acquire",
    "bsvt_recover",
    "distortion_at_rate",
    "emit_plot_data",
    "lmmse_column",
    "lmmse_posterior_distortion",
    "lmmse_recover",
    "markov_mask",
    "markov_params_from_targets",
    "mask_stats",
    "mismatch_covariance",
    "nmse",
    "noise_level",
    "opta_nmse",
    "optimal_threshold",
    "rd_point",
    "run_sweep",
    "sample_source",
    "sigma_from_snr",
    "soft_threshold",
    "sure_risk",
    "svt_recover",
    "synthetic_covariance",
    "uniform_mask",
]
