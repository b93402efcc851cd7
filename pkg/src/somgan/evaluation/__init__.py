"""Task-based and distributional evaluation of learned object models."""
from .frechet import (
    EXTRACTORS,
    FeatureExtractor,
    GaussianStats,
    ensemble_slices,
    ensemble_stats,
    fit_gaussian_stats,
    frechet_distance,
    get_extractor,
    slice_fid,
)
from .hotelling import CovarianceEstimate, SnrStudy, estimate_covariance, hotelling_snr, snr_study
from .roi import ROISpec, extract_roi, extract_roi_batch, signal_roi_vector
from .spectra import band_mean_power, highband_power, mean_power_spectrum, radial_frequencies

__all__ = [
    "EXTRACTORS",
    "CovarianceEstimate",
    "FeatureExtractor",
    "GaussianStats",
    "ROISpec",
    "SnrStudy",
    "band_mean_power",
    "ensemble_slices",
    "ensemble_stats",
    "estimate_covariance",
    "extract_roi",
    "extract_roi_batch",
    "fit_gaussian_stats",
    "frechet_distance",
    "get_extractor",
    "highband_power",
    "hotelling_snr",
    "mean_power_spectrum",
    "radial_frequencies",
    "signal_roi_vector",
    "slice_fid",
    "snr_study",
]
