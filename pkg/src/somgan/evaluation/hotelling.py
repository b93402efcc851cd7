"""Hotelling-observer SNR for signal-known-exactly detection tasks.

SNR_HO = sqrt(s^T K^-1 s), where K is the covariance of the measured data
in the ROI.  Under the additive signal-known-exactly model the covariance is
the same under both hypotheses, so K is estimated from signal-absent samples
only.  The solve goes through a Cholesky factorization, never an explicit
inverse, and K carries a relative ridge eps = ridge_scale * trace(K)/dim.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..errors import NumericalError, ParameterError
from ..objects.signals import SignalSpec
from .roi import ROISpec, extract_roi_batch, signal_roi_vector


@dataclass
class CovarianceEstimate:
    matrix: np.ndarray
    n_samples: int
    ridge_eps: float

    @property
    def dim(self):
        return self.matrix.shape[0]


def estimate_covariance(samples, ridge_scale: float = 1e-6) -> CovarianceEstimate:
    """Unbiased sample covariance plus eps*I, eps = ridge_scale*trace/dim.

    Exactly symmetric by construction.  With identical samples the sample
    covariance (and hence eps) is zero.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2:
        raise ParameterError(f"samples must be a (n, dim) matrix, got shape {x.shape}")
    n, d = x.shape
    if n < 2:
        raise ParameterError(f"need at least 2 samples to estimate a covariance, got {n}")
    k = np.atleast_2d(np.cov(x, rowvar=False))
    k = (k + k.T) / 2.0
    eps = ridge_scale * np.trace(k) / d
    k[np.diag_indices(d)] += eps
    return CovarianceEstimate(matrix=k, n_samples=n, ridge_eps=float(eps))


def hotelling_snr(s, cov) -> float:
    """sqrt(s^T K^-1 s) via a Cholesky solve."""
    s = np.asarray(s, dtype=float).reshape(-1)
    k = cov.matrix if isinstance(cov, CovarianceEstimate) else np.asarray(cov, dtype=float)
    if k.shape != (s.size, s.size):
        raise ParameterError(f"signal dim {s.size} does not match covariance shape {k.shape}")
    try:
        factor = linalg.cho_factor(k, lower=True)
    except linalg.LinAlgError as exc:
        diag = k[np.diag_indices_from(k)]
        raise NumericalError(
            "covariance is not positive definite "
            f"(dim={k.shape[0]}, trace={np.trace(k):.3e}, min diag={diag.min():.3e}); "
            "increase the ridge or the sample count") from exc
    quad = float(s @ linalg.cho_solve(factor, s))
    return float(np.sqrt(max(quad, 0.0)))


@dataclass
class SnrStudy:
    snr: float
    covariance: CovarianceEstimate
    signal_roi: np.ndarray
    snr_decomposed: float | None = None


def snr_study(objects, sig: SignalSpec, noise_std: float, roi: ROISpec,
              rng: np.random.Generator, draws_per_object: int = 1,
              ridge_scale: float = 1e-6, decompose: bool = False) -> SnrStudy:
    """Hotelling SNR of g = f + n over an object ensemble.

    The imaging operator of the detection task is the identity; n is i.i.d.
    Gaussian with std noise_std.  Because the noise is white, adding it only
    on the ROI voxels is distributionally identical to adding it to the full
    field and then extracting the ROI.

    With decompose=True also reports the SNR from the diagnostic covariance
    K_f + noise_std**2 * I, with K_f estimated from the noiseless objects.
    """
    objects = np.asarray(objects)
    if objects.ndim not in (3, 4) or objects.shape[0] == 0:
        raise ParameterError("objects must be a nonempty stack of 2-d or 3-d fields")
    if tuple(roi.center) != tuple(sig.center):
        raise ParameterError(f"ROI center {roi.center} must equal signal center {sig.center}")
    if noise_std < 0:
        raise ParameterError(f"noise_std must be >= 0, got {noise_std}")
    if draws_per_object < 1:
        raise ParameterError("draws_per_object must be >= 1")

    roi_f = extract_roi_batch(objects, roi)
    if draws_per_object > 1:
        roi_f = np.repeat(roi_f, draws_per_object, axis=0)
    roi_g = roi_f + rng.normal(0.0, noise_std, roi_f.shape) if noise_std > 0 else roi_f

    s_roi = signal_roi_vector(sig, roi, objects.shape[1:])
    cov = estimate_covariance(roi_g, ridge_scale=ridge_scale)
    result = SnrStudy(snr=hotelling_snr(s_roi, cov), covariance=cov, signal_roi=s_roi)

    if decompose:
        cov_f = estimate_covariance(extract_roi_batch(objects, roi), ridge_scale=ridge_scale)
        k = cov_f.matrix.copy()
        k[np.diag_indices_from(k)] += noise_std**2
        result.snr_decomposed = hotelling_snr(s_roi, k)
    return result
