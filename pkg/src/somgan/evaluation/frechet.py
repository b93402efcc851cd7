"""Frechet distance between Gaussian fits of feature ensembles.

d^2 = |mu_a - mu_b|^2 + tr(C_a + C_b - 2 (C_a C_b)^{1/2})

The cross trace is computed through symmetric eigendecompositions:
tr((C_a C_b)^{1/2}) = tr((S C_a S)^{1/2}) with S = C_b^{1/2}, so only
symmetric PSD matrices are ever factorized.  Eigenvalues slightly below
zero (roundoff) are clipped; beyond the tolerance it is an error.

Feature extraction is pluggable; the default "pixel16" extractor
average-pools a 2-D slice to 16x16 and flattens (256 features).  It is a
deterministic desk-scale stand-in for a learned embedder, so absolute
distances are comparable only between ensembles processed with the same
extractor.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError, ParameterError

# eigenvalues of the PSD product matrix may round below zero by this much
# (relative to the largest eigenvalue) before we call it a failure
NEG_EIG_TOL = 1e-8

AXIS_NAMES = {"sagittal": 0, "coronal": 1, "axial": 2}


@dataclass
class GaussianStats:
    mean: np.ndarray
    cov: np.ndarray

    @property
    def dim(self):
        return self.mean.size


def fit_gaussian_stats(features, ridge_scale: float = 0.0) -> GaussianStats:
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ParameterError(f"features must be a (n>=2, dim) matrix, got shape {x.shape}")
    mean = x.mean(axis=0)
    cov = np.atleast_2d(np.cov(x, rowvar=False))
    cov = (cov + cov.T) / 2.0
    if ridge_scale > 0:
        cov[np.diag_indices_from(cov)] += ridge_scale * np.trace(cov) / cov.shape[0]
    return GaussianStats(mean=mean, cov=cov)


def _sqrt_psd(c: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(c)
    scale = max(1.0, float(np.abs(vals).max()))
    if vals.min() < -NEG_EIG_TOL * scale:
        raise NumericalError(
            f"matrix square root failed: eigenvalue {vals.min():.3e} below tolerance")
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    if a.dim != b.dim:
        raise ParameterError(f"feature dims differ: {a.dim} vs {b.dim}")
    s = _sqrt_psd(b.cov)
    m = s @ a.cov @ s
    m = (m + m.T) / 2.0
    vals = np.linalg.eigvalsh(m)
    scale = max(1.0, float(np.abs(vals).max()))
    if vals.min() < -NEG_EIG_TOL * scale:
        raise NumericalError(
            f"matrix square root failed: eigenvalue {vals.min():.3e} below tolerance")
    cross = np.sqrt(np.clip(vals, 0.0, None)).sum()
    d2 = float(((a.mean - b.mean) ** 2).sum() + np.trace(a.cov) + np.trace(b.cov) - 2.0 * cross)
    return d2


class FeatureExtractor:
    """Named deterministic map from a 2-D slice to a fixed-length vector."""

    def __init__(self, name: str, pool_to: int):
        self.name = name
        self.pool_to = int(pool_to)
        self.dim = self.pool_to**2

    def __call__(self, slice2d: np.ndarray) -> np.ndarray:
        return self.batch(np.asarray(slice2d)[None])[0]

    def batch(self, slices: np.ndarray) -> np.ndarray:
        x = np.asarray(slices, dtype=float)
        if x.ndim != 3:
            raise ParameterError(f"expected a (n, h, w) slice stack, got shape {x.shape}")
        n, h, w = x.shape
        p = self.pool_to
        if h % p or w % p:
            raise ParameterError(f"slice shape {(h, w)} is not divisible by {p}")
        pooled = x.reshape(n, p, h // p, p, w // p).mean(axis=(2, 4))
        return pooled.reshape(n, self.dim)


EXTRACTORS = {
    "pixel16": FeatureExtractor("pixel16", 16),
    "pixel8": FeatureExtractor("pixel8", 8),
}


def get_extractor(name: str) -> FeatureExtractor:
    try:
        return EXTRACTORS[name]
    except KeyError:
        raise ParameterError(
            f"unknown feature extractor {name!r}; available: {sorted(EXTRACTORS)}") from None


def ensemble_slices(ens: np.ndarray, axis) -> np.ndarray:
    """All 2-D slices of a field stack along a named or numeric axis.

    2-D ensembles are already stacks of slices; the axis argument is ignored.
    Axis names follow the field index convention (sagittal, coronal, axial) =
    (axis 0, axis 1, axis 2).
    """
    ens = np.asarray(ens)
    if ens.ndim == 3:
        return ens
    if ens.ndim != 4:
        raise ParameterError(f"expected a stack of 2-d or 3-d fields, got shape {ens.shape}")
    ax = AXIS_NAMES.get(axis, axis)
    if ax not in (0, 1, 2):
        raise ParameterError(f"unknown slice axis {axis!r}")
    return np.moveaxis(ens, 1 + ax, 1).reshape(-1, *np.delete(ens.shape[1:], ax))


def ensemble_stats(ens: np.ndarray, axis, extractor: FeatureExtractor) -> GaussianStats:
    feats = extractor.batch(ensemble_slices(ens, axis))
    ridge = 0.0
    if feats.shape[0] < extractor.dim + 1:
        warnings.warn(
            f"{feats.shape[0]} slices for {extractor.dim} features: covariance is "
            "rank-deficient, adding a relative ridge", stacklevel=2)
        ridge = 1e-6
    return fit_gaussian_stats(feats, ridge_scale=ridge)


def slice_fid(ens_a, ens_b, axis=None, extractor: FeatureExtractor | str = "pixel16") -> float:
    """Frechet distance between feature Gaussians of per-slice ensembles."""
    if isinstance(extractor, str):
        extractor = get_extractor(extractor)
    return frechet_distance(ensemble_stats(ens_a, axis, extractor),
                            ensemble_stats(ens_b, axis, extractor))
